// mrw-cli: prep, simulate, fit, ensemble and analyze subcommands.
// Exit codes: 0 success, 1 numerical non-convergence (results still written), 2 usage
// or data error.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mrw/analysis.hpp"
#include "mrw/dataprep.hpp"
#include "mrw/estimate.hpp"
#include "mrw/io.hpp"
#include "mrw/simulate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoConverge = 1;
constexpr int kExitUsage = 2;

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Resolved flags in a fixed order; they become both the header config and the
// reproducing command line.
class Recorder {
 public:
  explicit Recorder(std::string command) { header_.command = std::move(command); }

  void add(const std::string& flag, const std::string& value) {
    header_.config.emplace_back(flag, value);
    args_ << " --" << flag << ' ' << value;
  }
  void add(const std::string& flag, double v) { add(flag, mrw::format_double(v)); }
  void add(const std::string& flag, std::size_t v) { add(flag, std::to_string(v)); }
  void add(const std::string& flag, int v) { add(flag, std::to_string(v)); }
  void add_switch(const std::string& on, const std::string& off, bool value) {
    header_.config.emplace_back(on, value ? "true" : "false");
    args_ << " --" << (value ? on : off);
  }
  void seed(std::uint64_t s) {
    header_.seed = s;
    add("seed", std::to_string(s));
  }
  void note(std::string n) { header_.notes.push_back(std::move(n)); }

  mrw::RunHeader header() const {
    auto h = header_;
    h.args = h.command + args_.str();
    return h;
  }

 private:
  mrw::RunHeader header_;
  std::ostringstream args_;
};

struct OutputFlags {
  std::string out = "-";
  std::string format = "tsv";

  void attach(CLI::App* app) {
    app->add_option("--out", out, "Output file, '-' for stdout")->capture_default_str();
    app->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"tsv", "json"}))
        ->capture_default_str();
  }
  void record(Recorder& r) const { r.add("format", format); }
};

void emit(const OutputFlags& o, const mrw::RunHeader& h, const mrw::Table& t) {
  const auto fmt = o.format == "json" ? mrw::OutputFormat::json : mrw::OutputFormat::tsv;
  if (o.out == "-") {
    mrw::write_table(std::cout, fmt, h, t);
    std::cout.flush();
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw mrw::data_error("cannot write '" + o.out + "'");
  mrw::write_table(f, fmt, h, t);
}

struct ModelFlags {
  std::string model;
  std::optional<double> lambda, sigma, t_corr, nu_inv, hurst;
  double dt = 1.0;

  void attach(CLI::App* app) {
    app->add_option("--model", model, "standard, damped or fractional")
        ->required()
        ->check(CLI::IsMember({"standard", "damped", "fractional"}));
    app->add_option("--lambda", lambda, "Intermittency lambda")->required();
    app->add_option("--sigma", sigma, "Volatility scale sigma")->required();
    app->add_option("--t-corr", t_corr, "Decorrelation scale T (time units)")->required();
    app->add_option("--nu-inv", nu_inv, "Relaxation time 1/nu (damped)");
    app->add_option("--hurst", hurst, "Hurst exponent H (fractional)");
    app->add_option("--dt", dt, "Sampling step (time units)")->capture_default_str();
  }

  mrw::ModelParams params() const {
    const auto v = mrw::parse_variant(model);
    if (v == mrw::Variant::damped && !nu_inv) throw usage_error("--nu-inv is required for the damped model");
    if (v == mrw::Variant::fractional && !hurst) throw usage_error("--hurst is required for the fractional model");
    if (v != mrw::Variant::damped && nu_inv) throw usage_error("--nu-inv applies to the damped model only");
    if (v != mrw::Variant::fractional && hurst) throw usage_error("--hurst applies to the fractional model only");
    mrw::ModelParams p;
    if (v == mrw::Variant::standard) p = mrw::ModelParams::standard(*lambda, *sigma, *t_corr, dt);
    if (v == mrw::Variant::damped) {
      if (!(*nu_inv > dt)) throw mrw::domain_error("--nu-inv must exceed --dt");
      p = mrw::ModelParams::damped(*lambda, *sigma, *t_corr, *nu_inv, dt);
    }
    if (v == mrw::Variant::fractional) p = mrw::ModelParams::fractional(*lambda, *sigma, *t_corr, *hurst, dt);
    mrw::validate(p);
    return p;
  }

  void record(Recorder& r) const {
    r.add("model", model);
    r.add("lambda", *lambda);
    r.add("sigma", *sigma);
    r.add("t-corr", *t_corr);
    if (nu_inv) r.add("nu-inv", *nu_inv);
    if (hurst) r.add("hurst", *hurst);
    r.add("dt", dt);
  }
};

struct ScaleFlags {
  std::string grid = "dyadic";
  double lo = 2.0;
  double hi = 0.0;
  std::size_t count = 24;

  void attach(CLI::App* app) {
    app->add_option("--scales", grid, "Scale grid")->check(CLI::IsMember({"dyadic", "log"}))->capture_default_str();
    app->add_option("--scale-min", lo, "Smallest scale (log grid)")->capture_default_str();
    app->add_option("--scale-max", hi, "Largest scale (log grid), 0 = n/8")->capture_default_str();
    app->add_option("--scale-count", count, "Number of scales (log grid)")->capture_default_str();
  }

  std::vector<double> resolve(std::size_t n) const {
    if (grid == "dyadic") return mrw::dyadic_scales(n);
    return mrw::log_scales(lo, hi > 0.0 ? hi : static_cast<double>(n) / 8.0, count);
  }

  void record(Recorder& r) const {
    r.add("scales", grid);
    if (grid == "log") {
      r.add("scale-min", lo);
      r.add("scale-max", hi);
      r.add("scale-count", count);
    }
  }
};

// Level series from a `timestamp,value` CSV (with optional gap sidecar) or from a TSV
// table column. For tables the default column is `level`, then `value`.
mrw::SeriesFrame load_input(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw mrw::data_error("cannot open '" + path + "'");
  std::string line;
  while (std::getline(in, line)) {
    const auto s = mrw::detail::trim(line);
    if (!s.empty() && s.front() != '#') break;
  }
  if (mrw::detail::trim(line).substr(0, 10) == "timestamp,") {
    if (!column.empty() && column != "value") throw usage_error("CSV input has a single `value` column");
    return mrw::load_series_csv(path);
  }
  in.clear();
  in.seekg(0);
  const auto parsed = mrw::read_tsv(in);
  std::optional<std::size_t> c;
  if (!column.empty()) {
    c = parsed.table.column(column);
  } else {
    c = parsed.table.column("level");
    if (!c) c = parsed.table.column("value");
  }
  if (!c) throw mrw::data_error("'" + path + "': no column '" + (column.empty() ? "level" : column) + "'");
  return mrw::make_frame(parsed.table.numeric_column(*c));
}

// --- prep ------------------------------------------------------------------------

struct PrepFlags {
  std::string input, prefix, mode = "mean";
  int weekday = 0;
};

void write_series(const std::string& path, const mrw::RunHeader& h, const mrw::SeriesFrame& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mrw::data_error("cannot write '" + path + "'");
  auto hh = h;
  hh.notes.push_back("samples: " + std::to_string(f.size()) + ", gaps: " + std::to_string(f.gaps.size()));
  for (const auto& fl : f.flags) hh.notes.push_back("flag " + mrw::format_timestamp(fl.when, f.meta.resolution) + ": " + fl.reason);
  out << "# mrw " << mrw::kVersion << '\n' << "# command: " << hh.command << '\n' << "# args: " << hh.args << '\n';
  for (const auto& [k, v] : hh.config) out << "# config: " << k << '=' << v << '\n';
  for (const auto& n : hh.notes) out << "# note: " << n << '\n';
  mrw::write_series_csv(out, f);
  const std::string sidecar = path + ".gaps";
  if (f.has_gaps()) {
    std::ofstream g(sidecar, std::ios::binary);
    if (!g) throw mrw::data_error("cannot write '" + sidecar + "'");
    mrw::write_gap_report(g, f);
  } else {
    std::remove(sidecar.c_str());
  }
}

int run_prep(const PrepFlags& f) {
  Recorder rec("prep");
  rec.add("input", f.input);
  rec.add("out-prefix", f.prefix);
  rec.add("mode", f.mode);
  rec.add("weekday", f.weekday);

  std::vector<mrw::RejectedRecord> rejected;
  const auto hourly = mrw::load_prices(f.input, &rejected);
  for (const auto& r : rejected) std::cerr << "rejected line " << r.line << ": " << r.reason << '\n';
  const auto daily = mrw::daily_aggregate(hourly, f.mode == "max" ? mrw::DailyMode::max : mrw::DailyMode::mean);
  const auto [x, mu] = mrw::log_detrend(daily);

  rec.note("hourly records: " + std::to_string(hourly.size()) + ", rejected: " + std::to_string(rejected.size()) +
           ", missing hours: " + std::to_string(hourly.gaps.size()));
  rec.note("mu_hat per day: " + mrw::format_double(mu));
  const auto h = rec.header();

  write_series(f.prefix + "_daily.csv", h, x);
  write_series(f.prefix + "_weekly.csv", h, mrw::weekly_mean(x));
  for (int wd = 1; wd <= 7; ++wd)
    if (f.weekday == 0 || f.weekday == wd)
      write_series(f.prefix + "_weekday" + std::to_string(wd) + ".csv", h, mrw::weekday_slice(x, wd));

  const auto prof = mrw::seasonal_profile(x);
  mrw::Table t;
  t.columns = {"kind", "index", "value"};
  for (std::size_t d = 0; d < 7; ++d) t.add_row({"weekday", mrw::cell(d + 1), mrw::cell(prof.weekday_means[d])});
  if (prof.weekofyear_means)
    for (std::size_t w = 0; w < prof.weekofyear_means->size(); ++w)
      if (!std::isnan((*prof.weekofyear_means)[w])) t.add_row({"week", mrw::cell(w + 1), mrw::cell((*prof.weekofyear_means)[w])});
  if (prof.sinusoid) {
    t.add_row({"sinusoid_amplitude", "0", mrw::cell(prof.sinusoid->amplitude)});
    t.add_row({"sinusoid_phase", "0", mrw::cell(prof.sinusoid->phase)});
    t.add_row({"sinusoid_period_weeks", "0", mrw::cell(prof.sinusoid->period)});
  }
  auto ph = h;
  for (const auto& w : prof.warnings) {
    ph.notes.push_back("warning: " + w);
    std::cerr << "warning: " << w << '\n';
  }
  OutputFlags o;
  o.out = f.prefix + "_profile.tsv";
  emit(o, ph, t);
  return kExitOk;
}

// --- simulate --------------------------------------------------------------------

struct SimFlags {
  ModelFlags model;
  OutputFlags output;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  double season_amp = 0.0, season_period = mrw::kWeeksPerYear, season_phase = 0.0;
};

int run_simulate(const SimFlags& f) {
  const auto p = f.model.params();
  if (f.n == 0) throw usage_error("--n must be positive");
  Recorder rec("simulate");
  f.model.record(rec);
  rec.add("n", f.n);
  rec.add("seasonal-amplitude", f.season_amp);
  rec.add("seasonal-period", f.season_period);
  rec.add("seasonal-phase", f.season_phase);
  rec.seed(f.seed);
  f.output.record(rec);

  const auto sim = mrw::simulate(f.n, p, f.seed);
  auto levels = sim.levels;
  auto returns = sim.returns;
  if (f.season_amp != 0.0) {
    levels = mrw::add_seasonal(levels, f.season_amp, f.season_period, f.season_phase, p.dt);
    double prev = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
      returns[k] = levels[k] - prev;
      prev = levels[k];
    }
  }
  if (sim.fgn_method != mrw::FgnMethod::none) rec.note("fgn sampler: " + std::string(mrw::to_string(sim.fgn_method)));
  mrw::Table t;
  t.columns = {"index", "level", "return"};
  for (std::size_t k = 0; k < f.n; ++k) t.add_row({mrw::cell(k + 1), mrw::cell(levels[k]), mrw::cell(returns[k])});
  emit(f.output, rec.header(), t);
  return kExitOk;
}

// --- fit -------------------------------------------------------------------------

struct FitFlags {
  OutputFlags output;
  std::string input, model, column, damping = "phi";
  std::size_t truncation = mrw::kDefaultTruncation, starts = 5, max_evals = 1500;
  std::uint64_t seed = 0;
  double dt = 1.0;
  bool center = true;
};

int run_fit(const FitFlags& f) {
  const auto variant = mrw::parse_variant(f.model);
  Recorder rec("fit");
  rec.add("input", f.input);
  if (!f.column.empty()) rec.add("column", f.column);
  rec.add("model", f.model);
  rec.add("truncation", f.truncation);
  rec.add("starts", f.starts);
  rec.add("max-evals", f.max_evals);
  rec.add("damping", f.damping);
  rec.add("dt", f.dt);
  if (variant == mrw::Variant::damped) rec.add_switch("center", "no-center", f.center);
  rec.seed(f.seed);
  f.output.record(rec);

  auto frame = load_input(f.input, f.column);
  if (variant == mrw::Variant::damped && f.center) {
    auto [c, m] = mrw::center_levels(frame);
    frame = std::move(c);
    rec.note("levels centered by subtracting " + mrw::format_double(m));
  }
  mrw::FitConfig cfg;
  cfg.truncation = f.truncation;
  cfg.n_starts = f.starts;
  cfg.max_evals = f.max_evals;
  cfg.optimizer.max_evals = f.max_evals;
  cfg.seed = f.seed;
  cfg.dt = f.dt;
  cfg.damping = f.damping == "relaxation" ? mrw::DampingCoordinate::relaxation : mrw::DampingCoordinate::phi;
  const auto r = mrw::fit(frame, variant, cfg);

  std::size_t converged = 0;
  for (const auto& s : r.starts) converged += s.converged;
  rec.note("n: " + std::to_string(r.n) + ", truncation: " + std::to_string(r.truncation) +
           ", converged starts: " + std::to_string(converged) + "/" + std::to_string(r.starts.size()));
  if (variant == mrw::Variant::standard) rec.note("H is fixed at 0.5 for the standard model");
  for (const auto& w : r.warnings) {
    rec.note("warning: " + w);
    std::cerr << "warning: " << w << '\n';
  }
  std::string box;
  for (double b : r.box_position) box += (box.empty() ? "" : ",") + mrw::format_double(b);
  rec.note("box position: " + box);

  const auto& th = r.theta_hat;
  mrw::Table t;
  const bool damped = variant == mrw::Variant::damped;
  t.columns = {"model", damped ? "nu_inv" : "H", "lambda", "T", "sigma", "loglik", "status"};
  t.add_row({f.model, mrw::cell(damped ? th.relaxation_time() : th.hurst), mrw::cell(th.lambda), mrw::cell(th.t_corr),
             mrw::cell(th.sigma), mrw::cell(r.loglik), std::string(mrw::to_string(r.status))});
  emit(f.output, rec.header(), t);
  return r.status == mrw::FitStatus::no_converge ? kExitNoConverge : kExitOk;
}

// --- ensemble --------------------------------------------------------------------

struct EnsembleFlags {
  ModelFlags model;
  OutputFlags output;
  ScaleFlags scales;
  std::size_t n = 1000, reps = 500;
  std::uint64_t seed = 0;
  double season_amp = 0.0, season_period = mrw::kWeeksPerYear, season_phase = 0.0;
};

int run_ensemble(const EnsembleFlags& f) {
  const auto p = f.model.params();
  if (f.reps < mrw::kMinEnsembleSize) throw usage_error("--reps must be at least 40 for the 1/40 quantiles");
  Recorder rec("ensemble");
  f.model.record(rec);
  rec.add("n", f.n);
  rec.add("reps", f.reps);
  f.scales.record(rec);
  rec.add("seasonal-amplitude", f.season_amp);
  rec.add("seasonal-period", f.season_period);
  rec.add("seasonal-phase", f.season_phase);
  rec.seed(f.seed);
  f.output.record(rec);

  std::optional<mrw::SeasonalInjection> season;
  if (f.season_amp != 0.0) season = mrw::SeasonalInjection{f.season_amp, f.season_period, f.season_phase};
  const auto scales = f.scales.resolve(f.n);
  const auto band = mrw::ensemble_band(p, f.n, f.reps, scales, f.seed, season);
  mrw::Table t;
  t.columns = {"scale", "mean", "q0.025", "q0.125", "q0.875", "q0.975"};
  for (std::size_t i = 0; i < band.scales.size(); ++i) {
    std::vector<std::string> row{mrw::cell(band.scales[i]), mrw::cell(band.mean[i])};
    for (const auto& [q, curve] : band.quantiles) row.push_back(mrw::cell(curve[i]));
    t.add_row(std::move(row));
  }
  emit(f.output, rec.header(), t);
  return kExitOk;
}

// --- analyze ---------------------------------------------------------------------

struct AnalyzeFlags {
  OutputFlags output;
  ScaleFlags scales;
  std::string input, which, column, increments = "auto";
  std::size_t max_lag = 0, bins_per_decade = 0;
  double dt = 1.0;
};

int run_analyze(const AnalyzeFlags& f) {
  Recorder rec("analyze");
  rec.add("input", f.input);
  if (!f.column.empty()) rec.add("column", f.column);
  rec.add("which", f.which);
  rec.add("increments", f.increments);
  const bool is_acf = f.which == "acf" || f.which == "absacf" || f.which == "absmoment";
  if (is_acf) rec.add("max-lag", f.max_lag);
  if (f.which == "variogram") f.scales.record(rec);
  if (f.which == "spectrum") {
    rec.add("bins-per-decade", f.bins_per_decade);
    rec.add("dt", f.dt);
  }
  f.output.record(rec);

  auto frame = load_input(f.input, f.column);
  const bool diff = f.increments == "yes" || (f.increments == "auto" && is_acf);
  mrw::Table t;
  if (f.which == "variogram") {
    if (diff) throw usage_error("variograms are computed on levels; use --increments no");
    const auto v = mrw::wavelet_variogram(frame, f.scales.resolve(frame.size()));
    t.columns = {"scale", "V", "count"};
    for (std::size_t i = 0; i < v.size(); ++i) t.add_row({mrw::cell(v.scales[i]), mrw::cell(v.V[i]), mrw::cell(v.counts[i])});
  } else {
    if (frame.has_gaps())
      throw mrw::data_error(f.which + " needs a contiguous series; input has " + std::to_string(frame.gaps.size()) + " gap(s)");
    const auto x = diff ? mrw::first_differences(frame.values) : frame.values;
    if (f.which == "spectrum") {
      auto p = mrw::periodogram(x, f.dt);
      if (f.bins_per_decade > 0) p = mrw::log_binned(p, f.bins_per_decade);
      t.columns = {"freq", "power"};
      for (std::size_t i = 0; i < p.freqs.size(); ++i) t.add_row({mrw::cell(p.freqs[i]), mrw::cell(p.power[i])});
    } else {
      const std::size_t lag = f.max_lag > 0 ? f.max_lag : std::min<std::size_t>(100, x.size() / 4);
      const auto r = f.which == "acf"      ? mrw::acf(x, lag)
                     : f.which == "absacf" ? mrw::abs_acf(x, lag)
                                           : mrw::abs_moment_correlation(x, lag);
      t.columns = {"lag", f.which};
      for (std::size_t k = 0; k < r.size(); ++k) t.add_row({mrw::cell(k), mrw::cell(r[k])});
    }
  }
  emit(f.output, rec.header(), t);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-reverting multifractal random walks: simulation, estimation, diagnostics"};
  app.set_version_flag("--version", std::string(mrw::kVersion));
  app.require_subcommand(1);

  PrepFlags prep;
  auto* c_prep = app.add_subcommand("prep", "Hourly prices CSV -> log-detrended daily, weekly and weekday series");
  c_prep->add_option("--input", prep.input, "CSV with header timestamp,price")->required();
  c_prep->add_option("--out-prefix", prep.prefix, "Output path prefix")->required();
  c_prep->add_option("--mode", prep.mode, "Daily aggregate")->check(CLI::IsMember({"mean", "max"}))->capture_default_str();
  c_prep->add_option("--weekday", prep.weekday, "ISO weekday slice to write, 0 = all")->check(CLI::Range(0, 7))->capture_default_str();

  SimFlags sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate one path (columns index, level, return)");
  sim.model.attach(c_sim);
  sim.output.attach(c_sim);
  c_sim->add_option("--n", sim.n, "Number of samples")->capture_default_str();
  c_sim->add_option("--seed", sim.seed, "Root seed")->capture_default_str();
  c_sim->add_option("--seasonal-amplitude", sim.season_amp, "Added sinusoid amplitude")->capture_default_str();
  c_sim->add_option("--seasonal-period", sim.season_period, "Added sinusoid period (time units)")->capture_default_str();
  c_sim->add_option("--seasonal-phase", sim.season_phase, "Added sinusoid phase")->capture_default_str();

  FitFlags fit;
  auto* c_fit = app.add_subcommand("fit", "Maximum-likelihood fit of a level series");
  fit.output.attach(c_fit);
  c_fit->add_option("--input", fit.input, "Series file (prep CSV or simulate table)")->required();
  c_fit->add_option("--model", fit.model, "Model variant")->required()->check(CLI::IsMember({"standard", "damped", "fractional"}));
  c_fit->add_option("--column", fit.column, "Table column holding the levels");
  c_fit->add_option("--truncation", fit.truncation, "Autoregressive truncation order K")->capture_default_str();
  c_fit->add_option("--starts", fit.starts, "Number of optimizer starts")->capture_default_str();
  c_fit->add_option("--max-evals", fit.max_evals, "Likelihood evaluations per start")->capture_default_str();
  c_fit->add_option("--damping", fit.damping, "Search coordinate for the damping")->check(CLI::IsMember({"phi", "relaxation"}))->capture_default_str();
  c_fit->add_option("--dt", fit.dt, "Sampling step (time units)")->capture_default_str();
  c_fit->add_option("--seed", fit.seed, "Seed for the start design")->capture_default_str();
  c_fit->add_flag("--center,!--no-center", fit.center, "Subtract the sample mean before a damped fit");

  EnsembleFlags ens;
  auto* c_ens = app.add_subcommand("ensemble", "Variogram band over simulated paths");
  ens.model.attach(c_ens);
  ens.output.attach(c_ens);
  ens.scales.attach(c_ens);
  c_ens->add_option("--n", ens.n, "Samples per path")->capture_default_str();
  c_ens->add_option("--reps", ens.reps, "Number of paths (>= 40)")->capture_default_str();
  c_ens->add_option("--seed", ens.seed, "Root seed")->capture_default_str();
  c_ens->add_option("--seasonal-amplitude", ens.season_amp, "Injected sinusoid amplitude")->capture_default_str();
  c_ens->add_option("--seasonal-period", ens.season_period, "Injected sinusoid period (time units)")->capture_default_str();
  c_ens->add_option("--seasonal-phase", ens.season_phase, "Injected sinusoid phase")->capture_default_str();

  AnalyzeFlags an;
  auto* c_an = app.add_subcommand("analyze", "Variogram, spectrum or autocorrelation of a series");
  an.output.attach(c_an);
  an.scales.attach(c_an);
  c_an->add_option("--input", an.input, "Series file (prep CSV or simulate table)")->required();
  c_an->add_option("--which", an.which, "Diagnostic")->required()->check(CLI::IsMember({"variogram", "spectrum", "acf", "absacf", "absmoment"}));
  c_an->add_option("--column", an.column, "Table column holding the levels");
  c_an->add_option("--increments", an.increments, "Use first differences (auto: for the correlation diagnostics)")
      ->check(CLI::IsMember({"auto", "yes", "no"}))
      ->capture_default_str();
  c_an->add_option("--max-lag", an.max_lag, "Largest ACF lag, 0 = min(100, n/4)")->capture_default_str();
  c_an->add_option("--bins-per-decade", an.bins_per_decade, "Log-binned spectrum, 0 = raw")->capture_default_str();
  c_an->add_option("--dt", an.dt, "Sampling step (time units)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (c_prep->parsed()) return run_prep(prep);
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_fit->parsed()) return run_fit(fit);
    if (c_ens->parsed()) return run_ensemble(ens);
    if (c_an->parsed()) return run_analyze(an);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
