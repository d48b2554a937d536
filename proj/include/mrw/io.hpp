#pragma once

// Self-describing result tables: a '#' header with the tool version, the resolved run
// configuration and the seed, then tab-separated columns. JSON mirrors the same content.

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mrw/dataprep.hpp"
#include "mrw/error.hpp"
#include "mrw/version.hpp"

namespace mrw {

enum class OutputFormat { tsv, json };

struct RunHeader {
  std::string command;
  // Resolved command line that reproduces the output, e.g. "simulate --model damped ...".
  std::string args;
  std::vector<std::pair<std::string, std::string>> config;  // kept in insertion order
  std::optional<std::uint64_t> seed;
  std::vector<std::string> notes;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw domain_error("table: row width does not match the columns");
    rows.push_back(std::move(row));
  }

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    return std::nullopt;
  }

  std::vector<double> numeric_column(std::size_t c) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto v = detail::parse_double(rows[r][c]);
      if (!v) throw data_error("column '" + columns[c] + "': not a number '" + rows[r][c] + "'", r + 1);
      out.push_back(*v);
    }
    return out;
  }
};

inline std::string cell(double v) { return format_double(v); }
inline std::string cell(std::size_t v) { return std::to_string(v); }
inline std::string cell(std::string v) { return v; }

inline void write_tsv(std::ostream& out, const RunHeader& h, const Table& t) {
  out << "# mrw " << kVersion << '\n';
  out << "# command: " << h.command << '\n';
  if (!h.args.empty()) out << "# args: " << h.args << '\n';
  for (const auto& [k, v] : h.config) out << "# config: " << k << '=' << v << '\n';
  if (h.seed) out << "# seed: " << *h.seed << '\n';
  for (const auto& n : h.notes) out << "# note: " << n << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "\t" : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << row[i];
    out << '\n';
  }
}

// Integer and floating cells become JSON numbers, everything else strings.
inline void write_json(std::ostream& out, const RunHeader& h, const Table& t) {
  nlohmann::ordered_json j;
  j["mrw_version"] = std::string(kVersion);
  j["command"] = h.command;
  if (!h.args.empty()) j["args"] = h.args;
  j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : h.config) j["config"][k] = v;
  if (h.seed) j["seed"] = *h.seed;
  j["notes"] = h.notes;
  j["columns"] = t.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    auto r = nlohmann::ordered_json::array();
    for (const auto& c : row) {
      std::int64_t i = 0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), i);
      if (!c.empty() && ec == std::errc{} && ptr == c.data() + c.size()) {
        r.push_back(i);
        continue;
      }
      const auto v = detail::parse_double(c);
      if (v)
        r.push_back(*v);
      else
        r.push_back(c);
    }
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  out << j.dump(2) << '\n';
}

inline void write_table(std::ostream& out, OutputFormat fmt, const RunHeader& h, const Table& t) {
  if (fmt == OutputFormat::json)
    write_json(out, h, t);
  else
    write_tsv(out, h, t);
}

struct ParsedTable {
  RunHeader header;
  Table table;
};

// Reads a table written by write_tsv. Unknown '#' lines are kept as notes.
inline ParsedTable read_tsv(std::istream& in) {
  ParsedTable p;
  std::string raw;
  std::size_t line = 0;
  bool have_columns = false;
  auto split = [](std::string_view s) {
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const auto tab = s.find('\t', start);
      f.emplace_back(detail::trim(s.substr(start, tab == std::string_view::npos ? tab : tab - start)));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    return f;
  };
  auto strip = [](std::string_view s, std::string_view prefix) -> std::optional<std::string_view> {
    if (s.substr(0, prefix.size()) != prefix) return std::nullopt;
    return s.substr(prefix.size());
  };
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view s = detail::trim(raw);
    if (s.empty()) continue;
    if (s.front() == '#') {
      if (have_columns) throw data_error("comment after the column line", line);
      if (strip(s, "# mrw ")) continue;
      if (auto v = strip(s, "# command: ")) {
        p.header.command = *v;
      } else if (auto v = strip(s, "# args: ")) {
        p.header.args = *v;
      } else if (auto v = strip(s, "# config: ")) {
        const auto eq = v->find('=');
        if (eq == std::string_view::npos) throw data_error("config line without '='", line);
        p.header.config.emplace_back(v->substr(0, eq), v->substr(eq + 1));
      } else if (auto v = strip(s, "# seed: ")) {
        std::uint64_t seed = 0;
        const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), seed);
        if (ec != std::errc{} || ptr != v->data() + v->size()) throw data_error("bad seed", line);
        p.header.seed = seed;
      } else if (auto v = strip(s, "# note: ")) {
        p.header.notes.emplace_back(*v);
      } else {
        p.header.notes.emplace_back(detail::trim(s.substr(1)));
      }
      continue;
    }
    auto fields = split(s);
    if (!have_columns) {
      p.table.columns = std::move(fields);
      have_columns = true;
      continue;
    }
    if (fields.size() != p.table.columns.size())
      throw data_error("expected " + std::to_string(p.table.columns.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       line);
    p.table.rows.push_back(std::move(fields));
  }
  if (!have_columns) throw data_error("no column line");
  return p;
}

}  // namespace mrw
