#pragma once

// Everything except mrw/io.hpp, which needs nlohmann/json on the include path.

#include "mrw/analysis.hpp"
#include "mrw/dataprep.hpp"
#include "mrw/estimate.hpp"
#include "mrw/likelihood.hpp"
#include "mrw/model.hpp"
#include "mrw/simulate.hpp"
#include "mrw/version.hpp"
