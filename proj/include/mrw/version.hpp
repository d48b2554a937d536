#pragma once

#include <string_view>

namespace mrw {

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace mrw
