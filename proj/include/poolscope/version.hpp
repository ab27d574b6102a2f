#pragma once

namespace poolscope {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace poolscope
