#pragma once

namespace goshare {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace goshare
