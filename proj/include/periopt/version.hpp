#pragma once

namespace periopt {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kBundleFormatVersion = 1;

}  // namespace periopt
