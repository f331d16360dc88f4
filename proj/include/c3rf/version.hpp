#pragma once

namespace c3rf {

inline constexpr const char* kToolName = "c3rf";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace c3rf
