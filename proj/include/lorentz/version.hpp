#pragma once

namespace lorentz {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kSpecSchema = "lorentzlab/1";

}  // namespace lorentz
