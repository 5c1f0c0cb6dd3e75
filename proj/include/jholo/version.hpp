#pragma once

namespace jholo {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace jholo
