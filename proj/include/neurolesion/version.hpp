#pragma once

namespace neurolesion {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace neurolesion
