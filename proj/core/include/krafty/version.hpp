#pragma once

namespace krafty {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace krafty
