#pragma once

namespace oscwalk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace oscwalk
