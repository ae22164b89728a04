#pragma once

namespace mixlogit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mixlogit
