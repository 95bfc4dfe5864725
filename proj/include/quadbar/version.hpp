#pragma once

namespace quadbar {

inline constexpr const char* kVersion = "0.1.0";

} // namespace quadbar
