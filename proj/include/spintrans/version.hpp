#pragma once

namespace spintrans {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace spintrans
