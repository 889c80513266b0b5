#pragma once

namespace qsdlab {
inline constexpr const char* kVersion = "0.1.0";
}
