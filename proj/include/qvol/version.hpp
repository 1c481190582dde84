#pragma once

namespace qvol {
inline constexpr const char* kVersion = "0.1.0";
}
