#pragma once

namespace spincorr {
inline constexpr const char* kVersion = "0.1.0";
}
