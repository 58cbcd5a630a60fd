#pragma once

namespace timerobust {
inline constexpr const char* kVersion = "0.1.0";
}
