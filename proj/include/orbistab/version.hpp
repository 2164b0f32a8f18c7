#pragma once

namespace orbistab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace orbistab
