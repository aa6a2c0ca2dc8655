#pragma once

namespace srkde {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace srkde
