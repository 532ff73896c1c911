#pragma once

namespace longmem {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace longmem
