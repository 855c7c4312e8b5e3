#pragma once

namespace pcs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pcs
