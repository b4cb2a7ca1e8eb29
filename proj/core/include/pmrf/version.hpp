#pragma once

namespace pmrf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pmrf
