#pragma once

namespace coarseconv {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace coarseconv
