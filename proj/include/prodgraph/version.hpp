#pragma once

namespace prodgraph {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace prodgraph
