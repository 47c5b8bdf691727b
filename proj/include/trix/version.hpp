#pragma once

namespace trix {

inline constexpr const char* version_string = "0.1.0";

// Contract tag for the wire-delay draw order: layer-major, x ascending,
// in-neighbor offset -1, 0, +1. Seeds reproduce identical samples only
// across builds with the same tag.
inline constexpr const char* draw_order_tag = "layer-x-c/1";

} // namespace trix
