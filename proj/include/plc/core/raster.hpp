#pragma once

#include "plc/core/types.hpp"

namespace plc {

// Marks every pixel whose cell [c-0.5, c+0.5) x [r-0.5, r+0.5) the polyline
// passes through, walking each segment between its grid-line crossings.
// Cells outside the canvas are dropped. A single-point polyline marks the
// cell containing that point.
BinaryMap rasterize_polyline(const Polyline& line, int height, int width);

// Square (Chebyshev) dilation by `radius` pixels, clipped to the canvas.
BinaryMap dilate_chebyshev(const BinaryMap& map, int radius);

// Cell index containing coordinate v under the centre-on-integer convention.
int containing_cell(double v);

}  // namespace plc
