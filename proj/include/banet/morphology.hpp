#pragma once

#include <cstddef>

#include "banet/image.hpp"

namespace banet {

/// Binary morphology with a (2r+1) x (2r+1) square structuring element.
/// Input pixels >= 0.5 count as foreground; outputs are exactly 0 or 1.
/// Outside the image is background for dilation and foreground for erosion,
/// so objects touching the border do not grow a band along it.
Plane dilate(const Plane& mask, std::size_t radius);
Plane erode(const Plane& mask, std::size_t radius);

/// dilate(G, r) XOR erode(G, r): a 2r-thick band straddling the contour.
Plane make_boundary_gt(const Plane& mask, std::size_t radius);

}  // namespace banet
