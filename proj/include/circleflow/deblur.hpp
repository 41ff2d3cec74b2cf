#pragma once

#include "circleflow/image.hpp"
#include "circleflow/psf_field.hpp"

namespace circleflow {

// Spatially varying Wiener deconvolution. Each region is restored on a tile
// extended by an apron, and tiles are blended with separable raised-cosine
// weights (taper width = kernel radius) that sum to one everywhere.
// Holes in the field borrow the kernel of the nearest calibrated cell (grid
// distance, first in scan order on ties). Output is clamped to [0, 1].
Image wiener_deblur(const Image& img, const PsfField& field, double nsr);

}  // namespace circleflow
