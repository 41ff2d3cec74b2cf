#pragma once

#include <span>
#include <utility>
#include <vector>

#include "circleflow/image.hpp"

namespace circleflow {

// True 2D convolution (kernel flipped) with edge replication, applied per
// channel. Output has the input's dimensions.
Image conv2d(const Image& img, const Kernel& k);

// Same operator on unvalidated weights; used inside optimization loops where
// the kernel is realized from parameters every step.
Image conv2d_weights(const Image& img, std::span<const double> weights, int side);

struct ConvGradients {
  Image image;                 // dL/d(input image)
  std::vector<double> kernel;  // dL/d(kernel weights), row-major side x side
};

// Adjoint of conv2d_weights with respect to both operands, given dL/d(output).
// Single-channel only.
ConvGradients conv2d_backward(const Image& img, std::span<const double> weights, int side,
                              const Image& grad_out, bool want_image_grad = true);

// Backward bilinear warp: out(x, y) = img(x + dx, y + dy), sample positions
// clamped to the image rectangle.
Image warp(const Image& img, const FlowField& v);

// dL/dV for a single-channel warp. At integer sample positions the
// derivative is the mean of the left and right one-sided slopes (the value of
// a central difference there); outside the image the slope is zero.
FlowField warp_backward_flow(const Image& img, const FlowField& v, const Image& grad_out);

// Grayscale max / min filter over a (2r+1)^2 square, window clipped at borders.
Image dilate(const Image& img, int radius);
Image erode(const Image& img, int radius);

// 256-bin Otsu threshold over [0, 1]. Pixels with value < threshold form the
// lower class. Ties resolve to the lowest bin.
double otsu_threshold(const Image& img);

// Forward differences; the last column (gx) and last row (gy) are zero.
std::pair<Image, Image> gradient_xy(const Image& img);

// 3x3 binomial prefilter then 2x decimation; output is ceil(w/2) x ceil(h/2).
Image downsample2(const Image& img);

// Bilinear 2x resize of a flow field (half-pixel aligned) with displacements
// doubled. The result is cropped to out_w x out_h, which must not exceed 2w x 2h.
FlowField upsample_flow(const FlowField& v, int out_w, int out_h);
FlowField upsample_flow(const FlowField& v);
// Transpose of upsample_flow: maps a gradient on the fine grid back to the
// coarse grid of size in_w x in_h.
FlowField upsample_flow_adjoint(const FlowField& grad_fine, int in_w, int in_h);

}  // namespace circleflow
