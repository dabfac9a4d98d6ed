#pragma once

#include <torch/torch.h>

#include <string>

namespace pir {

/// Encodes a (3,H,W) tensor in [-1,1] to an 8-bit image file; the format
/// follows the extension (.png for lossless fixtures).
void save_image(const torch::Tensor& image, const std::string& path);

/// Decodes an image file to (3,H,W) float32 in [-1,1]; pixel 255 maps to
/// 1.0 and pixel 0 to -1.0. Throws NotFound when the file cannot be read
/// or decoded.
torch::Tensor load_image(const std::string& path);

/// Center-crops to square and resizes (area-weighted) to `resolution`.
torch::Tensor center_crop_resize(const torch::Tensor& image, int64_t resolution);

/// Tiles up to rows*cols images row-major into one image file. Unused cells
/// stay black.
void emit_grid(const torch::Tensor& images, int64_t rows, int64_t cols,
               const std::string& path);

}  // namespace pir
