#include "pir/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "pir/error.hpp"

namespace pir {

namespace {

}  // namespace

void save_image(const torch::Tensor& image, const std::string& path) {
  TORCH_CHECK(image.dim() == 3 && image.size(0) == 3, "expected (3,H,W) image tensor");
  // flip(0): RGB tensor -> BGR byte layout expected by OpenCV.
  auto t = ((image.detach().to(torch::kFloat32) + 1.0f) * 127.5f)
               .round()
               .clamp(0, 255)
               .to(torch::kUInt8)
               .flip(0)
               .permute({1, 2, 0})
               .contiguous();
  cv::Mat bgr(static_cast<int>(t.size(0)), static_cast<int>(t.size(1)), CV_8UC3,
              t.data_ptr<uint8_t>());
  if (!cv::imwrite(path, bgr)) {
    throw NotFound("save_image: cannot write " + path);
  }
}

torch::Tensor load_image(const std::string& path) {
  cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty() || !bgr.isContinuous()) {
    throw NotFound("load_image: cannot decode " + path);
  }
  auto t = torch::from_blob(bgr.data, {bgr.rows, bgr.cols, 3}, torch::kUInt8).clone();
  return t.permute({2, 0, 1}).flip(0).to(torch::kFloat32) / 127.5f - 1.0f;
}

torch::Tensor center_crop_resize(const torch::Tensor& image, int64_t resolution) {
  TORCH_CHECK(image.dim() == 3 && image.size(0) == 3, "expected (3,H,W)");
  const int64_t h = image.size(1);
  const int64_t w = image.size(2);
  const int64_t side = std::min(h, w);
  auto cropped = image.narrow(1, (h - side) / 2, side).narrow(2, (w - side) / 2, side);
  if (side == resolution) {
    return cropped.contiguous();
  }
  namespace F = torch::nn::functional;
  auto opts = F::InterpolateFuncOptions()
                  .size(std::vector<int64_t>{resolution, resolution})
                  .mode(torch::kBilinear)
                  .align_corners(false)
                  .antialias(side > resolution);
  return F::interpolate(cropped.unsqueeze(0), opts).squeeze(0).clamp(-1.0, 1.0);
}

void emit_grid(const torch::Tensor& images, int64_t rows, int64_t cols,
               const std::string& path) {
  if (!images.defined() || images.dim() != 4 || images.size(0) == 0) {
    throw InvalidArgument("emit_grid: need a non-empty (N,3,H,W) batch");
  }
  const int64_t n = images.size(0);
  if (n > rows * cols) {
    throw InvalidArgument("emit_grid: " + std::to_string(n) + " images exceed " +
                          std::to_string(rows) + "x" + std::to_string(cols) + " grid");
  }
  const int64_t h = images.size(2);
  const int64_t w = images.size(3);
  auto canvas = torch::full({3, rows * h, cols * w}, -1.0f);
  for (int64_t i = 0; i < n; ++i) {
    const int64_t r = i / cols;
    const int64_t c = i % cols;
    canvas.narrow(1, r * h, h).narrow(2, c * w, w).copy_(images[i]);
  }
  save_image(canvas, path);
}

}  // namespace pir
