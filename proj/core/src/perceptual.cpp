#include "pir/perceptual.hpp"

#include <cmath>

#include "pir/error.hpp"
#include "pir/latent.hpp"

namespace pir {

namespace {

void check_pair(const torch::Tensor& a, const torch::Tensor& b) {
  if (a.sizes() != b.sizes()) {
    throw InvalidArgument("perceptual_distance: mismatched shapes");
  }
  if (a.dim() != 3 && a.dim() != 4) {
    throw InvalidArgument("perceptual_distance: expected (3,H,W) or (B,3,H,W)");
  }
}

torch::Tensor as_batch(const torch::Tensor& t) { return t.dim() == 3 ? t.unsqueeze(0) : t; }

std::vector<torch::Tensor> conv_stack_features(const std::vector<torch::Tensor>& weights,
                                               const torch::Tensor& images) {
  auto x = as_batch(images);
  std::vector<torch::Tensor> out;
  out.reserve(weights.size());
  for (const auto& w : weights) {
    // Follow the input dtype so double-precision gradient checks stay exact.
    x = torch::leaky_relu(torch::conv2d(x, w.to(x.dtype()), /*bias=*/{}, /*stride=*/2,
                                        /*padding=*/1),
                          0.2);
    out.push_back(unit_normalize_channels(x));
  }
  return out;
}

}  // namespace

torch::Tensor unit_normalize_channels(const torch::Tensor& f) {
  auto norm = torch::sqrt(f.square().sum(1, /*keepdim=*/true) + 1e-8);
  return f / norm;
}

torch::Tensor PerceptualBackend::distance_from_features(
    const std::vector<torch::Tensor>& fa, const std::vector<torch::Tensor>& fb) const {
  TORCH_CHECK(fa.size() == fb.size(), "feature stacks differ in depth");
  torch::Tensor total;
  for (size_t l = 0; l < fa.size(); ++l) {
    auto d = (fa[l] - fb[l]).square().mean({1, 2, 3});
    total = total.defined() ? total + d : d;
  }
  return total;
}

torch::Tensor PerceptualBackend::distance(const torch::Tensor& a, const torch::Tensor& b) const {
  check_pair(a, b);
  return distance_from_features(features(as_batch(a)), features(as_batch(b)));
}

double PerceptualBackend::distance_scalar(const torch::Tensor& a, const torch::Tensor& b) const {
  return distance(a, b).mean().item<double>();
}

torch::Tensor PerceptualBackend::pairwise(const torch::Tensor& a, const torch::Tensor& b) const {
  torch::NoGradGuard ng;
  auto fa = features(as_batch(a));
  auto fb = features(as_batch(b));
  const int64_t n = fa[0].size(0);
  const int64_t m = fb[0].size(0);
  auto result = torch::zeros({n, m}, torch::kFloat64);
  for (size_t l = 0; l < fa.size(); ++l) {
    auto xa = fa[l].flatten(1).to(torch::kFloat64);  // (n, D)
    auto xb = fb[l].flatten(1).to(torch::kFloat64);  // (m, D)
    // mean((x - y)^2) = (|x|^2 - 2 x.y + |y|^2) / D
    auto sq_a = xa.square().sum(1).unsqueeze(1);
    auto sq_b = xb.square().sum(1).unsqueeze(0);
    auto cross = xa.matmul(xb.t());
    result += (sq_a - 2.0 * cross + sq_b) / static_cast<double>(xa.size(1));
  }
  return result.clamp_min(0.0);
}

RandomConvPerceptual::RandomConvPerceptual(int64_t seed) : seed_(seed) {
  auto gen = make_generator(static_cast<uint64_t>(seed));
  int64_t chans[] = {3, 16, 32, 64};
  for (int i = 0; i < 3; ++i) {
    const int64_t fan_in = chans[i] * 9;
    auto w = torch::randn({chans[i + 1], chans[i], 3, 3}, gen) *
             std::sqrt(2.0 / static_cast<double>(fan_in));
    w.set_requires_grad(false);
    weights_.push_back(w);
  }
}

std::vector<torch::Tensor> RandomConvPerceptual::features(const torch::Tensor& images) const {
  return conv_stack_features(weights_, images);
}

ConvStackPerceptual::ConvStackPerceptual(std::vector<torch::Tensor> conv_weights)
    : weights_(std::move(conv_weights)) {
  TORCH_CHECK(!weights_.empty(), "ConvStackPerceptual needs at least one conv layer");
  for (auto& w : weights_) {
    w = w.detach();
    w.set_requires_grad(false);
  }
}

std::vector<torch::Tensor> ConvStackPerceptual::features(const torch::Tensor& images) const {
  return conv_stack_features(weights_, images);
}

std::shared_ptr<PerceptualBackend> make_random_perceptual(int64_t seed) {
  return std::make_shared<RandomConvPerceptual>(seed);
}

}  // namespace pir
