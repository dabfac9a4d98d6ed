#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <memory>
#include <vector>

namespace pir {

/// Deep-feature distance between images: per layer, channel-unit-normalized
/// feature maps are compared by mean squared difference and the layer terms
/// are summed. Symmetric, non-negative, zero iff features agree.
class PerceptualBackend {
 public:
  virtual ~PerceptualBackend() = default;

  /// Normalized feature stack for a batch (B,3,H,W). Each entry has unit
  /// channel norm at every spatial position.
  virtual std::vector<torch::Tensor> features(const torch::Tensor& images) const = 0;

  /// Per-sample distances for two batches of equal shape. Differentiable
  /// through both arguments.
  torch::Tensor distance(const torch::Tensor& a, const torch::Tensor& b) const;

  /// Convenience scalar for a single pair (3,H,W) or (1,3,H,W).
  double distance_scalar(const torch::Tensor& a, const torch::Tensor& b) const;

  /// Distances from cached feature stacks (as returned by features()).
  torch::Tensor distance_from_features(const std::vector<torch::Tensor>& fa,
                                       const std::vector<torch::Tensor>& fb) const;

  /// Full pairwise distance matrix (|a| x |b|), computed from cached
  /// features; no gradients.
  torch::Tensor pairwise(const torch::Tensor& a, const torch::Tensor& b) const;
};

/// Fixed-seed random convolution stack: three strided conv layers with
/// leaky-ReLU, He-initialized from `seed` and frozen. Needs no external
/// weights, so tests and CI runs are reproducible everywhere.
class RandomConvPerceptual final : public PerceptualBackend {
 public:
  explicit RandomConvPerceptual(int64_t seed = 17);

  std::vector<torch::Tensor> features(const torch::Tensor& images) const override;

  int64_t seed() const { return seed_; }

 private:
  int64_t seed_;
  std::vector<torch::Tensor> weights_;  // conv kernels, frozen
};

/// Wraps an externally trained conv trunk (e.g. the content probe's) as a
/// perceptual backend; layers are the post-activation feature maps.
class ConvStackPerceptual final : public PerceptualBackend {
 public:
  explicit ConvStackPerceptual(std::vector<torch::Tensor> conv_weights);

  std::vector<torch::Tensor> features(const torch::Tensor& images) const override;

 private:
  std::vector<torch::Tensor> weights_;
};

/// Normalizes every spatial position of (B,C,H,W) to unit channel norm.
torch::Tensor unit_normalize_channels(const torch::Tensor& f);

std::shared_ptr<PerceptualBackend> make_random_perceptual(int64_t seed = 17);

}  // namespace pir
