#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <vector>

namespace pir {

struct DiscriminatorConfig {
  int64_t resolution = 64;
  int64_t base_channels = 32;  // channels right after from_rgb
  int64_t max_channels = 128;

  int64_t channels_at(int64_t res) const {
    return std::min(max_channels, base_channels * (resolution / res));
  }
};

/// Image/patch logits from one shared trunk. The patch head is a 1x1 conv
/// on the trunk feature map at 1/4 of the input resolution; the image head
/// flattens the 4x4 feature map into a scalar logit.
struct DiscriminatorOutput {
  torch::Tensor image_logit;   // (B)
  torch::Tensor patch_logits;  // (B, 1, R/4, R/4)
};

struct DiscriminatorImpl : torch::nn::Module {
  explicit DiscriminatorImpl(DiscriminatorConfig cfg = {});

  DiscriminatorOutput forward(const torch::Tensor& images);

  const DiscriminatorConfig& config() const { return cfg_; }

  DiscriminatorConfig cfg_;
  torch::nn::Conv2d from_rgb{nullptr};
  std::vector<torch::nn::Conv2d> downs;  // stride-2 convs from R down to 4
  torch::nn::Conv2d patch_head{nullptr};
  torch::nn::Linear image_head{nullptr};
  int64_t patch_res_ = 0;
};
TORCH_MODULE(Discriminator);

Discriminator clone_discriminator(const Discriminator& src);

}  // namespace pir
