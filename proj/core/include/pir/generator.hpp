#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <vector>

namespace pir {

/// Shape of the miniature style-based generator: an MLP mapping network
/// followed by modulated 3x3 convolutions, one per resolution level from
/// 4x4 up to `resolution`. Artifact runs use resolution 32 or 64; tests may
/// construct smaller powers of two (>= 8).
struct GeneratorConfig {
  int64_t resolution = 64;
  int64_t z_dim = 128;
  int64_t w_dim = 128;
  int64_t mapping_layers = 3;    // depth of the mapping MLP, 2..4
  int64_t base_channels = 32;    // feature channels at the output resolution
  int64_t max_channels = 128;
  int64_t noise_seed = 911;      // per-layer noise buffers derive from this

  int64_t channels_at(int64_t res) const {
    return std::min(max_channels, base_channels * (resolution / res));
  }
};

/// z -> w. Pixel-normalizes z, then a leaky-ReLU MLP.
struct MappingNetworkImpl : torch::nn::Module {
  MappingNetworkImpl(int64_t z_dim, int64_t w_dim, int64_t layers);
  torch::Tensor forward(const torch::Tensor& z);

  std::vector<torch::nn::Linear> fcs;
};
TORCH_MODULE(MappingNetwork);

/// 2D convolution whose weights are modulated per sample by a style vector
/// (an affine of w scales input channels) and demodulated to unit fan-in
/// norm. Implemented as a grouped convolution over the batch.
struct ModulatedConv2dImpl : torch::nn::Module {
  ModulatedConv2dImpl(int64_t in_ch, int64_t out_ch, int64_t kernel, int64_t w_dim,
                      bool demodulate = true);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& w);

  torch::Tensor weight;  // (out, in, k, k)
  torch::nn::Linear affine{nullptr};
  int64_t kernel_ = 3;
  bool demodulate_ = true;
};
TORCH_MODULE(ModulatedConv2d);

/// One synthesis level: optional 2x nearest upsample, modulated conv, fixed
/// per-layer noise scaled by a learned strength, bias, leaky-ReLU.
struct SynthesisBlockImpl : torch::nn::Module {
  SynthesisBlockImpl(int64_t in_ch, int64_t out_ch, int64_t w_dim, int64_t res, bool upsample,
                     int64_t noise_seed);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& w);

  ModulatedConv2d conv{nullptr};
  torch::Tensor bias;
  torch::Tensor noise_strength;
  torch::Tensor noise;  // buffer (1,1,res,res), fixed at construction
  bool upsample_ = false;
};
TORCH_MODULE(SynthesisBlock);

struct GeneratorImpl : torch::nn::Module {
  explicit GeneratorImpl(GeneratorConfig cfg = {});

  /// z (B, z_dim) -> images (B, 3, R, R) in [-1, 1]. Deterministic: the
  /// only stochastic inputs are the fixed noise buffers.
  torch::Tensor forward(const torch::Tensor& z);

  const GeneratorConfig& config() const { return cfg_; }

  GeneratorConfig cfg_;
  MappingNetwork mapping{nullptr};
  torch::Tensor const_input;  // (1, C4, 4, 4)
  SynthesisBlock input_block{nullptr};
  std::vector<SynthesisBlock> blocks;
  ModulatedConv2d to_rgb{nullptr};
  torch::Tensor rgb_bias;
};
TORCH_MODULE(Generator);

/// Deep copy: the returned generator shares no storage with `src`, so
/// updates to one leave the other unchanged.
Generator clone_generator(const Generator& src);

/// Marks every parameter of `m` as non-trainable.
void freeze(torch::nn::Module& m);

/// Throws InvalidArgument unless `img` is (3,R,R) or (B,3,R,R) with finite
/// entries, where R = `resolution`.
void check_image(const torch::Tensor& img, int64_t resolution, const char* where);

}  // namespace pir
