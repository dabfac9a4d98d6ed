#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <utility>
#include <vector>

namespace pir {

/// Offset under the square root when turning variances into standard
/// deviations, in AdaIN and in style extraction. Keeps constant channels
/// finite.
inline constexpr double kSigmaEps = 1e-5;

/// Per-channel spatial statistics of a feature map: mean and the
/// eps-stabilized standard deviation sqrt(var + kSigmaEps). Input
/// (B,C,H,W) or (C,H,W); outputs match the leading dims with channels last.
std::pair<torch::Tensor, torch::Tensor> channel_stats(const torch::Tensor& features);

/// Adaptive instance normalization: renormalizes each content channel to
/// the requested (mean, std). style_mean/style_std are (C) or (B,C);
/// content is (B,C,H,W) or (C,H,W) with spatial extent >= 2x2.
torch::Tensor adain(const torch::Tensor& content, const torch::Tensor& style_mean,
                    const torch::Tensor& style_std);

/// Style code emitted by the style encoder: one (mean, std) pair per
/// decoder AdaIN layer, plus the pooled embedding they were derived from.
/// All stds are strictly positive.
struct StyleCode {
  std::vector<torch::Tensor> means;  // each (B, C_layer)
  std::vector<torch::Tensor> stds;   // each (B, C_layer), > 0
  torch::Tensor embedding;           // (B, style_dim)
};

struct TranslatorConfig {
  int64_t resolution = 64;
  int64_t content_channels = 64;  // channels of the content code, at R/4
  int64_t style_dim = 128;
};

/// Strips style by construction: strided convs with instance norm.
/// Output (B, content_channels, R/4, R/4).
struct ContentEncoderImpl : torch::nn::Module {
  explicit ContentEncoderImpl(const TranslatorConfig& cfg);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr}, conv3{nullptr};
  torch::nn::InstanceNorm2d in1{nullptr}, in2{nullptr}, in3{nullptr};
};
TORCH_MODULE(ContentEncoder);

/// Four conv blocks, global average pooling, and an MLP; per-AdaIN-layer
/// affine heads emit (mean, raw_std) with std = softplus(raw + c0) + eps so
/// a fresh encoder asks for roughly unit statistics.
struct StyleEncoderImpl : torch::nn::Module {
  StyleEncoderImpl(const TranslatorConfig& cfg, const std::vector<int64_t>& adain_channels);
  StyleCode forward(const torch::Tensor& y);

  std::vector<torch::nn::Conv2d> convs;
  torch::nn::Linear mlp1{nullptr}, mlp2{nullptr};
  std::vector<torch::nn::Linear> heads;
  std::vector<int64_t> adain_channels_;
};
TORCH_MODULE(StyleEncoder);

/// Residual block with two AdaIN layers. Consumes two (mean, std) pairs.
struct ResAdainBlockImpl : torch::nn::Module {
  explicit ResAdainBlockImpl(int64_t channels);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& m1, const torch::Tensor& s1,
                        const torch::Tensor& m2, const torch::Tensor& s2);

  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};
};
TORCH_MODULE(ResAdainBlock);

/// Two residual AdaIN blocks at R/4, then two upsample+conv blocks and a
/// tanh output conv back to image space.
struct DecoderImpl : torch::nn::Module {
  explicit DecoderImpl(const TranslatorConfig& cfg);
  torch::Tensor forward(const torch::Tensor& content_code, const StyleCode& style);

  /// Channel count of each AdaIN layer, in consumption order.
  std::vector<int64_t> adain_channels() const;

  ResAdainBlock res1{nullptr}, res2{nullptr};
  torch::nn::Conv2d up_conv1{nullptr}, up_conv2{nullptr}, out_conv{nullptr};
  int64_t content_channels_ = 0;
};
TORCH_MODULE(Decoder);

/// The translation module F = (E_C, E_S, Dec). translate(x, y) combines
/// x's content with y's style.
struct TranslatorImpl : torch::nn::Module {
  explicit TranslatorImpl(TranslatorConfig cfg = {});

  torch::Tensor encode_content(const torch::Tensor& content_img);
  StyleCode encode_style(const torch::Tensor& style_img);
  torch::Tensor translate(const torch::Tensor& content_img, const torch::Tensor& style_img);
  torch::Tensor forward(const torch::Tensor& content_img, const torch::Tensor& style_img) {
    return translate(content_img, style_img);
  }

  const TranslatorConfig& config() const { return cfg_; }

  TranslatorConfig cfg_;
  ContentEncoder content_encoder{nullptr};
  StyleEncoder style_encoder{nullptr};
  Decoder decoder{nullptr};
};
TORCH_MODULE(Translator);

}  // namespace pir
