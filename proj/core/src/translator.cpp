#include "pir/translator.hpp"

#include <cmath>

#include "pir/error.hpp"
#include "pir/generator.hpp"

namespace pir {

namespace {

// softplus(x + kStdBiasInit) ~= 1 at x = 0.
const double kStdBiasInit = std::log(std::exp(1.0) - 1.0);

torch::nn::Conv2d conv3x3(int64_t in, int64_t out, int64_t stride = 1) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).stride(stride).padding(1));
}

}  // namespace

std::pair<torch::Tensor, torch::Tensor> channel_stats(const torch::Tensor& features) {
  TORCH_CHECK(features.dim() == 3 || features.dim() == 4,
              "channel_stats expects (C,H,W) or (B,C,H,W)");
  auto mean = features.mean({-2, -1});
  auto var = features.var({-2, -1}, /*unbiased=*/false, /*keepdim=*/false);
  auto std = torch::sqrt(var + kSigmaEps);
  return {mean, std};
}

torch::Tensor adain(const torch::Tensor& content, const torch::Tensor& style_mean,
                    const torch::Tensor& style_std) {
  TORCH_CHECK(content.dim() == 3 || content.dim() == 4,
              "adain expects (C,H,W) or (B,C,H,W) content");
  const int64_t channels = content.size(content.dim() - 3);
  const int64_t h = content.size(content.dim() - 2);
  const int64_t w = content.size(content.dim() - 1);
  if (h * w < 2) {
    throw InvalidArgument("adain: content needs at least 2 spatial samples");
  }
  if (style_mean.size(-1) != channels || style_std.size(-1) != channels) {
    throw InvalidArgument("adain: style stats have " + std::to_string(style_mean.size(-1)) +
                          " channels, content has " + std::to_string(channels));
  }
  auto [mu, sigma] = channel_stats(content);
  auto shape = content.dim() == 4 ? std::vector<int64_t>{-1, channels, 1, 1}
                                  : std::vector<int64_t>{channels, 1, 1};
  auto normalized = (content - mu.reshape(shape)) / sigma.reshape(shape);
  return style_std.reshape(shape) * normalized + style_mean.reshape(shape);
}

ContentEncoderImpl::ContentEncoderImpl(const TranslatorConfig& cfg) {
  const int64_t c = cfg.content_channels;
  conv1 = register_module("conv1", conv3x3(3, c / 2, 1));
  conv2 = register_module("conv2", conv3x3(c / 2, c, 2));
  conv3 = register_module("conv3", conv3x3(c, c, 2));
  auto in_opts = [](int64_t ch) {
    return torch::nn::InstanceNorm2dOptions(ch).affine(false).track_running_stats(false);
  };
  in1 = register_module("in1", torch::nn::InstanceNorm2d(in_opts(c / 2)));
  in2 = register_module("in2", torch::nn::InstanceNorm2d(in_opts(c)));
  in3 = register_module("in3", torch::nn::InstanceNorm2d(in_opts(c)));
}

torch::Tensor ContentEncoderImpl::forward(const torch::Tensor& x) {
  auto h = torch::relu(in1->forward(conv1->forward(x)));
  h = torch::relu(in2->forward(conv2->forward(h)));
  h = torch::relu(in3->forward(conv3->forward(h)));
  return h;
}

StyleEncoderImpl::StyleEncoderImpl(const TranslatorConfig& cfg,
                                   const std::vector<int64_t>& adain_channels)
    : adain_channels_(adain_channels) {
  int64_t chans[] = {3, 32, 64, 128, 128};
  for (int i = 0; i < 4; ++i) {
    convs.push_back(register_module("conv" + std::to_string(i + 1),
                                    conv3x3(chans[i], chans[i + 1], 2)));
  }
  mlp1 = register_module("mlp1", torch::nn::Linear(128, cfg.style_dim));
  mlp2 = register_module("mlp2", torch::nn::Linear(cfg.style_dim, cfg.style_dim));
  for (size_t i = 0; i < adain_channels_.size(); ++i) {
    auto head = torch::nn::Linear(cfg.style_dim, 2 * adain_channels_[i]);
    {
      torch::NoGradGuard ng;
      head->weight.mul_(0.1);  // fresh style codes stay near (0, 1)
      head->bias.zero_();
    }
    heads.push_back(register_module("head" + std::to_string(i), head));
  }
}

StyleCode StyleEncoderImpl::forward(const torch::Tensor& y) {
  auto h = y.dim() == 3 ? y.unsqueeze(0) : y;
  for (auto& conv : convs) {
    h = torch::leaky_relu(conv->forward(h), 0.2);
  }
  auto pooled = h.mean({-2, -1});  // (B, 128)
  auto e = torch::leaky_relu(mlp1->forward(pooled), 0.2);
  e = mlp2->forward(e);

  StyleCode code;
  code.embedding = e;
  for (size_t i = 0; i < heads.size(); ++i) {
    auto out = heads[i]->forward(e);
    auto mean = out.narrow(-1, 0, adain_channels_[i]);
    auto raw_std = out.narrow(-1, adain_channels_[i], adain_channels_[i]);
    code.means.push_back(mean);
    code.stds.push_back(torch::softplus(raw_std + kStdBiasInit) + kSigmaEps);
  }
  return code;
}

ResAdainBlockImpl::ResAdainBlockImpl(int64_t channels) {
  conv1 = register_module("conv1", conv3x3(channels, channels));
  conv2 = register_module("conv2", conv3x3(channels, channels));
}

torch::Tensor ResAdainBlockImpl::forward(const torch::Tensor& x, const torch::Tensor& m1,
                                         const torch::Tensor& s1, const torch::Tensor& m2,
                                         const torch::Tensor& s2) {
  auto h = torch::leaky_relu(adain(conv1->forward(x), m1, s1), 0.2);
  h = adain(conv2->forward(h), m2, s2);
  return x + h;
}

DecoderImpl::DecoderImpl(const TranslatorConfig& cfg) : content_channels_(cfg.content_channels) {
  const int64_t c = cfg.content_channels;
  res1 = register_module("res1", ResAdainBlock(c));
  res2 = register_module("res2", ResAdainBlock(c));
  up_conv1 = register_module("up_conv1", conv3x3(c, c / 2));
  up_conv2 = register_module("up_conv2", conv3x3(c / 2, c / 4));
  out_conv = register_module("out_conv", conv3x3(c / 4, 3));
}

std::vector<int64_t> DecoderImpl::adain_channels() const {
  return {content_channels_, content_channels_, content_channels_, content_channels_};
}

torch::Tensor DecoderImpl::forward(const torch::Tensor& content_code, const StyleCode& style) {
  TORCH_CHECK(style.means.size() == 4 && style.stds.size() == 4,
              "decoder expects one (mean, std) pair per AdaIN layer");
  auto x = res1->forward(content_code, style.means[0], style.stds[0], style.means[1],
                         style.stds[1]);
  x = res2->forward(x, style.means[2], style.stds[2], style.means[3], style.stds[3]);
  x = torch::upsample_nearest2d(x, {x.size(2) * 2, x.size(3) * 2});
  x = torch::leaky_relu(up_conv1->forward(x), 0.2);
  x = torch::upsample_nearest2d(x, {x.size(2) * 2, x.size(3) * 2});
  x = torch::leaky_relu(up_conv2->forward(x), 0.2);
  return torch::tanh(out_conv->forward(x));
}

TranslatorImpl::TranslatorImpl(TranslatorConfig cfg) : cfg_(cfg) {
  TORCH_CHECK(cfg_.resolution % 4 == 0, "translator resolution must be divisible by 4");
  content_encoder = register_module("content_encoder", ContentEncoder(cfg_));
  decoder = register_module("decoder", Decoder(cfg_));
  style_encoder =
      register_module("style_encoder", StyleEncoder(cfg_, decoder->adain_channels()));
}

torch::Tensor TranslatorImpl::encode_content(const torch::Tensor& content_img) {
  check_image(content_img, cfg_.resolution, "encode_content");
  auto x = content_img.dim() == 3 ? content_img.unsqueeze(0) : content_img;
  return content_encoder->forward(x);
}

StyleCode TranslatorImpl::encode_style(const torch::Tensor& style_img) {
  check_image(style_img, cfg_.resolution, "encode_style");
  return style_encoder->forward(style_img);
}

torch::Tensor TranslatorImpl::translate(const torch::Tensor& content_img,
                                        const torch::Tensor& style_img) {
  auto code = encode_content(content_img);
  auto style = encode_style(style_img);
  return decoder->forward(code, style);
}

}  // namespace pir
