#include "pir/generator.hpp"

#include <cmath>

#include "pir/error.hpp"
#include "pir/latent.hpp"

namespace pir {

namespace {

bool is_pow2(int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

torch::Tensor he_normal(std::initializer_list<int64_t> shape, int64_t fan_in) {
  auto t = torch::randn(shape) * std::sqrt(2.0 / static_cast<double>(fan_in));
  return t;
}

}  // namespace

MappingNetworkImpl::MappingNetworkImpl(int64_t z_dim, int64_t w_dim, int64_t layers) {
  TORCH_CHECK(layers >= 1, "mapping network needs at least one layer");
  int64_t in = z_dim;
  for (int64_t i = 0; i < layers; ++i) {
    auto fc = torch::nn::Linear(in, w_dim);
    fcs.push_back(register_module("fc" + std::to_string(i), fc));
    in = w_dim;
  }
}

torch::Tensor MappingNetworkImpl::forward(const torch::Tensor& z) {
  // Pixel norm keeps the prior's scale from drifting through the MLP.
  auto x = z * torch::rsqrt(z.square().mean(-1, /*keepdim=*/true) + 1e-8);
  for (auto& fc : fcs) {
    x = torch::leaky_relu(fc->forward(x), 0.2);
  }
  return x;
}

ModulatedConv2dImpl::ModulatedConv2dImpl(int64_t in_ch, int64_t out_ch, int64_t kernel,
                                         int64_t w_dim, bool demodulate)
    : kernel_(kernel), demodulate_(demodulate) {
  weight = register_parameter("weight", he_normal({out_ch, in_ch, kernel, kernel},
                                                  in_ch * kernel * kernel));
  affine = register_module("affine", torch::nn::Linear(w_dim, in_ch));
  // Styles start at 1 so a fresh layer is an ordinary convolution.
  torch::NoGradGuard ng;
  affine->bias.fill_(1.0);
}

torch::Tensor ModulatedConv2dImpl::forward(const torch::Tensor& x, const torch::Tensor& w) {
  const int64_t batch = x.size(0);
  const int64_t in_ch = weight.size(1);
  const int64_t out_ch = weight.size(0);

  auto style = affine->forward(w);                                    // (B, in)
  auto wmod = weight.unsqueeze(0) * style.reshape({batch, 1, in_ch, 1, 1});
  if (demodulate_) {
    auto denom = torch::rsqrt(wmod.square().sum({2, 3, 4}, /*keepdim=*/true) + 1e-8);
    wmod = wmod * denom;
  }
  // Grouped conv: fold the batch into the channel dimension.
  auto xg = x.reshape({1, batch * in_ch, x.size(2), x.size(3)});
  auto wg = wmod.reshape({batch * out_ch, in_ch, kernel_, kernel_});
  auto y = torch::conv2d(xg, wg, /*bias=*/{}, /*stride=*/1, /*padding=*/kernel_ / 2,
                         /*dilation=*/1, /*groups=*/batch);
  return y.reshape({batch, out_ch, y.size(2), y.size(3)});
}

SynthesisBlockImpl::SynthesisBlockImpl(int64_t in_ch, int64_t out_ch, int64_t w_dim, int64_t res,
                                       bool upsample, int64_t noise_seed)
    : upsample_(upsample) {
  conv = register_module("conv", ModulatedConv2d(in_ch, out_ch, 3, w_dim));
  bias = register_parameter("bias", torch::zeros({out_ch}));
  noise_strength = register_parameter("noise_strength", torch::zeros({1}));
  // Per-layer fixed noise: seeded by (noise_seed, res) so construction order
  // does not matter and generate() stays deterministic.
  auto gen = make_generator(static_cast<uint64_t>(noise_seed) * 1315423911ull +
                            static_cast<uint64_t>(res));
  noise = register_buffer("noise", torch::randn({1, 1, res, res}, gen));
}

torch::Tensor SynthesisBlockImpl::forward(const torch::Tensor& x, const torch::Tensor& w) {
  auto h = x;
  if (upsample_) {
    h = torch::upsample_nearest2d(h, {h.size(2) * 2, h.size(3) * 2});
  }
  h = conv->forward(h, w);
  h = h + noise_strength * noise;
  h = h + bias.reshape({1, -1, 1, 1});
  return torch::leaky_relu(h, 0.2);
}

GeneratorImpl::GeneratorImpl(GeneratorConfig cfg) : cfg_(cfg) {
  TORCH_CHECK(is_pow2(cfg_.resolution) && cfg_.resolution >= 8,
              "generator resolution must be a power of two >= 8");
  mapping = register_module("mapping",
                            MappingNetwork(cfg_.z_dim, cfg_.w_dim, cfg_.mapping_layers));
  const int64_t c4 = cfg_.channels_at(4);
  const_input = register_parameter("const_input", torch::randn({1, c4, 4, 4}));
  input_block = register_module(
      "input_block", SynthesisBlock(c4, c4, cfg_.w_dim, 4, /*upsample=*/false, cfg_.noise_seed));
  int64_t in_ch = c4;
  for (int64_t res = 8; res <= cfg_.resolution; res *= 2) {
    int64_t out_ch = cfg_.channels_at(res);
    auto block = SynthesisBlock(in_ch, out_ch, cfg_.w_dim, res, /*upsample=*/true,
                                cfg_.noise_seed);
    blocks.push_back(register_module("block" + std::to_string(res), block));
    in_ch = out_ch;
  }
  to_rgb = register_module("to_rgb",
                           ModulatedConv2d(in_ch, 3, 1, cfg_.w_dim, /*demodulate=*/false));
  rgb_bias = register_parameter("rgb_bias", torch::zeros({3}));
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& z) {
  if (z.dim() != 2 || z.size(1) != cfg_.z_dim) {
    throw InvalidArgument("generate: latent batch must be (B, " + std::to_string(cfg_.z_dim) +
                          "), got " + std::to_string(z.dim()) + "d input");
  }
  auto w = mapping->forward(z);
  auto x = const_input.expand({z.size(0), -1, -1, -1});
  x = input_block->forward(x, w);
  for (auto& block : blocks) {
    x = block->forward(x, w);
  }
  auto img = to_rgb->forward(x, w) + rgb_bias.reshape({1, 3, 1, 1});
  return torch::tanh(img);
}

Generator clone_generator(const Generator& src) {
  Generator dst(src->config());
  torch::NoGradGuard ng;
  auto sp = src->named_parameters(/*recurse=*/true);
  for (auto& item : dst->named_parameters(/*recurse=*/true)) {
    item.value().copy_(*sp.find(item.key()));
  }
  auto sb = src->named_buffers(/*recurse=*/true);
  for (auto& item : dst->named_buffers(/*recurse=*/true)) {
    item.value().copy_(*sb.find(item.key()));
  }
  return dst;
}

void freeze(torch::nn::Module& m) {
  for (auto& p : m.parameters(/*recurse=*/true)) {
    p.set_requires_grad(false);
  }
}

void check_image(const torch::Tensor& img, int64_t resolution, const char* where) {
  bool ok = (img.dim() == 3 && img.size(0) == 3) || (img.dim() == 4 && img.size(1) == 3);
  int64_t h = img.size(img.dim() - 2);
  int64_t w = img.size(img.dim() - 1);
  ok = ok && h == resolution && w == resolution;
  if (!ok) {
    throw InvalidArgument(std::string(where) + ": expected image (.., 3, " +
                          std::to_string(resolution) + ", " + std::to_string(resolution) +
                          ")");
  }
  if (!img.isfinite().all().item<bool>()) {
    throw InvalidArgument(std::string(where) + ": image has non-finite entries");
  }
}

}  // namespace pir
