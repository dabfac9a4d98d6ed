#include "pir/discriminator.hpp"

#include "pir/error.hpp"
#include "pir/generator.hpp"

namespace pir {

DiscriminatorImpl::DiscriminatorImpl(DiscriminatorConfig cfg) : cfg_(cfg) {
  TORCH_CHECK(cfg_.resolution >= 16 && (cfg_.resolution & (cfg_.resolution - 1)) == 0,
              "discriminator resolution must be a power of two >= 16");
  patch_res_ = cfg_.resolution / 4;
  from_rgb = register_module(
      "from_rgb", torch::nn::Conv2d(
                      torch::nn::Conv2dOptions(3, cfg_.channels_at(cfg_.resolution), 3).padding(1)));
  int i = 0;
  for (int64_t res = cfg_.resolution; res > 4; res /= 2) {
    auto conv = torch::nn::Conv2d(torch::nn::Conv2dOptions(cfg_.channels_at(res),
                                                           cfg_.channels_at(res / 2), 3)
                                      .stride(2)
                                      .padding(1));
    downs.push_back(register_module("down" + std::to_string(i++), conv));
  }
  patch_head = register_module(
      "patch_head",
      torch::nn::Conv2d(torch::nn::Conv2dOptions(cfg_.channels_at(patch_res_), 1, 1)));
  image_head =
      register_module("image_head", torch::nn::Linear(cfg_.channels_at(4) * 4 * 4, 1));
}

DiscriminatorOutput DiscriminatorImpl::forward(const torch::Tensor& images) {
  check_image(images, cfg_.resolution, "discriminate");
  auto x = images.dim() == 3 ? images.unsqueeze(0) : images;
  x = torch::leaky_relu(from_rgb->forward(x), 0.2);
  torch::Tensor patch;
  int64_t res = cfg_.resolution;
  for (auto& down : downs) {
    x = torch::leaky_relu(down->forward(x), 0.2);
    res /= 2;
    if (res == patch_res_) {
      patch = patch_head->forward(x);
    }
  }
  auto image_logit = image_head->forward(x.flatten(1)).squeeze(-1);
  return {image_logit, patch};
}

Discriminator clone_discriminator(const Discriminator& src) {
  Discriminator dst(src->config());
  torch::NoGradGuard ng;
  auto sp = src->named_parameters(true);
  for (auto& item : dst->named_parameters(true)) {
    item.value().copy_(*sp.find(item.key()));
  }
  auto sb = src->named_buffers(true);
  for (auto& item : dst->named_buffers(true)) {
    item.value().copy_(*sb.find(item.key()));
  }
  return dst;
}

}  // namespace pir
