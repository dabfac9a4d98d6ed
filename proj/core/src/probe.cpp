#include "pir/probe.hpp"

#include "pir/error.hpp"
#include "pir/latent.hpp"

namespace pir {

namespace {

torch::Tensor pool8(const torch::Tensor& images) {
  auto x = images.dim() == 3 ? images.unsqueeze(0) : images;
  return torch::adaptive_avg_pool2d(x, {8, 8}).flatten(1);  // (B, 192)
}

torch::Tensor predict_logits(torch::nn::Module& probe, const torch::Tensor& images) {
  torch::NoGradGuard ng;
  if (auto* c = probe.as<ContentProbeImpl>()) return c->forward(images);
  if (auto* d = probe.as<DomainProbeImpl>()) return d->forward(images);
  throw InvalidArgument("probe_accuracy: unsupported probe type");
}

// Plain Adam classification loop over shuffled minibatches.
template <typename Probe>
void fit_classifier(Probe& probe, const torch::Tensor& images, const torch::Tensor& labels,
                    const ProbeTrainConfig& cfg) {
  torch::optim::Adam opt(probe->parameters(), torch::optim::AdamOptions(cfg.lr));
  auto gen = make_generator(static_cast<uint64_t>(cfg.seed));
  const int64_t n = images.size(0);
  for (int64_t step = 0; step < cfg.steps; ++step) {
    auto idx = torch::randint(0, n, {std::min(cfg.batch_size, n)}, gen, torch::kInt64);
    auto x = images.index_select(0, idx);
    auto y = labels.index_select(0, idx);
    opt.zero_grad();
    auto loss = torch::cross_entropy_loss(probe->forward(x), y);
    loss.backward();
    opt.step();
  }
}

}  // namespace

ContentProbeImpl::ContentProbeImpl(int64_t num_classes) : num_classes_(num_classes) {
  auto conv = [](int64_t in, int64_t out) {
    return torch::nn::Conv2d(
        torch::nn::Conv2dOptions(in, out, 3).stride(2).padding(1).bias(false));
  };
  conv1 = register_module("conv1", conv(3, 16));
  conv2 = register_module("conv2", conv(16, 32));
  conv3 = register_module("conv3", conv(32, 64));
  head = register_module("head", torch::nn::Linear(64, num_classes));
}

torch::Tensor ContentProbeImpl::features(const torch::Tensor& images) {
  auto x = images.dim() == 3 ? images.unsqueeze(0) : images;
  x = torch::leaky_relu(conv1->forward(x), 0.2);
  x = torch::leaky_relu(conv2->forward(x), 0.2);
  x = torch::leaky_relu(conv3->forward(x), 0.2);
  return x.mean({-2, -1});
}

torch::Tensor ContentProbeImpl::forward(const torch::Tensor& images) {
  return head->forward(features(images));
}

torch::Tensor ContentProbeImpl::predict(const torch::Tensor& images) {
  torch::NoGradGuard ng;
  return forward(images).argmax(1);
}

std::vector<torch::Tensor> ContentProbeImpl::conv_weights() const {
  return {conv1->weight, conv2->weight, conv3->weight};
}

DomainProbeImpl::DomainProbeImpl() {
  linear = register_module("linear", torch::nn::Linear(3 * 8 * 8, 2));
}

torch::Tensor DomainProbeImpl::forward(const torch::Tensor& images) {
  return linear->forward(pool8(images));
}

torch::Tensor DomainProbeImpl::predict(const torch::Tensor& images) {
  torch::NoGradGuard ng;
  return forward(images).argmax(1);
}

ContentProbe train_content_probe(const torch::Tensor& images, const torch::Tensor& labels,
                                 int64_t num_classes, const ProbeTrainConfig& cfg) {
  if (!images.defined() || images.size(0) == 0 || images.size(0) != labels.size(0)) {
    throw InvalidArgument("train_content_probe: images/labels mismatch");
  }
  torch::manual_seed(static_cast<uint64_t>(cfg.seed));
  ContentProbe probe(num_classes);
  fit_classifier(probe, images, labels.to(torch::kLong), cfg);
  return probe;
}

DomainProbe train_domain_probe(const torch::Tensor& source_images,
                               const torch::Tensor& target_images,
                               const ProbeTrainConfig& cfg) {
  if (!source_images.defined() || !target_images.defined() || source_images.size(0) == 0 ||
      target_images.size(0) == 0) {
    throw InvalidArgument("train_domain_probe: empty domain");
  }
  torch::manual_seed(static_cast<uint64_t>(cfg.seed));
  DomainProbe probe;
  auto images = torch::cat({source_images, target_images}, 0);
  auto labels = torch::cat({torch::zeros({source_images.size(0)}, torch::kLong),
                            torch::ones({target_images.size(0)}, torch::kLong)});
  fit_classifier(probe, images, labels, cfg);
  return probe;
}

double probe_accuracy(torch::nn::Module& probe, const torch::Tensor& images,
                      const torch::Tensor& labels) {
  auto pred = predict_logits(probe, images).argmax(1);
  return pred.eq(labels.to(torch::kLong)).to(torch::kFloat64).mean().item<double>();
}

}  // namespace pir
