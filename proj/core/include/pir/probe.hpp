#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <vector>

namespace pir {

struct ProbeTrainConfig {
  int64_t steps = 600;
  int64_t batch_size = 64;
  double lr = 2e-3;
  int64_t seed = 5;
};

/// Small conv classifier over toy content labels (shape classes). Its
/// pooled trunk features double as a trained feature space for metrics.
struct ContentProbeImpl : torch::nn::Module {
  explicit ContentProbeImpl(int64_t num_classes);

  torch::Tensor forward(const torch::Tensor& images);   // (B, classes) logits
  torch::Tensor features(const torch::Tensor& images);  // (B, 64) pooled
  torch::Tensor predict(const torch::Tensor& images);   // (B) argmax labels

  /// Trunk conv kernels, shallowest first (for ConvStackPerceptual).
  std::vector<torch::Tensor> conv_weights() const;

  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr}, conv3{nullptr};
  torch::nn::Linear head{nullptr};
  int64_t num_classes_ = 0;
};
TORCH_MODULE(ContentProbe);

/// Logistic regression on 8x8-pooled pixels; two classes (0 = source
/// domain, 1 = target domain).
struct DomainProbeImpl : torch::nn::Module {
  DomainProbeImpl();
  torch::Tensor forward(const torch::Tensor& images);  // (B, 2) logits
  torch::Tensor predict(const torch::Tensor& images);

  torch::nn::Linear linear{nullptr};
};
TORCH_MODULE(DomainProbe);

ContentProbe train_content_probe(const torch::Tensor& images, const torch::Tensor& labels,
                                 int64_t num_classes, const ProbeTrainConfig& cfg = {});

DomainProbe train_domain_probe(const torch::Tensor& source_images,
                               const torch::Tensor& target_images,
                               const ProbeTrainConfig& cfg = {});

/// Fraction of images whose predicted label matches `labels`.
double probe_accuracy(torch::nn::Module& probe, const torch::Tensor& images,
                      const torch::Tensor& labels);

}  // namespace pir
