#pragma once

#include <torch/torch.h>

#include "pir/config.hpp"
#include "pir/generator.hpp"
#include "pir/metrics.hpp"

namespace pir {

/// Draws cfg.eval_samples images from `g` (seeded), then reports FID
/// against `real_images`, the intra-cluster distance against `train_k`,
/// and the balance index.
MetricsReport compute_metrics_report(Generator& g, const torch::Tensor& train_k,
                                     const torch::Tensor& real_images,
                                     const TrainingConfig& cfg);

/// Mean pairwise perceptual distance over all unordered pairs in `images`;
/// the diversity measure behind the overfitting checks.
double mean_pairwise_distance(const torch::Tensor& images, const PerceptualBackend& d);

/// Batched seeded sampling from a generator (no gradients).
torch::Tensor sample_images(Generator& g, int64_t count, int64_t seed,
                            int64_t batch_size = 64);

/// Images for a given latent batch (no gradients).
torch::Tensor generate_images(Generator& g, const torch::Tensor& zs, int64_t batch_size = 64);

}  // namespace pir
