#include "pir/evaluate.hpp"

#include "pir/error.hpp"
#include "pir/latent.hpp"
#include "pir/trainer.hpp"

namespace pir {

torch::Tensor generate_images(Generator& g, const torch::Tensor& zs, int64_t batch_size) {
  torch::NoGradGuard ng;
  std::vector<torch::Tensor> out;
  const int64_t n = zs.size(0);
  for (int64_t i = 0; i < n; i += batch_size) {
    out.push_back(g->forward(zs.narrow(0, i, std::min(batch_size, n - i))));
  }
  return torch::cat(out, 0);
}

torch::Tensor sample_images(Generator& g, int64_t count, int64_t seed, int64_t batch_size) {
  auto zs = sample_latent(count, seed, g->config().z_dim);
  return generate_images(g, zs, batch_size);
}

double mean_pairwise_distance(const torch::Tensor& images, const PerceptualBackend& d) {
  if (!images.defined() || images.size(0) < 2) {
    throw InvalidArgument("mean_pairwise_distance: need at least 2 images");
  }
  auto pw = d.pairwise(images, images);
  const int64_t n = pw.size(0);
  auto off_diag_sum = pw.sum() - pw.diagonal().sum();
  return off_diag_sum.item<double>() / static_cast<double>(n * (n - 1));
}

MetricsReport compute_metrics_report(Generator& g, const torch::Tensor& train_k,
                                     const torch::Tensor& real_images,
                                     const TrainingConfig& cfg) {
  auto generated = sample_images(g, cfg.eval_samples, cfg.seed + 101);
  auto backend = make_perceptual_backend(cfg);
  RandomConvExtractor extractor(cfg.perceptual_seed + 6);

  auto real_stats = extract_feature_stats(real_images, extractor);
  auto fake_stats = extract_feature_stats(generated, extractor);

  MetricsReport report;
  report.fid = fid(real_stats, fake_stats);
  auto icd = intra_cluster_distance(generated, train_k, *backend);
  report.intra_cluster_mean = icd.mean;
  report.intra_cluster_std = icd.std;
  report.degenerate_clusters = icd.degenerate;
  report.balance = report.fid > 0.0
                       ? balance_index(report.fid, icd.mean, cfg.balance_constant)
                       : 0.0;
  report.sample_count = cfg.eval_samples;
  return report;
}

}  // namespace pir
