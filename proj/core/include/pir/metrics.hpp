#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pir/perceptual.hpp"

namespace pir {

/// Maps an image batch to feature vectors (B, dim).
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual torch::Tensor extract(const torch::Tensor& images) const = 0;
  virtual int64_t dim() const = 0;
};

/// Flattens images unchanged; used by estimation checks against known
/// synthetic distributions.
class IdentityExtractor final : public FeatureExtractor {
 public:
  explicit IdentityExtractor(int64_t dim) : dim_(dim) {}
  torch::Tensor extract(const torch::Tensor& images) const override;
  int64_t dim() const override { return dim_; }

 private:
  int64_t dim_;
};

/// Fixed-seed random conv stack with global average pooling. The default
/// evaluation extractor: deterministic, no external weights. Scores are
/// comparable only within one extractor choice.
class RandomConvExtractor final : public FeatureExtractor {
 public:
  explicit RandomConvExtractor(int64_t seed = 23);
  torch::Tensor extract(const torch::Tensor& images) const override;
  int64_t dim() const override { return 64; }

 private:
  RandomConvPerceptual stack_;
};

/// Gaussian fit of extractor features: empirical mean and unbiased
/// covariance, kept in double precision.
struct FeatureGaussian {
  torch::Tensor mean;        // (d)
  torch::Tensor covariance;  // (d, d), symmetric
  int64_t sample_count = 0;

  int64_t dim() const { return mean.size(0); }
};

/// Fits a FeatureGaussian to >= 2 images.
FeatureGaussian extract_feature_stats(const torch::Tensor& images,
                                      const FeatureExtractor& extractor);

/// Frechet distance between feature Gaussians:
///   |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}).
/// Matrix square roots go through symmetric eigendecomposition; eigenvalues
/// in [-1e-6, 0) clip to zero, anything lower raises NumericalError.
double fid(const FeatureGaussian& a, const FeatureGaussian& b);

struct IntraClusterResult {
  double mean = 0.0;
  double std = 0.0;
  bool degenerate = false;           // all samples fell into one cluster (k > 1)
  std::vector<int64_t> cluster_sizes;
};

/// Diversity measure: assigns each generated image to its nearest training
/// image under the backend distance, averages pairwise distances within
/// each cluster of size >= 2, and reports mean/std across those clusters.
IntraClusterResult intra_cluster_distance(const torch::Tensor& generated,
                                          const torch::Tensor& training_k,
                                          const PerceptualBackend& d);

namespace detail {

/// Core of intra_cluster_distance on precomputed matrices: `assign` is the
/// (n, k) generated-to-training distance matrix, `pairwise` the (n, n)
/// generated-to-generated one.
IntraClusterResult intra_cluster_from_matrices(const torch::Tensor& assign,
                                               const torch::Tensor& pairwise);

}  // namespace detail

/// balance = constant * ld / fid. Reported Table values match constant 1000.
double balance_index(double fid_value, double ld, double constant = 1000.0);

struct MetricsReport {
  double fid = 0.0;
  double intra_cluster_mean = 0.0;
  double intra_cluster_std = 0.0;
  double balance = 0.0;
  int64_t sample_count = 0;
  bool degenerate_clusters = false;

  /// Flat key = value document.
  std::string to_string() const;
  static MetricsReport from_string(const std::string& text);
};

void save_metrics_report(const MetricsReport& report, const std::string& path);
MetricsReport load_metrics_report(const std::string& path);

}  // namespace pir
