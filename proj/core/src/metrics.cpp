#include "pir/metrics.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "pir/error.hpp"

namespace pir {

namespace {

constexpr double kEigClip = -1e-6;

// Symmetric PSD square root via eigendecomposition. Eigenvalues slightly
// below zero (>= kEigClip) clip to zero.
torch::Tensor sqrtm_psd(const torch::Tensor& m, const char* what) {
  auto sym = 0.5 * (m + m.t());
  auto [vals, vecs] = torch::linalg_eigh(sym, "L");
  if ((vals < kEigClip).any().item<bool>()) {
    throw NumericalError(std::string("fid: ") + what + " has eigenvalue below " +
                         std::to_string(kEigClip));
  }
  auto clipped = vals.clamp_min(0.0);
  return vecs.matmul(torch::diag(clipped.sqrt())).matmul(vecs.t());
}

}  // namespace

torch::Tensor IdentityExtractor::extract(const torch::Tensor& images) const {
  auto flat = images.flatten(1).to(torch::kFloat64);
  TORCH_CHECK(flat.size(1) == dim_, "IdentityExtractor: dimension mismatch");
  return flat;
}

RandomConvExtractor::RandomConvExtractor(int64_t seed) : stack_(seed) {}

torch::Tensor RandomConvExtractor::extract(const torch::Tensor& images) const {
  torch::NoGradGuard ng;
  auto f = stack_.features(images.dim() == 3 ? images.unsqueeze(0) : images);
  return f.back().mean({-2, -1}).to(torch::kFloat64);  // (B, 64)
}

FeatureGaussian extract_feature_stats(const torch::Tensor& images,
                                      const FeatureExtractor& extractor) {
  if (!images.defined() || images.size(0) < 2) {
    throw InvalidArgument("extract_feature_stats: need at least 2 images");
  }
  torch::NoGradGuard ng;
  const int64_t n = images.size(0);
  const int64_t chunk = 256;
  std::vector<torch::Tensor> feats;
  for (int64_t i = 0; i < n; i += chunk) {
    feats.push_back(extractor.extract(images.narrow(0, i, std::min(chunk, n - i))));
  }
  auto x = torch::cat(feats, 0).to(torch::kFloat64);  // (n, d)
  auto mean = x.mean(0);
  auto centered = x - mean.unsqueeze(0);
  auto cov = centered.t().matmul(centered) / static_cast<double>(n - 1);
  cov = 0.5 * (cov + cov.t());
  return {mean, cov, n};
}

double fid(const FeatureGaussian& a, const FeatureGaussian& b) {
  if (a.dim() != b.dim()) {
    throw InvalidArgument("fid: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()) + ")");
  }
  if (a.mean.equal(b.mean) && a.covariance.equal(b.covariance)) {
    return 0.0;
  }
  auto mu_a = a.mean.to(torch::kFloat64);
  auto mu_b = b.mean.to(torch::kFloat64);
  auto cov_a = a.covariance.to(torch::kFloat64);
  auto cov_b = b.covariance.to(torch::kFloat64);

  auto sqrt_a = sqrtm_psd(cov_a, "covariance");
  auto inner = sqrt_a.matmul(cov_b).matmul(sqrt_a);
  auto sym = 0.5 * (inner + inner.t());
  auto [vals, vecs] = torch::linalg_eigh(sym, "L");
  (void)vecs;
  if ((vals < kEigClip).any().item<bool>()) {
    throw NumericalError("fid: product matrix has eigenvalue below clipping threshold");
  }
  const double tr_sqrt = vals.clamp_min(0.0).sqrt().sum().item<double>();
  const double mean_term = (mu_a - mu_b).square().sum().item<double>();
  const double trace_term =
      cov_a.diagonal().sum().item<double>() + cov_b.diagonal().sum().item<double>();
  return std::max(0.0, mean_term + trace_term - 2.0 * tr_sqrt);
}

namespace detail {

IntraClusterResult intra_cluster_from_matrices(const torch::Tensor& assign,
                                               const torch::Tensor& pairwise) {
  const int64_t n = assign.size(0);
  const int64_t k = assign.size(1);
  auto nearest = assign.argmin(1);  // (n)

  std::vector<std::vector<int64_t>> clusters(k);
  for (int64_t i = 0; i < n; ++i) {
    clusters[nearest[i].item<int64_t>()].push_back(i);
  }

  IntraClusterResult result;
  int64_t occupied = 0;
  std::vector<double> cluster_means;
  auto pw = pairwise.accessor<double, 2>();
  for (int64_t c = 0; c < k; ++c) {
    const auto& members = clusters[c];
    result.cluster_sizes.push_back(static_cast<int64_t>(members.size()));
    if (!members.empty()) ++occupied;
    if (members.size() < 2) continue;  // singleton clusters carry no pairwise distance
    double sum = 0.0;
    int64_t pairs = 0;
    for (size_t i = 0; i < members.size(); ++i) {
      for (size_t j = i + 1; j < members.size(); ++j) {
        sum += pw[members[i]][members[j]];
        ++pairs;
      }
    }
    cluster_means.push_back(sum / static_cast<double>(pairs));
  }

  result.degenerate = (k > 1 && occupied <= 1);
  if (cluster_means.empty()) {
    result.mean = 0.0;
    result.std = 0.0;
    return result;
  }
  double mean = 0.0;
  for (double v : cluster_means) mean += v;
  mean /= static_cast<double>(cluster_means.size());
  double var = 0.0;
  for (double v : cluster_means) var += (v - mean) * (v - mean);
  var /= static_cast<double>(cluster_means.size());
  result.mean = mean;
  result.std = std::sqrt(var);
  return result;
}

}  // namespace detail

IntraClusterResult intra_cluster_distance(const torch::Tensor& generated,
                                          const torch::Tensor& training_k,
                                          const PerceptualBackend& d) {
  const int64_t k = training_k.defined() ? training_k.size(0) : 0;
  if (k < 1) {
    throw InvalidArgument("intra_cluster_distance: need at least 1 training image");
  }
  if (!generated.defined() || generated.size(0) < 2 * k) {
    throw InvalidArgument("intra_cluster_distance: need at least 2k generated images");
  }
  auto assign = d.pairwise(generated, training_k);
  auto pw = d.pairwise(generated, generated);
  return detail::intra_cluster_from_matrices(assign, pw);
}

double balance_index(double fid_value, double ld, double constant) {
  if (!(fid_value > 0.0)) {
    throw InvalidArgument("balance_index: fid must be > 0");
  }
  if (ld < 0.0) {
    throw InvalidArgument("balance_index: ld must be >= 0");
  }
  return constant * ld / fid_value;
}

std::string MetricsReport::to_string() const {
  std::ostringstream os;
  os.precision(10);
  os << "fid = " << fid << "\n";
  os << "intra_cluster_mean = " << intra_cluster_mean << "\n";
  os << "intra_cluster_std = " << intra_cluster_std << "\n";
  os << "balance = " << balance << "\n";
  os << "sample_count = " << sample_count << "\n";
  os << "degenerate_clusters = " << (degenerate_clusters ? 1 : 0) << "\n";
  return os.str();
}

MetricsReport MetricsReport::from_string(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto key = line.substr(0, eq);
    auto value = line.substr(eq + 1);
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    kv[trim(key)] = trim(value);
  }
  MetricsReport r;
  r.fid = std::stod(kv.at("fid"));
  r.intra_cluster_mean = std::stod(kv.at("intra_cluster_mean"));
  r.intra_cluster_std = std::stod(kv.at("intra_cluster_std"));
  r.balance = std::stod(kv.at("balance"));
  r.sample_count = std::stoll(kv.at("sample_count"));
  r.degenerate_clusters = kv.at("degenerate_clusters") == "1";
  return r;
}

void save_metrics_report(const MetricsReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw NotFound("cannot write metrics report to " + path);
  }
  out << report.to_string();
}

MetricsReport load_metrics_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw NotFound("cannot read metrics report from " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return MetricsReport::from_string(ss.str());
}

}  // namespace pir
