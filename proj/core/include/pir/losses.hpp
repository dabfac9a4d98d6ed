#pragma once

#include <torch/torch.h>

#include <functional>

#include "pir/discriminator.hpp"
#include "pir/generator.hpp"
#include "pir/perceptual.hpp"
#include "pir/translator.hpp"

namespace pir {

/// Which distance the generator-side reconstruction loss applies.
enum class ReconMetric { kL1, kPerceptual, kCodeL1, kAdversarial };

/// Which of the paired reconstructions constrain the target generator.
enum class ReconDirection { kSourceOnly, kTargetOnly, kBoth };

struct LossConfig {
  double lambda1 = 1.0;  // weight of the generator reconstruction loss
  double lambda2 = 1.0;  // weight of the translator reconstruction loss
  ReconMetric recon_metric = ReconMetric::kPerceptual;
  ReconDirection recon_direction = ReconDirection::kBoth;
  double patch_weight = 0.5;  // patch-head share in the adversarial losses
  double r1_gamma = 0.0;      // R1 gradient penalty on reals; 0 disables
};

/// Mean absolute error per sample, (B) for batched input.
torch::Tensor l1_distance(const torch::Tensor& a, const torch::Tensor& b);

/// Non-saturating logistic discriminator loss over both heads:
/// softplus(-logit) on reals plus softplus(logit) on fakes, with the image
/// head weighted (1 - patch_weight) and the patch-head mean weighted
/// patch_weight. `fake` must be detached.
torch::Tensor adversarial_d_loss(Discriminator& d, const torch::Tensor& real,
                                 const torch::Tensor& fake, double patch_weight = 0.5);

/// Generator-side non-saturating loss: softplus(-logit) on fakes, heads
/// combined as above. `fake` must retain generator gradients.
torch::Tensor adversarial_g_loss(Discriminator& d, const torch::Tensor& fake,
                                 double patch_weight = 0.5);

/// R1 penalty: 0.5 * E[|grad_x D(x)|^2] of the combined-head score on real
/// images. Caller scales by gamma.
torch::Tensor r1_penalty(Discriminator& d, const torch::Tensor& real,
                         double patch_weight = 0.5);

/// Discriminator handles for the adversarial reconstruction variant: the
/// reconstruction of a domain's image is scored by that domain's
/// discriminator.
struct ReconDiscriminators {
  Discriminator source{nullptr};
  Discriminator target{nullptr};
};

/// Generator-side paired reconstruction loss. With direction = both:
///   E_z[ d(F(G_T(z), G_S(z)), G_S(z)) + d(F(G_S(z), G_T(z)), G_T(z)) ]
/// where d is the configured metric; the single-direction variants keep one
/// term. F and G_S receive no gradient; G_T does.
torch::Tensor generator_recon_loss(Generator& g_t, Generator& g_s, Translator& f,
                                   const torch::Tensor& zs, const LossConfig& cfg,
                                   const PerceptualBackend& perceptual,
                                   const ReconDiscriminators& rd = {});

/// The four perceptual terms of the translator's reconstruction loss.
struct TranslatorReconTerms {
  torch::Tensor cross_source;  // F(G_T(z), G_S(z)) vs G_S(z)
  torch::Tensor cross_target;  // F(G_S(z), G_T(z)) vs G_T(z)
  torch::Tensor self_source;   // F(G_S(z), G_S(z)) vs G_S(z)
  torch::Tensor self_target;   // F(G_T(z), G_T(z)) vs G_T(z)

  torch::Tensor total() const { return cross_source + cross_target + self_source + self_target; }
  torch::Tensor self_only() const { return self_source + self_target; }
};

/// Translator-side reconstruction terms; both generators are frozen, F is
/// trainable.
TranslatorReconTerms translator_recon_terms(Generator& g_t, Generator& g_s, Translator& f,
                                            const torch::Tensor& zs,
                                            const PerceptualBackend& perceptual);

torch::Tensor translator_recon_loss(Generator& g_t, Generator& g_s, Translator& f,
                                    const torch::Tensor& zs,
                                    const PerceptualBackend& perceptual);

/// Temporarily marks a module's parameters non-trainable; restores the
/// previous flags on destruction. Ops recorded while the guard is alive
/// treat the parameters as constants.
class FreezeGuard {
 public:
  explicit FreezeGuard(torch::nn::Module& m);
  ~FreezeGuard();
  FreezeGuard(const FreezeGuard&) = delete;
  FreezeGuard& operator=(const FreezeGuard&) = delete;

 private:
  std::vector<torch::Tensor> frozen_;
};

namespace detail {

using TranslateFn =
    std::function<torch::Tensor(const torch::Tensor& content, const torch::Tensor& style)>;
using MetricFn = std::function<torch::Tensor(const torch::Tensor&, const torch::Tensor&)>;

/// d(translate(content, style), reference), averaged over the batch. The
/// aggregation core behind both reconstruction losses; tests drive it with
/// synthetic translate/metric functions.
torch::Tensor recon_term(const TranslateFn& translate, const MetricFn& metric,
                         const torch::Tensor& content_img, const torch::Tensor& style_img,
                         const torch::Tensor& reference);

}  // namespace detail

const char* to_string(ReconMetric m);
const char* to_string(ReconDirection d);
ReconMetric recon_metric_from_string(const std::string& s);
ReconDirection recon_direction_from_string(const std::string& s);

}  // namespace pir
