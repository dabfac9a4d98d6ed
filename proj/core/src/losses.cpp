#include "pir/losses.hpp"

#include <optional>

#include "pir/error.hpp"

namespace pir {

namespace {

void check_batch(const torch::Tensor& t, const char* where) {
  if (!t.defined() || t.dim() != 4 || t.size(0) == 0) {
    throw InvalidArgument(std::string(where) + ": empty or non-batched image input");
  }
}

// (1 - pw) * image head + pw * patch head, each already reduced to a scalar.
torch::Tensor combine_heads(const torch::Tensor& image_term, const torch::Tensor& patch_term,
                            double patch_weight) {
  return (1.0 - patch_weight) * image_term + patch_weight * patch_term;
}

torch::Tensor logistic_real(const DiscriminatorOutput& out, double pw) {
  return combine_heads(torch::softplus(-out.image_logit).mean(),
                       torch::softplus(-out.patch_logits).mean(), pw);
}

torch::Tensor logistic_fake(const DiscriminatorOutput& out, double pw) {
  return combine_heads(torch::softplus(out.image_logit).mean(),
                       torch::softplus(out.patch_logits).mean(), pw);
}

}  // namespace

torch::Tensor l1_distance(const torch::Tensor& a, const torch::Tensor& b) {
  if (a.sizes() != b.sizes()) {
    throw InvalidArgument("l1_distance: mismatched shapes");
  }
  auto diff = (a - b).abs();
  return a.dim() == 4 ? diff.mean({1, 2, 3}) : diff.mean();
}

torch::Tensor adversarial_d_loss(Discriminator& d, const torch::Tensor& real,
                                 const torch::Tensor& fake, double patch_weight) {
  check_batch(real, "adversarial_d_loss(real)");
  check_batch(fake, "adversarial_d_loss(fake)");
  if (fake.requires_grad()) {
    throw InvalidArgument("adversarial_d_loss: fake batch must be detached");
  }
  auto real_out = d->forward(real);
  auto fake_out = d->forward(fake);
  return logistic_real(real_out, patch_weight) + logistic_fake(fake_out, patch_weight);
}

torch::Tensor adversarial_g_loss(Discriminator& d, const torch::Tensor& fake,
                                 double patch_weight) {
  check_batch(fake, "adversarial_g_loss");
  auto out = d->forward(fake);
  return logistic_real(out, patch_weight);  // softplus(-logit) on fakes
}

torch::Tensor r1_penalty(Discriminator& d, const torch::Tensor& real, double patch_weight) {
  check_batch(real, "r1_penalty");
  auto x = real.detach().requires_grad_(true);
  auto out = d->forward(x);
  auto score = combine_heads(out.image_logit.sum(), out.patch_logits.mean({1, 2, 3}).sum(),
                             patch_weight);
  auto grads = torch::autograd::grad({score}, {x}, /*grad_outputs=*/{},
                                     /*retain_graph=*/false, /*create_graph=*/true);
  return 0.5 * grads[0].square().sum({1, 2, 3}).mean();
}

namespace detail {

torch::Tensor recon_term(const TranslateFn& translate, const MetricFn& metric,
                         const torch::Tensor& content_img, const torch::Tensor& style_img,
                         const torch::Tensor& reference) {
  auto recon = translate(content_img, style_img);
  return metric(recon, reference).mean();
}

}  // namespace detail

torch::Tensor generator_recon_loss(Generator& g_t, Generator& g_s, Translator& f,
                                   const torch::Tensor& zs, const LossConfig& cfg,
                                   const PerceptualBackend& perceptual,
                                   const ReconDiscriminators& rd) {
  if (!zs.defined() || zs.dim() != 2 || zs.size(0) == 0) {
    throw InvalidArgument("generator_recon_loss: empty latent batch");
  }
  if (cfg.recon_metric == ReconMetric::kAdversarial) {
    const bool need_source = cfg.recon_direction != ReconDirection::kTargetOnly;
    const bool need_target = cfg.recon_direction != ReconDirection::kSourceOnly;
    if ((need_source && rd.source.is_empty()) || (need_target && rd.target.is_empty())) {
      throw InvalidConfig(
          "generator_recon_loss: adversarial metric needs a discriminator handle per active "
          "direction");
    }
  }

  FreezeGuard freeze_f(*f);
  // Holder copies share the impl but drop constness; the guards restore the
  // trainable flags on exit.
  Discriminator rd_source = rd.source;
  Discriminator rd_target = rd.target;
  std::optional<FreezeGuard> freeze_rd_source, freeze_rd_target;
  if (cfg.recon_metric == ReconMetric::kAdversarial) {
    if (!rd_source.is_empty()) freeze_rd_source.emplace(*rd_source);
    if (!rd_target.is_empty()) freeze_rd_target.emplace(*rd_target);
  }
  auto x_t = g_t->forward(zs);
  torch::Tensor x_s;
  {
    torch::NoGradGuard ng;
    x_s = g_s->forward(zs);
  }

  detail::TranslateFn translate = [&f](const torch::Tensor& c, const torch::Tensor& s) {
    return f->translate(c, s);
  };

  // One term per reconstruction target; `reference` also carries gradients
  // when it is a G_T output.
  auto term = [&](const torch::Tensor& content, const torch::Tensor& style,
                  const torch::Tensor& reference, Discriminator domain_d) -> torch::Tensor {
    switch (cfg.recon_metric) {
      case ReconMetric::kL1:
        return detail::recon_term(translate, l1_distance, content, style, reference);
      case ReconMetric::kPerceptual:
        return detail::recon_term(
            translate,
            [&](const torch::Tensor& a, const torch::Tensor& b) {
              return perceptual.distance(a, b);
            },
            content, style, reference);
      case ReconMetric::kCodeL1: {
        auto recon = f->translate(content, style);
        auto content_code_in = f->encode_content(content);
        auto content_code_out = f->encode_content(recon);
        auto style_code_in = f->encode_style(style);
        auto style_code_out = f->encode_style(recon);
        return l1_distance(content_code_in, content_code_out).mean() +
               l1_distance(style_code_in.embedding, style_code_out.embedding).mean();
      }
      case ReconMetric::kAdversarial: {
        auto recon = f->translate(content, style);
        return adversarial_g_loss(domain_d, recon, cfg.patch_weight);
      }
    }
    throw InvalidConfig("generator_recon_loss: unknown reconstruction metric");
  };

  torch::Tensor source_term, target_term;
  if (cfg.recon_direction != ReconDirection::kTargetOnly) {
    source_term = term(x_t, x_s, x_s, rd_source);  // reconstruct the source image
  }
  if (cfg.recon_direction != ReconDirection::kSourceOnly) {
    target_term = term(x_s, x_t, x_t, rd_target);  // reconstruct the target image
  }
  if (cfg.recon_direction == ReconDirection::kSourceOnly) return source_term;
  if (cfg.recon_direction == ReconDirection::kTargetOnly) return target_term;
  return source_term + target_term;
}

TranslatorReconTerms translator_recon_terms(Generator& g_t, Generator& g_s, Translator& f,
                                            const torch::Tensor& zs,
                                            const PerceptualBackend& perceptual) {
  if (!zs.defined() || zs.dim() != 2 || zs.size(0) == 0) {
    throw InvalidArgument("translator_recon_loss: empty latent batch");
  }
  torch::Tensor x_t, x_s;
  {
    torch::NoGradGuard ng;
    x_t = g_t->forward(zs);
    x_s = g_s->forward(zs);
  }
  auto d = [&](const torch::Tensor& a, const torch::Tensor& b) {
    return perceptual.distance(a, b).mean();
  };
  TranslatorReconTerms terms;
  terms.cross_source = d(f->translate(x_t, x_s), x_s);
  terms.cross_target = d(f->translate(x_s, x_t), x_t);
  terms.self_source = d(f->translate(x_s, x_s), x_s);
  terms.self_target = d(f->translate(x_t, x_t), x_t);
  return terms;
}

torch::Tensor translator_recon_loss(Generator& g_t, Generator& g_s, Translator& f,
                                    const torch::Tensor& zs,
                                    const PerceptualBackend& perceptual) {
  return translator_recon_terms(g_t, g_s, f, zs, perceptual).total();
}

FreezeGuard::FreezeGuard(torch::nn::Module& m) {
  for (auto& p : m.parameters(/*recurse=*/true)) {
    if (p.requires_grad()) {
      p.set_requires_grad(false);
      frozen_.push_back(p);
    }
  }
}

FreezeGuard::~FreezeGuard() {
  for (auto& p : frozen_) {
    p.set_requires_grad(true);
  }
}

const char* to_string(ReconMetric m) {
  switch (m) {
    case ReconMetric::kL1: return "l1";
    case ReconMetric::kPerceptual: return "perceptual";
    case ReconMetric::kCodeL1: return "code_l1";
    case ReconMetric::kAdversarial: return "adversarial";
  }
  return "?";
}

const char* to_string(ReconDirection d) {
  switch (d) {
    case ReconDirection::kSourceOnly: return "source_only";
    case ReconDirection::kTargetOnly: return "target_only";
    case ReconDirection::kBoth: return "both";
  }
  return "?";
}

ReconMetric recon_metric_from_string(const std::string& s) {
  if (s == "l1") return ReconMetric::kL1;
  if (s == "perceptual") return ReconMetric::kPerceptual;
  if (s == "code_l1") return ReconMetric::kCodeL1;
  if (s == "adversarial") return ReconMetric::kAdversarial;
  throw InvalidConfig("unknown recon_metric '" + s + "'");
}

ReconDirection recon_direction_from_string(const std::string& s) {
  if (s == "source_only") return ReconDirection::kSourceOnly;
  if (s == "target_only") return ReconDirection::kTargetOnly;
  if (s == "both") return ReconDirection::kBoth;
  throw InvalidConfig("unknown recon_direction '" + s + "'");
}

}  // namespace pir
