#include <gtest/gtest.h>
#include <torch/torch.h>

#include <cmath>

#include "pir/discriminator.hpp"
#include "pir/error.hpp"
#include "pir/generator.hpp"
#include "pir/latent.hpp"
#include "pir/losses.hpp"
#include "pir/perceptual.hpp"
#include "pir/translator.hpp"

using namespace pir;

namespace {

GeneratorConfig tiny_gen_config() {
  GeneratorConfig cfg;
  cfg.resolution = 16;
  cfg.z_dim = 8;
  cfg.w_dim = 8;
  cfg.mapping_layers = 2;
  cfg.base_channels = 8;
  cfg.max_channels = 16;
  return cfg;
}

TranslatorConfig tiny_translator_config() {
  TranslatorConfig cfg;
  cfg.resolution = 16;
  cfg.content_channels = 16;
  cfg.style_dim = 16;
  return cfg;
}

void zero_module(torch::nn::Module& m) {
  torch::NoGradGuard ng;
  for (auto& p : m.parameters()) p.zero_();
}

// Scalar-arithmetic softplus oracle over explicit logits.
double softplus_oracle(const torch::Tensor& logits, bool negate) {
  auto flat = logits.flatten().to(torch::kFloat64);
  double sum = 0.0;
  for (int64_t i = 0; i < flat.size(0); ++i) {
    const double x = negate ? -flat[i].item<double>() : flat[i].item<double>();
    sum += std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0);
  }
  return sum / static_cast<double>(flat.size(0));
}

}  // namespace

TEST(PerceptualDistance, PseudoMetricProperties) {
  RandomConvPerceptual lpips(17);
  torch::manual_seed(1);
  auto x = torch::rand({3, 32, 32}) * 2 - 1;
  auto y = torch::rand({3, 32, 32}) * 2 - 1;
  EXPECT_DOUBLE_EQ(lpips.distance_scalar(x, x), 0.0);
  EXPECT_DOUBLE_EQ(lpips.distance_scalar(x, y), lpips.distance_scalar(y, x));
  EXPECT_GE(lpips.distance_scalar(x, y), 0.0);
  EXPECT_THROW(lpips.distance(x, torch::rand({3, 16, 16})), InvalidArgument);
}

TEST(PerceptualDistance, NoiseCloserThanUnrelated) {
  RandomConvPerceptual lpips(17);
  auto gen = make_generator(5);
  int wins = 0;
  for (int t = 0; t < 50; ++t) {
    auto x = torch::rand({3, 32, 32}, gen) * 2 - 1;
    auto noisy = (x + 0.02 * torch::randn({3, 32, 32}, gen)).clamp(-1, 1);
    auto unrelated = torch::rand({3, 32, 32}, gen) * 2 - 1;
    if (lpips.distance_scalar(x, noisy) < lpips.distance_scalar(x, unrelated)) ++wins;
  }
  EXPECT_EQ(wins, 50);
}

TEST(AdversarialLosses, ZeroLogitsGiveLog2) {
  torch::manual_seed(2);
  Discriminator d(DiscriminatorConfig{.resolution = 16});
  zero_module(*d);  // all logits exactly zero
  auto real = torch::rand({4, 3, 16, 16}) * 2 - 1;
  auto fake = torch::rand({4, 3, 16, 16}) * 2 - 1;
  const double ln2 = std::log(2.0);
  EXPECT_NEAR(adversarial_d_loss(d, real, fake).item<double>(), 2.0 * ln2, 1e-6);
  EXPECT_NEAR(adversarial_g_loss(d, fake).item<double>(), ln2, 1e-6);
}

TEST(AdversarialLosses, AsymptoteTowardZero) {
  torch::manual_seed(3);
  Discriminator d(DiscriminatorConfig{.resolution = 16});
  zero_module(*d);
  {
    // Bias the heads so real logits are large positive, fake detection
    // saturates: loss should approach 0 for correctly separated inputs.
    torch::NoGradGuard ng;
    d->image_head->bias.fill_(30.0);
    d->patch_head->bias.fill_(30.0);
  }
  auto real = torch::rand({2, 3, 16, 16});
  EXPECT_NEAR(adversarial_g_loss(d, real).item<double>(), 0.0, 1e-9);
}

TEST(AdversarialLosses, MatchesScalarOracle) {
  torch::manual_seed(4);
  Discriminator d(DiscriminatorConfig{.resolution = 16});
  auto real = torch::rand({4, 3, 16, 16}) * 2 - 1;
  auto fake = torch::rand({4, 3, 16, 16}) * 2 - 1;
  const double pw = 0.5;

  auto real_out = d->forward(real);
  auto fake_out = d->forward(fake);
  const double want_d = (1 - pw) * softplus_oracle(real_out.image_logit, true) +
                        pw * softplus_oracle(real_out.patch_logits, true) +
                        (1 - pw) * softplus_oracle(fake_out.image_logit, false) +
                        pw * softplus_oracle(fake_out.patch_logits, false);
  EXPECT_NEAR(adversarial_d_loss(d, real, fake, pw).item<double>(), want_d, 1e-6);

  const double want_g = (1 - pw) * softplus_oracle(fake_out.image_logit, true) +
                        pw * softplus_oracle(fake_out.patch_logits, true);
  EXPECT_NEAR(adversarial_g_loss(d, fake, pw).item<double>(), want_g, 1e-6);

  // Uneven head weighting follows the same arithmetic.
  const double pw2 = 0.25;
  const double want_g2 = (1 - pw2) * softplus_oracle(fake_out.image_logit, true) +
                         pw2 * softplus_oracle(fake_out.patch_logits, true);
  EXPECT_NEAR(adversarial_g_loss(d, fake, pw2).item<double>(), want_g2, 1e-6);
}

TEST(AdversarialLosses, EmptyBatchThrows) {
  torch::manual_seed(5);
  Discriminator d(DiscriminatorConfig{.resolution = 16});
  auto empty = torch::empty({0, 3, 16, 16});
  auto some = torch::rand({2, 3, 16, 16});
  EXPECT_THROW(adversarial_d_loss(d, empty, some), InvalidArgument);
  EXPECT_THROW(adversarial_d_loss(d, some, empty), InvalidArgument);
  EXPECT_THROW(adversarial_g_loss(d, empty), InvalidArgument);
}

TEST(AdversarialLosses, AttachedFakeRejectedByDLoss) {
  torch::manual_seed(6);
  Discriminator d(DiscriminatorConfig{.resolution = 16});
  auto real = torch::rand({2, 3, 16, 16});
  auto fake = torch::rand({2, 3, 16, 16}).requires_grad_(true);
  EXPECT_THROW(adversarial_d_loss(d, real, fake * 1.0), InvalidArgument);
}

TEST(L1Distance, HandComputed) {
  auto a = torch::tensor({{1.0f, 2.0f}, {3.0f, 4.0f}}).reshape({1, 1, 2, 2});
  auto b = torch::tensor({{2.0f, 0.0f}, {3.0f, 6.0f}}).reshape({1, 1, 2, 2});
  // |1-2| + |2-0| + |3-3| + |4-6| = 5, mean = 1.25
  EXPECT_NEAR(l1_distance(a, b)[0].item<double>(), 1.25, 1e-7);
}

TEST(ReconTermCore, IdentityTranslatorGivesZero) {
  torch::manual_seed(7);
  auto imgs = torch::rand({3, 3, 16, 16}) * 2 - 1;
  auto identity = [](const torch::Tensor& content, const torch::Tensor&) { return content; };
  auto loss = pir::detail::recon_term(identity, l1_distance, imgs, imgs, imgs);
  EXPECT_DOUBLE_EQ(loss.item<double>(), 0.0);
}

TEST(GeneratorReconLoss, L1MatchesHandArithmetic) {
  torch::manual_seed(8);
  Generator g_s(tiny_gen_config());
  auto g_t = clone_generator(g_s);
  {
    torch::NoGradGuard ng;
    g_t->parameters()[1].add_(0.05);  // make the pair differ
  }
  Translator f(tiny_translator_config());
  RandomConvPerceptual lpips(17);

  auto z = sample_latent(1, 31, 8);
  LossConfig cfg;
  cfg.recon_metric = ReconMetric::kL1;
  cfg.recon_direction = ReconDirection::kBoth;
  auto loss = generator_recon_loss(g_t, g_s, f, z, cfg, lpips);

  torch::NoGradGuard ng;
  auto x_t = g_t->forward(z);
  auto x_s = g_s->forward(z);
  const double want = l1_distance(f->translate(x_t, x_s), x_s).mean().item<double>() +
                      l1_distance(f->translate(x_s, x_t), x_t).mean().item<double>();
  EXPECT_NEAR(loss.item<double>(), want, 1e-6);
}

TEST(GeneratorReconLoss, DirectionDecomposesExactly) {
  torch::manual_seed(9);
  Generator g_s(tiny_gen_config());
  auto g_t = clone_generator(g_s);
  {
    torch::NoGradGuard ng;
    for (auto& p : g_t->parameters()) p.add_(0.02 * torch::randn_like(p));
  }
  Translator f(tiny_translator_config());
  RandomConvPerceptual lpips(17);
  auto z = sample_latent(3, 33, 8);

  for (auto metric : {ReconMetric::kL1, ReconMetric::kPerceptual, ReconMetric::kCodeL1}) {
    LossConfig cfg;
    cfg.recon_metric = metric;
    cfg.recon_direction = ReconDirection::kBoth;
    auto both = generator_recon_loss(g_t, g_s, f, z, cfg, lpips);
    cfg.recon_direction = ReconDirection::kSourceOnly;
    auto source = generator_recon_loss(g_t, g_s, f, z, cfg, lpips);
    cfg.recon_direction = ReconDirection::kTargetOnly;
    auto target = generator_recon_loss(g_t, g_s, f, z, cfg, lpips);
    // Bitwise equality: the both-direction value is the tensor sum of the
    // two single-direction terms.
    EXPECT_EQ(both.item<double>(), (source + target).item<double>())
        << "metric " << to_string(metric);
  }
}

TEST(GeneratorReconLoss, CloneAndPerfectSelfReconstructorGiveZero) {
  // With G_T = G_S both terms reduce to d(F(y, y), y); an identity
  // translator makes that exactly zero (checked on the aggregation core).
  torch::manual_seed(10);
  Generator g_s(tiny_gen_config());
  auto g_t = clone_generator(g_s);
  auto z = sample_latent(2, 35, 8);
  torch::NoGradGuard ng;
  auto x_t = g_t->forward(z);
  auto x_s = g_s->forward(z);
  EXPECT_TRUE(x_t.equal(x_s));
  auto identity = [](const torch::Tensor& content, const torch::Tensor&) { return content; };
  auto term_source = pir::detail::recon_term(identity, l1_distance, x_t, x_s, x_s);
  auto term_target = pir::detail::recon_term(identity, l1_distance, x_s, x_t, x_t);
  EXPECT_DOUBLE_EQ((term_source + term_target).item<double>(), 0.0);
}

TEST(GeneratorReconLoss, FreezesTranslatorAndSource) {
  torch::manual_seed(11);
  Generator g_s(tiny_gen_config());
  auto g_t = clone_generator(g_s);
  Translator f(tiny_translator_config());
  RandomConvPerceptual lpips(17);
  auto z = sample_latent(2, 37, 8);

  LossConfig cfg;
  auto loss = generator_recon_loss(g_t, g_s, f, z, cfg, lpips);
  loss.backward();

  for (const auto& p : f->parameters()) {
    EXPECT_FALSE(p.grad().defined());
    EXPECT_TRUE(p.requires_grad());  // guard restored the flag
  }
  for (const auto& p : g_s->parameters()) {
    EXPECT_FALSE(p.grad().defined());
  }
  double g_t_grad = 0;
  for (const auto& p : g_t->parameters()) {
    if (p.grad().defined()) g_t_grad += p.grad().abs().sum().item<double>();
  }
  EXPECT_GT(g_t_grad, 0.0);
}

TEST(GeneratorReconLoss, AdversarialMetricNeedsHandles) {
  torch::manual_seed(12);
  Generator g_s(tiny_gen_config());
  auto g_t = clone_generator(g_s);
  Translator f(tiny_translator_config());
  RandomConvPerceptual lpips(17);
  auto z = sample_latent(2, 39, 8);
  LossConfig cfg;
  cfg.recon_metric = ReconMetric::kAdversarial;
  EXPECT_THROW(generator_recon_loss(g_t, g_s, f, z, cfg, lpips), InvalidConfig);

  ReconDiscriminators rd;
  rd.source = Discriminator(DiscriminatorConfig{.resolution = 16});
  rd.target = Discriminator(DiscriminatorConfig{.resolution = 16});
  auto loss = generator_recon_loss(g_t, g_s, f, z, cfg, lpips, rd);
  EXPECT_TRUE(std::isfinite(loss.item<double>()));
}

TEST(TranslatorReconLoss, FourTermsAndFreezing) {
  torch::manual_seed(13);
  Generator g_s(tiny_gen_config());
  auto g_t = clone_generator(g_s);
  Translator f(tiny_translator_config());
  RandomConvPerceptual lpips(17);
  auto z = sample_latent(2, 41, 8);

  auto terms = translator_recon_terms(g_t, g_s, f, z, lpips);
  auto total = terms.total();
  EXPECT_GE(total.item<double>(), 0.0);
  total.backward();

  for (const auto& p : g_t->parameters()) EXPECT_FALSE(p.grad().defined());
  for (const auto& p : g_s->parameters()) EXPECT_FALSE(p.grad().defined());
  double f_grad = 0;
  for (const auto& p : f->parameters()) {
    if (p.grad().defined()) f_grad += p.grad().abs().sum().item<double>();
  }
  EXPECT_GT(f_grad, 0.0);

  EXPECT_THROW(translator_recon_loss(g_t, g_s, f, torch::empty({0, 8}), lpips),
               InvalidArgument);
}

TEST(TranslatorReconLoss, FiniteDifferencesGradient) {
  torch::manual_seed(14);
  Generator g_s(tiny_gen_config());
  auto g_t = clone_generator(g_s);
  {
    torch::NoGradGuard ng;
    for (auto& p : g_t->parameters()) p.add_(0.02 * torch::randn_like(p));
  }
  Translator f(tiny_translator_config());
  g_s->to(torch::kFloat64);
  g_t->to(torch::kFloat64);
  f->to(torch::kFloat64);
  RandomConvPerceptual lpips(17);
  auto z = sample_latent(2, 43, 8).to(torch::kFloat64);

  auto loss_value = [&]() {
    return translator_recon_loss(g_t, g_s, f, z, lpips);
  };
  auto loss = loss_value();
  loss.backward();

  auto params = f->parameters();
  torch::manual_seed(15);
  const double h = 1e-5;
  int checked = 0;
  for (int i = 0; i < 10; ++i) {
    auto& p = params[torch::randint(0, static_cast<int64_t>(params.size()), {1}).item<int64_t>()];
    if (!p.grad().defined()) continue;
    auto flat = p.flatten();
    const int64_t j = torch::randint(0, flat.size(0), {1}).item<int64_t>();
    const double analytic = p.grad().flatten()[j].item<double>();
    {
      torch::NoGradGuard ng;
      flat[j] += h;
    }
    const double up = loss_value().item<double>();
    {
      torch::NoGradGuard ng;
      flat[j] -= 2 * h;
    }
    const double down = loss_value().item<double>();
    {
      torch::NoGradGuard ng;
      flat[j] += h;
    }
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    EXPECT_LT(std::abs(analytic - numeric) / scale, 1e-3);
    ++checked;
  }
  EXPECT_GE(checked, 8);
}

TEST(Losses, FiniteOnRandomInputs) {
  torch::manual_seed(16);
  Discriminator d(DiscriminatorConfig{.resolution = 16});
  RandomConvPerceptual lpips(17);
  auto gen = make_generator(77);
  for (int i = 0; i < 1000; ++i) {
    auto a = torch::rand({2, 3, 16, 16}, gen) * 2 - 1;
    auto b = torch::rand({2, 3, 16, 16}, gen) * 2 - 1;
    double v;
    if (i % 3 == 0) {
      v = adversarial_d_loss(d, a, b).item<double>();
    } else if (i % 3 == 1) {
      v = adversarial_g_loss(d, a).item<double>();
    } else {
      v = lpips.distance(a, b).sum().item<double>();
    }
    ASSERT_TRUE(std::isfinite(v)) << "at trial " << i;
  }
}
