#include <gtest/gtest.h>
#include <torch/torch.h>

#include "pir/discriminator.hpp"
#include "pir/error.hpp"
#include "pir/fingerprint.hpp"
#include "pir/generator.hpp"
#include "pir/latent.hpp"
#include "pir/perceptual.hpp"

using namespace pir;

namespace {

GeneratorConfig small_gen_config() {
  GeneratorConfig cfg;
  cfg.resolution = 32;
  cfg.z_dim = 32;
  cfg.w_dim = 32;
  cfg.base_channels = 16;
  cfg.max_channels = 64;
  return cfg;
}

}  // namespace

TEST(SampleLatent, ShapeContract) {
  auto z = sample_latent(4, 7, 128);
  EXPECT_EQ(z.sizes(), (std::vector<int64_t>{4, 128}));
}

TEST(SampleLatent, Determinism) {
  auto a = sample_latent(4, 7, 128);
  auto b = sample_latent(4, 7, 128);
  EXPECT_TRUE(a.equal(b));
  auto c = sample_latent(4, 8, 128);
  EXPECT_FALSE(a.equal(c));
}

TEST(SampleLatent, InvalidArguments) {
  EXPECT_THROW(sample_latent(0, 1, 128), InvalidArgument);
  EXPECT_THROW(sample_latent(4, 1, 0), InvalidArgument);
}

// Law-of-large-numbers check on the standard normal sampler.
TEST(SampleLatent, StandardNormalMoments) {
  auto z = sample_latent(10000, 1, 128).to(torch::kFloat64);
  auto mean = z.mean(0);
  auto var = z.var(0, /*unbiased=*/true);
  EXPECT_LT(mean.abs().max().item<double>(), 0.05);
  EXPECT_GT(var.min().item<double>(), 0.9);
  EXPECT_LT(var.max().item<double>(), 1.1);
}

TEST(Generator, DeterministicForward) {
  torch::manual_seed(3);
  Generator g(small_gen_config());
  auto z = sample_latent(2, 5, 32);
  auto a = g->forward(z);
  auto b = g->forward(z);
  EXPECT_TRUE(a.equal(b));
  EXPECT_EQ(a.sizes(), (std::vector<int64_t>{2, 3, 32, 32}));
}

TEST(Generator, OutputRange) {
  torch::manual_seed(4);
  Generator g(small_gen_config());
  auto imgs = g->forward(sample_latent(64, 9, 32));
  EXPECT_GE(imgs.min().item<float>(), -1.0f);
  EXPECT_LE(imgs.max().item<float>(), 1.0f);
  EXPECT_TRUE(imgs.isfinite().all().item<bool>());
}

TEST(Generator, DimensionMismatchThrows) {
  torch::manual_seed(5);
  Generator g(small_gen_config());
  EXPECT_THROW(g->forward(torch::randn({2, 16})), InvalidArgument);
}

TEST(Generator, DistinctLatentsGiveDistinctImages) {
  torch::manual_seed(6);
  Generator g(small_gen_config());
  RandomConvPerceptual lpips(17);
  auto z = sample_latent(2, 11, 32);
  auto imgs = g->forward(z);
  EXPECT_GT(lpips.distance_scalar(imgs[0], imgs[1]), 0.0);
}

TEST(CloneSourceToTarget, FunctionalEquality) {
  torch::manual_seed(7);
  Generator g_s(small_gen_config());
  auto g_t = clone_generator(g_s);
  auto z = sample_latent(16, 13, 32);
  auto a = g_s->forward(z);
  auto b = g_t->forward(z);
  EXPECT_EQ((a - b).abs().max().item<float>(), 0.0f);
}

TEST(CloneSourceToTarget, DeepCopyIndependence) {
  torch::manual_seed(8);
  Generator g_s(small_gen_config());
  const uint64_t before = module_fingerprint(*g_s);
  auto g_t = clone_generator(g_s);
  {
    torch::NoGradGuard ng;
    g_t->parameters()[0].add_(1.0);
  }
  EXPECT_EQ(module_fingerprint(*g_s), before);
  EXPECT_NE(module_fingerprint(*g_t), before);
}

TEST(CloneSourceToTarget, RepeatedClonesIdentical) {
  torch::manual_seed(9);
  Generator g_s(small_gen_config());
  const uint64_t want = module_fingerprint(*g_s);
  for (int i = 0; i < 100; ++i) {
    auto c = clone_generator(g_s);
    ASSERT_EQ(module_fingerprint(*c), want);
  }
}

TEST(Discriminator, ShapesAndDeterminism) {
  torch::manual_seed(10);
  DiscriminatorConfig cfg;
  cfg.resolution = 32;
  Discriminator d(cfg);
  auto imgs = torch::rand({5, 3, 32, 32}) * 2.0 - 1.0;
  auto out = d->forward(imgs);
  EXPECT_EQ(out.image_logit.sizes(), (std::vector<int64_t>{5}));
  EXPECT_EQ(out.patch_logits.sizes(), (std::vector<int64_t>{5, 1, 8, 8}));
  EXPECT_TRUE(out.image_logit.isfinite().all().item<bool>());
  EXPECT_TRUE(out.patch_logits.isfinite().all().item<bool>());
  auto again = d->forward(imgs);
  EXPECT_TRUE(out.image_logit.equal(again.image_logit));
  EXPECT_TRUE(out.patch_logits.equal(again.patch_logits));
}

TEST(Discriminator, PatchMapAtQuarterResolution) {
  torch::manual_seed(11);
  DiscriminatorConfig cfg;
  cfg.resolution = 64;
  Discriminator d(cfg);
  auto out = d->forward(torch::zeros({1, 3, 64, 64}));
  EXPECT_EQ(out.patch_logits.size(2), 16);
  EXPECT_GE(out.patch_logits.size(2), 2);
}

TEST(Discriminator, ResolutionMismatchThrows) {
  torch::manual_seed(12);
  Discriminator d(DiscriminatorConfig{.resolution = 32});
  EXPECT_THROW(d->forward(torch::zeros({1, 3, 64, 64})), InvalidArgument);
}

// Analytic gradients of a 2-layer miniature generator against central
// finite differences, double precision.
TEST(Generator, GradientCheck) {
  torch::manual_seed(13);
  GeneratorConfig cfg;
  cfg.resolution = 8;  // input block + one upsample block: two modulated convs
  cfg.z_dim = 8;
  cfg.w_dim = 8;
  cfg.mapping_layers = 2;
  cfg.base_channels = 8;
  cfg.max_channels = 16;
  Generator g(cfg);
  g->to(torch::kFloat64);

  auto z = sample_latent(2, 21, 8).to(torch::kFloat64);
  auto target = torch::randn({2, 3, 8, 8}, torch::kFloat64);
  auto loss_fn = [&]() { return (g->forward(z) - target).square().mean(); };

  auto loss = loss_fn();
  loss.backward();

  auto params = g->parameters();
  torch::manual_seed(14);
  auto pick = torch::randint(0, static_cast<int64_t>(params.size()), {20}, torch::kInt64);
  const double h = 1e-5;
  int checked = 0;
  for (int i = 0; i < 20; ++i) {
    auto& p = params[pick[i].item<int64_t>()];
    if (!p.grad().defined()) continue;
    auto flat = p.flatten();
    const int64_t j = torch::randint(0, flat.size(0), {1}).item<int64_t>();
    const double analytic = p.grad().flatten()[j].item<double>();
    {
      torch::NoGradGuard ng;
      flat[j] += h;
    }
    const double up = loss_fn().item<double>();
    {
      torch::NoGradGuard ng;
      flat[j] -= 2 * h;
    }
    const double down = loss_fn().item<double>();
    {
      torch::NoGradGuard ng;
      flat[j] += h;
    }
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    EXPECT_LT(std::abs(analytic - numeric) / scale, 1e-3)
        << "param " << pick[i].item<int64_t>() << " coord " << j;
    ++checked;
  }
  EXPECT_GE(checked, 15);
}
