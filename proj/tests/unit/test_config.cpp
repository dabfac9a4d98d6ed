#include <gtest/gtest.h>

#include "pir/config.hpp"
#include "pir/error.hpp"

using namespace pir;

TEST(Config, DefaultsValidate) {
  TrainingConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, ParseDocument) {
  auto cfg = parse_config_text(
      "# adaptation run\n"
      "iterations = 500\n"
      "lambda1 = 2.5\n"
      "recon_metric = l1\n"
      "recon_direction = source_only\n"
      "baseline_mode = true\n"
      "k_shot = 5\n"
      "out_dir = /tmp/run1  # trailing comment\n");
  EXPECT_EQ(cfg.iterations, 500);
  EXPECT_DOUBLE_EQ(cfg.loss.lambda1, 2.5);
  EXPECT_EQ(cfg.loss.recon_metric, ReconMetric::kL1);
  EXPECT_EQ(cfg.loss.recon_direction, ReconDirection::kSourceOnly);
  EXPECT_TRUE(cfg.baseline_mode);
  EXPECT_EQ(cfg.k_shot, 5);
  EXPECT_EQ(cfg.out_dir, "/tmp/run1");
}

TEST(Config, RoundTripThroughText) {
  TrainingConfig cfg;
  cfg.iterations = 123;
  cfg.loss.lambda2 = 0.25;
  cfg.loss.recon_metric = ReconMetric::kCodeL1;
  cfg.share_phase_z = true;
  cfg.eval_dir = "/data/eval";
  auto parsed = parse_config_text(cfg.to_string());
  EXPECT_EQ(parsed.to_string(), cfg.to_string());
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_THROW(parse_config_text("iterations = 5\nlearning_rate = 0.1\n"), InvalidConfig);
}

TEST(Config, MalformedLineRejected) {
  EXPECT_THROW(parse_config_text("iterations 5\n"), InvalidConfig);
  EXPECT_THROW(parse_config_text("iterations = five\n"), InvalidConfig);
  EXPECT_THROW(parse_config_text("baseline_mode = maybe\n"), InvalidConfig);
}

TEST(Config, ValidationInvariants) {
  TrainingConfig cfg;
  cfg.k_shot = 3;
  EXPECT_THROW(cfg.validate(), InvalidConfig);

  cfg = {};
  cfg.f_steps_per_iter = 0;
  EXPECT_THROW(cfg.validate(), InvalidConfig);
  cfg.baseline_mode = true;  // baseline mode lifts the f-steps requirement
  EXPECT_NO_THROW(cfg.validate());

  cfg = {};
  cfg.resolution = 48;
  EXPECT_THROW(cfg.validate(), InvalidConfig);

  cfg = {};
  cfg.loss.patch_weight = 1.5;
  EXPECT_THROW(cfg.validate(), InvalidConfig);

  cfg = {};
  cfg.loss.lambda1 = -0.1;
  EXPECT_THROW(cfg.validate(), InvalidConfig);

  cfg = {};
  cfg.perceptual_backend = "trained";
  EXPECT_THROW(cfg.validate(), InvalidConfig);  // needs weights path
  cfg.perceptual_weights = "probe.pt";
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, EnumNamesRoundTrip) {
  for (auto m : {ReconMetric::kL1, ReconMetric::kPerceptual, ReconMetric::kCodeL1,
                 ReconMetric::kAdversarial}) {
    EXPECT_EQ(recon_metric_from_string(to_string(m)), m);
  }
  for (auto d :
       {ReconDirection::kSourceOnly, ReconDirection::kTargetOnly, ReconDirection::kBoth}) {
    EXPECT_EQ(recon_direction_from_string(to_string(d)), d);
  }
  EXPECT_THROW(recon_metric_from_string("l2"), InvalidConfig);
}
