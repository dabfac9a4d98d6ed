#pragma once

#include <cstdint>
#include <string>

#include "pir/losses.hpp"

namespace pir {

/// Every knob of an adaptation run. The config file is a flat key = value
/// document whose keys mirror these field names exactly; CLI flags carry
/// the same names.
struct TrainingConfig {
  // schedule
  int64_t iterations = 2000;
  int64_t f_steps_per_iter = 4;
  int64_t batch_size = 8;
  int64_t checkpoint_interval = 500;

  // optimizer (adaptive moment estimation)
  double lr_d = 2e-3;
  double lr_g = 2e-3;
  double lr_f = 1e-3;
  double beta1 = 0.0;
  double beta2 = 0.99;

  // losses
  LossConfig loss;

  // data / model
  int64_t k_shot = 10;
  int64_t seed = 1;
  int64_t resolution = 64;
  int64_t z_dim = 128;
  bool baseline_mode = false;   // plain adversarial fine-tune: no F, no L_rec
  bool share_phase_z = false;   // reuse one z batch across phases 2 and 3
  bool deterministic = true;    // single-device deterministic mode

  // perceptual backend: "random" (fixed-seed conv stack) or "trained"
  // (conv trunk loaded from perceptual_weights, e.g. a probe checkpoint)
  std::string perceptual_backend = "random";
  std::string perceptual_weights;
  int64_t perceptual_seed = 17;

  // evaluation at the final checkpoint (skipped when eval_dir is empty)
  std::string eval_dir;
  int64_t eval_samples = 1000;
  double balance_constant = 1000.0;

  // paths
  std::string source_checkpoint;
  std::string data_dir;
  std::string out_dir = "runs/adapt";

  /// Serializes to the config-file format (stable key order).
  std::string to_string() const;

  /// Throws InvalidConfig on violated invariants.
  void validate() const;
};

/// Parses a config document; unknown keys raise InvalidConfig.
TrainingConfig parse_config_text(const std::string& text);

/// Reads and parses a config file.
TrainingConfig load_config(const std::string& path);

/// Applies one key = value assignment (used for CLI overrides).
void apply_config_entry(TrainingConfig& cfg, const std::string& key, const std::string& value);

}  // namespace pir
