#pragma once

#include <torch/torch.h>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pir/config.hpp"
#include "pir/metrics.hpp"

namespace pir {

inline constexpr int64_t kCheckpointSchemaVersion = 1;

/// Scalar header of a checkpoint archive. Parameter tensors live in nested
/// archives keyed by hierarchical module names ("generator_target", ...).
struct CheckpointMeta {
  std::string kind;  // "pretrain" or "adapt"
  int64_t schema_version = kCheckpointSchemaVersion;
  std::string config_text;  // TrainingConfig snapshot
  int64_t iteration = 0;
  int64_t f_step_count = 0;
  torch::Tensor rng_state;
  std::optional<MetricsReport> metrics;

  TrainingConfig config() const { return parse_config_text(config_text); }
};

using NamedModules = std::vector<std::pair<std::string, const torch::nn::Module*>>;
using NamedOptimizers = std::vector<std::pair<std::string, const torch::optim::Optimizer*>>;

/// Writes one archive with the header, every module's tensors, and the
/// optimizer states needed for exact resume.
void write_checkpoint(const std::string& path, const CheckpointMeta& meta,
                      const NamedModules& modules, const NamedOptimizers& optimizers = {});

/// Header only; throws on schema mismatch.
CheckpointMeta read_checkpoint_meta(const std::string& path);

/// True when the archive holds a section of this name.
bool checkpoint_has(const std::string& path, const std::string& name);

/// Loads one module's tensors into a compatible, already-constructed module.
void read_checkpoint_module(const std::string& path, const std::string& name,
                            torch::nn::Module& module);

void read_checkpoint_optimizer(const std::string& path, const std::string& name,
                               torch::optim::Optimizer& optimizer);

}  // namespace pir
