#pragma once

#include <torch/torch.h>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pir/checkpoint.hpp"
#include "pir/config.hpp"
#include "pir/dataset.hpp"
#include "pir/discriminator.hpp"
#include "pir/generator.hpp"
#include "pir/losses.hpp"
#include "pir/perceptual.hpp"
#include "pir/translator.hpp"

namespace pir {

/// Raw per-iteration loss values, unweighted.
struct LossStats {
  double d_loss = 0.0;
  double g_adv = 0.0;
  double g_rec = 0.0;  // zero in baseline mode
  double f_rec = 0.0;  // zero in baseline mode
};

enum class TrainPhase { kDiscriminator = 1, kGenerator = 2, kTranslator = 3 };

struct TrainState {
  TrainingConfig cfg;
  FewShotDataset train_k;  // the k-shot training subset

  Generator g_s{nullptr};  // frozen source generator
  Generator g_t{nullptr};
  Discriminator d{nullptr};
  Translator f{nullptr};  // empty in baseline mode
  ReconDiscriminators recon_d;  // used only by the adversarial recon variant

  std::shared_ptr<PerceptualBackend> perceptual;
  std::unique_ptr<torch::optim::Adam> opt_d, opt_g, opt_f;
  torch::Generator rng;

  int64_t iteration = 0;
  int64_t f_step_count = 0;  // total optimizer steps taken on F
  LossStats last;
  uint64_t g_s_fingerprint = 0;
};

/// Called after each phase inside an iteration; lets tests checkpoint
/// fingerprints around phase boundaries.
using PhaseObserver = std::function<void(const TrainState&, TrainPhase)>;

/// Called after each completed iteration.
using IterationCallback = std::function<void(TrainState&)>;

/// Model shapes implied by a training config.
GeneratorConfig generator_config_for(const TrainingConfig& cfg);
DiscriminatorConfig discriminator_config_for(const TrainingConfig& cfg);
TranslatorConfig translator_config_for(const TrainingConfig& cfg);

/// Builds the configured perceptual backend.
std::shared_ptr<PerceptualBackend> make_perceptual_backend(const TrainingConfig& cfg);

/// Clones g_s into G_T, freshly initializes D and F (seeded), selects the
/// deterministic k-shot subset, and wires optimizers. The state owns its
/// own frozen copy of G_S.
TrainState init_training(const Generator& g_s, const FewShotDataset& dataset,
                         const TrainingConfig& cfg);

/// One iteration of the per-iteration schedule: (1) discriminator update on
/// k-shot reals vs G_T fakes; (2) G_T update with the adversarial loss plus
/// lambda1 times the reconstruction loss, F frozen; (3) f_steps_per_iter
/// updates of F with lambda2 times the translator reconstruction loss,
/// generators frozen. Baseline mode skips the reconstruction term and
/// phase 3. Throws TrainingAbort on a non-finite loss after writing a
/// diagnostic snapshot under cfg.out_dir.
LossStats train_iteration(TrainState& s, const PhaseObserver& observer = {});

/// Runs cfg.iterations iterations, appends one loss-log line per iteration
/// to <out_dir>/loss_log.csv, writes checkpoints at the configured
/// interval, and evaluates the final checkpoint when cfg.eval_dir is set.
/// Returns the written checkpoint paths in order.
std::vector<std::string> train(const TrainingConfig& cfg, const FewShotDataset& dataset,
                               const IterationCallback& callback = {});

/// Serializes the full state (all parameter tensors, optimizer states, RNG
/// state, config snapshot) into one archive.
void save_train_checkpoint(const TrainState& s, const std::string& path,
                           const std::optional<MetricsReport>& metrics = {});

/// Rebuilds a TrainState from an adapt checkpoint; subsequent iterations
/// are bit-identical to an uninterrupted run in deterministic mode.
TrainState resume_training(const std::string& checkpoint_path, const FewShotDataset& dataset);

/// Adversarial pretraining of the source generator on the source domain
/// (fresh G and D, phases 1-2 only). Writes checkpoints of kind "pretrain"
/// under cfg.out_dir and returns the final checkpoint path.
std::string pretrain_source(const TrainingConfig& cfg, const FewShotDataset& source_data);

/// Loads the source generator (and optionally its discriminator) from a
/// pretrain checkpoint.
Generator load_source_generator(const std::string& checkpoint_path);
Discriminator load_source_discriminator(const std::string& checkpoint_path);

/// Loads G_T / G_S / F from an adapt checkpoint for inference.
struct AdaptedModels {
  TrainingConfig cfg;
  Generator g_s{nullptr};
  Generator g_t{nullptr};
  Translator f{nullptr};  // empty for baseline checkpoints
  int64_t iteration = 0;
  std::optional<MetricsReport> metrics;
};
AdaptedModels load_adapted_models(const std::string& checkpoint_path);

}  // namespace pir
