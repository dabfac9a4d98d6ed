#include "pir/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "pir/error.hpp"
#include "pir/evaluate.hpp"
#include "pir/fingerprint.hpp"
#include "pir/latent.hpp"
#include "pir/probe.hpp"

namespace fs = std::filesystem;

namespace pir {

namespace {

torch::optim::Adam make_adam(const std::vector<torch::Tensor>& params, double lr, double beta1,
                             double beta2) {
  return torch::optim::Adam(params, torch::optim::AdamOptions(lr).betas({beta1, beta2}));
}

torch::Tensor sample_real_batch(TrainState& s) {
  auto idx =
      torch::randint(0, s.train_k.size(), {s.cfg.batch_size}, s.rng, torch::kInt64);
  return s.train_k.images.index_select(0, idx);
}

void abort_if_nonfinite(TrainState& s, double value, const char* phase) {
  if (std::isfinite(value)) return;
  std::string snapshot;
  try {
    fs::create_directories(s.cfg.out_dir);
    snapshot = (fs::path(s.cfg.out_dir) / "abort_snapshot.pt").string();
    save_train_checkpoint(s, snapshot);
  } catch (const std::exception&) {
    snapshot = "(snapshot write failed)";
  }
  throw TrainingAbort(std::string("non-finite loss in phase '") + phase + "' at iteration " +
                      std::to_string(s.iteration) + "; diagnostic snapshot: " + snapshot);
}

void notify(const PhaseObserver& obs, const TrainState& s, TrainPhase p) {
  if (obs) obs(s, p);
}

std::string checkpoint_name(int64_t iteration) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "checkpoint_%06lld.pt", static_cast<long long>(iteration));
  return buf;
}

}  // namespace

GeneratorConfig generator_config_for(const TrainingConfig& cfg) {
  GeneratorConfig g;
  g.resolution = cfg.resolution;
  g.z_dim = cfg.z_dim;
  return g;
}

DiscriminatorConfig discriminator_config_for(const TrainingConfig& cfg) {
  DiscriminatorConfig d;
  d.resolution = cfg.resolution;
  return d;
}

TranslatorConfig translator_config_for(const TrainingConfig& cfg) {
  TranslatorConfig t;
  t.resolution = cfg.resolution;
  return t;
}

std::shared_ptr<PerceptualBackend> make_perceptual_backend(const TrainingConfig& cfg) {
  if (cfg.perceptual_backend == "random") {
    return std::make_shared<RandomConvPerceptual>(cfg.perceptual_seed);
  }
  if (cfg.perceptual_backend == "trained") {
    // A probe checkpoint: reuse its conv trunk as the feature stack.
    ContentProbe probe(static_cast<int64_t>(ToyShapeNames.size()));
    read_checkpoint_module(cfg.perceptual_weights, "content_probe", *probe);
    return std::make_shared<ConvStackPerceptual>(probe->conv_weights());
  }
  throw InvalidConfig("unknown perceptual backend '" + cfg.perceptual_backend + "'");
}

TrainState init_training(const Generator& g_s, const FewShotDataset& dataset,
                         const TrainingConfig& cfg) {
  cfg.validate();
  if (g_s->config().resolution != dataset.resolution) {
    throw InvalidConfig("init_training: generator resolution " +
                        std::to_string(g_s->config().resolution) + " != dataset resolution " +
                        std::to_string(dataset.resolution));
  }
  if (cfg.resolution != dataset.resolution) {
    throw InvalidConfig("init_training: config resolution != dataset resolution");
  }
  if (dataset.size() < cfg.k_shot) {
    throw InvalidConfig("init_training: dataset smaller than k_shot");
  }

  TrainState s;
  s.cfg = cfg;
  s.train_k = select_k_shot(dataset, cfg.k_shot, cfg.seed);

  s.g_s = clone_generator(g_s);
  freeze(*s.g_s);
  s.g_t = clone_generator(g_s);

  torch::manual_seed(static_cast<uint64_t>(cfg.seed));
  s.d = Discriminator(discriminator_config_for(cfg));
  if (!cfg.baseline_mode) {
    s.f = Translator(translator_config_for(cfg));
  }
  s.perceptual = make_perceptual_backend(cfg);
  if (cfg.loss.recon_metric == ReconMetric::kAdversarial) {
    if (cfg.source_checkpoint.empty()) {
      throw InvalidConfig(
          "recon_metric = adversarial needs source_checkpoint for the source-domain "
          "discriminator");
    }
    s.recon_d.source = load_source_discriminator(cfg.source_checkpoint);
    s.recon_d.target = s.d;
  }

  s.opt_d = std::make_unique<torch::optim::Adam>(
      make_adam(s.d->parameters(), cfg.lr_d, cfg.beta1, cfg.beta2));
  s.opt_g = std::make_unique<torch::optim::Adam>(
      make_adam(s.g_t->parameters(), cfg.lr_g, cfg.beta1, cfg.beta2));
  if (!cfg.baseline_mode) {
    s.opt_f = std::make_unique<torch::optim::Adam>(
        make_adam(s.f->parameters(), cfg.lr_f, cfg.beta1, cfg.beta2));
  }
  s.rng = make_generator(static_cast<uint64_t>(cfg.seed) + 0x9e3779b97f4a7c15ull);
  s.g_s_fingerprint = module_fingerprint(*s.g_s);
  return s;
}

LossStats train_iteration(TrainState& s, const PhaseObserver& observer) {
  const auto& cfg = s.cfg;
  LossStats stats;

  // Phase 1: discriminator on k-shot reals vs detached G_T fakes.
  {
    auto z = sample_latent(cfg.batch_size, s.rng, cfg.z_dim);
    torch::Tensor fakes;
    {
      torch::NoGradGuard ng;
      fakes = s.g_t->forward(z);
    }
    auto reals = sample_real_batch(s);
    s.opt_d->zero_grad();
    auto loss = adversarial_d_loss(s.d, reals, fakes, cfg.loss.patch_weight);
    if (cfg.loss.r1_gamma > 0.0) {
      loss = loss + cfg.loss.r1_gamma * r1_penalty(s.d, reals, cfg.loss.patch_weight);
    }
    loss.backward();
    s.opt_d->step();
    stats.d_loss = loss.item<double>();
    abort_if_nonfinite(s, stats.d_loss, "discriminator");
  }
  notify(observer, s, TrainPhase::kDiscriminator);

  // Phase 2: target generator; reconstruction sees F as a constant.
  auto z_g = sample_latent(cfg.batch_size, s.rng, cfg.z_dim);
  {
    s.opt_g->zero_grad();
    auto fakes = s.g_t->forward(z_g);
    auto adv = adversarial_g_loss(s.d, fakes, cfg.loss.patch_weight);
    torch::Tensor total = adv;
    if (!cfg.baseline_mode && cfg.loss.lambda1 > 0.0) {
      auto rec =
          generator_recon_loss(s.g_t, s.g_s, s.f, z_g, cfg.loss, *s.perceptual, s.recon_d);
      stats.g_rec = rec.item<double>();
      total = adv + cfg.loss.lambda1 * rec;
    }
    total.backward();
    s.opt_g->step();
    stats.g_adv = adv.item<double>();
    abort_if_nonfinite(s, stats.g_adv + stats.g_rec, "generator");
  }
  notify(observer, s, TrainPhase::kGenerator);

  // Phase 3: translator, generators frozen.
  if (!cfg.baseline_mode) {
    double f_total = 0.0;
    for (int64_t i = 0; i < cfg.f_steps_per_iter; ++i) {
      auto z_f = cfg.share_phase_z ? z_g : sample_latent(cfg.batch_size, s.rng, cfg.z_dim);
      s.opt_f->zero_grad();
      auto loss =
          cfg.loss.lambda2 * translator_recon_loss(s.g_t, s.g_s, s.f, z_f, *s.perceptual);
      loss.backward();
      s.opt_f->step();
      ++s.f_step_count;
      f_total += loss.item<double>();
      abort_if_nonfinite(s, f_total, "translator");
    }
    stats.f_rec = f_total / static_cast<double>(cfg.f_steps_per_iter);
  }
  notify(observer, s, TrainPhase::kTranslator);

  ++s.iteration;
  s.last = stats;
  return stats;
}

void save_train_checkpoint(const TrainState& s, const std::string& path,
                           const std::optional<MetricsReport>& metrics) {
  CheckpointMeta meta;
  meta.kind = "adapt";
  meta.config_text = s.cfg.to_string();
  meta.iteration = s.iteration;
  meta.f_step_count = s.f_step_count;
  meta.rng_state = s.rng.get_state();
  meta.metrics = metrics;

  NamedModules modules = {{"generator_source", s.g_s.get()},
                          {"generator_target", s.g_t.get()},
                          {"discriminator", s.d.get()}};
  NamedOptimizers optimizers = {{"optim_d", s.opt_d.get()}, {"optim_g", s.opt_g.get()}};
  if (!s.cfg.baseline_mode) {
    modules.push_back({"translator", s.f.get()});
    optimizers.push_back({"optim_f", s.opt_f.get()});
  }
  write_checkpoint(path, meta, modules, optimizers);
}

TrainState resume_training(const std::string& checkpoint_path, const FewShotDataset& dataset) {
  auto meta = read_checkpoint_meta(checkpoint_path);
  if (meta.kind != "adapt") {
    throw InvalidArgument("resume_training: " + checkpoint_path + " is not an adapt checkpoint");
  }
  auto cfg = meta.config();

  TrainState s;
  s.cfg = cfg;
  s.train_k = select_k_shot(dataset, cfg.k_shot, cfg.seed);
  s.g_s = Generator(generator_config_for(cfg));
  s.g_t = Generator(generator_config_for(cfg));
  s.d = Discriminator(discriminator_config_for(cfg));
  read_checkpoint_module(checkpoint_path, "generator_source", *s.g_s);
  read_checkpoint_module(checkpoint_path, "generator_target", *s.g_t);
  read_checkpoint_module(checkpoint_path, "discriminator", *s.d);
  freeze(*s.g_s);

  s.perceptual = make_perceptual_backend(cfg);
  s.opt_d = std::make_unique<torch::optim::Adam>(
      make_adam(s.d->parameters(), cfg.lr_d, cfg.beta1, cfg.beta2));
  s.opt_g = std::make_unique<torch::optim::Adam>(
      make_adam(s.g_t->parameters(), cfg.lr_g, cfg.beta1, cfg.beta2));
  read_checkpoint_optimizer(checkpoint_path, "optim_d", *s.opt_d);
  read_checkpoint_optimizer(checkpoint_path, "optim_g", *s.opt_g);
  if (!cfg.baseline_mode) {
    s.f = Translator(translator_config_for(cfg));
    read_checkpoint_module(checkpoint_path, "translator", *s.f);
    s.opt_f = std::make_unique<torch::optim::Adam>(
        make_adam(s.f->parameters(), cfg.lr_f, cfg.beta1, cfg.beta2));
    read_checkpoint_optimizer(checkpoint_path, "optim_f", *s.opt_f);
  }
  if (cfg.loss.recon_metric == ReconMetric::kAdversarial) {
    s.recon_d.source = load_source_discriminator(cfg.source_checkpoint);
    s.recon_d.target = s.d;
  }
  s.rng = make_generator(0);
  s.rng.set_state(meta.rng_state);
  s.iteration = meta.iteration;
  s.f_step_count = meta.f_step_count;
  s.g_s_fingerprint = module_fingerprint(*s.g_s);
  return s;
}

std::vector<std::string> train(const TrainingConfig& cfg, const FewShotDataset& dataset,
                               const IterationCallback& callback) {
  cfg.validate();
  if (cfg.source_checkpoint.empty()) {
    throw InvalidConfig("train: source_checkpoint is required");
  }
  auto g_s = load_source_generator(cfg.source_checkpoint);
  auto state = init_training(g_s, dataset, cfg);

  fs::create_directories(cfg.out_dir);
  std::ofstream log(fs::path(cfg.out_dir) / "loss_log.csv");
  log << "iteration,loss_g,loss_d,loss_rec,loss_translator_rec\n";

  std::vector<std::string> checkpoints;
  auto write_ckpt = [&](const std::optional<MetricsReport>& metrics) {
    auto path = (fs::path(cfg.out_dir) / checkpoint_name(state.iteration)).string();
    save_train_checkpoint(state, path, metrics);
    checkpoints.push_back(path);
  };

  for (int64_t i = 0; i < cfg.iterations; ++i) {
    auto stats = train_iteration(state);
    log << state.iteration << "," << stats.g_adv << "," << stats.d_loss << "," << stats.g_rec
        << "," << stats.f_rec << "\n";
    log.flush();
    if (callback) callback(state);
    const bool last = state.iteration == cfg.iterations;
    if (state.iteration % cfg.checkpoint_interval == 0 && !last) {
      write_ckpt(std::nullopt);
    }
    if (last) {
      std::optional<MetricsReport> metrics;
      if (!cfg.eval_dir.empty()) {
        auto eval_ds = load_dataset(cfg.eval_dir, cfg.resolution);
        metrics = compute_metrics_report(state.g_t, state.train_k.images, eval_ds.images, cfg);
        save_metrics_report(*metrics,
                            (fs::path(cfg.out_dir) / "metrics_report.txt").string());
      }
      write_ckpt(metrics);
    }
  }
  return checkpoints;
}

std::string pretrain_source(const TrainingConfig& cfg, const FewShotDataset& source_data) {
  if (source_data.size() < 2) {
    throw InvalidConfig("pretrain_source: source dataset too small");
  }
  if (cfg.resolution != source_data.resolution) {
    throw InvalidConfig("pretrain_source: config resolution != dataset resolution");
  }

  torch::manual_seed(static_cast<uint64_t>(cfg.seed));
  Generator g(generator_config_for(cfg));
  Discriminator d(discriminator_config_for(cfg));
  auto opt_g = make_adam(g->parameters(), cfg.lr_g, cfg.beta1, cfg.beta2);
  auto opt_d = make_adam(d->parameters(), cfg.lr_d, cfg.beta1, cfg.beta2);
  auto rng = make_generator(static_cast<uint64_t>(cfg.seed) + 0x9e3779b97f4a7c15ull);

  fs::create_directories(cfg.out_dir);
  std::ofstream log(fs::path(cfg.out_dir) / "loss_log.csv");
  log << "iteration,loss_g,loss_d,loss_rec,loss_translator_rec\n";

  auto save = [&](int64_t iter) {
    CheckpointMeta meta;
    meta.kind = "pretrain";
    meta.config_text = cfg.to_string();
    meta.iteration = iter;
    meta.rng_state = rng.get_state();
    auto path = (fs::path(cfg.out_dir) / checkpoint_name(iter)).string();
    write_checkpoint(path, meta,
                     {{"generator_source", g.get()}, {"discriminator_source", d.get()}},
                     {{"optim_d", &opt_d}, {"optim_g", &opt_g}});
    return path;
  };

  std::string last_path;
  for (int64_t iter = 1; iter <= cfg.iterations; ++iter) {
    auto z = sample_latent(cfg.batch_size, rng, cfg.z_dim);
    torch::Tensor fakes;
    {
      torch::NoGradGuard ng;
      fakes = g->forward(z);
    }
    auto idx = torch::randint(0, source_data.size(), {cfg.batch_size}, rng, torch::kInt64);
    auto reals = source_data.images.index_select(0, idx);
    opt_d.zero_grad();
    auto d_loss = adversarial_d_loss(d, reals, fakes, cfg.loss.patch_weight);
    if (cfg.loss.r1_gamma > 0.0) {
      d_loss = d_loss + cfg.loss.r1_gamma * r1_penalty(d, reals, cfg.loss.patch_weight);
    }
    d_loss.backward();
    opt_d.step();

    auto z2 = sample_latent(cfg.batch_size, rng, cfg.z_dim);
    opt_g.zero_grad();
    auto g_loss = adversarial_g_loss(d, g->forward(z2), cfg.loss.patch_weight);
    g_loss.backward();
    opt_g.step();

    const double dv = d_loss.item<double>();
    const double gv = g_loss.item<double>();
    log << iter << "," << gv << "," << dv << ",0,0\n";
    if (!std::isfinite(dv) || !std::isfinite(gv)) {
      save(iter);
      throw TrainingAbort("pretrain_source: non-finite loss at iteration " +
                          std::to_string(iter));
    }
    if (iter % cfg.checkpoint_interval == 0 || iter == cfg.iterations) {
      last_path = save(iter);
    }
  }
  return last_path;
}

Generator load_source_generator(const std::string& checkpoint_path) {
  auto meta = read_checkpoint_meta(checkpoint_path);
  auto cfg = meta.config();
  Generator g(generator_config_for(cfg));
  read_checkpoint_module(checkpoint_path, "generator_source", *g);
  return g;
}

Discriminator load_source_discriminator(const std::string& checkpoint_path) {
  auto meta = read_checkpoint_meta(checkpoint_path);
  auto cfg = meta.config();
  Discriminator d(discriminator_config_for(cfg));
  const char* name =
      meta.kind == "pretrain" ? "discriminator_source" : "discriminator";
  read_checkpoint_module(checkpoint_path, name, *d);
  return d;
}

AdaptedModels load_adapted_models(const std::string& checkpoint_path) {
  auto meta = read_checkpoint_meta(checkpoint_path);
  if (meta.kind != "adapt") {
    throw InvalidArgument("load_adapted_models: " + checkpoint_path +
                          " is not an adapt checkpoint");
  }
  AdaptedModels m;
  m.cfg = meta.config();
  m.iteration = meta.iteration;
  m.metrics = meta.metrics;
  m.g_s = Generator(generator_config_for(m.cfg));
  m.g_t = Generator(generator_config_for(m.cfg));
  read_checkpoint_module(checkpoint_path, "generator_source", *m.g_s);
  read_checkpoint_module(checkpoint_path, "generator_target", *m.g_t);
  if (checkpoint_has(checkpoint_path, "translator")) {
    m.f = Translator(translator_config_for(m.cfg));
    read_checkpoint_module(checkpoint_path, "translator", *m.f);
  }
  return m;
}

}  // namespace pir
