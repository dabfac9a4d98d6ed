#include "pir/config.hpp"

#include <fstream>
#include <sstream>

#include "pir/error.hpp"

namespace pir {

namespace {

std::string trim(std::string s) {
  s.erase(0, s.find_first_not_of(" \t"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  return s;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidConfig(key + ": expected true/false, got '" + v + "'");
}

int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    int64_t r = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw InvalidConfig(key + ": expected integer, got '" + v + "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw InvalidConfig(key + ": expected number, got '" + v + "'");
  }
}

}  // namespace

void apply_config_entry(TrainingConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "iterations") cfg.iterations = parse_int(key, value);
  else if (key == "f_steps_per_iter") cfg.f_steps_per_iter = parse_int(key, value);
  else if (key == "batch_size") cfg.batch_size = parse_int(key, value);
  else if (key == "checkpoint_interval") cfg.checkpoint_interval = parse_int(key, value);
  else if (key == "lr_d") cfg.lr_d = parse_double(key, value);
  else if (key == "lr_g") cfg.lr_g = parse_double(key, value);
  else if (key == "lr_f") cfg.lr_f = parse_double(key, value);
  else if (key == "beta1") cfg.beta1 = parse_double(key, value);
  else if (key == "beta2") cfg.beta2 = parse_double(key, value);
  else if (key == "lambda1") cfg.loss.lambda1 = parse_double(key, value);
  else if (key == "lambda2") cfg.loss.lambda2 = parse_double(key, value);
  else if (key == "recon_metric") cfg.loss.recon_metric = recon_metric_from_string(value);
  else if (key == "recon_direction")
    cfg.loss.recon_direction = recon_direction_from_string(value);
  else if (key == "patch_weight") cfg.loss.patch_weight = parse_double(key, value);
  else if (key == "r1_gamma") cfg.loss.r1_gamma = parse_double(key, value);
  else if (key == "k_shot") cfg.k_shot = parse_int(key, value);
  else if (key == "seed") cfg.seed = parse_int(key, value);
  else if (key == "resolution") cfg.resolution = parse_int(key, value);
  else if (key == "z_dim") cfg.z_dim = parse_int(key, value);
  else if (key == "baseline_mode") cfg.baseline_mode = parse_bool(key, value);
  else if (key == "share_phase_z") cfg.share_phase_z = parse_bool(key, value);
  else if (key == "deterministic") cfg.deterministic = parse_bool(key, value);
  else if (key == "perceptual_backend") cfg.perceptual_backend = value;
  else if (key == "perceptual_weights") cfg.perceptual_weights = value;
  else if (key == "perceptual_seed") cfg.perceptual_seed = parse_int(key, value);
  else if (key == "eval_dir") cfg.eval_dir = value;
  else if (key == "eval_samples") cfg.eval_samples = parse_int(key, value);
  else if (key == "balance_constant") cfg.balance_constant = parse_double(key, value);
  else if (key == "source_checkpoint") cfg.source_checkpoint = value;
  else if (key == "data_dir") cfg.data_dir = value;
  else if (key == "out_dir") cfg.out_dir = value;
  else throw InvalidConfig("unknown config key '" + key + "'");
}

TrainingConfig parse_config_text(const std::string& text) {
  TrainingConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfig("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

TrainingConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw NotFound("cannot open config file " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string TrainingConfig::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "iterations = " << iterations << "\n";
  os << "f_steps_per_iter = " << f_steps_per_iter << "\n";
  os << "batch_size = " << batch_size << "\n";
  os << "checkpoint_interval = " << checkpoint_interval << "\n";
  os << "lr_d = " << lr_d << "\n";
  os << "lr_g = " << lr_g << "\n";
  os << "lr_f = " << lr_f << "\n";
  os << "beta1 = " << beta1 << "\n";
  os << "beta2 = " << beta2 << "\n";
  os << "lambda1 = " << loss.lambda1 << "\n";
  os << "lambda2 = " << loss.lambda2 << "\n";
  os << "recon_metric = " << pir::to_string(loss.recon_metric) << "\n";
  os << "recon_direction = " << pir::to_string(loss.recon_direction) << "\n";
  os << "patch_weight = " << loss.patch_weight << "\n";
  os << "r1_gamma = " << loss.r1_gamma << "\n";
  os << "k_shot = " << k_shot << "\n";
  os << "seed = " << seed << "\n";
  os << "resolution = " << resolution << "\n";
  os << "z_dim = " << z_dim << "\n";
  os << "baseline_mode = " << (baseline_mode ? "true" : "false") << "\n";
  os << "share_phase_z = " << (share_phase_z ? "true" : "false") << "\n";
  os << "deterministic = " << (deterministic ? "true" : "false") << "\n";
  os << "perceptual_backend = " << perceptual_backend << "\n";
  os << "perceptual_weights = " << perceptual_weights << "\n";
  os << "perceptual_seed = " << perceptual_seed << "\n";
  os << "eval_dir = " << eval_dir << "\n";
  os << "eval_samples = " << eval_samples << "\n";
  os << "balance_constant = " << balance_constant << "\n";
  os << "source_checkpoint = " << source_checkpoint << "\n";
  os << "data_dir = " << data_dir << "\n";
  os << "out_dir = " << out_dir << "\n";
  return os.str();
}

void TrainingConfig::validate() const {
  if (iterations < 1) throw InvalidConfig("iterations must be >= 1");
  if (batch_size < 1) throw InvalidConfig("batch_size must be >= 1");
  if (!baseline_mode && f_steps_per_iter < 1) {
    throw InvalidConfig("f_steps_per_iter must be >= 1 unless baseline_mode");
  }
  if (checkpoint_interval < 1) throw InvalidConfig("checkpoint_interval must be >= 1");
  if (k_shot != 1 && k_shot != 5 && k_shot != 10) {
    throw InvalidConfig("k_shot must be one of {1, 5, 10}");
  }
  if (resolution != 32 && resolution != 64) {
    throw InvalidConfig("resolution must be 32 or 64");
  }
  if (z_dim < 1) throw InvalidConfig("z_dim must be >= 1");
  if (loss.lambda1 < 0 || loss.lambda2 < 0) {
    throw InvalidConfig("lambda1/lambda2 must be >= 0");
  }
  if (loss.patch_weight < 0.0 || loss.patch_weight > 1.0) {
    throw InvalidConfig("patch_weight must lie in [0, 1]");
  }
  if (lr_d <= 0 || lr_g <= 0 || lr_f <= 0) throw InvalidConfig("learning rates must be > 0");
  if (beta2 <= 0 || beta2 >= 1 || beta1 < 0 || beta1 >= 1) {
    throw InvalidConfig("moment coefficients must satisfy 0 <= beta1 < 1, 0 < beta2 < 1");
  }
  if (perceptual_backend != "random" && perceptual_backend != "trained") {
    throw InvalidConfig("perceptual_backend must be 'random' or 'trained'");
  }
  if (perceptual_backend == "trained" && perceptual_weights.empty()) {
    throw InvalidConfig("perceptual_backend = trained needs perceptual_weights");
  }
  if (eval_samples < 2) throw InvalidConfig("eval_samples must be >= 2");
  if (balance_constant <= 0) throw InvalidConfig("balance_constant must be > 0");
}

}  // namespace pir
