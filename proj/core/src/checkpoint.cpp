#include "pir/checkpoint.hpp"

#include "pir/error.hpp"

namespace pir {

namespace {

torch::serialize::InputArchive open_archive(const std::string& path) {
  torch::serialize::InputArchive in;
  try {
    in.load_from(path);
  } catch (const c10::Error&) {
    throw NotFound("cannot open checkpoint " + path);
  }
  return in;
}

}  // namespace

void write_checkpoint(const std::string& path, const CheckpointMeta& meta,
                      const NamedModules& modules, const NamedOptimizers& optimizers) {
  torch::serialize::OutputArchive out;
  out.write("kind", torch::IValue(meta.kind));
  out.write("schema_version", torch::IValue(meta.schema_version));
  out.write("config", torch::IValue(meta.config_text));
  out.write("iteration", torch::IValue(meta.iteration));
  out.write("f_step_count", torch::IValue(meta.f_step_count));
  if (meta.rng_state.defined()) {
    out.write("rng_state", meta.rng_state);
  }
  out.write("has_metrics", torch::IValue(meta.metrics.has_value()));
  if (meta.metrics) {
    out.write("metrics_text", torch::IValue(meta.metrics->to_string()));
  }
  std::string names;
  for (const auto& [name, module] : modules) {
    torch::serialize::OutputArchive nested;
    module->save(nested);
    out.write(name, nested);
    names += name + " ";
  }
  for (const auto& [name, opt] : optimizers) {
    torch::serialize::OutputArchive nested;
    opt->save(nested);
    out.write(name, nested);
    names += name + " ";
  }
  out.write("sections", torch::IValue(names));
  out.save_to(path);
}

CheckpointMeta read_checkpoint_meta(const std::string& path) {
  auto in = open_archive(path);
  CheckpointMeta meta;
  torch::IValue v;
  in.read("kind", v);
  meta.kind = v.toStringRef();
  in.read("schema_version", v);
  meta.schema_version = v.toInt();
  if (meta.schema_version != kCheckpointSchemaVersion) {
    throw InvalidArgument("checkpoint " + path + " has schema version " +
                          std::to_string(meta.schema_version) + ", expected " +
                          std::to_string(kCheckpointSchemaVersion));
  }
  in.read("config", v);
  meta.config_text = v.toStringRef();
  in.read("iteration", v);
  meta.iteration = v.toInt();
  in.read("f_step_count", v);
  meta.f_step_count = v.toInt();
  torch::Tensor rng;
  if (in.try_read("rng_state", rng)) {
    meta.rng_state = rng;
  }
  in.read("has_metrics", v);
  if (v.toBool()) {
    in.read("metrics_text", v);
    meta.metrics = MetricsReport::from_string(v.toStringRef());
  }
  return meta;
}

bool checkpoint_has(const std::string& path, const std::string& name) {
  auto in = open_archive(path);
  torch::IValue v;
  in.read("sections", v);
  const auto& s = v.toStringRef();
  return s.find(name + " ") != std::string::npos;
}

void read_checkpoint_module(const std::string& path, const std::string& name,
                            torch::nn::Module& module) {
  auto in = open_archive(path);
  torch::serialize::InputArchive nested;
  if (!in.try_read(name, nested)) {
    throw NotFound("checkpoint " + path + " has no section '" + name + "'");
  }
  module.load(nested);
}

void read_checkpoint_optimizer(const std::string& path, const std::string& name,
                               torch::optim::Optimizer& optimizer) {
  auto in = open_archive(path);
  torch::serialize::InputArchive nested;
  if (!in.try_read(name, nested)) {
    throw NotFound("checkpoint " + path + " has no section '" + name + "'");
  }
  optimizer.load(nested);
}

}  // namespace pir
