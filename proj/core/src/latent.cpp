#include "pir/latent.hpp"

#include "pir/error.hpp"

namespace pir {

torch::Generator make_generator(uint64_t seed) {
  auto gen = at::detail::createCPUGenerator();
  gen.set_current_seed(seed);
  return gen;
}

torch::Tensor sample_latent(int64_t n, torch::Generator& gen, int64_t z_dim) {
  if (n < 1) {
    throw InvalidArgument("sample_latent: n must be >= 1, got " + std::to_string(n));
  }
  if (z_dim < 1) {
    throw InvalidArgument("sample_latent: z_dim must be >= 1, got " + std::to_string(z_dim));
  }
  return torch::randn({n, z_dim}, gen, torch::dtype(torch::kFloat32));
}

torch::Tensor sample_latent(int64_t n, int64_t seed, int64_t z_dim) {
  auto gen = make_generator(static_cast<uint64_t>(seed));
  return sample_latent(n, gen, z_dim);
}

}  // namespace pir
