#pragma once

#include <torch/torch.h>

#include <cstdint>

namespace pir {

/// Draws `n` latent codes of length `z_dim` from the standard normal prior.
/// A fresh generator is seeded per call, so identical (n, seed, z_dim)
/// yields a bitwise-identical batch. Returns shape (n, z_dim), float32.
torch::Tensor sample_latent(int64_t n, int64_t seed, int64_t z_dim);

/// Same prior, but advancing a caller-owned generator (training draws).
torch::Tensor sample_latent(int64_t n, torch::Generator& gen, int64_t z_dim);

/// A CPU generator seeded for reproducible draws.
torch::Generator make_generator(uint64_t seed);

}  // namespace pir
