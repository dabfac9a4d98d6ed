#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <string_view>

namespace pir {

/// 64-bit FNV-1a over a byte range.
uint64_t fnv1a64(const void* data, size_t size, uint64_t seed = 0xcbf29ce484222325ull);

inline uint64_t fnv1a64(std::string_view s, uint64_t seed = 0xcbf29ce484222325ull) {
  return fnv1a64(s.data(), s.size(), seed);
}

/// Hash of a tensor's raw contiguous bytes. Bit-exact: two tensors collide
/// on value only if their byte patterns match.
uint64_t tensor_fingerprint(const torch::Tensor& t, uint64_t seed = 0xcbf29ce484222325ull);

/// Combined hash of all parameters and buffers of a module, in registration
/// order. Used by tests to assert that a phase left a network untouched.
uint64_t module_fingerprint(const torch::nn::Module& m);

}  // namespace pir
