#include "pir/fingerprint.hpp"

namespace pir {

uint64_t fnv1a64(const void* data, size_t size, uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t tensor_fingerprint(const torch::Tensor& t, uint64_t seed) {
  auto c = t.detach().contiguous();
  return fnv1a64(c.data_ptr(), c.numel() * c.element_size(), seed);
}

uint64_t module_fingerprint(const torch::nn::Module& m) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& p : m.parameters(/*recurse=*/true)) {
    h = tensor_fingerprint(p, h);
  }
  for (const auto& b : m.buffers(/*recurse=*/true)) {
    h = tensor_fingerprint(b, h);
  }
  return h;
}

}  // namespace pir
