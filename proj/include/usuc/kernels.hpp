#ifndef USUC_KERNELS_HPP
#define USUC_KERNELS_HPP

#include <cassert>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Float kernels behind the embedding and similarity math. Every operation
// has a scalar reference implementation plus SIMD variants (AVX2 on x86-64,
// NEON on aarch64) selected once at startup from CPU capabilities. The
// element-wise kernels (axpy, scale) are written without fused multiply-add
// so all variants produce bit-identical results; the reductions (dot,
// squared_norm) reassociate and are equivalence-tested under tolerance.

namespace usuc::kernels {

struct Ops {
  const char* name;
  float (*dot)(const float* a, const float* b, std::size_t n);
  float (*squared_norm)(const float* a, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(float alpha, const float* x, float* y, std::size_t n);
  // y[i] *= alpha
  void (*scale)(float alpha, float* y, std::size_t n);
};

// Active implementation. Chosen at first use: the USUC_KERNELS environment
// variable ("scalar", "avx2", "neon") wins if set and supported, otherwise
// the best variant the CPU supports.
const Ops& active();

// Force a variant by name; returns false if unknown or unsupported here.
bool select(std::string_view name);

// Names of all variants usable on this machine, scalar first.
std::vector<std::string> available();

inline float dot(std::span<const float> a, std::span<const float> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

inline float squared_norm(std::span<const float> a) {
  return active().squared_norm(a.data(), a.size());
}

inline void axpy(float alpha, std::span<const float> x, std::span<float> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void scale(float alpha, std::span<float> y) {
  active().scale(alpha, y.data(), y.size());
}

}  // namespace usuc::kernels

#endif  // USUC_KERNELS_HPP
