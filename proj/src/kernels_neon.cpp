// NEON kernel variants for aarch64, where NEON is baseline.

#include "usuc/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace usuc::kernels {
namespace {

float dot_neon(const float* a, const float* b, std::size_t n) {
  float32x4_t acc0 = vdupq_n_f32(0.0f);
  float32x4_t acc1 = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
    acc1 = vfmaq_f32(acc1, vld1q_f32(a + i + 4), vld1q_f32(b + i + 4));
  }
  if (i + 4 <= n) {
    acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
    i += 4;
  }
  float acc = vaddvq_f32(vaddq_f32(acc0, acc1));
  for (; i < n; ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

float squared_norm_neon(const float* a, std::size_t n) {
  return dot_neon(a, a, n);
}

// Unfused mul+add keeps results bit-identical to the scalar kernel.
void axpy_neon(float alpha, const float* x, float* y, std::size_t n) {
  const float32x4_t va = vdupq_n_f32(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float32x4_t prod = vmulq_f32(va, vld1q_f32(x + i));
    vst1q_f32(y + i, vaddq_f32(vld1q_f32(y + i), prod));
  }
  for (; i < n; ++i) {
    y[i] = y[i] + alpha * x[i];
  }
}

void scale_neon(float alpha, float* y, std::size_t n) {
  const float32x4_t va = vdupq_n_f32(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    vst1q_f32(y + i, vmulq_f32(vld1q_f32(y + i), va));
  }
  for (; i < n; ++i) {
    y[i] = y[i] * alpha;
  }
}

constexpr Ops kNeonOps{"neon", dot_neon, squared_norm_neon, axpy_neon, scale_neon};

}  // namespace

namespace detail {
const Ops* neon_ops() { return &kNeonOps; }
}  // namespace detail
}  // namespace usuc::kernels

#else

namespace usuc::kernels::detail {
const Ops* neon_ops() { return nullptr; }
}  // namespace usuc::kernels::detail

#endif
