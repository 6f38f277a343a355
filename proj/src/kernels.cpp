#include "usuc/kernels.hpp"

#include <cstdlib>

namespace usuc::kernels {

namespace {

float dot_scalar(const float* a, const float* b, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

float squared_norm_scalar(const float* a, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) {
    acc += a[i] * a[i];
  }
  return acc;
}

void axpy_scalar(float alpha, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = y[i] + alpha * x[i];
  }
}

void scale_scalar(float alpha, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = y[i] * alpha;
  }
}

constexpr Ops kScalarOps{
    "scalar", dot_scalar, squared_norm_scalar, axpy_scalar, scale_scalar};

}  // namespace

namespace detail {
// Defined in the arch-specific translation units.
const Ops* avx2_ops();
const Ops* neon_ops();
}  // namespace detail

namespace {

const Ops* find(std::string_view name) {
  if (name == "scalar") return &kScalarOps;
  if (name == "avx2") return detail::avx2_ops();
  if (name == "neon") return detail::neon_ops();
  return nullptr;
}

const Ops* pick_default() {
  if (const char* env = std::getenv("USUC_KERNELS")) {
    if (const Ops* ops = find(env)) return ops;
  }
  if (const Ops* ops = detail::avx2_ops()) return ops;
  if (const Ops* ops = detail::neon_ops()) return ops;
  return &kScalarOps;
}

const Ops*& active_slot() {
  static const Ops* slot = pick_default();
  return slot;
}

}  // namespace

const Ops& active() { return *active_slot(); }

bool select(std::string_view name) {
  const Ops* ops = find(name);
  if (ops == nullptr) return false;
  active_slot() = ops;
  return true;
}

std::vector<std::string> available() {
  std::vector<std::string> names{"scalar"};
  if (detail::avx2_ops() != nullptr) names.emplace_back("avx2");
  if (detail::neon_ops() != nullptr) names.emplace_back("neon");
  return names;
}

}  // namespace usuc::kernels
