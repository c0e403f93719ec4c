#include "treeharm/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace treeharm::kern {

namespace {

struct Table {
  Backend id;
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*rot)(double*, double*, double, double, std::size_t);
};

Table make_table(Backend b) {
  switch (b) {
#if defined(TREEHARM_HAVE_AVX2)
    case Backend::avx2:
      return {Backend::avx2, detail::dot_avx2, detail::axpy_avx2, detail::rot_avx2};
#endif
#if defined(TREEHARM_HAVE_NEON)
    case Backend::neon:
      return {Backend::neon, detail::dot_neon, detail::axpy_neon, detail::rot_neon};
#endif
    default:
      return {Backend::scalar, detail::dot_scalar, detail::axpy_scalar, detail::rot_scalar};
  }
}

Table& table() {
  static Table t = make_table(best_backend());
  return t;
}

}  // namespace

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(TREEHARM_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(TREEHARM_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend best_backend() {
  if (const char* env = std::getenv("TREEHARM_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && backend_supported(Backend::avx2))
      return Backend::avx2;
    if (std::strcmp(env, "neon") == 0 && backend_supported(Backend::neon))
      return Backend::neon;
  }
  if (backend_supported(Backend::avx2)) return Backend::avx2;
  if (backend_supported(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

Backend active_backend() { return table().id; }

bool set_backend(Backend b) {
  if (!backend_supported(b)) return false;
  table() = make_table(b);
  return true;
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "?";
}

double dot(const double* x, const double* y, std::size_t n) {
  return table().dot(x, y, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  table().axpy(a, x, y, n);
}

void rot(double* x, double* y, double c, double s, std::size_t n) {
  table().rot(x, y, c, s, n);
}

}  // namespace treeharm::kern
