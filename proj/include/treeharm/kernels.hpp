#pragma once

#include <cstddef>

// Data-parallel inner loops backing the dense linear algebra layer.
// A scalar reference implementation always exists; AVX2 (x86-64) and NEON
// (aarch64) variants are selected once at runtime and can be forced for
// testing. All variants implement the same contracts and are
// equivalence-tested against the scalar path.

namespace treeharm::kern {

enum class Backend { scalar, avx2, neon };

Backend active_backend();
// Best backend usable on this machine (honours the TREEHARM_SIMD
// environment override: "scalar", "avx2", "neon").
Backend best_backend();
bool backend_supported(Backend b);
// Switches the dispatch table; returns false (and leaves the table
// unchanged) if the backend is not usable here.
bool set_backend(Backend b);
const char* backend_name(Backend b);

double dot(const double* x, const double* y, std::size_t n);
// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);
// Plane rotation: x <- c*x - s*y,  y <- s*x + c*y.
void rot(double* x, double* y, double c, double s, std::size_t n);

namespace detail {
double dot_scalar(const double*, const double*, std::size_t);
void axpy_scalar(double, const double*, double*, std::size_t);
void rot_scalar(double*, double*, double, double, std::size_t);
#if defined(TREEHARM_HAVE_AVX2)
double dot_avx2(const double*, const double*, std::size_t);
void axpy_avx2(double, const double*, double*, std::size_t);
void rot_avx2(double*, double*, double, double, std::size_t);
#endif
#if defined(TREEHARM_HAVE_NEON)
double dot_neon(const double*, const double*, std::size_t);
void axpy_neon(double, const double*, double*, std::size_t);
void rot_neon(double*, double*, double, double, std::size_t);
#endif
}  // namespace detail

}  // namespace treeharm::kern
