#pragma once

// Dense double-precision inner loops used by the scoring, training and
// self-play code. Every kernel has a portable scalar reference version and,
// on x86-64, an AVX2/FMA version. The active backend is picked once at
// startup from the CPU feature flags; PREFGAME_SIMD=scalar forces the
// reference path.
//
// The two backends accumulate in different orders, so results agree to
// rounding, not bit for bit. Within one process the backend never changes
// unless set_backend() is called explicitly.

#include <cstddef>
#include <span>
#include <string_view>

namespace prefgame::kernels {

enum class Backend { kScalar, kAvx2 };

std::string_view backend_name(Backend backend);

// True when the AVX2 variants were compiled in and the CPU supports them.
bool avx2_available();

Backend active_backend();

// Throws std::invalid_argument if the backend is not available here.
void set_backend(Backend backend);

// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// out = alpha * a + beta * b
void blend(double alpha, std::span<const double> a, double beta,
           std::span<const double> b, std::span<double> out);

// y = A x for a row-major rows x cols matrix A.
void matvec(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y);

// y = A^T x for a row-major rows x cols matrix A.
void matvec_transposed(std::span<const double> a, std::size_t rows,
                       std::size_t cols, std::span<const double> x,
                       std::span<double> y);

// max_i |a[i] - b[i]|, 0 for empty input.
double max_abs_diff(std::span<const double> a, std::span<const double> b);

double sum(std::span<const double> a);

// Per-backend entry points. The dispatching functions above forward to one
// of these; tests call both directly to check equivalence.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void blend(double alpha, const double* a, double beta, const double* b,
           double* out, std::size_t n);
void matvec(const double* a, std::size_t rows, std::size_t cols,
            const double* x, double* y);
void matvec_transposed(const double* a, std::size_t rows, std::size_t cols,
                       const double* x, double* y);
double max_abs_diff(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
}  // namespace scalar

#if defined(PREFGAME_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void blend(double alpha, const double* a, double beta, const double* b,
           double* out, std::size_t n);
void matvec(const double* a, std::size_t rows, std::size_t cols,
            const double* x, double* y);
void matvec_transposed(const double* a, std::size_t rows, std::size_t cols,
                       const double* x, double* y);
double max_abs_diff(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
}  // namespace avx2
#endif

}  // namespace prefgame::kernels
