#include <cstdlib>
#include <stdexcept>
#include <string>

#include "prefgame/kernels.hpp"

namespace prefgame::kernels {
namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*blend)(double, const double*, double, const double*, double*,
                std::size_t);
  void (*matvec)(const double*, std::size_t, std::size_t, const double*,
                 double*);
  void (*matvec_transposed)(const double*, std::size_t, std::size_t,
                            const double*, double*);
  double (*max_abs_diff)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
};

constexpr Table kScalarTable{scalar::dot,    scalar::axpy,
                             scalar::blend,  scalar::matvec,
                             scalar::matvec_transposed,
                             scalar::max_abs_diff, scalar::sum};

#if defined(PREFGAME_HAVE_AVX2)
constexpr Table kAvx2Table{avx2::dot,    avx2::axpy,
                           avx2::blend,  avx2::matvec,
                           avx2::matvec_transposed,
                           avx2::max_abs_diff, avx2::sum};
#endif

const Table& table_for(Backend backend) {
#if defined(PREFGAME_HAVE_AVX2)
  if (backend == Backend::kAvx2) return kAvx2Table;
#endif
  (void)backend;
  return kScalarTable;
}

Backend initial_backend() {
  if (const char* env = std::getenv("PREFGAME_SIMD")) {
    if (std::string(env) == "scalar") return Backend::kScalar;
  }
  return avx2_available() ? Backend::kAvx2 : Backend::kScalar;
}

struct State {
  Backend backend = initial_backend();
  const Table* table = &table_for(backend);
};

State& state() {
  static State s;
  return s;
}

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernel operands differ in length");
}

}  // namespace

std::string_view backend_name(Backend backend) {
  return backend == Backend::kAvx2 ? "avx2" : "scalar";
}

bool avx2_available() {
#if defined(PREFGAME_HAVE_AVX2)
  static const bool ok = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return ok;
#else
  return false;
#endif
}

Backend active_backend() { return state().backend; }

void set_backend(Backend backend) {
  if (backend == Backend::kAvx2 && !avx2_available()) {
    throw std::invalid_argument("AVX2 backend is not available on this CPU");
  }
  state().backend = backend;
  state().table = &table_for(backend);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  return state().table->dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same_size(x.size(), y.size());
  state().table->axpy(alpha, x.data(), y.data(), x.size());
}

void blend(double alpha, std::span<const double> a, double beta,
           std::span<const double> b, std::span<double> out) {
  check_same_size(a.size(), b.size());
  check_same_size(a.size(), out.size());
  state().table->blend(alpha, a.data(), beta, b.data(), out.data(), a.size());
}

void matvec(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) {
  check_same_size(a.size(), rows * cols);
  check_same_size(x.size(), cols);
  check_same_size(y.size(), rows);
  state().table->matvec(a.data(), rows, cols, x.data(), y.data());
}

void matvec_transposed(std::span<const double> a, std::size_t rows,
                       std::size_t cols, std::span<const double> x,
                       std::span<double> y) {
  check_same_size(a.size(), rows * cols);
  check_same_size(x.size(), rows);
  check_same_size(y.size(), cols);
  state().table->matvec_transposed(a.data(), rows, cols, x.data(), y.data());
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  return state().table->max_abs_diff(a.data(), b.data(), a.size());
}

double sum(std::span<const double> a) {
  return state().table->sum(a.data(), a.size());
}

}  // namespace prefgame::kernels
