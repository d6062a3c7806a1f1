#include "prefgame/decomposition.hpp"

#include "prefgame/errors.hpp"
#include "prefgame/kernels.hpp"

namespace prefgame {

PreferenceScoreMatrix Decomposition::reconstruct() const {
  return PreferenceScoreMatrix::combine(1.0, transitive, 1.0, cyclic);
}

Decomposition decompose(const PreferenceScoreMatrix& m) {
  const std::size_t n = m.size();
  if (n == 0) throw DomainError("decompose: empty game");
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = kernels::sum(m.row(i)) / static_cast<double>(n);
  }
  // Already mean zero in exact arithmetic; remove the rounding residue.
  const double mean = kernels::sum(f) / static_cast<double>(n);
  for (double& v : f) v -= mean;

  std::vector<double> cyclic_upper;
  cyclic_upper.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      cyclic_upper.push_back(m(i, j) - (f[i] - f[j]));
    }
  }
  auto transitive = PreferenceScoreMatrix::from_potential(f);
  auto cyclic = PreferenceScoreMatrix::from_upper(n, cyclic_upper);
  return {std::move(f), std::move(transitive), std::move(cyclic)};
}

Decomposition make_decomposition(std::vector<double> potential,
                                 PreferenceScoreMatrix cyclic) {
  if (potential.size() != cyclic.size()) {
    throw ShapeError("potential and cyclic part have different sizes");
  }
  auto transitive = PreferenceScoreMatrix::from_potential(potential);
  return {std::move(potential), std::move(transitive), std::move(cyclic)};
}

double transitivity_fraction(const PreferenceScoreMatrix& m) {
  if (m.is_zero()) {
    throw DomainError("transitivity_fraction: the zero game has no structure");
  }
  const Decomposition d = decompose(m);
  const double t = d.transitive.frobenius_squared();
  const double c = d.cyclic.frobenius_squared();
  return t / (t + c);
}

double frobenius_inner(const PreferenceScoreMatrix& a,
                       const PreferenceScoreMatrix& b) {
  if (a.size() != b.size()) throw ShapeError("frobenius_inner: size mismatch");
  return kernels::dot(a.data(), b.data());
}

}  // namespace prefgame
