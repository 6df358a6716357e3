#ifndef CFL_TESTS_SUPPORT_TEST_HELPERS_HPP
#define CFL_TESTS_SUPPORT_TEST_HELPERS_HPP

#include <cmath>
#include <random>

#include "cfl/types.hpp"

namespace cfl::testing {

inline std::mt19937_64 make_rng(unsigned long long seed = 20240917ull) {
  return std::mt19937_64(seed);
}

inline ComplexMatrix random_hermitian(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(g(rng), g(rng));
  return 0.5 * (a + a.adjoint().eval());
}

// Hand-derived closed form for the thermal RWA exchange dissipation under the
// ramped drive, valid at any detuning d = omega2 - omega1.  Obtained by
// summing the two downhill directions of the single |gap| = |d| transition:
// the populations enter only through <n1> - <n2> = sinh(beta d / 2) /
// (2 sinh(beta w1 / 2) sinh(beta w2 / 2)).  Kept independent of the library
// so it can referee the spectral sum.
inline double rwa_lineshape(double beta, double gamma, double eta, double omega1, double omega2) {
  if (std::isinf(beta)) return 0.0;
  const double d = omega2 - omega1;
  const double s1 = std::sinh(0.5 * beta * omega1);
  const double s2 = std::sinh(0.5 * beta * omega2);
  const double lor = eta * eta + d * d;
  return gamma * gamma * d * std::sinh(0.5 * beta * d) / (2.0 * lor * lor * s1 * s2);
}

}  // namespace cfl::testing

#endif
