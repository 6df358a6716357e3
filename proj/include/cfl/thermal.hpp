#ifndef CFL_THERMAL_HPP
#define CFL_THERMAL_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cfl/fockspace.hpp"
#include "cfl/types.hpp"

namespace cfl {

// Normalized Boltzmann weights over a ProductBasis. beta = +inf encodes T = 0:
// weight 1 split equally over the (possibly degenerate) ground manifold.
struct ThermalEnsemble {
  double beta = 1.0;
  RealVector weights;
  double log_partition = 0.0;  // -inf for the T = 0 projector

  bool zero_temperature() const { return std::isinf(beta); }
};

inline ThermalEnsemble make_ensemble(const ProductBasis& basis, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("make_ensemble: beta must be > 0");
  ThermalEnsemble ens;
  ens.beta = beta;
  const Eigen::Index dim = basis.size();
  ens.weights.resize(dim);

  const double e_min = basis.energies().minCoeff();
  if (std::isinf(beta)) {
    const double tol = 1e-12 * std::max(1.0, std::abs(e_min));
    Eigen::Index degeneracy = 0;
    for (Eigen::Index i = 0; i < dim; ++i)
      if (basis.energy(i) - e_min <= tol) ++degeneracy;
    for (Eigen::Index i = 0; i < dim; ++i)
      ens.weights[i] = (basis.energy(i) - e_min <= tol) ? 1.0 / degeneracy : 0.0;
    ens.log_partition = -std::numeric_limits<double>::infinity();
    return ens;
  }

  // log-sum-exp shifted by the ground energy
  KahanSum z;
  for (Eigen::Index i = 0; i < dim; ++i) z.add(std::exp(-beta * (basis.energy(i) - e_min)));
  ens.log_partition = -beta * e_min + std::log(z.value());
  for (Eigen::Index i = 0; i < dim; ++i)
    ens.weights[i] = std::exp(-beta * basis.energy(i) - ens.log_partition);
  return ens;
}

inline double mean_occupancy(const ThermalEnsemble& ens, const ProductBasis& basis, int which) {
  if (which != 1 && which != 2) throw std::invalid_argument("mean_occupancy: which must be 1 or 2");
  if (ens.weights.size() != basis.size())
    throw std::invalid_argument("mean_occupancy: ensemble/basis size mismatch");
  KahanSum acc;
  for (Eigen::Index i = 0; i < basis.size(); ++i) {
    const FockIndex s = basis.state(i);
    acc.add(ens.weights[i] * ((which == 1) ? s.n1 : s.n2));
  }
  return acc.value();
}

// <(n1+1) n2 + n1 (n2+1)> over the product ensemble. For equal-frequency
// modes this equals 2 (<n>+1) <n> = 1 / (2 sinh^2(beta w / 2)).
inline double pair_weight_factor(const ThermalEnsemble& ens, const ProductBasis& basis) {
  if (basis.omega1() != basis.omega2())
    throw std::invalid_argument("pair_weight_factor: defined for equal frequencies only");
  if (ens.weights.size() != basis.size())
    throw std::invalid_argument("pair_weight_factor: ensemble/basis size mismatch");
  KahanSum acc;
  for (Eigen::Index i = 0; i < basis.size(); ++i) {
    const FockIndex s = basis.state(i);
    const double n1 = s.n1, n2 = s.n2;
    acc.add(ens.weights[i] * ((n1 + 1.0) * n2 + n1 * (n2 + 1.0)));
  }
  return acc.value();
}

}  // namespace cfl

#endif
