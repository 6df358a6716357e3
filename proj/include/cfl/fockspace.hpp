#ifndef CFL_FOCKSPACE_HPP
#define CFL_FOCKSPACE_HPP

#include <cmath>
#include <stdexcept>
#include <utility>

#include "cfl/types.hpp"

namespace cfl {

struct OscillatorSpec {
  double omega = 1.0;
  double mass = 1.0;
};

struct FockIndex {
  int n1 = 0;
  int n2 = 0;
};

// Truncated product basis |n1, n2>, n_i = 0..n_max, lexicographic order
// (n1 major, n2 minor). Energies are the uncoupled oscillator energies
// w1 (n1 + 1/2) + w2 (n2 + 1/2).
class ProductBasis {
 public:
  ProductBasis(const OscillatorSpec& s1, const OscillatorSpec& s2, int n_max)
      : spec1_(s1), spec2_(s2), n_max_(n_max) {
    if (!(s1.omega > 0.0) || !(s2.omega > 0.0))
      throw std::invalid_argument("ProductBasis: oscillator frequencies must be > 0");
    if (!(s1.mass > 0.0) || !(s2.mass > 0.0))
      throw std::invalid_argument("ProductBasis: oscillator masses must be > 0");
    if (n_max < 1) throw std::invalid_argument("ProductBasis: n_max must be >= 1");
    const int levels = n_max_ + 1;
    energies_.resize(static_cast<Eigen::Index>(levels) * levels);
    for (int n1 = 0; n1 <= n_max_; ++n1)
      for (int n2 = 0; n2 <= n_max_; ++n2)
        energies_[index(n1, n2)] = s1.omega * (n1 + 0.5) + s2.omega * (n2 + 0.5);
  }

  int n_max() const { return n_max_; }
  int levels() const { return n_max_ + 1; }
  Eigen::Index size() const { return energies_.size(); }

  Eigen::Index index(int n1, int n2) const {
    return static_cast<Eigen::Index>(n1) * levels() + n2;
  }
  FockIndex state(Eigen::Index i) const {
    return {static_cast<int>(i / levels()), static_cast<int>(i % levels())};
  }

  double energy(Eigen::Index i) const { return energies_[i]; }
  const RealVector& energies() const { return energies_; }

  const OscillatorSpec& spec1() const { return spec1_; }
  const OscillatorSpec& spec2() const { return spec2_; }
  double omega1() const { return spec1_.omega; }
  double omega2() const { return spec2_.omega; }

 private:
  OscillatorSpec spec1_, spec2_;
  int n_max_;
  RealVector energies_;
};

inline ProductBasis build_basis(const OscillatorSpec& s1, const OscillatorSpec& s2, int n_max) {
  return ProductBasis(s1, s2, n_max);
}

// Lowering/raising pair for one mode. Raising out of the box is dropped
// (hard truncation), so a and adag are exact transposes of each other.
inline std::pair<ComplexMatrix, ComplexMatrix> ladder_ops(const ProductBasis& basis, int which) {
  if (which != 1 && which != 2) throw std::invalid_argument("ladder_ops: which must be 1 or 2");
  const Eigen::Index dim = basis.size();
  ComplexMatrix lower = ComplexMatrix::Zero(dim, dim);
  ComplexMatrix raise = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const FockIndex s = basis.state(i);
    const int n = (which == 1) ? s.n1 : s.n2;
    if (n > 0) {
      const Eigen::Index j =
          (which == 1) ? basis.index(s.n1 - 1, s.n2) : basis.index(s.n1, s.n2 - 1);
      lower(j, i) = std::sqrt(static_cast<double>(n));
    }
    if (n < basis.n_max()) {
      const Eigen::Index j =
          (which == 1) ? basis.index(s.n1 + 1, s.n2) : basis.index(s.n1, s.n2 + 1);
      raise(j, i) = std::sqrt(static_cast<double>(n + 1));
    }
  }
  return {std::move(lower), std::move(raise)};
}

inline ComplexMatrix number_op(const ProductBasis& basis, int which) {
  if (which != 1 && which != 2) throw std::invalid_argument("number_op: which must be 1 or 2");
  const Eigen::Index dim = basis.size();
  ComplexMatrix n = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const FockIndex s = basis.state(i);
    n(i, i) = static_cast<double>((which == 1) ? s.n1 : s.n2);
  }
  return n;
}

// Energy-conserving exchange coupling a1 a2^dag + a1^dag a2. Connects
// (n1, n2) <-> (n1 + 1, n2 - 1); total quanta n1 + n2 is preserved.
inline ComplexMatrix rwa_coupling(const ProductBasis& basis) {
  const Eigen::Index dim = basis.size();
  ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const FockIndex s = basis.state(i);
    if (s.n1 < basis.n_max() && s.n2 > 0) {
      // <n1+1, n2-1| a1^dag a2 |n1, n2> = sqrt(n1+1) sqrt(n2)
      const double v = std::sqrt(static_cast<double>(s.n1 + 1)) *
                       std::sqrt(static_cast<double>(s.n2));
      const Eigen::Index j = basis.index(s.n1 + 1, s.n2 - 1);
      a(j, i) = v;
      a(i, j) = v;
    }
  }
  return a;
}

// All four bilinears a1 a2 + a1 a2^dag + a1^dag a2 + a1^dag a2^dag.
// The counter-rotating pieces change total quanta by +-2.
inline ComplexMatrix full_coupling(const ProductBasis& basis) {
  const Eigen::Index dim = basis.size();
  ComplexMatrix a = rwa_coupling(basis);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const FockIndex s = basis.state(i);
    if (s.n1 < basis.n_max() && s.n2 < basis.n_max()) {
      // <n1+1, n2+1| a1^dag a2^dag |n1, n2> = sqrt(n1+1) sqrt(n2+1)
      const double v = std::sqrt(static_cast<double>(s.n1 + 1)) *
                       std::sqrt(static_cast<double>(s.n2 + 1));
      const Eigen::Index j = basis.index(s.n1 + 1, s.n2 + 1);
      a(j, i) += v;
      a(i, j) += v;
    }
  }
  return a;
}

inline double hermiticity_defect(const ComplexMatrix& op) {
  return (op - op.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace cfl

#endif
