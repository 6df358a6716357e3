#ifndef CFL_SPECTRAL_HPP
#define CFL_SPECTRAL_HPP

#include <cmath>
#include <stdexcept>

#include "cfl/drive.hpp"
#include "cfl/fockspace.hpp"
#include "cfl/thermal.hpp"
#include "cfl/types.hpp"

namespace cfl {

// First-order transition amplitudes b_nm = i A_nm qhat(-w_nm), w_nm = E_n - E_m,
// and probabilities B_nm = |b_nm|^2. B is symmetric.
struct TransitionKernel {
  ComplexMatrix b;
  RealMatrix B;
};

inline TransitionKernel amplitudes(const ComplexMatrix& coupling, const DriveSignal& signal,
                                   const ProductBasis& basis) {
  const Eigen::Index dim = basis.size();
  if (coupling.rows() != dim || coupling.cols() != dim)
    throw std::invalid_argument("amplitudes: coupling dimension does not match basis");
  TransitionKernel k;
  k.b = ComplexMatrix::Zero(dim, dim);
  k.B = RealMatrix::Zero(dim, dim);
  const Complex i_unit(0.0, 1.0);
  for (Eigen::Index n = 0; n < dim; ++n) {
    const double e_n = basis.energy(n);
    for (Eigen::Index m = 0; m < dim; ++m) {
      const Complex a = coupling(n, m);
      if (a == Complex(0.0, 0.0)) continue;
      const Complex amp = i_unit * a * fourier(signal, -(e_n - basis.energy(m)));
      k.b(n, m) = amp;
      k.B(n, m) = std::norm(amp);
    }
  }
  return k;
}

// Golden-rule energy balance: (1/2) sum_nm (E_n - E_m)(P_m - P_n) B_nm.
// Every term is >= 0 (downhill transitions win from the more populated side).
// Cross-checked against the asymmetric form sum_nm (E_n - E_m) P_m B_nm.
inline DissipationResult delta_e_spectral(const TransitionKernel& kernel,
                                          const ThermalEnsemble& ensemble,
                                          const ProductBasis& basis) {
  const Eigen::Index dim = basis.size();
  if (kernel.B.rows() != dim || kernel.B.cols() != dim)
    throw std::invalid_argument("delta_e_spectral: kernel dimension does not match basis");
  if (ensemble.weights.size() != dim)
    throw std::invalid_argument("delta_e_spectral: ensemble dimension does not match basis");

  KahanSum symmetric, asymmetric, scale;
  for (Eigen::Index n = 0; n < dim; ++n) {
    const double e_n = basis.energy(n);
    const double p_n = ensemble.weights[n];
    for (Eigen::Index m = 0; m < dim; ++m) {
      if (n == m) continue;
      const double gap = e_n - basis.energy(m);
      if (gap == 0.0) continue;  // degenerate pair: exact zero, skip the 0 * peak ambiguity
      const double b = kernel.B(n, m);
      if (b == 0.0) continue;
      const double p_m = ensemble.weights[m];
      symmetric.add(0.5 * gap * (p_m - p_n) * b);
      asymmetric.add(gap * p_m * b);
      scale.add(std::abs(gap) * p_m * b);
    }
  }

  const double de = symmetric.value();
  const double form_gap = std::abs(asymmetric.value() - de);
  const double floor = std::max(scale.value(), 1e-300);
  if (form_gap > 1e-10 * floor)
    throw convergence_error("delta_e_spectral: symmetric/asymmetric forms disagree beyond 1e-10");
  if (de < -1e-10 * floor)
    throw convergence_error("delta_e_spectral: negative dissipation beyond roundoff");

  DissipationResult r;
  r.delta_e = de;
  r.route = Route::spectral;
  r.meta["n_max"] = basis.n_max();
  r.meta["beta"] = ensemble.beta;
  r.meta["scale"] = scale.value();
  r.meta["form_gap"] = form_gap;
  return r;
}

}  // namespace cfl

#endif
