#ifndef CFL_RESONANCE_HPP
#define CFL_RESONANCE_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cfl/parallel.hpp"
#include "cfl/spectral.hpp"
#include "cfl/types.hpp"

namespace cfl {

struct ResonanceConfig {
  double omega1 = 1.0;
  double omega2 = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double eta = 0.01;
};

// Regularized delta kernel matched to the ramp drive's power spectrum:
// delta_eta(w) = (2 eta / pi) w^2 / (eta^2 + w^2)^2. Unit area, vanishes at
// w = 0, peaks at |w| = eta, collapses onto delta(w) as eta -> 0.
inline double delta_kernel(double eta, double omega) {
  if (!(eta > 0.0)) throw std::invalid_argument("delta_kernel: eta must be > 0");
  const double d = eta * eta + omega * omega;
  return (2.0 * eta / M_PI) * omega * omega / (d * d);
}

// Fraction of the kernel's unit mass inside |w| <= half_width.
inline double kernel_window_mass(double eta, double half_width) {
  if (!(eta > 0.0) || !(half_width > 0.0))
    throw std::invalid_argument("kernel_window_mass: eta and half_width must be > 0");
  const double u = half_width / eta;
  return (2.0 / M_PI) * (std::atan(u) - u / (1.0 + u * u));
}

// Weight of the resonance line: pi beta gamma^2 / (8 eta sinh^2(beta w1 / 2)).
inline double closed_form_weight(double beta, double gamma, double eta, double omega1) {
  if (!(beta > 0.0)) throw std::invalid_argument("closed_form_weight: beta must be > 0");
  if (!(eta > 0.0)) throw std::invalid_argument("closed_form_weight: eta must be > 0");
  if (std::isinf(beta)) return 0.0;  // beta / sinh^2 -> 0
  const double s = std::sinh(0.5 * beta * omega1);
  return M_PI * beta * gamma * gamma / (8.0 * eta * s * s);
}

// Resonance-line dissipation with the delta distribution replaced by the
// regularized kernel evaluated at the actual detuning.
inline DissipationResult delta_e_closed_form(const ResonanceConfig& c) {
  DissipationResult r;
  const double w = closed_form_weight(c.beta, c.gamma, c.eta, c.omega1);
  r.delta_e = w * delta_kernel(c.eta, c.omega1 - c.omega2);
  r.route = Route::closed_form;
  r.meta["beta"] = c.beta;
  r.meta["eta"] = c.eta;
  r.meta["weight"] = w;
  return r;
}

// Smallest n_max whose per-mode occupancy tail x^(n_max + 1), x = e^(-beta w),
// stays below tail_tol.
inline int occupancy_levels(double beta, double omega, double tail_tol = 1e-10, int cap = 200) {
  if (!(beta > 0.0) || !(omega > 0.0))
    throw std::invalid_argument("occupancy_levels: beta and omega must be > 0");
  if (std::isinf(beta)) return 1;
  const int n = static_cast<int>(std::ceil(-std::log(tail_tol) / (beta * omega))) ;
  if (n > cap)
    throw convergence_error("occupancy_levels: required n_max exceeds cap; basis would not fit");
  return std::max(n, 1);
}

struct DetuningRow {
  double detuning = 0.0;  // omega2 - omega1
  double delta_e_spectral = 0.0;
  double delta_e_closed = 0.0;
  double rel_gap = 0.0;
};

struct DetuningSweep {
  std::vector<DetuningRow> rows;
  int n_max = 0;
  double integrated_spectral = 0.0;  // Simpson over the swept window
  double integrated_closed = 0.0;
  double closed_weight = 0.0;   // full line weight at omega1
  double window_mass = 0.0;     // kernel mass inside the window
  double integrated_ratio = 0.0;
  double asymmetry = 0.0;       // max over +-d of |dE(+d)/dE(-d) - 1|
};

namespace detail {

inline double simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument("simpson: need an odd number of points >= 3");
  KahanSum acc;
  acc.add(f.front());
  acc.add(f.back());
  for (std::size_t i = 1; i + 1 < n; ++i) acc.add((i % 2 == 1 ? 4.0 : 2.0) * f[i]);
  return acc.value() * h / 3.0;
}

}  // namespace detail

// Sweeps the detuning w2 - w1 across the resonance window and compares the
// spectral-sum dissipation against the regularized line shape. The pointwise
// closed form uses sinh(beta w1/2) sinh(beta w2/2) (each mode weighted at its
// own frequency); the integrated comparison uses the single-frequency line
// weight times the kernel mass inside the window.
inline DetuningSweep compare_routes_near_resonance(const ResonanceConfig& c, int points = 101,
                                                   double span = 0.0, int n_max = 0,
                                                   int jobs = 1) {
  if (points < 5 || points % 2 == 0)
    throw std::invalid_argument("compare_routes_near_resonance: points must be odd and >= 5");
  if (span <= 0.0) span = 10.0 * c.eta;
  if (!(span < c.omega1))
    throw std::invalid_argument("compare_routes_near_resonance: window reaches omega2 <= 0");

  DetuningSweep sweep;
  const double omega_min = c.omega1 - span;
  sweep.n_max = (n_max > 0) ? n_max : occupancy_levels(c.beta, omega_min);
  sweep.rows.resize(points);

  const DriveSignal drive = DriveSignal::ramp_exp(c.gamma, c.eta);
  const double h = 2.0 * span / (points - 1);
  parallel_for(points, jobs, [&](int i) {
    const double d = -span + h * i;
    const double omega2 = c.omega1 + d;
    const ProductBasis basis({c.omega1, 1.0}, {omega2, 1.0}, sweep.n_max);
    const ThermalEnsemble ens = make_ensemble(basis, c.beta);
    const TransitionKernel kernel = amplitudes(rwa_coupling(basis), drive, basis);
    DetuningRow row;
    row.detuning = d;
    row.delta_e_spectral = delta_e_spectral(kernel, ens, basis).delta_e;
    if (std::isinf(c.beta)) {
      row.delta_e_closed = 0.0;
    } else {
      const double s1 = std::sinh(0.5 * c.beta * c.omega1);
      const double s2 = std::sinh(0.5 * c.beta * omega2);
      row.delta_e_closed = M_PI * c.beta * c.gamma * c.gamma / (8.0 * c.eta * s1 * s2) *
                           delta_kernel(c.eta, d);
    }
    row.rel_gap = relative_gap(row.delta_e_spectral, row.delta_e_closed);
    sweep.rows[i] = row;
  });

  std::vector<double> fs(points), fc(points);
  for (int i = 0; i < points; ++i) {
    fs[i] = sweep.rows[i].delta_e_spectral;
    fc[i] = sweep.rows[i].delta_e_closed;
  }
  sweep.integrated_spectral = detail::simpson(fs, h);
  sweep.integrated_closed = detail::simpson(fc, h);
  sweep.closed_weight = closed_form_weight(c.beta, c.gamma, c.eta, c.omega1);
  sweep.window_mass = kernel_window_mass(c.eta, span);
  const double denom = sweep.closed_weight * sweep.window_mass;
  sweep.integrated_ratio =
      (denom == 0.0) ? (sweep.integrated_spectral == 0.0 ? 1.0 : 0.0) : sweep.integrated_spectral / denom;

  for (int i = 0; i < points / 2; ++i) {
    const double lo = sweep.rows[i].delta_e_spectral;
    const double hi = sweep.rows[points - 1 - i].delta_e_spectral;
    if (lo > 0.0 && hi > 0.0)
      sweep.asymmetry = std::max(sweep.asymmetry, std::abs(hi / lo - 1.0));
  }
  return sweep;
}

struct EtaScalingRow {
  double eta = 0.0;
  double delta_e = 0.0;      // detuning-integrated dissipation over +-10 eta
  double eta_delta_e = 0.0;  // eta * delta_e; converges as eta -> 0
};

// The on-resonance line carries weight, not a pointwise value (the spectral
// sum vanishes identically at zero detuning), so the 1/eta divergence is
// measured on the window-integrated dissipation.
inline std::vector<EtaScalingRow> eta_scaling_study(const ResonanceConfig& c,
                                                    const std::vector<double>& etas,
                                                    int points = 101, int jobs = 1) {
  std::vector<EtaScalingRow> rows;
  rows.reserve(etas.size());
  for (double eta : etas) {
    if (!(eta > 0.0)) throw std::invalid_argument("eta_scaling_study: eta must be > 0");
    ResonanceConfig ci = c;
    ci.eta = eta;
    ci.omega2 = c.omega1;
    const DetuningSweep sweep = compare_routes_near_resonance(ci, points, 0.0, 0, jobs);
    rows.push_back({eta, sweep.integrated_spectral, eta * sweep.integrated_spectral});
  }
  return rows;
}

}  // namespace cfl

#endif
