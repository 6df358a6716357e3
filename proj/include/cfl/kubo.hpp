#ifndef CFL_KUBO_HPP
#define CFL_KUBO_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cfl/drive.hpp"
#include "cfl/fockspace.hpp"
#include "cfl/thermal.hpp"
#include "cfl/types.hpp"

namespace cfl {

// (1/i) Tr{rho [A, A(t)]} assembled literally: A(t) = e^{i H0 t} A e^{-i H0 t}
// with explicit phase matrices, then the commutator diagonal traced against
// the weights. Quadratic cost per sample; used as an independent check.
inline double response_brute_force(const ComplexMatrix& coupling, const ThermalEnsemble& ensemble,
                                   const ProductBasis& basis, double t) {
  const Eigen::Index dim = basis.size();
  ComplexVector phase(dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    phase[i] = std::exp(Complex(0.0, basis.energy(i) * t));
  ComplexMatrix at(dim, dim);
  for (Eigen::Index n = 0; n < dim; ++n)
    for (Eigen::Index m = 0; m < dim; ++m)
      at(n, m) = phase[n] * coupling(n, m) * std::conj(phase[m]);
  Complex acc(0.0, 0.0);
  for (Eigen::Index n = 0; n < dim; ++n) {
    Complex diag(0.0, 0.0);
    for (Eigen::Index m = 0; m < dim; ++m)
      diag += coupling(n, m) * at(m, n) - at(n, m) * coupling(m, n);
    acc += ensemble.weights[n] * diag;
  }
  return (acc / Complex(0.0, 1.0)).real();
}

// Equilibrium response function phi_AA(t) = (1/i) Tr{rho [A, A(t)]} in its
// spectral form: phi(t) = -2 sum_nm M_nm sin(w_nm t) with
// M_nm = (P_n - P_m) |A_nm|^2 / 2 (the overflow-free equivalent of the
// sinh-weighted matrix element form). Internally compressed to a mode list
// phi(t) = sum_k c_k sin(w_k t) over energy-downhill pairs.
class ResponseFunction {
 public:
  struct Mode {
    double omega;
    double coeff;
  };

  ResponseFunction(const ComplexMatrix& coupling, const ThermalEnsemble& ensemble,
                   const ProductBasis& basis, bool self_check = true)
      : beta_(ensemble.beta), n_max_(basis.n_max()) {
    const Eigen::Index dim = basis.size();
    if (coupling.rows() != dim || coupling.cols() != dim)
      throw std::invalid_argument("ResponseFunction: coupling dimension does not match basis");
    if (ensemble.weights.size() != dim)
      throw std::invalid_argument("ResponseFunction: ensemble dimension does not match basis");

    m_ = RealMatrix::Zero(dim, dim);
    for (Eigen::Index n = 0; n < dim; ++n)
      for (Eigen::Index m = 0; m < dim; ++m) {
        if (n == m) continue;
        const double a2 = std::norm(coupling(n, m));
        if (a2 == 0.0) continue;
        m_(n, m) = 0.5 * (ensemble.weights[n] - ensemble.weights[m]) * a2;
      }

    for (Eigen::Index n = 0; n < dim; ++n)
      for (Eigen::Index m = 0; m < dim; ++m) {
        if (m_(n, m) == 0.0) continue;
        const double w = basis.energy(n) - basis.energy(m);
        if (w > 0.0) modes_.push_back({w, -4.0 * m_(n, m)});
      }
    std::stable_sort(modes_.begin(), modes_.end(),
                     [](const Mode& a, const Mode& b) { return a.omega < b.omega; });

    if (self_check && !modes_.empty()) {
      double span = 0.0;
      for (const Mode& m : modes_) span = std::max(span, std::abs(m.coeff));
      double coeff_sum = 0.0;
      for (const Mode& m : modes_) coeff_sum += std::abs(m.coeff);
      const double w_top = modes_.back().omega;
      for (double s : {0.37, 1.03, 2.71}) {
        const double t = s / w_top;
        const double direct = response_brute_force(coupling, ensemble, basis, t);
        if (std::abs((*this)(t)-direct) > 1e-9 * std::max(coeff_sum, span))
          throw convergence_error("ResponseFunction: mode sum disagrees with trace evaluation");
      }
    }
  }

  double operator()(double t) const {
    KahanSum acc;
    for (const Mode& m : modes_) acc.add(m.coeff * std::sin(m.omega * t));
    return acc.value();
  }

  const RealMatrix& m_matrix() const { return m_; }
  const std::vector<Mode>& modes() const { return modes_; }
  double beta() const { return beta_; }
  int n_max() const { return n_max_; }

 private:
  RealMatrix m_;
  std::vector<Mode> modes_;
  double beta_;
  int n_max_;
};

// Exact frequency-domain balance: delta E = -sum_nm M_nm w_nm qhat(w) qhat(-w),
// folded over downhill pairs. Termwise identical to the spectral route.
inline DissipationResult delta_e_kubo_freq(const ResponseFunction& resp,
                                           const DriveSignal& signal) {
  KahanSum acc;
  for (const ResponseFunction::Mode& m : resp.modes())
    acc.add(0.5 * m.coeff * m.omega * power_kernel(signal, m.omega));
  DissipationResult r;
  r.delta_e = acc.value();
  r.route = Route::kubo_freq;
  r.meta["n_max"] = resp.n_max();
  r.meta["beta"] = resp.beta();
  r.meta["modes"] = static_cast<double>(resp.modes().size());
  return r;
}

enum class ConvolutionPath { direct, modal };

// Sampled drive, its derivative, and the causal friction force
// F_f(t) = integral_{t0}^{t} phi(t - t') q(t') dt' on a uniform grid.
struct ForceHistory {
  std::vector<double> t, q, v, force;
};

inline ForceHistory compute_force_history(const ResponseFunction& resp, const DriveSignal& signal,
                                          const TimeGrid& grid,
                                          ConvolutionPath path = ConvolutionPath::direct) {
  const int n = grid.points();
  if (n < 5) throw std::invalid_argument("compute_force_history: grid too coarse");
  ForceHistory h;
  h.t.resize(n);
  h.q.resize(n);
  h.v.resize(n);
  h.force.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    h.t[i] = grid.time(i);
    h.q[i] = signal(h.t[i]);
  }

  double peak = 0.0;
  for (double q : h.q) peak = std::max(peak, std::abs(q));
  if (peak == 0.0) return h;
  if (std::abs(h.q.front()) > kBoundaryDecay * peak || std::abs(h.q.back()) > kBoundaryDecay * peak)
    throw convergence_error(
        "compute_force_history: grid too short, signal not decayed below 1e-10 of max at ends");

  const double dt = grid.dt;
  // second-order derivative stencils, one-sided at the ends
  h.v[0] = (-3.0 * h.q[0] + 4.0 * h.q[1] - h.q[2]) / (2.0 * dt);
  for (int i = 1; i + 1 < n; ++i) h.v[i] = (h.q[i + 1] - h.q[i - 1]) / (2.0 * dt);
  h.v[n - 1] = (3.0 * h.q[n - 1] - 4.0 * h.q[n - 2] + h.q[n - 3]) / (2.0 * dt);

  if (path == ConvolutionPath::direct) {
    std::vector<double> phi(n);
    for (int l = 0; l < n; ++l) phi[l] = resp(dt * l);
    for (int i = 1; i < n; ++i) {
      double acc = 0.5 * phi[i] * h.q[0] + 0.5 * phi[0] * h.q[i];
      for (int j = 1; j < i; ++j) acc += phi[i - j] * h.q[j];
      h.force[i] = dt * acc;
    }
  } else {
    // Same trapezoid sum reassociated per mode: with phi(t) = sum c sin(w t),
    // F(t_i) = sum_k c_k [sin(w t_i) C_k(t_i) - cos(w t_i) S_k(t_i)] where
    // C, S are running cosine/sine moments of q. Exact up to roundoff.
    const auto& modes = resp.modes();
    const std::size_t k = modes.size();
    std::vector<KahanSum> pc(k), ps(k);
    std::vector<double> ci(k), si(k);
    for (int i = 0; i < n; ++i) {
      const double tr = dt * i;  // time relative to grid start; lags depend only on this
      KahanSum f;
      for (std::size_t j = 0; j < k; ++j) {
        const double arg = modes[j].omega * tr;
        ci[j] = std::cos(arg);
        si[j] = std::sin(arg);
        const double c_mom = pc[j].value() + 0.5 * dt * ci[j] * h.q[i];
        const double s_mom = ps[j].value() + 0.5 * dt * si[j] * h.q[i];
        f.add(modes[j].coeff * (si[j] * c_mom - ci[j] * s_mom));
      }
      if (i > 0) h.force[i] = f.value();
      const double w = (i == 0) ? 0.5 : 1.0;
      for (std::size_t j = 0; j < k; ++j) {
        pc[j].add(w * dt * ci[j] * h.q[i]);
        ps[j].add(w * dt * si[j] * h.q[i]);
      }
    }
  }
  return h;
}

// Time-domain work integral delta E = -integral v(t) F_f(t) dt with v = dq/dt
// by finite differences and trapezoidal quadrature throughout.
inline DissipationResult delta_e_kubo_time(const ResponseFunction& resp, const DriveSignal& signal,
                                           const TimeGrid& grid,
                                           ConvolutionPath path = ConvolutionPath::direct,
                                           bool estimate_halving = true) {
  const ForceHistory h = compute_force_history(resp, signal, grid, path);
  const int n = static_cast<int>(h.t.size());
  KahanSum acc;
  for (int i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    acc.add(w * h.v[i] * h.force[i]);
  }
  DissipationResult r;
  r.delta_e = -grid.dt * acc.value();
  r.route = Route::kubo_time;
  r.meta["n_max"] = resp.n_max();
  r.meta["beta"] = resp.beta();
  r.meta["dt"] = grid.dt;
  r.meta["t0"] = grid.t0;
  r.meta["t1"] = grid.t1;
  r.meta["points"] = n;

  if (estimate_halving && (n - 1) % 2 == 0 && n >= 9) {
    const TimeGrid coarse{grid.t0, grid.t1, 2.0 * grid.dt};
    const DissipationResult dc = delta_e_kubo_time(resp, signal, coarse, path, false);
    r.meta["halving_error"] = std::abs(r.delta_e - dc.delta_e);
  }
  return r;
}

}  // namespace cfl

#endif
