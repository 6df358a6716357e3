#ifndef CFL_DRIVE_HPP
#define CFL_DRIVE_HPP

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cfl/fockspace.hpp"
#include "cfl/types.hpp"

namespace cfl {

enum class DriveKind { ramp_exp, gaussian_pulse, tabulated };

inline constexpr double kBoundaryDecay = 1e-10;  // required |q|/max|q| at grid ends

// Real classical drive q(t). Closed-form kinds carry their parameters;
// tabulated signals carry a uniform sample grid.
class DriveSignal {
 public:
  // gamma * t * exp(-eta t) for t > 0, zero before
  static DriveSignal ramp_exp(double gamma, double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("ramp_exp: eta must be > 0");
    DriveSignal s;
    s.kind_ = DriveKind::ramp_exp;
    s.gamma_ = gamma;
    s.eta_ = eta;
    return s;
  }

  // gamma * exp(-(t/tau)^2)
  static DriveSignal gaussian_pulse(double gamma, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("gaussian_pulse: tau must be > 0");
    DriveSignal s;
    s.kind_ = DriveKind::gaussian_pulse;
    s.gamma_ = gamma;
    s.tau_ = tau;
    return s;
  }

  // Uniformly sampled values; must be decayed below kBoundaryDecay * max|q|
  // at both ends so the Fourier transform over the grid is trustworthy.
  static DriveSignal tabulated(std::vector<double> times, std::vector<double> values) {
    if (times.size() != values.size())
      throw std::invalid_argument("tabulated: times/values length mismatch");
    if (times.size() < 3)
      throw std::invalid_argument("tabulated: need at least 3 samples");
    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) throw std::invalid_argument("tabulated: times must be increasing");
    for (std::size_t i = 1; i < times.size(); ++i) {
      const double step = times[i] - times[i - 1];
      if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
        throw std::invalid_argument("tabulated: grid must be uniform");
    }
    double peak = 0.0;
    for (double v : values) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) throw std::invalid_argument("tabulated: signal is identically zero");
    if (std::abs(values.front()) > kBoundaryDecay * peak ||
        std::abs(values.back()) > kBoundaryDecay * peak)
      throw convergence_error(
          "tabulated: signal not decayed below 1e-10 of max at the grid ends");
    DriveSignal s;
    s.kind_ = DriveKind::tabulated;
    s.times_ = std::move(times);
    s.values_ = std::move(values);
    s.dt_ = dt;
    return s;
  }

  DriveKind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  double eta() const { return eta_; }
  double tau() const { return tau_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(double t) const {
    switch (kind_) {
      case DriveKind::ramp_exp:
        return t > 0.0 ? gamma_ * t * std::exp(-eta_ * t) : 0.0;
      case DriveKind::gaussian_pulse: {
        const double u = t / tau_;
        return gamma_ * std::exp(-u * u);
      }
      case DriveKind::tabulated: {
        if (t < times_.front() || t > times_.back()) return 0.0;
        const double x = (t - times_.front()) / dt_;
        const auto i = static_cast<std::size_t>(x);
        if (i + 1 >= times_.size()) return values_.back();
        const double w = x - static_cast<double>(i);
        return (1.0 - w) * values_[i] + w * values_[i + 1];
      }
    }
    return 0.0;
  }

  double derivative(double t) const {
    switch (kind_) {
      case DriveKind::ramp_exp:
        return t > 0.0 ? gamma_ * (1.0 - eta_ * t) * std::exp(-eta_ * t) : 0.0;
      case DriveKind::gaussian_pulse: {
        const double u = t / tau_;
        return gamma_ * (-2.0 * u / tau_) * std::exp(-u * u);
      }
      case DriveKind::tabulated:
        return ((*this)(t + dt_) - (*this)(t - dt_)) / (2.0 * dt_);
    }
    return 0.0;
  }

  // largest |q| (exact for the closed forms, sample max for tabulated)
  double peak() const {
    switch (kind_) {
      case DriveKind::ramp_exp:
        return std::abs(gamma_) / (eta_ * std::exp(1.0));
      case DriveKind::gaussian_pulse:
        return std::abs(gamma_);
      case DriveKind::tabulated: {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
      }
    }
    return 0.0;
  }

 private:
  DriveSignal() = default;
  DriveKind kind_ = DriveKind::ramp_exp;
  double gamma_ = 0.0, eta_ = 0.0, tau_ = 0.0, dt_ = 0.0;
  std::vector<double> times_, values_;
};

// qhat(w) = integral q(t) exp(-i w t) dt
inline Complex fourier(const DriveSignal& s, double omega) {
  switch (s.kind()) {
    case DriveKind::ramp_exp: {
      const Complex d(s.eta(), omega);
      return s.gamma() / (d * d);
    }
    case DriveKind::gaussian_pulse: {
      const double tau = s.tau();
      const double arg = 0.5 * omega * tau;
      return Complex(s.gamma() * tau * std::sqrt(M_PI) * std::exp(-arg * arg), 0.0);
    }
    case DriveKind::tabulated: {
      const auto& t = s.times();
      const auto& q = s.values();
      const double dt = t[1] - t[0];
      KahanSum re, im;
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double w = (i == 0 || i + 1 == t.size()) ? 0.5 : 1.0;
        const double phase = omega * t[i];
        re.add(w * q[i] * std::cos(phase));
        im.add(-w * q[i] * std::sin(phase));
      }
      return Complex(re.value() * dt, im.value() * dt);
    }
  }
  return Complex(0.0, 0.0);
}

// qhat(w) qhat(-w); for a real signal this is |qhat(w)|^2 >= 0.
inline double power_kernel(const DriveSignal& s, double omega) {
  switch (s.kind()) {
    case DriveKind::ramp_exp: {
      const double d = s.eta() * s.eta() + omega * omega;
      return s.gamma() * s.gamma() / (d * d);
    }
    case DriveKind::gaussian_pulse: {
      const double a = s.gamma() * s.tau() * std::sqrt(M_PI);
      const double arg = 0.5 * omega * s.tau();
      return a * a * std::exp(-2.0 * arg * arg);
    }
    case DriveKind::tabulated:
      return std::norm(fourier(s, omega));
  }
  return 0.0;
}

// Coupling amplitude from mechanical parameters: (D/2)^(1/2) v.grad(psi)
// with D = 1 / (2 m1 m2 w1 w2).
inline double gamma_from_physics(double v_dot_grad_psi, const OscillatorSpec& s1,
                                 const OscillatorSpec& s2) {
  if (!(s1.omega > 0.0) || !(s2.omega > 0.0) || !(s1.mass > 0.0) || !(s2.mass > 0.0))
    throw std::invalid_argument("gamma_from_physics: masses and frequencies must be > 0");
  const double d = 1.0 / (2.0 * s1.mass * s2.mass * s1.omega * s2.omega);
  return std::sqrt(0.5 * d) * v_dot_grad_psi;
}

// Time past which |q| stays below rel * max|q|.
inline double decay_time(const DriveSignal& s, double rel = kBoundaryDecay) {
  // the 1% pad keeps sampled signals strictly below the threshold even when
  // the discrete peak undershoots the continuum one
  switch (s.kind()) {
    case DriveKind::ramp_exp: {
      // solve t e^(-eta t) = rel / (eta e) by fixed-point iteration on logs
      const double eta = s.eta();
      const double c = -std::log(rel / (eta * std::exp(1.0)));
      double t = (c + 1.0) / eta;
      for (int k = 0; k < 80; ++k) t = (std::log(t) + c) / eta;
      return 1.01 * t;
    }
    case DriveKind::gaussian_pulse:
      return 1.01 * s.tau() * std::sqrt(-std::log(rel));
    case DriveKind::tabulated:
      return s.times().back();
  }
  return 0.0;
}

// Sample a closed-form signal onto a uniform grid.
inline DriveSignal tabulate(const DriveSignal& s, double t0, double t1, double dt) {
  const TimeGrid grid{t0, t1, dt};
  const int n = grid.points();
  std::vector<double> times(n), values(n);
  for (int i = 0; i < n; ++i) {
    times[i] = grid.time(i);
    values[i] = s(times[i]);
  }
  return DriveSignal::tabulated(std::move(times), std::move(values));
}

// Two columns (t, q) separated by whitespace; '#' starts a comment.
inline DriveSignal load_drive(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("load_drive: cannot open '" + path + "'");
  std::vector<double> times, values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double t, q;
    if (!(ls >> t)) continue;  // blank or comment-only line
    if (!(ls >> q))
      throw io_error("load_drive: " + path + ":" + std::to_string(lineno) +
                     ": expected two columns");
    times.push_back(t);
    values.push_back(q);
  }
  if (times.empty()) throw io_error("load_drive: " + path + ": no samples");
  return DriveSignal::tabulated(std::move(times), std::move(values));
}

}  // namespace cfl

#endif
