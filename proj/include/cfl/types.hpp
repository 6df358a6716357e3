#ifndef CFL_TYPES_HPP
#define CFL_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>

namespace cfl {

using Complex = std::complex<double>;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

// hbar = 1 throughout; energies and frequencies share units.

// Raised when a result cannot be trusted at the requested accuracy
// (grid too short, truncation too small, self-check breach).
class convergence_error : public std::runtime_error {
 public:
  explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

enum class Route { spectral, kubo_freq, kubo_time, propagator, closed_form };

inline const char* route_name(Route r) {
  switch (r) {
    case Route::spectral: return "spectral";
    case Route::kubo_freq: return "kubo_freq";
    case Route::kubo_time: return "kubo_time";
    case Route::propagator: return "propagator";
    case Route::closed_form: return "closed_form";
  }
  return "unknown";
}

// One dissipation number plus enough metadata to audit it.
struct DissipationResult {
  double delta_e = 0.0;
  Route route = Route::spectral;
  std::map<std::string, double> meta;  // n_max, beta, grid params, diagnostics
};

struct TimeGrid {
  double t0 = 0.0;
  double t1 = 0.0;
  double dt = 0.0;

  int points() const {
    if (dt <= 0.0 || t1 <= t0) throw std::invalid_argument("TimeGrid: need dt > 0 and t1 > t0");
    return static_cast<int>(std::lround((t1 - t0) / dt)) + 1;
  }
  double time(int i) const { return t0 + dt * i; }
};

// Compensated accumulator; keeps long reductions deterministic and tight.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

inline double relative_gap(double a, double b) {
  if (a == b) return 0.0;
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) / scale;
}

}  // namespace cfl

#endif
