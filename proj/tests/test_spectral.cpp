#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <limits>

#include "cfl/drive.hpp"
#include "cfl/fockspace.hpp"
#include "cfl/resonance.hpp"
#include "cfl/spectral.hpp"
#include "cfl/thermal.hpp"
#include "support/test_helpers.hpp"

using namespace cfl;

namespace {

double spectral_value(const ComplexMatrix& coupling, const DriveSignal& signal,
                      const ProductBasis& basis, const ThermalEnsemble& ens) {
  return delta_e_spectral(amplitudes(coupling, signal, basis), ens, basis).delta_e;
}

}  // namespace

TEST_CASE("two-level exchange dissipation matches literal Boltzmann arithmetic") {
  const double w1 = 1.0, w2 = 1.3, beta = 0.8, gamma = 1e-3, eta = 0.2;
  const ProductBasis basis({w1, 1.0}, {w2, 1.0}, 1);
  const ThermalEnsemble ens = make_ensemble(basis, beta);
  const DriveSignal q = DriveSignal::ramp_exp(gamma, eta);

  // Only |10> <-> |01> is coupled (element 1); the one gap is d = w2 - w1.
  const double p00 = std::exp(-beta * 0.5 * (w1 + w2));
  const double p10 = std::exp(-beta * (1.5 * w1 + 0.5 * w2));
  const double p01 = std::exp(-beta * (0.5 * w1 + 1.5 * w2));
  const double p11 = std::exp(-beta * (1.5 * w1 + 1.5 * w2));
  const double z = p00 + p10 + p01 + p11;
  const double d = w2 - w1;
  const double kernel = gamma * gamma / std::pow(eta * eta + d * d, 2);
  const double expected = d * kernel * (p10 - p01) / z;

  const double de = spectral_value(rwa_coupling(basis), q, basis, ens);
  REQUIRE(de == Catch::Approx(expected).epsilon(1e-12));
  REQUIRE(de > 0.0);
}

TEST_CASE("dissipation scales exactly with the square of the drive amplitude") {
  const ProductBasis basis({1.0, 1.0}, {1.2, 1.0}, 4);
  const ThermalEnsemble ens = make_ensemble(basis, 1.0);
  const double de1 =
      spectral_value(full_coupling(basis), DriveSignal::ramp_exp(1e-3, 0.3), basis, ens);
  const double de2 =
      spectral_value(full_coupling(basis), DriveSignal::ramp_exp(2e-3, 0.3), basis, ens);
  REQUIRE(de2 == 4.0 * de1);  // exact: amplitude doubling only shifts exponents
}

TEST_CASE("dissipation is non-negative for random couplings and ensembles") {
  auto rng = cfl::testing::make_rng();
  const double betas[] = {0.4, 0.9, 2.5, std::numeric_limits<double>::infinity()};
  int trial = 0;
  for (int rep = 0; rep < 30; ++rep) {
    const double w2 = 0.7 + 0.1 * (rep % 9);
    const ProductBasis basis({1.0, 1.0}, {w2, 1.0}, 2);
    const ThermalEnsemble ens = make_ensemble(basis, betas[rep % 4]);
    const ComplexMatrix a = cfl::testing::random_hermitian(static_cast<int>(basis.size()), rng);
    const DriveSignal q = (rep % 2 == 0) ? DriveSignal::ramp_exp(0.01, 0.2 + 0.05 * (rep % 3))
                                         : DriveSignal::gaussian_pulse(0.01, 1.0 + rep % 4);
    const DissipationResult r = delta_e_spectral(amplitudes(a, q, basis), ens, basis);
    INFO("trial " << trial << " beta " << ens.beta << " w2 " << w2);
    REQUIRE(r.delta_e >= -1e-10 * r.meta.at("scale"));
    ++trial;
  }
}

TEST_CASE("exchange dissipation reproduces its closed-form lineshape") {
  const double beta = 1.0, gamma = 1e-3, eta = 0.1, w1 = 1.0, w2 = 1.25;
  const int n_max = occupancy_levels(beta, w1) + 4;
  const ProductBasis basis({w1, 1.0}, {w2, 1.0}, n_max);
  const ThermalEnsemble ens = make_ensemble(basis, beta);
  const double de = spectral_value(rwa_coupling(basis), DriveSignal::ramp_exp(gamma, eta), basis,
                                   ens);
  const double expected = cfl::testing::rwa_lineshape(beta, gamma, eta, w1, w2);
  REQUIRE(expected == Catch::Approx(8.581478638588038e-06).epsilon(1e-13));  // frozen
  REQUIRE(de == Catch::Approx(expected).epsilon(1e-7));
}

TEST_CASE("exchange coupling dissipates nothing on resonance") {
  const ProductBasis basis({1.0, 1.0}, {1.0, 1.0}, 8);
  const ThermalEnsemble ens = make_ensemble(basis, 1.0);
  const double de =
      spectral_value(rwa_coupling(basis), DriveSignal::ramp_exp(1e-2, 0.1), basis, ens);
  REQUIRE(de == 0.0);  // every coupled pair is degenerate, each term carries a zero gap
}

TEST_CASE("pair terms keep the full coupling dissipative at finite temperature") {
  const ProductBasis basis({1.0, 1.0}, {1.3, 1.0}, 10);
  const ThermalEnsemble ens = make_ensemble(basis, 1.0);
  const DissipationResult r =
      delta_e_spectral(amplitudes(full_coupling(basis), DriveSignal::ramp_exp(1e-3, 0.2), basis),
                       ens, basis);
  REQUIRE(r.delta_e > 0.0);
  REQUIRE(r.meta.count("form_gap") == 1);
  REQUIRE(r.meta.at("form_gap") <= 1e-12 * r.meta.at("scale"));
}
