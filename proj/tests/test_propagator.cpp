#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "cfl/drive.hpp"
#include "cfl/fockspace.hpp"
#include "cfl/propagator.hpp"
#include "cfl/spectral.hpp"
#include "cfl/thermal.hpp"
#include "support/test_helpers.hpp"

using namespace cfl;

namespace {

ComplexVector basis_state(const ProductBasis& basis, int n1, int n2) {
  ComplexVector psi = ComplexVector::Zero(basis.size());
  psi(basis.index(n1, n2)) = 1.0;
  return psi;
}

}  // namespace

TEST_CASE("free evolution only rotates phases") {
  const ProductBasis basis({1.0, 1.0}, {1.3, 1.0}, 3);
  ComplexVector psi0 = ComplexVector::Zero(basis.size());
  psi0(basis.index(0, 0)) = 0.6;
  psi0(basis.index(1, 2)) = Complex(0.0, 0.48);
  psi0(basis.index(3, 1)) = -0.64;

  PropagationRun run;
  run.grid = TimeGrid{0.0, 8.0, 0.05};
  const StateResult r =
      propagate_state(psi0, full_coupling(basis), DriveSignal::ramp_exp(0.0, 0.3), basis, run);

  ComplexVector expected(basis.size());
  for (Eigen::Index k = 0; k < basis.size(); ++k)
    expected(k) = psi0(k) * std::exp(Complex(0.0, -basis.energy(k) * 8.0));
  REQUIRE(std::abs(std::abs(expected.dot(r.psi)) - 1.0) < 1e-10);
  REQUIRE(r.norm_drift < 1e-12);
  REQUIRE(r.leakage < 1e-12);

  const ThermalEnsemble ens = make_ensemble(basis, 1.0);
  const double de =
      delta_e_propagated(ens, full_coupling(basis), DriveSignal::ramp_exp(0.0, 0.3), basis, run)
          .delta_e;
  REQUIRE(std::abs(de) < 1e-10);
}

TEST_CASE("degenerate exchange under a flat drive oscillates at the Rabi period") {
  const ProductBasis basis({1.0, 1.0}, {1.0, 1.0}, 1);
  const double q0 = 0.05;
  // tau >> horizon: the pulse is flat to 5e-9 over the whole run
  const DriveSignal q = DriveSignal::gaussian_pulse(q0, 1e6);
  const ComplexVector psi0 = basis_state(basis, 1, 0);

  const double t_half = M_PI / (2.0 * q0);  // full |10> -> |01> transfer
  PropagationRun run;
  run.grid = TimeGrid{0.0, t_half, t_half / 6283};
  StateResult r = propagate_state(psi0, rwa_coupling(basis), q, basis, run);
  REQUIRE(std::norm(r.psi(basis.index(0, 1))) == Catch::Approx(1.0).margin(1e-6));

  run.grid = TimeGrid{0.0, 2.0 * t_half, t_half / 6283};  // and back again
  r = propagate_state(psi0, rwa_coupling(basis), q, basis, run);
  REQUIRE(std::abs(psi0.dot(r.psi)) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("step error falls by sixteen per halving") {
  const ProductBasis basis({1.0, 1.0}, {1.3, 1.0}, 3);
  const ComplexMatrix a = full_coupling(basis);
  const DriveSignal q = DriveSignal::ramp_exp(0.15, 0.3);
  const ComplexVector psi0 = basis_state(basis, 0, 0);

  auto final_state = [&](double dt) {
    PropagationRun run;
    run.grid = TimeGrid{0.0, 20.0, dt};
    return propagate_state(psi0, a, q, basis, run).psi;
  };
  const ComplexVector ref = final_state(0.0125);
  const double err_coarse = (final_state(0.1) - ref).norm();
  const double err_fine = (final_state(0.05) - ref).norm();
  REQUIRE(err_coarse > 1e-12);  // well above roundoff, the ratio is meaningful
  const double ratio = err_coarse / err_fine;
  REQUIRE(ratio > 12.8);
  REQUIRE(ratio < 19.2);
}

TEST_CASE("weak-drive energy gain matches the spectral sum") {
  auto rng = cfl::testing::make_rng(11);
  const double detunings[] = {0.15, -0.2, 0.3, -0.4, 0.6, 0.25, -0.15, 0.45, -0.3, 0.2};
  const double betas[] = {0.8, 1.5, 3.0};
  const double gamma = 1e-3;
  for (int k = 0; k < 10; ++k) {
    const double w2 = 1.0 + detunings[k];
    const double beta = betas[k % 3];
    const double eta = 0.25 + 0.035 * k;
    const ProductBasis basis({1.0, 1.0}, {w2, 1.0}, 6);
    const ThermalEnsemble ens = make_ensemble(basis, beta);
    const ComplexMatrix a = (k % 2 == 0) ? rwa_coupling(basis) : full_coupling(basis);
    const DriveSignal q = DriveSignal::ramp_exp(gamma, eta);

    const double t_end = decay_time(q);
    const double dt = 0.1;
    const int steps = static_cast<int>(std::ceil(t_end / dt));
    PropagationRun run;
    run.grid = TimeGrid{0.0, dt * steps, dt};
    // both routes live in the same six-level model, so truncation cancels;
    // the leakage gate only needs to catch gross blowups here
    run.leakage_tol = 1e-3;

    const DissipationResult rp = delta_e_propagated(ens, a, q, basis, run);
    const double de_s = delta_e_spectral(amplitudes(a, q, basis), ens, basis).delta_e;
    INFO("config " << k << ": w2 " << w2 << " beta " << beta << " eta " << eta);
    REQUIRE(de_s > 0.0);
    REQUIRE(rp.delta_e == Catch::Approx(de_s).epsilon(2e-2));
    REQUIRE(rp.meta.at("norm_drift") < 1e-8);
    REQUIRE(rp.meta.at("leakage") < 1e-3);
  }
}

TEST_CASE("population reaching the truncation edge is flagged") {
  const ProductBasis basis({1.0, 1.0}, {1.0, 1.0}, 2);
  const ThermalEnsemble ens = make_ensemble(basis, std::numeric_limits<double>::infinity());
  const DriveSignal q = DriveSignal::ramp_exp(0.5, 0.2);
  PropagationRun run;
  const double t_end = decay_time(q);
  const int steps = static_cast<int>(std::ceil(t_end / 0.05));
  run.grid = TimeGrid{0.0, 0.05 * steps, 0.05};
  REQUIRE_THROWS_AS(delta_e_propagated(ens, full_coupling(basis), q, basis, run),
                    convergence_error);
}

TEST_CASE("counter-rotating contribution fades as the drive slows") {
  AuditConfig c;
  c.etas = {0.5, 0.1};
  const std::vector<AuditRow> rows = counter_rotating_audit(c);
  REQUIRE(rows.size() == 2);
  for (const AuditRow& row : rows) {
    REQUIRE(row.delta_e_rwa > 0.0);
    REQUIRE(row.delta_e_full > 0.0);
    REQUIRE(row.rel_contribution > 0.0);
  }
  REQUIRE(rows[0].eta == 0.5);
  REQUIRE(rows[1].eta == 0.1);
  REQUIRE(rows[1].rel_contribution < rows[0].rel_contribution);
}

TEST_CASE("at zero temperature only pair creation dissipates") {
  AuditConfig c;
  c.beta = std::numeric_limits<double>::infinity();
  c.etas = {0.5};
  c.n_max = 6;
  const std::vector<AuditRow> rows = counter_rotating_audit(c);
  REQUIRE(rows.size() == 1);
  // the ground state is annihilated by both exchange directions, so the rwa
  // gain is pure phase roundoff while pair creation deposits real energy
  REQUIRE(std::abs(rows[0].delta_e_rwa) < 1e-12);
  REQUIRE(rows[0].delta_e_full > 1e-9);
  REQUIRE(rows[0].rel_contribution > 1e3);
}
