#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "cfl/drive.hpp"

using namespace cfl;

TEST_CASE("ramp drive: value, peak, and derivative") {
  const double gamma = 0.3, eta = 0.25;
  const DriveSignal q = DriveSignal::ramp_exp(gamma, eta);
  REQUIRE(q(0.0) == 0.0);
  REQUIRE(q(-2.0) == 0.0);
  REQUIRE(q(1.0) == Catch::Approx(gamma * std::exp(-eta)).epsilon(1e-15));
  REQUIRE(q.peak() == Catch::Approx(gamma / (eta * std::exp(1.0))).epsilon(1e-15));
  for (double t : {0.5, 2.0, 7.0}) {
    const double h = 1e-6;
    const double fd = (q(t + h) - q(t - h)) / (2.0 * h);
    REQUIRE(q.derivative(t) == Catch::Approx(fd).margin(1e-8));
  }
}

TEST_CASE("ramp transform is gamma/(eta + i w)^2") {
  const double gamma = 2.0, eta = 0.4;
  const DriveSignal q = DriveSignal::ramp_exp(gamma, eta);
  for (double w : {0.0, 0.3, -1.7}) {
    const Complex expected = gamma / std::pow(Complex(eta, w), 2);
    REQUIRE(std::abs(fourier(q, w) - expected) < 1e-15 * std::abs(expected) + 1e-300);
    REQUIRE(power_kernel(q, w) ==
            Catch::Approx(gamma * gamma / std::pow(eta * eta + w * w, 2)).epsilon(1e-14));
  }
}

TEST_CASE("gaussian pulse transform and the frozen w=0 value") {
  const DriveSignal q = DriveSignal::gaussian_pulse(1.0, 1.0);
  // |q_hat(0)|^2 = (gamma tau sqrt(pi))^2 = pi
  REQUIRE(power_kernel(q, 0.0) == Catch::Approx(3.141592653589793).epsilon(1e-14));
  for (double w : {0.5, 2.0}) {
    const double expected = std::sqrt(M_PI) * std::exp(-w * w / 4.0);
    REQUIRE(std::real(fourier(q, w)) == Catch::Approx(expected).epsilon(1e-13));
    REQUIRE(std::abs(std::imag(fourier(q, w))) < 1e-16);
  }
}

TEST_CASE("quadrature transform of a tabulated drive matches the closed form") {
  const DriveSignal ramp = DriveSignal::ramp_exp(1.0, 0.5);
  const double t1 = decay_time(ramp);
  const DriveSignal tab = tabulate(ramp, 0.0, t1, 0.001);
  for (double w : {0.0, 0.7, 1.9}) {
    const Complex expected = fourier(ramp, w);
    REQUIRE(std::abs(fourier(tab, w) - expected) < 1e-6 * std::abs(expected));
  }
}

TEST_CASE("tabulated drives must be uniform, nonzero, and decayed at the ends") {
  REQUIRE_THROWS_AS(DriveSignal::tabulated({0.0, 1.0, 2.0}, {0.0, 1.0, 0.5}), convergence_error);
  REQUIRE_THROWS(DriveSignal::tabulated({0.0, 1.0, 2.5}, {0.0, 1.0, 0.0}));
  REQUIRE_THROWS(DriveSignal::tabulated({0.0, 1.0, 2.0}, {0.0, 0.0, 0.0}));
  REQUIRE_NOTHROW(DriveSignal::tabulated({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0}));
}

TEST_CASE("drive file loading round-trips a tabulated signal") {
  const DriveSignal ramp = DriveSignal::ramp_exp(0.7, 0.5);
  const DriveSignal tab = tabulate(ramp, 0.0, decay_time(ramp), 0.05);
  const auto path = std::filesystem::temp_directory_path() / "cfl_test_drive.txt";
  {
    std::ofstream f(path);
    f << "# t q\n";
    f.precision(17);
    for (size_t i = 0; i < tab.times().size(); ++i)
      f << tab.times()[i] << " " << tab(tab.times()[i]) << "\n";
  }
  const DriveSignal loaded = load_drive(path.string());
  for (double t : {1.0, 4.0, 11.5})
    REQUIRE(loaded(t) == Catch::Approx(tab(t)).margin(1e-14));
  std::filesystem::remove(path);
  REQUIRE_THROWS_AS(load_drive(path.string()), io_error);
}

TEST_CASE("decay_time puts the tail below 1e-10 of the maximum") {
  for (const DriveSignal& q :
       {DriveSignal::ramp_exp(1.0, 0.1), DriveSignal::gaussian_pulse(2.0, 3.0)}) {
    const double t1 = decay_time(q);
    REQUIRE(std::abs(q(t1)) <= 1.0000001e-10 * q.peak());
    REQUIRE(std::abs(q(0.9 * t1)) > 1e-10 * q.peak());
  }
}

TEST_CASE("physical drive amplitude sqrt(D/2) v grad-psi") {
  // D = 1/(2 m1 m2 w1 w2); at unit masses and frequencies D = 1/2, gamma = 0.5 v grad
  REQUIRE(gamma_from_physics(1.0, {1.0, 1.0}, {1.0, 1.0}) == Catch::Approx(0.5).epsilon(1e-15));
  const double d = 1.0 / (2.0 * 0.5 * 3.0 * 2.0 * 1.0);
  REQUIRE(gamma_from_physics(1.5, {2.0, 0.5}, {1.0, 3.0}) ==
          Catch::Approx(std::sqrt(0.5 * d) * 1.5).epsilon(1e-14));
}
