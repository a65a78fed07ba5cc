#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "enaqt/grid.hpp"
#include "enaqt/lindblad.hpp"
#include "enaqt/linalg.hpp"
#include "enaqt/network.hpp"

using namespace enaqt;

namespace {

// Two-level pure-dephasing problem with a coherent initial state, so the
// off-diagonal decay exp(-i deps t - (g1+g2) t / 2) is visible in snapshots.
LindbladProblem dephasing_pair(double eps1, double eps2, double g1, double g2) {
  LindbladProblem p;
  p.hamiltonian = ComplexMatrix::Zero(2, 2);
  p.hamiltonian(0, 0) = eps1;
  p.hamiltonian(1, 1) = eps2;
  for (int j = 0; j < 2; ++j) {
    ComplexMatrix proj = ComplexMatrix::Zero(2, 2);
    proj(j, j) = 1.0;
    p.jump_operators.push_back(std::move(proj));
  }
  p.rates = {g1, g2};
  ComplexMatrix rho0(2, 2);
  rho0 << 0.5, 0.5, 0.5, 0.5;
  p.initial_state = QuantumState::density(std::move(rho0), 1);
  return p;
}

}  // namespace

TEST_CASE("zero dephasing reproduces unitary populations", "[lindblad]") {
  const ExcitonNetwork net = ring4_disordered(0.0);
  const SimulationGrid grid = SimulationGrid::from_horizon(8.0, 0.02);
  const IntegrationResult res = integrate_master_equation(site_dephasing_problem(net, 1), grid);
  const ComplexMatrix h = site_hamiltonian(net);
  for (std::size_t s : {100u, 237u, 400u}) {
    const ComplexMatrix u = hermitian_expm(h, res.series.times[s]);
    for (int j = 0; j < 4; ++j) {
      REQUIRE(res.series.populations[s][j] ==
              Catch::Approx(std::norm(u(j, 0))).margin(1e-8));
    }
  }
}

TEST_CASE("pure dephasing decays coherences at the summed half rate", "[lindblad]") {
  const double eps1 = 0.3, eps2 = -0.9, g1 = 0.4, g2 = 0.7;
  const LindbladProblem p = dephasing_pair(eps1, eps2, g1, g2);
  const SimulationGrid grid = SimulationGrid::from_horizon(10.0, 0.05);
  IntegrationOptions opt;
  opt.snapshot_stride = 20;  // t = 0, 1, 2, ...
  const IntegrationResult res = integrate_master_equation(p, grid, opt);
  REQUIRE(res.snapshots.size() == 11);
  for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
    const double t = static_cast<double>(res.snapshot_steps[k]) * grid.delta_tau;
    const Complex expected =
        0.5 * std::exp(Complex(-(g1 + g2) * t / 2.0, -(eps1 - eps2) * t));
    REQUIRE(std::abs(res.snapshots[k](0, 1) - expected) < 1e-9);
    // populations stay put under pure dephasing
    REQUIRE(res.snapshots[k](0, 0).real() == Catch::Approx(0.5).margin(1e-10));
  }
}

TEST_CASE("integrator shows fourth-order step convergence", "[lindblad]") {
  const ExcitonNetwork net = ring4_disordered(0.3);
  const LindbladProblem p = site_dephasing_problem(net, 1);
  const SimulationGrid grid = SimulationGrid::from_horizon(2.0, 0.025);
  auto target_errors = [&](int substeps) {
    IntegrationOptions opt;
    opt.substeps_per_sample = substeps;
    opt.accuracy_check_stride = 0;
    // reference: much finer stepping
    IntegrationOptions fine;
    fine.substeps_per_sample = 64 * substeps;
    const auto coarse = integrate_master_equation(p, grid, opt);
    const auto ref = integrate_master_equation(p, grid, fine);
    double err = 0.0;
    for (std::size_t s = 0; s < coarse.series.populations.size(); ++s) {
      err = std::max(err,
                     (coarse.series.populations[s] - ref.series.populations[s])
                         .cwiseAbs()
                         .maxCoeff());
    }
    return err;
  };
  const double e1 = target_errors(1);
  const double e2 = target_errors(2);
  REQUIRE(e1 > 1e-12);  // coarse run is not already at roundoff
  REQUIRE(e1 / e2 > 10.0);
}

TEST_CASE("site-basis and one-qubit-per-site forms agree on the manifold", "[lindblad]") {
  const ExcitonNetwork net = ring4_disordered(0.1);
  const SimulationGrid grid = SimulationGrid::from_horizon(5.0, 0.05);
  const auto site = integrate_master_equation(site_dephasing_problem(net, 1), grid);
  const auto qubit = integrate_master_equation(qubit_form_problem(net, 1), grid);
  for (std::size_t s = 0; s < site.series.populations.size(); ++s) {
    for (int j = 1; j <= 4; ++j) {
      const double p_site = site.series.populations[s][j - 1];
      const double p_qubit = qubit.series.populations[s][encode_physical(j, 4)];
      REQUIRE(std::abs(p_site - p_qubit) < 1e-7);
    }
  }
}

TEST_CASE("moderate dephasing drives the ring toward equipartition", "[lindblad][slow]") {
  const ExcitonNetwork net = ring4_disordered(0.1);
  SimulationGrid grid = SimulationGrid::from_horizon(400.0, 0.1);
  IntegrationOptions opt;
  opt.substeps_per_sample = 10;
  opt.check_positivity = false;  // d = 4: positivity is implied by the trace guard here
  const IntegrationResult res = integrate_master_equation(site_dephasing_problem(net, 3), grid, opt);
  const RealVector& final_pops = res.series.populations.back();
  for (int j = 0; j < 4; ++j) {
    REQUIRE(std::abs(final_pops[j] - 0.25) < 0.01);
  }
}

TEST_CASE("transport efficiency is the left Riemann sum including t = 0", "[lindblad]") {
  PopulationSeries series;
  series.delta_tau = 0.5;
  series.target_index = 1;
  for (int s = 0; s <= 4; ++s) {
    series.times.push_back(0.5 * s);
    RealVector pops(2);
    pops << 0.9, 0.2;
    series.populations.push_back(pops);
  }
  REQUIRE(transport_efficiency(series) == Catch::Approx(0.2 * 5 * 0.5));
  REQUIRE(transport_efficiency(series, 1.0) == Catch::Approx(0.2 * 5));
  series.target_index = -1;
  REQUIRE_THROWS_AS(transport_efficiency(series), ConfigError);
}

TEST_CASE("problem validation catches structural mistakes", "[lindblad]") {
  LindbladProblem p = site_dephasing_problem(ring4_disordered(0.1), 1);
  p.hamiltonian(0, 1) = Complex(0.0, 1.0);  // breaks Hermiticity
  REQUIRE_THROWS_AS(p.validate(), NumericError);

  p = site_dephasing_problem(ring4_disordered(0.1), 1);
  p.rates.pop_back();
  REQUIRE_THROWS_AS(p.validate(), ConfigError);

  p = site_dephasing_problem(ring4_disordered(0.1), 1);
  p.rates[0] = -1.0;
  REQUIRE_THROWS_AS(p.validate(), ConfigError);

  REQUIRE_THROWS_AS(site_dephasing_problem(ring4_disordered(0.1), 5), ConfigError);
}

TEST_CASE("refinement guard rejects a grossly under-resolved step", "[lindblad]") {
  const LindbladProblem p = dephasing_pair(0.0, 0.0, 60.0, 60.0);
  SimulationGrid grid;
  grid.delta_tau = 1.0;
  grid.steps = 2;
  grid.horizon = 2.0;
  IntegrationOptions opt;
  opt.substeps_per_sample = 1;
  REQUIRE_THROWS_AS(integrate_master_equation(p, grid, opt), NumericError);
}
