#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "opdnp/errors.hpp"
#include "opdnp/rqm.hpp"
#include "opdnp/units.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/KroneckerProduct>
#include <algorithm>
#include <cmath>
#include <random>

using namespace opdnp;

namespace {

constexpr double kSpeedOfLightCm = 2.99792458e10;  // cm/s

// Zeeman plus -2J S_C.S_R on spin 1 x spin 1/2, matrices written out by hand.
std::vector<double> product_energies(double J, double E_B) {
  const double r = 1 / std::sqrt(2.0);
  Eigen::Matrix3cd tx, ty, tz;
  tx << 0, r, 0, r, 0, r, 0, r, 0;
  ty << 0, cplx(0, -r), 0, cplx(0, r), 0, cplx(0, -r), 0, cplx(0, r), 0;
  tz << 1, 0, 0, 0, 0, 0, 0, 0, -1;
  Eigen::Matrix2cd dx, dy, dz;
  dx << 0, 0.5, 0.5, 0;
  dy << 0, cplx(0, -0.5), cplx(0, 0.5), 0;
  dz << 0.5, 0, 0, -0.5;
  const Eigen::Matrix3cd I3 = Eigen::Matrix3cd::Identity();
  const Eigen::Matrix2cd I2 = Eigen::Matrix2cd::Identity();
  Eigen::MatrixXcd H = E_B * (Eigen::kroneckerProduct(tz, I2) + Eigen::kroneckerProduct(I3, dz)).eval();
  H -= 2 * J *
       (Eigen::kroneckerProduct(tx, dx) + Eigen::kroneckerProduct(ty, dy) +
        Eigen::kroneckerProduct(tz, dz))
           .eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + 6);
  std::sort(v.begin(), v.end());
  return v;
}

RqmParams table_params(double freq) {
  RqmParams p;
  p.field_frequency = freq;
  p.E_a = 10.2;
  p.D_zfs = 0.31;
  p.k0_DQ = 1e13;
  p.temperature = 100;
  return p;
}

RateTable uniform_table(double k) {
  RateTable t;
  for (int q = 0; q < kQuartetLevels; ++q)
    for (int d = 0; d < kDoubletLevels; ++d)
      if (rqm_pair_allowed(q, d)) t.k_dq[q][d] = t.k_qd[q][d] = k;
  return t;
}

}  // namespace

TEST_CASE("level scheme: Zeeman term and resonance exchange at 527 GHz") {
  const auto s = level_scheme(-5, 527e9);
  const double E_B = 527e9 / kSpeedOfLightCm;
  CHECK(std::abs(s.E_B - 17.58) <= 0.01);
  CHECK(s.E_B == doctest::Approx(E_B).epsilon(1e-14));
  const double J_res = -2 * E_B / 3;
  CHECK(std::abs(J_res - (-11.72)) <= 0.02);
  CHECK(std::abs(level_scheme(J_res, 527e9).deltaE[kQm32][0]) < 1e-12);
}

TEST_CASE("level scheme: J = 0 leaves only Zeeman multiples") {
  const auto s = level_scheme(0, 9.5e9);
  for (int q = 0; q < kQuartetLevels; ++q)
    for (int d = 0; d < kDoubletLevels; ++d) {
      const double k = s.deltaE[q][d] / s.E_B;
      CHECK(std::abs(k - std::round(k)) < 1e-12);
      CHECK(std::abs(k) <= 2);
    }
}

TEST_CASE("level scheme: the two pairs one Zeeman quantum apart share the same gap") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> J(-20, 0), f(1e9, 6e11);
  for (int k = 0; k < 1000; ++k) {
    const auto s = level_scheme(J(rng), f(rng));
    REQUIRE(s.deltaE[kQm12][0] == doctest::Approx(s.deltaE[kQm32][1]).epsilon(1e-12));
    REQUIRE(s.deltaE[kQp12][1] == doctest::Approx(s.deltaE[kQp32][0]).epsilon(1e-12));
  }
}

TEST_CASE("level scheme: energies equal the eigenvalues of the product-basis Hamiltonian") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> J(-20, 0), f(1e9, 6e11);
  for (int k = 0; k < 1000; ++k) {
    const double j = J(rng), nu = f(rng);
    const auto s = level_scheme(j, nu);
    std::vector<double> mine(s.quartet_energy.begin(), s.quartet_energy.end());
    mine.insert(mine.end(), s.doublet_energy.begin(), s.doublet_energy.end());
    std::sort(mine.begin(), mine.end());
    const auto oracle = product_energies(j, s.E_B);
    const double scale = std::abs(3 * j) + 2 * s.E_B;
    for (int i = 0; i < 6; ++i) REQUIRE(std::abs(mine[i] - oracle[i]) <= 1e-9 * scale);
  }
}

TEST_CASE("coupled basis: labelled energies reproduce every level-scheme gap") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> J(-20, -0.01), f(1e9, 6e11);
  for (int k = 0; k < 1000; ++k) {
    const double j = J(rng), nu = f(rng);
    const auto s = level_scheme(j, nu);
    const auto b = coupled_basis(j, nu);
    const double scale = std::abs(3 * j) + 2 * s.E_B;
    for (int q = 0; q < kQuartetLevels; ++q)
      for (int d = 0; d < kDoubletLevels; ++d) {
        const double gap = b.energies[4 + d] - b.energies[q];
        REQUIRE(std::abs(gap - s.deltaE[q][d]) <= 1e-9 * scale);
      }
  }
}

TEST_CASE("zfs elements: vanish without ZFS, sum to the 6-dim trace of H_ZFS^2") {
  const Orientation o{0.7, 1.3, 1.0};
  const auto zero = zfs_matrix_elements(0, 0, -5, 527e9, o);
  CHECK(zero.all_sq.cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 1000; ++k) {
    const double D = 0.05 + 0.5 * u(rng), E = D / 3 * u(rng);
    const Orientation ok{std::acos(2 * u(rng) - 1), 2 * units::pi * u(rng), 1.0};
    const auto el = zfs_matrix_elements(D, E, -20 * u(rng) - 0.05, 1e9 + 6e11 * u(rng), ok);
    // triplet principal values D/3 + E, D/3 - E, -2D/3, doubled by the radical identity
    const double expect = 2 * (2 * D * D / 3 + 2 * E * E);
    REQUIRE(el.all_sq.sum() == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("zfs elements: axial powder average is invariant under a phi rotation") {
  const auto grid = powder_grid(PowderScheme::GoldenSpiral, 300, 1);
  auto shifted = grid;
  for (auto& o : shifted) o.phi += 0.913;
  RqmParams p = table_params(527e9);
  p.J_CR = -7;
  const auto a = dq_rate_constants(p, grid), b = dq_rate_constants(p, shifted);
  for (int q = 0; q < kQuartetLevels; ++q)
    for (int d = 0; d < kDoubletLevels; ++d)
      CHECK(a.mean_element_sq[q][d] ==
            doctest::Approx(b.mean_element_sq[q][d]).epsilon(1e-10).scale(1e-20));
}

TEST_CASE("rates: 527 GHz reference anchors") {
  const auto grid = powder_grid(PowderScheme::GoldenSpiral, 1000, 1);
  const auto p = table_params(527e9);
  const auto r5 = j_scan_row(p, -5, grid);
  CHECK(r5.k_dq >= 1.5e3 / 2);
  CHECK(r5.k_dq <= 1.5e3 * 2);
  const auto r11 = j_scan_row(p, -11, grid);
  CHECK(r11.R_D1 >= 70);
  CHECK(r11.R_D1 <= 290);
  const auto x = j_scan_row(table_params(9.5e9), -0.2, grid);
  CHECK(x.R_D1 > 50);
}

TEST_CASE("rates: selection rules, zero prefactor, Arrhenius factorization") {
  const auto grid = powder_grid(PowderScheme::GoldenSpiral, 200, 1);
  auto p = table_params(527e9);
  p.J_CR = -6;
  const auto t = dq_rate_constants(p, grid);
  for (int q = 0; q < kQuartetLevels; ++q)
    for (int d = 0; d < kDoubletLevels; ++d) {
      if (!rqm_pair_allowed(q, d)) {
        CHECK(t.k_dq[q][d] == 0.0);
        CHECK(t.k_qd[q][d] == 0.0);
      } else {
        CHECK(t.k_dq[q][d] > 0.0);
        CHECK(t.k_qd[q][d] == t.k_dq[q][d]);
      }
    }
  auto z = p;
  z.k0_DQ = 0;
  const auto tz = dq_rate_constants(z, grid);
  for (const auto& row : tz.k_dq)
    for (double k : row) CHECK(k == 0.0);

  auto hot = p;
  hot.E_a = 2 * p.E_a;
  const auto th = dq_rate_constants(hot, grid);
  const double f = std::exp(-p.E_a * 1e3 / (units::gas_constant * p.temperature));
  for (int q = 0; q < kQuartetLevels; ++q)
    for (int d = 0; d < kDoubletLevels; ++d)
      CHECK(std::abs(th.k_dq[q][d] - t.k_dq[q][d] * f) <= 1e-12 * t.k_dq[q][d] * f);
}

TEST_CASE("rates: temperature ratio is exp(-Ea/R (1/T2 - 1/T1)) for every transition") {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> T(20, 400), Ea(5, 15), J(-15, -0.5);
  const auto grid = powder_grid(PowderScheme::GoldenSpiral, 20, 1);
  for (int k = 0; k < 1000; ++k) {
    auto p = table_params(527e9);
    p.J_CR = J(rng);
    p.E_a = Ea(rng);
    p.temperature = T(rng);
    auto p2 = p;
    p2.temperature = T(rng);
    const auto a = dq_rate_constants(p, grid), b = dq_rate_constants(p2, grid);
    const double expect =
        std::exp(-p.E_a * 1e3 / units::gas_constant * (1 / p2.temperature - 1 / p.temperature));
    for (int q = 0; q < kQuartetLevels; ++q)
      for (int d = 0; d < kDoubletLevels; ++d)
        if (rqm_pair_allowed(q, d)) REQUIRE(b.k_dq[q][d] / a.k_dq[q][d] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("rates: exact resonance gives an infinite sentinel with a diagnostic, the floor removes it") {
  const auto grid = powder_grid(PowderScheme::GoldenSpiral, 50, 1);
  auto p = table_params(527e9);
  p.J_CR = -2 * level_scheme(-1, 527e9).E_B / 3;
  auto t = dq_rate_constants(p, grid);
  CHECK(std::isinf(t.k_dq[kQm32][0]));
  CHECK_FALSE(t.diagnostics.empty());
  p.deltaE_floor = 0.01;
  t = dq_rate_constants(p, grid);
  CHECK(std::isfinite(t.k_dq[kQm32][0]));
}

TEST_CASE("selectivity: symmetric table, common scaling, zero denominator") {
  CHECK(selectivity_factor(uniform_table(5.0)) == 1.0);
  CHECK_THROWS_AS(selectivity_factor(uniform_table(0.0)), DivisionByZero);

  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> k(1, 1e6), c(1e-3, 1e3);
  for (int n = 0; n < 1000; ++n) {
    RateTable t;
    for (int q = 0; q < kQuartetLevels; ++q)
      for (int d = 0; d < kDoubletLevels; ++d)
        if (rqm_pair_allowed(q, d)) t.k_dq[q][d] = k(rng);
    RateTable s = t;
    const double f = c(rng);
    for (auto& row : s.k_dq)
      for (auto& v : row) v *= f;
    const double R = selectivity_factor(t);
    REQUIRE(selectivity_factor(s) == doctest::Approx(R).epsilon(1e-12));
    REQUIRE(rqm_polarization(selectivity_factor(s)) ==
            doctest::Approx(rqm_polarization(R)).epsilon(1e-12).scale(1e-12));
  }
}

TEST_CASE("polarization from selectivity: anchors and strict decrease") {
  CHECK(rqm_polarization(1) == 0.0);
  CHECK(rqm_polarization(0) == 1.0);
  CHECK(rqm_polarization(3) == -0.5);
  CHECK(rqm_polarization(INFINITY) == -1.0);
  CHECK(rqm_polarization(1e15) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(rqm_polarization(-1), InvalidArgument);
  std::mt19937_64 rng(27);
  std::uniform_real_distribution<double> u(0, 1e4);
  for (int k = 0; k < 1000; ++k) {
    double a = u(rng), b = u(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    REQUIRE(rqm_polarization(a) > rqm_polarization(b));
    REQUIRE(std::abs(rqm_polarization(a)) <= 1.0);
  }
}

TEST_CASE("j scan: rejects J > 0 and empty input; 527 GHz peak sits at the resonance") {
  const auto grid = powder_grid(PowderScheme::GoldenSpiral, 200, 1);
  const auto p = table_params(527e9);
  CHECK_THROWS_AS(j_scan(p, {-1, 0.5}, grid), InvalidArgument);
  CHECK_THROWS_AS(j_scan(p, {}, grid), InvalidArgument);
  std::vector<double> Js;
  for (double j = -15; j <= -1 + 1e-9; j += 0.1) Js.push_back(j);
  const auto rows = j_scan(p, Js, grid);
  std::size_t best = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (std::abs(rows[i].P) > std::abs(rows[best].P)) best = i;
  const double J_res = -2 * level_scheme(-1, 527e9).E_B / 3;
  CHECK(std::abs(rows[best].J - J_res) <= 0.1 + 1e-9);
  for (const auto& r : rows)
    if (r.J <= -4 && r.J >= -8) CHECK(std::abs(std::abs(r.P) - 0.5) < 0.15);
}

TEST_CASE("SO-ISC populations: no ZFS, inverse field scaling, errors") {
  const auto z = soisc_populations(1, 1, 1, 0, 9.5e9);
  CHECK(z.P0 == 1.0);
  CHECK(z.Pplus1 == 1.0);
  CHECK(z.Pminus1 == 1.0);
  const auto lo = soisc_populations(0.2, 0.3, 0.5, 0.1, 9.3e9);
  const auto hi = soisc_populations(0.2, 0.3, 0.5, 0.1, 9.3e9 * 57);
  CHECK((lo.Pplus1 - lo.Pminus1) / (hi.Pplus1 - hi.Pminus1) == doctest::Approx(57).epsilon(1e-12));
  CHECK_THROWS_AS(soisc_populations(1, 1, 1, 0.1, 0), InvalidArgument);
  CHECK_THROWS_AS(soisc_populations(0, 0, 0, 0.1, 1e9), InvalidArgument);

  std::mt19937_64 rng(28);
  std::uniform_real_distribution<double> k(0, 1), D(-0.5, 0.5), f(1e9, 6e11), s(1.1, 100);
  for (int n = 0; n < 1000; ++n) {
    const double kx = k(rng) + 1e-3, ky = k(rng), kz = k(rng), d = D(rng), nu = f(rng), m = s(rng);
    const auto a = soisc_populations(kx, ky, kz, d, nu), b = soisc_populations(kx, ky, kz, d, nu * m);
    if (d == 0) continue;
    // the population difference is a small difference of O(1) numbers at high field
    REQUIRE((a.Pplus1 - a.Pminus1) / (b.Pplus1 - b.Pminus1) == doctest::Approx(m).epsilon(1e-8));
  }
}

TEST_CASE("direct-process scaling: pentacene to anthraquinone, identity, quadratic law") {
  const double W = slr_direct_scaling(3.3e4, 0.046, 100, 0.29, 100);
  CHECK(W >= 0.8e6);
  CHECK(W <= 2e6);
  CHECK(slr_direct_scaling(7, 0.1, 50, 0.1, 50) == 7.0);
  CHECK(slr_direct_scaling(7, 0.1, 50, 0.2, 50) == doctest::Approx(28));
  CHECK_THROWS_AS(slr_direct_scaling(0, 0.1, 50, 0.2, 50), InvalidArgument);
}

TEST_CASE("kinetic generator: zero rates, conservation over random parameters") {
  RqmParams z;
  z.k_qt = z.k_Q0 = z.W_Q1 = z.W_D1 = z.W_D0 = 0;
  CHECK(build_kinetic_generator(z, RateTable{}).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> lr(0, 8), u(0, 1);
  for (int n = 0; n < 1000; ++n) {
    RqmParams p;
    p.k_qt = std::pow(10, lr(rng));
    p.k_Q0 = std::pow(10, lr(rng));
    p.W_Q1 = std::pow(10, lr(rng));
    p.W_D1 = std::pow(10, lr(rng));
    p.W_D0 = std::pow(10, lr(rng));
    p.temperature = 5 + 300 * u(rng);
    p.field_frequency = 1e9 + 6e11 * u(rng);
    RateTable t;
    for (int q = 0; q < kQuartetLevels; ++q)
      for (int d = 0; d < kDoubletLevels; ++d)
        if (rqm_pair_allowed(q, d)) {
          t.k_dq[q][d] = std::pow(10, lr(rng));
          t.k_qd[q][d] = std::pow(10, lr(rng));
        }
    const Mat8 M = build_kinetic_generator(p, t);
    const double scale = M.cwiseAbs().maxCoeff();
    for (int c = 0; c < 8; ++c) REQUIRE(std::abs(M.col(c).sum()) <= 1e-12 * scale);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        if (i != j) REQUIRE(M(i, j) >= 0);
  }
}

TEST_CASE("kinetics: intra-quartet relaxation settles to a Boltzmann ladder") {
  RqmParams p;
  p.k_qt = p.k_Q0 = p.W_D1 = p.W_D0 = 0;
  p.W_Q1 = 1e5;
  p.temperature = 20;
  p.field_frequency = 527e9;
  const Mat8 M = build_kinetic_generator(p, RateTable{});
  KineticState s0;
  s0.populations << 0.1, 0.2, 0.3, 0.4, 0, 0, 0, 0;
  const auto out = evolve_kinetics(M, s0, {1.0}, KineticsMethod::MatrixExponential);
  const double x = units::planck * p.field_frequency / (units::boltzmann * p.temperature);
  const auto& P = out[0].populations;
  CHECK(P[kQp12] / P[kQp32] == doctest::Approx(std::exp(x)).epsilon(1e-9));
  CHECK(P[kQm12] / P[kQp12] == doctest::Approx(std::exp(x)).epsilon(1e-9));
  CHECK(P[kQm32] / P[kQm12] == doctest::Approx(std::exp(x)).epsilon(1e-9));
}

TEST_CASE("kinetics: zero generator keeps the state; pure quenching follows 1 - exp(-k t)") {
  KineticState s0;
  s0.populations << 0, 0, 0, 0, 0.6, 0.4, 0, 0;
  const std::vector<double> times{0, 1e-8, 5e-8, 1e-7, 3e-7};
  for (auto m : {KineticsMethod::MatrixExponential, KineticsMethod::Rk4FixedStep}) {
    const auto still = evolve_kinetics(Mat8::Zero(), s0, times, m);
    for (const auto& s : still) CHECK((s.populations - s0.populations).cwiseAbs().maxCoeff() == 0.0);
  }
  RqmParams p;
  p.k_qt = 2e7;
  p.k_Q0 = p.W_Q1 = p.W_D1 = p.W_D0 = 0;
  const Mat8 M = build_kinetic_generator(p, RateTable{});
  for (auto m : {KineticsMethod::MatrixExponential, KineticsMethod::Rk4FixedStep}) {
    const auto out = evolve_kinetics(M, s0, times, m);
    for (const auto& s : out) {
      const double f = 1 - std::exp(-p.k_qt * s.t);
      CHECK(s.populations[kD0p] == doctest::Approx(0.6 * f).epsilon(1e-6).scale(1e-12));
      CHECK(s.populations[kD0m] == doctest::Approx(0.4 * f).epsilon(1e-6).scale(1e-12));
      CHECK(s.populations.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(evolve_kinetics(M, s0, {1e-7, 0.5e-7}, KineticsMethod::Rk4FixedStep),
                  InvalidArgument);
}

TEST_CASE("D0 trace: equilibrium baseline, identity response, closed-form quench and relax") {
  RqmParams p;
  p.k_qt = 20e6;
  p.k_Q0 = 0;
  p.W_Q1 = 0.1e6;
  p.W_D1 = 0;
  p.W_D0 = 0.0062e6;
  p.field_frequency = 9.5e9;
  p.temperature = 100;
  const double Peq = thermal_polarization(p.field_frequency, p.temperature);
  const Mat8 M = build_kinetic_generator(p, RateTable{});

  KineticState eq;
  eq.populations[kD0p] = 0.5 * (1 - Peq);
  eq.populations[kD0m] = 0.5 * (1 + Peq);
  std::vector<double> times;
  for (int i = 0; i <= 200; ++i) times.push_back(i * 5e-7);
  const auto flat = d0_polarization_trace(evolve_kinetics(M, eq, times, KineticsMethod::MatrixExponential), 100e-9, Peq);
  for (double v : flat) CHECK(std::abs(v) < 1e-9);
  CHECK_THROWS_AS(d0_polarization_trace({eq}, 0, 0), InvalidArgument);

  // D1 populations quench into D0 while the D0 difference relaxes.
  const double b = 0.75, d1m = 0.1;
  KineticState s0;
  s0.t = 0;
  s0.populations[kQp32] = 1;
  s0.populations[kD1p] = b;
  s0.populations[kD1m] = d1m;
  std::vector<double> fine;
  for (int i = 0; i <= 400; ++i) fine.push_back(i * 2.5e-8);
  const auto states = evolve_kinetics(M, s0, fine, KineticsMethod::MatrixExponential);
  const auto trace = d0_polarization_trace(states, 0, Peq);

  const double beta = std::exp(-units::planck * p.field_frequency / (units::boltzmann * p.temperature));
  const double g = p.W_D0 * (1 + beta), c = p.W_D0 * (1 - beta), k = p.k_qt;
  const double d0 = b - d1m, s = b + d1m;
  std::size_t peak = 1;
  for (std::size_t i = 1; i < fine.size(); ++i) {
    const double t = fine[i];
    const double sum = s * (1 - std::exp(-k * t));
    const double diff = (k * d0 + c * s) / (g - k) * (std::exp(-k * t) - std::exp(-g * t)) -
                        c * s / g * (1 - std::exp(-g * t));
    const double expect = diff / (-Peq * sum) - 1;
    REQUIRE(trace[i] == doctest::Approx(expect).epsilon(1e-8));
    if (std::abs(trace[i]) > std::abs(trace[peak])) peak = i;
  }
  // fast rise on the quench timescale, slow decay afterwards
  CHECK(fine[peak] < 5 / k);
  for (std::size_t i = peak + 1; i < fine.size(); ++i) CHECK(std::abs(trace[i]) <= std::abs(trace[i - 1]));
}

TEST_CASE("pumping reduction: exact 2x2 steady state, limits, effective time") {
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> lr(0, 8), u(-1, 1);
  for (int n = 0; n < 1000; ++n) {
    const double Tz0 = u(rng), Peq = 0.2 * u(rng);
    const double T1T = std::pow(10, -lr(rng)), T1e = std::pow(10, -lr(rng)) * 10, r = std::pow(10, lr(rng));
    const auto red = pumping_reduction(Tz0, T1T, r, T1e, Peq);
    Eigen::Matrix2d A;
    A << -(1 / T1T + r), r, r, -(1 / T1e + r);
    const Eigen::Vector2d rhs(-Tz0 / T1T, -Peq / T1e);
    const Eigen::Vector2d x = A.partialPivLu().solve(rhs);
    // the LU oracle itself carries cond(A) ~ 1e8 rounding
    REQUIRE(red.l_Tz0 == doctest::Approx(x[1]).epsilon(1e-7).scale(1e-12));
    REQUIRE(std::abs(red.l_Tz0) <= 1.0);
    const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(A).eigenvalues();
    REQUIRE(red.T1_eff == doctest::Approx(-1 / ev.maxCoeff()).epsilon(1e-6));
    REQUIRE(red.T1_eff > 0);
  }
  // fast exchange locks the pair at the rate-weighted mean of the two targets
  CHECK(pumping_reduction(-0.75, 1e-6, 1e14, 0.3e-3).l_Tz0 ==
        doctest::Approx(-0.75 * 1e6 / (1e6 + 1 / 0.3e-3)).epsilon(1e-6));
  CHECK(pumping_reduction(0.12, 1e-6, 0, 0.3e-3, 0.12).l_Tz0 == doctest::Approx(0.12).epsilon(1e-14));
  CHECK(pumping_reduction(-0.75, 1e-6, 0, 0.3e-3, 0.05).l_Tz0 == doctest::Approx(0.05).epsilon(1e-14));
  CHECK_THROWS_AS(pumping_reduction(0.1, 0, 1, 1), InvalidArgument);
}
