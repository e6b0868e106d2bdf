#include "opdnp/errors.hpp"
#include "opdnp/rqm.hpp"
#include "opdnp/units.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <sstream>

namespace opdnp {

namespace {

// Adds a first-order flow from population `from` into `to`.
void flow(Mat8& M, int from, int to, double rate) {
  M(to, from) += rate;
  M(from, from) -= rate;
}

// Downhill rate W from `upper` to `lower`, uphill W exp(-dE/kT).
void relax_pair(Mat8& M, int upper, int lower, double W, double boltzmann) {
  flow(M, upper, lower, W);
  flow(M, lower, upper, W * boltzmann);
}

}  // namespace

Mat8 build_kinetic_generator(const RqmParams& p, const RateTable& t) {
  Mat8 M = Mat8::Zero();
  for (int q = 0; q < kQuartetLevels; ++q)
    for (int d = 0; d < kDoubletLevels; ++d) {
      if (!rqm_pair_allowed(q, d)) continue;
      flow(M, kQp32 + q, kD1p + d, t.k_qd[q][d]);
      flow(M, kD1p + d, kQp32 + q, t.k_dq[q][d]);
    }

  if (!(p.temperature > 0)) throw InvalidArgument("build_kinetic_generator: temperature must be > 0");
  const double x = units::planck * p.field_frequency / (units::boltzmann * p.temperature);
  const double b1 = std::exp(-x);
  const double b2 = std::exp(-2 * x);

  // Quartet connectivity: every pair with |Delta m| = 1 or 2.
  relax_pair(M, kQp32, kQp12, p.W_Q1, b1);
  relax_pair(M, kQp32, kQm12, p.W_Q1, b2);
  relax_pair(M, kQp12, kQm12, p.W_Q1, b1);
  relax_pair(M, kQp12, kQm32, p.W_Q1, b2);
  relax_pair(M, kQm12, kQm32, p.W_Q1, b1);

  relax_pair(M, kD1p, kD1m, p.W_D1, b1);
  relax_pair(M, kD0p, kD0m, p.W_D0, b1);

  flow(M, kD1p, kD0p, p.k_qt);
  flow(M, kD1m, kD0m, p.k_qt);

  for (int q = kQp32; q <= kQm32; ++q) {
    flow(M, q, kD0p, 0.5 * p.k_Q0);
    flow(M, q, kD0m, 0.5 * p.k_Q0);
  }
  return M;
}

KineticsMethod parse_kinetics_method(const std::string& name) {
  if (name == "matrix-exponential") return KineticsMethod::MatrixExponential;
  if (name == "rk4-fixed-step") return KineticsMethod::Rk4FixedStep;
  throw InvalidArgument("unknown kinetics method '" + name +
                        "' (expected matrix-exponential or rk4-fixed-step)");
}

std::string to_string(KineticsMethod m) {
  return m == KineticsMethod::MatrixExponential ? "matrix-exponential" : "rk4-fixed-step";
}

double rk4_step(const Mat8& M) {
  const double scale = M.diagonal().cwiseAbs().maxCoeff();
  return scale > 0 ? 0.1 / scale : std::numeric_limits<double>::infinity();
}

namespace {

void check_state(const KineticState& s, double total) {
  const double floor = -1e-9 * std::max(1.0, std::abs(total));
  for (int i = 0; i < 8; ++i)
    if (s.populations[i] < floor) {
      std::ostringstream msg;
      msg << "evolve_kinetics: population " << i << " reached " << s.populations[i] << " at t = "
          << s.t << " s; use a smaller step";
      throw SolverInstability(msg.str());
    }
}

}  // namespace

std::vector<KineticState> evolve_kinetics(const Mat8& M, const KineticState& initial,
                                          const std::vector<double>& times, KineticsMethod method) {
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] < times[i - 1]) throw InvalidArgument("evolve_kinetics: times must be ascending");
  if (!times.empty() && times.front() < initial.t)
    throw InvalidArgument("evolve_kinetics: first output time precedes the initial state");

  const double total = initial.populations.sum();
  std::vector<KineticState> out;
  out.reserve(times.size());

  if (method == KineticsMethod::MatrixExponential) {
    for (double t : times) {
      const Mat8 prop = (M * (t - initial.t)).exp();
      KineticState s{t, prop * initial.populations};
      check_state(s, total);
      out.push_back(s);
    }
    return out;
  }

  const double hmax = rk4_step(M);
  KineticState s = initial;
  for (double t_out : times) {
    const double span = t_out - s.t;
    if (span > 0) {
      const long n = std::isfinite(hmax) ? static_cast<long>(std::ceil(span / hmax)) : 1;
      const double h = span / static_cast<double>(n);
      Vec8 y = s.populations;
      for (long k = 0; k < n; ++k) {
        const Vec8 k1 = M * y;
        const Vec8 k2 = M * (y + 0.5 * h * k1);
        const Vec8 k3 = M * (y + 0.5 * h * k2);
        const Vec8 k4 = M * (y + h * k3);
        y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      }
      s.populations = y;
    }
    s.t = t_out;
    check_state(s, total);
    out.push_back(s);
  }
  return out;
}

std::vector<double> d0_polarization_trace(const std::vector<KineticState>& states, double irf_time,
                                          double P_eq) {
  if (P_eq == 0) throw InvalidArgument("d0_polarization_trace: P_eq must be nonzero");
  if (irf_time < 0) throw InvalidArgument("d0_polarization_trace: irf_time must be >= 0");
  std::vector<double> ratio;
  ratio.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i > 0 && states[i].t < states[i - 1].t)
      throw InvalidArgument("d0_polarization_trace: states must be time ordered");
    const auto& p = states[i].populations;
    const double total = p[kD0p] + p[kD0m];
    // at equilibrium the lower (-1/2) sublevel holds the excess
    const double eq_diff = -P_eq * total;
    ratio.push_back(eq_diff == 0 ? 1.0 : (p[kD0p] - p[kD0m]) / eq_diff);
  }

  std::vector<double> out(ratio.size());
  if (ratio.empty()) return out;
  double y = ratio[0];
  out[0] = y - 1.0;
  for (std::size_t i = 1; i < ratio.size(); ++i) {
    const double h = states[i].t - states[i - 1].t;
    if (irf_time == 0 || h == 0) {
      y = irf_time == 0 ? ratio[i] : y;
    } else {
      // exact response to a piecewise-linear input
      const double decay = std::exp(-h / irf_time);
      const double slope = (ratio[i] - ratio[i - 1]) / h;
      y = ratio[i] - slope * irf_time + (y - ratio[i - 1] + slope * irf_time) * decay;
    }
    out[i] = y - 1.0;
  }
  return out;
}

}  // namespace opdnp
