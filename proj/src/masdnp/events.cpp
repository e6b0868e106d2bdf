#include "internal.hpp"
#include "opdnp/errors.hpp"
#include "opdnp/units.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace opdnp {

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Microwave: return "microwave";
    case EventKind::DipolarExchange: return "dipolar-exchange";
    case EventKind::CrossEffect: return "cross-effect";
  }
  return "?";
}

double landau_zener_probability(double coupling_hz, double sweep_rate_hz_per_s,
                                std::string* diagnostic) {
  if (sweep_rate_hz_per_s == 0.0) {
    if (diagnostic) *diagnostic = "zero sweep rate at an anti-crossing; adiabatic limit p = 1 used";
    return 1.0;
  }
  return -std::expm1(-2.0 * units::pi * coupling_hz * coupling_hz / std::abs(sweep_rate_hz_per_s));
}

namespace detail {

Trajectories sample_trajectories(const BoxEnsemble& box, const DriveConfig& drive, int samples) {
  Trajectories tr;
  tr.samples = samples;
  tr.period = 1.0 / drive.mas_rate;
  tr.nu_n = proton_larmor(drive.B0);
  const auto& spec = box.spec;
  const Mat3 ga = g_tensor_a(spec);
  const Mat3 gb = g_tensor_b(spec);
  const Vec3 u_dip = unit_vector(spec.dipolar_theta, spec.dipolar_phi);
  const Vec3 u_hf = unit_vector(spec.hf_theta, spec.hf_phi);

  std::vector<Vec3> b_rotor(samples);
  for (int k = 0; k < samples; ++k)
    b_rotor[k] = field_in_rotor_frame(2.0 * units::pi * k / samples);

  tr.units.resize(box.units.size());
  for (std::size_t u = 0; u < box.units.size(); ++u) {
    auto& ut = tr.units[u];
    ut.nu_a.resize(samples + 1);
    ut.nu_b.resize(samples + 1);
    ut.dsec.resize(samples + 1);
    ut.hf_amp.resize(samples + 1);
    const Mat3 Rt = rotation_matrix(box.units[u].crystallite).transpose();
    for (int k = 0; k < samples; ++k) {
      const Vec3 b = Rt * b_rotor[k];
      ut.nu_a[k] = electron_frequency(ga, b, drive.B0);
      ut.nu_b[k] = electron_frequency(gb, b, drive.B0);
      const double cd = b.dot(u_dip);
      ut.dsec[k] = spec.D_ab * (1.0 - 3.0 * cd * cd) / 2.0;
      const double ch = b.dot(u_hf);
      ut.hf_amp[k] = 3.0 * spec.A_hf * std::abs(ch * std::sqrt(std::max(0.0, 1.0 - ch * ch)));
    }
    ut.nu_a[samples] = ut.nu_a[0];
    ut.nu_b[samples] = ut.nu_b[0];
    ut.dsec[samples] = ut.dsec[0];
    ut.hf_amp[samples] = ut.hf_amp[0];
  }

  tr.inter_dsec.resize(box.inter_couplings.size());
  for (std::size_t c = 0; c < box.inter_couplings.size(); ++c) {
    const auto& ic = box.inter_couplings[c];
    auto& v = tr.inter_dsec[c];
    v.resize(samples + 1);
    for (int k = 0; k < samples; ++k) {
      const double ct = b_rotor[k].dot(ic.direction);
      v[k] = ic.d * (1.0 - 3.0 * ct * ct) / 2.0;
    }
    v[samples] = v[0];
  }
  return tr;
}

namespace {

struct Crossing {
  double time, rate, frac;
  int k;
};

// Sign changes of f over one sampled period, crossing times by linear interpolation.
template <typename F>
void find_crossings(int samples, double dt, F f, std::vector<Crossing>& out) {
  double prev = f(0);
  for (int k = 0; k < samples; ++k) {
    const double next = f(k + 1);
    if ((prev >= 0) != (next >= 0)) {
      const double frac = prev / (prev - next);
      out.push_back({(k + frac) * dt, (next - prev) / dt, frac, k});
    }
    prev = next;
  }
}

double lerp(const std::vector<double>& v, const Crossing& c) {
  return v[c.k] + c.frac * (v[c.k + 1] - v[c.k]);
}

}  // namespace

std::vector<RotorEvent> events_from_trajectories(const Trajectories& tr, const BoxEnsemble& box,
                                                 const DriveConfig& drive, const EventModel& model,
                                                 std::vector<std::string>* notes) {
  std::vector<RotorEvent> events;
  const int S = tr.samples;
  const double dt = tr.period / S;
  std::vector<Crossing> xs;
  const double J = box.spec.J_ab;

  auto push = [&](const Crossing& c, EventKind kind, int i, int j, int n, int branch,
                  double coupling) {
    RotorEvent e;
    e.time = c.time;
    e.kind = kind;
    e.i = i;
    e.j = j;
    e.n = n;
    e.branch = branch;
    e.sweep_rate = c.rate;
    e.coupling = coupling;
    std::string diag;
    e.probability = landau_zener_probability(coupling, c.rate, &diag);
    if (!diag.empty() && notes) notes->push_back(diag);
    events.push_back(e);
  };

  for (std::size_t u = 0; u < tr.units.size(); ++u) {
    const auto& ut = tr.units[u];
    const int a = static_cast<int>(2 * u), b = a + 1, n = static_cast<int>(u);

    if (drive.uw_nutation > 0) {
      const double c = model.uw_scale * drive.uw_nutation;
      for (int which = 0; which < 2; ++which) {
        const auto& nu = which == 0 ? ut.nu_a : ut.nu_b;
        xs.clear();
        find_crossings(S, dt, [&](int k) { return nu[k] - drive.uw_frequency; }, xs);
        for (const auto& x : xs) push(x, EventKind::Microwave, a + which, -1, -1, 0, c);
      }
    }

    xs.clear();
    find_crossings(S, dt, [&](int k) { return ut.nu_a[k] - ut.nu_b[k]; }, xs);
    for (const auto& x : xs)
      push(x, EventKind::DipolarExchange, a, b, -1, 0,
           model.dj_scale * std::abs(lerp(ut.dsec, x) + 2.0 * J));

    for (int branch : {+1, -1}) {
      xs.clear();
      find_crossings(
          S, dt, [&](int k) { return ut.nu_a[k] - ut.nu_b[k] - branch * tr.nu_n; }, xs);
      for (const auto& x : xs) {
        const double dip = model.ce_secular_dipolar ? std::abs(lerp(ut.dsec, x) + 2.0 * J)
                                                    : std::abs(box.spec.D_ab);
        const double c = model.ce_scale * lerp(ut.hf_amp, x) * dip / tr.nu_n;
        push(x, EventKind::CrossEffect, a, b, n, branch, c);
      }
    }
  }

  if (model.inter_unit_events) {
    for (std::size_t c = 0; c < box.inter_couplings.size(); ++c) {
      const auto& ic = box.inter_couplings[c];
      const auto& vi = ic.i % 2 == 0 ? tr.units[ic.i / 2].nu_a : tr.units[ic.i / 2].nu_b;
      const auto& vj = ic.j % 2 == 0 ? tr.units[ic.j / 2].nu_a : tr.units[ic.j / 2].nu_b;
      xs.clear();
      find_crossings(S, dt, [&](int k) { return vi[k] - vj[k]; }, xs);
      for (const auto& x : xs)
        push(x, EventKind::DipolarExchange, ic.i, ic.j, -1, 0,
             model.dj_scale * std::abs(lerp(tr.inter_dsec[c], x)));
    }
  }

  std::stable_sort(events.begin(), events.end(), [](const RotorEvent& x, const RotorEvent& y) {
    return std::tie(x.time, x.i, x.j) < std::tie(y.time, y.i, y.j);
  });
  return events;
}

}  // namespace detail

std::vector<RotorEvent> detect_rotor_events(const SpinSystemSpec& spec,
                                            const EulerAngles& crystallite,
                                            const DriveConfig& drive, int samples_per_period,
                                            const EventModel& model) {
  if (samples_per_period < 512)
    throw InvalidArgument("detect_rotor_events: samples_per_period must be >= 512");
  if (!(drive.mas_rate > 0)) throw InvalidArgument("detect_rotor_events: mas_rate must be > 0");
  BoxEnsemble box;
  box.spec = spec;
  box.units.push_back({crystallite, Vec3::Zero(), Vec3::Zero(), Vec3::Zero()});
  const auto tr = detail::sample_trajectories(box, drive, samples_per_period);
  return detail::events_from_trajectories(tr, box, drive, model);
}

}  // namespace opdnp
