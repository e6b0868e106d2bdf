#include "opdnp/errors.hpp"
#include "opdnp/masdnp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace opdnp {

// |eps| = |B_eff - B0| / B0 is piecewise linear in B_eff with kinks at the B0
// values, so the least-squares minimum is found exactly interval by interval.
FieldFit fit_effective_field(const std::vector<double>& B0, const std::vector<double>& eps) {
  if (B0.size() != eps.size()) throw InvalidArgument("fit_effective_field: size mismatch");
  if (B0.size() < 3) throw InvalidArgument("fit_effective_field: need at least 3 field points");
  for (double b : B0)
    if (!(b > 0)) throw InvalidArgument("fit_effective_field: fields must be > 0");
  const double e0 = eps.front();
  if (std::all_of(eps.begin(), eps.end(), [&](double e) { return e == e0; }))
    throw FitDegenerate("fit_effective_field: all enhancements are equal");

  const std::size_t n = B0.size();
  auto sse = [&](double B) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = std::abs(B - B0[i]) / B0[i] - std::abs(eps[i]);
      s += r * r;
    }
    return s;
  };

  std::vector<double> knots = B0;
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> edges{-inf};
  edges.insert(edges.end(), knots.begin(), knots.end());
  edges.push_back(inf);

  double best_B = knots.front(), best = sse(best_B);
  for (double k : knots)
    if (sse(k) < best) best = sse(k), best_B = k;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double lo = edges[s], hi = edges[s + 1];
    // inside (lo, hi) each term is sign_i * (B / B0_i - 1) with a fixed sign
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sign = B0[i] >= hi ? -1.0 : 1.0;
      const double inv = 1.0 / B0[i];
      // residual = sign * (B * inv - 1) - |eps| = sign*inv*B - (sign + |eps|)
      num += sign * inv * (sign + std::abs(eps[i]));
      den += inv * inv;
    }
    double B = num / den;
    B = std::clamp(B, lo, hi);
    if (!std::isfinite(B)) continue;
    const double v = sse(B);
    if (v < best) best = v, best_B = B;
  }

  FieldFit fit;
  fit.B_eff = best_B;
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double model = std::abs(best_B - B0[i]) / B0[i];
    const double target = std::abs(eps[i]);
    const double rel = target != 0 ? (model - target) / target : model;
    acc += rel * rel;
  }
  fit.residual = std::sqrt(acc / static_cast<double>(n));
  return fit;
}

}  // namespace opdnp
