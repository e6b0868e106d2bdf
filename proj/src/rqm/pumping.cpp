#include "opdnp/errors.hpp"
#include "opdnp/rqm.hpp"

#include <cmath>

namespace opdnp {

PumpingReduction pumping_reduction(double Tz0, double T1_T, double r, double T1e_NO, double P_eq) {
  if (!(T1_T > 0) || !(T1e_NO > 0) || !(r >= 0))
    throw InvalidArgument("pumping_reduction: T1_T, T1e_NO must be > 0 and r >= 0");
  const double a = 1.0 / T1_T;
  const double b = 1.0 / T1e_NO;
  // triplet x and nitroxide y:
  //   x' = a (Tz0 - x) + r (y - x)
  //   y' = b (P_eq - y) + r (x - y)
  const double det = a * b + r * (a + b);
  PumpingReduction out;
  out.l_Tz0 = (P_eq * b * (a + r) + r * a * Tz0) / det;
  // slow eigenvalue of [[-(a+r), r], [r, -(b+r)]]
  const double tr = a + b + 2 * r;
  const double slow = 0.5 * (tr - std::sqrt((a - b) * (a - b) + 4 * r * r));
  out.T1_eff = 1.0 / slow;
  return out;
}

}  // namespace opdnp
