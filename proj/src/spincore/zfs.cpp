#include "opdnp/errors.hpp"
#include "opdnp/spincore.hpp"

#include <cmath>

namespace opdnp {

ZfsLabCoefficients zfs_lab_coefficients(double D, double E, double theta, double phi) {
  const double st = std::sin(theta), ct = std::cos(theta);
  const double c2p = std::cos(2 * phi), s2p = std::sin(2 * phi);

  ZfsLabCoefficients c;
  c.D0 = D / 6.0 * (3 * ct * ct - 1) + E / 2.0 * st * st * c2p;

  const double re1 = 0.25 * std::sin(2 * theta) * (-D + E * c2p);
  const double im1 = E / 2.0 * st * s2p;
  c.Dp1 = {re1, im1};
  c.Dm1 = {re1, -im1};

  const double re2 = 0.25 * (D * st * st + E * c2p * (1 + ct * ct));
  const double im2 = E / 2.0 * ct * s2p;
  c.Dp2 = {re2, im2};
  c.Dm2 = {re2, -im2};
  return c;
}

CMatrix build_zfs_hamiltonian(const ZfsLabCoefficients& c, const SpinOperatorSet& ops) {
  if (ops.multiplicity < 3)
    throw InvalidArgument("build_zfs_hamiltonian: zero-field splitting needs S >= 1");
  const int n = ops.multiplicity;
  const double S = ops.spin();
  const CMatrix I = CMatrix::Identity(n, n);
  const CMatrix& Sz = ops.Sz;
  const CMatrix& Sp = ops.Splus;
  const CMatrix& Sm = ops.Sminus;

  CMatrix H = c.D0 * (3.0 * Sz * Sz - S * (S + 1) * I);
  H += c.Dp1 * (Sp * Sz + Sz * Sp);
  H += c.Dm1 * (Sm * Sz + Sz * Sm);
  // D+2 goes with S+^2; the other pairing breaks the tensor spectrum once E != 0.
  H += c.Dp2 * (Sp * Sp);
  H += c.Dm2 * (Sm * Sm);
  return H;
}

}  // namespace opdnp
