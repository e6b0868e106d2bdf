#include "opdnp/errors.hpp"
#include "opdnp/spincore.hpp"

#include <cmath>
#include <string>

namespace opdnp {

SpinOperatorSet spin_operators(int multiplicity) {
  if (multiplicity < 2)
    throw InvalidArgument("spin_operators: multiplicity must be >= 2, got " +
                          std::to_string(multiplicity));
  const int n = multiplicity;
  const double S = 0.5 * (n - 1);
  SpinOperatorSet ops;
  ops.multiplicity = n;
  ops.Sz = CMatrix::Zero(n, n);
  ops.Splus = CMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double m = S - k;
    ops.Sz(k, k) = m;
    // S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>, and |m+1> sits at row k-1
    if (k > 0) ops.Splus(k - 1, k) = std::sqrt(S * (S + 1) - m * (m + 1));
  }
  ops.Sminus = ops.Splus.adjoint();
  ops.Sx = 0.5 * (ops.Splus + ops.Sminus);
  ops.Sy = cplx(0, -0.5) * (ops.Splus - ops.Sminus);
  return ops;
}

CMatrix embed(const CMatrix& op, std::size_t slot, const std::vector<int>& dims) {
  if (slot >= dims.size())
    throw InvalidArgument("embed: slot " + std::to_string(slot) + " out of range for " +
                          std::to_string(dims.size()) + " factors");
  if (op.rows() != dims[slot] || op.cols() != dims[slot])
    throw InvalidArgument("embed: operator dimension does not match dims[slot]");

  CMatrix out = CMatrix::Identity(1, 1);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const CMatrix factor = (k == slot) ? op : CMatrix::Identity(dims[k], dims[k]);
    CMatrix next(out.rows() * factor.rows(), out.cols() * factor.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        next.block(i * factor.rows(), j * factor.cols(), factor.rows(), factor.cols()) =
            out(i, j) * factor;
    out = std::move(next);
  }
  return out;
}

}  // namespace opdnp
