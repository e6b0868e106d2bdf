#include "opdnp/errors.hpp"
#include "opdnp/rqm.hpp"
#include "opdnp/units.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace opdnp {

double quartet_m(int q) { return 1.5 - q; }
double doublet_m(int d) { return 0.5 - d; }

std::string quartet_label(int q) {
  static const char* names[] = {"Q+3/2", "Q+1/2", "Q-1/2", "Q-3/2"};
  return names[q];
}
std::string doublet_label(int d) {
  static const char* names[] = {"D1+1/2", "D1-1/2"};
  return names[d];
}

bool rqm_pair_allowed(int q, int d) { return quartet_m(q) != doublet_m(d); }

DqLevelScheme level_scheme(double J_CR, double field_frequency_hz) {
  if (!(field_frequency_hz > 0))
    throw InvalidArgument("level_scheme: field_frequency must be > 0");
  DqLevelScheme s;
  s.E_B = units::hz_to_wavenumber(field_frequency_hz);
  // -2J S_C.S_R puts the quartet at -J and the doublet at +2J.
  for (int q = 0; q < kQuartetLevels; ++q) s.quartet_energy[q] = -J_CR + quartet_m(q) * s.E_B;
  for (int d = 0; d < kDoubletLevels; ++d) s.doublet_energy[d] = 2 * J_CR + doublet_m(d) * s.E_B;
  for (int q = 0; q < kQuartetLevels; ++q)
    for (int d = 0; d < kDoubletLevels; ++d)
      s.deltaE[q][d] = 3 * J_CR + (doublet_m(d) - quartet_m(q)) * s.E_B;
  return s;
}

namespace {

struct ProductOps {
  CMatrix SzC, SzR, SdotS, S2, Sz, chromo_identity;
  SpinOperatorSet triplet;
};

const ProductOps& product_ops() {
  static const ProductOps ops = [] {
    ProductOps o;
    o.triplet = spin_operators(3);
    const auto r = spin_operators(2);
    const std::vector<int> dims{3, 2};
    o.SzC = embed(o.triplet.Sz, 0, dims);
    o.SzR = embed(r.Sz, 1, dims);
    o.SdotS = o.SzC * o.SzR + 0.5 * (embed(o.triplet.Splus, 0, dims) * embed(r.Sminus, 1, dims) +
                                     embed(o.triplet.Sminus, 0, dims) * embed(r.Splus, 1, dims));
    o.S2 = (2.0 + 0.75) * CMatrix::Identity(6, 6) + 2.0 * o.SdotS;
    o.Sz = o.SzC + o.SzR;
    return o;
  }();
  return ops;
}

// Re-diagonalize `op` inside the span of the given columns.
void refine(CMatrix& vecs, const std::vector<int>& cols, const CMatrix& op) {
  const int k = static_cast<int>(cols.size());
  CMatrix sub(6, k);
  for (int i = 0; i < k; ++i) sub.col(i) = vecs.col(cols[i]);
  const CMatrix proj = sub.adjoint() * op * sub;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(proj);
  const CMatrix rotated = sub * es.eigenvectors();
  for (int i = 0; i < k; ++i) vecs.col(cols[i]) = rotated.col(i);
}

std::vector<std::vector<int>> clusters(const Eigen::VectorXd& vals, double tol) {
  std::vector<std::vector<int>> out;
  for (int i = 0; i < vals.size(); ++i) {
    if (!out.empty() && std::abs(vals[i] - vals[out.back().back()]) <= tol)
      out.back().push_back(i);
    else
      out.push_back({i});
  }
  return out;
}

}  // namespace

CoupledBasis coupled_basis(double J_CR, double field_frequency_hz) {
  if (!(field_frequency_hz > 0))
    throw InvalidArgument("coupled_basis: field_frequency must be > 0");
  const auto& ops = product_ops();
  const double E_B = units::hz_to_wavenumber(field_frequency_hz);
  const CMatrix H0 = E_B * ops.Sz - 2.0 * J_CR * ops.SdotS;

  Eigen::SelfAdjointEigenSolver<CMatrix> es(H0);
  CMatrix vecs = es.eigenvectors();
  const Eigen::VectorXd vals = es.eigenvalues();

  CoupledBasis out;
  const double tol = 1e-9 * std::max({1.0, std::abs(E_B), std::abs(J_CR)});
  for (const auto& c : clusters(vals, tol)) {
    if (c.size() < 2) continue;
    std::ostringstream msg;
    msg << c.size() << " degenerate Zeeman/exchange levels at " << vals[c[0]]
        << " cm^-1; labelled by total spin then projection";
    out.diagnostics.push_back(msg.str());
    refine(vecs, c, ops.S2);
    Eigen::VectorXd s2(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
      s2[i] = (vecs.col(c[i]).adjoint() * ops.S2 * vecs.col(c[i]))(0).real();
    std::vector<int> order(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return s2[a] < s2[b]; });
    Eigen::VectorXd sorted(c.size());
    std::vector<int> cols(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      sorted[i] = s2[order[i]];
      cols[i] = c[order[i]];
    }
    for (const auto& sub : clusters(sorted, 1e-9)) {
      if (sub.size() < 2) continue;
      std::vector<int> subcols;
      for (int i : sub) subcols.push_back(cols[i]);
      refine(vecs, subcols, ops.Sz);
    }
  }

  std::array<int, 6> slot_of_column{};
  std::array<bool, 6> taken{};
  for (int j = 0; j < 6; ++j) {
    const auto v = vecs.col(j);
    const double s2 = (v.adjoint() * ops.S2 * v)(0).real();
    const double sz = (v.adjoint() * ops.Sz * v)(0).real();
    const bool quartet = std::abs(s2 - 3.75) < std::abs(s2 - 0.75);
    if (std::min(std::abs(s2 - 3.75), std::abs(s2 - 0.75)) > 1e-6)
      out.diagnostics.push_back("eigenstate with <S^2> = " + std::to_string(s2) +
                                " is not a pure quartet or doublet");
    int slot;
    if (quartet) {
      slot = static_cast<int>(std::lround(1.5 - sz));
      slot = std::clamp(slot, 0, 3);
    } else {
      slot = 4 + std::clamp(static_cast<int>(std::lround(0.5 - sz)), 0, 1);
    }
    if (taken[slot])
      throw SolverInstability("coupled_basis: two eigenstates map to the same Q/D label");
    taken[slot] = true;
    slot_of_column[j] = slot;
  }
  for (int j = 0; j < 6; ++j) {
    out.vectors.col(slot_of_column[j]) = vecs.col(j);
    out.energies[slot_of_column[j]] = vals[j];
  }
  return out;
}

ZfsElements zfs_matrix_elements(const CoupledBasis& basis, double D_zfs, double E_zfs,
                                const Orientation& o) {
  const auto& ops = product_ops();
  ZfsElements out;
  out.energies = basis.energies;
  out.diagnostics = basis.diagnostics;
  const auto c = zfs_lab_coefficients(D_zfs, E_zfs, o.theta, o.phi);
  const CMatrix H = embed(build_zfs_hamiltonian(c, ops.triplet), 0, {3, 2});
  const CMatrix M = basis.vectors.adjoint() * H * basis.vectors;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) out.all_sq(i, j) = std::norm(M(i, j));
  for (int q = 0; q < kQuartetLevels; ++q)
    for (int d = 0; d < kDoubletLevels; ++d) {
      out.qd[q][d] = M(q, 4 + d);
      out.qd_sq[q][d] = std::norm(M(q, 4 + d));
    }
  return out;
}

ZfsElements zfs_matrix_elements(double D_zfs, double E_zfs, double J_CR, double field_frequency_hz,
                                const Orientation& o) {
  return zfs_matrix_elements(coupled_basis(J_CR, field_frequency_hz), D_zfs, E_zfs, o);
}

}  // namespace opdnp
