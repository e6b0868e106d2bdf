#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace opdnp {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct SpinOperatorSet {
  int multiplicity = 0;
  CMatrix Sx, Sy, Sz, Splus, Sminus;

  double spin() const { return 0.5 * (multiplicity - 1); }
};

// Basis ordered by decreasing m: |S>, |S-1>, ..., |-S>.
SpinOperatorSet spin_operators(int multiplicity);

// identity x ... x op x ... x identity with op at position slot.
CMatrix embed(const CMatrix& op, std::size_t slot, const std::vector<int>& dims);

struct EulerAngles {
  double alpha = 0.0, beta = 0.0, gamma = 0.0;  // rad
};

// Active ZYZ rotation Rz(alpha) Ry(beta) Rz(gamma).
Mat3 rotation_matrix(const EulerAngles& e);
Mat3 rotation_z(double angle);
Mat3 rotation_y(double angle);
Vec3 unit_vector(double theta, double phi);

struct Orientation {
  double theta = 0.0, phi = 0.0;
  double weight = 1.0;
};

struct ZfsLabCoefficients {
  double D0 = 0.0;
  cplx Dp1, Dm1, Dp2, Dm2;
};

// Unit agnostic: the coefficients carry whatever unit D and E are given in.
ZfsLabCoefficients zfs_lab_coefficients(double D, double E, double theta, double phi);

// Any spin >= 1 works; the excited-state model only needs the triplet.
CMatrix build_zfs_hamiltonian(const ZfsLabCoefficients& c, const SpinOperatorSet& ops);

enum class PowderScheme { GoldenSpiral, RepulsionFile, UniformRandom };

PowderScheme parse_powder_scheme(const std::string& name);
std::string to_string(PowderScheme s);

// RepulsionFile needs a path; the other schemes ignore it.
std::vector<Orientation> powder_grid(PowderScheme scheme, std::size_t n, std::uint64_t seed,
                                     const std::string& path = {});

// Whitespace separated "theta phi [weight]" per line, angles in degrees.
// Weights are renormalized; n = 0 keeps every line.
std::vector<Orientation> read_orientation_file(const std::string& path, std::size_t n = 0);

// tanh(h nu / 2 k T), nu in Hz.
double thermal_polarization(double frequency_hz, double temperature_k);

}  // namespace opdnp
