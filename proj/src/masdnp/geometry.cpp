#include "opdnp/masdnp.hpp"
#include "opdnp/units.hpp"

#include <cmath>

namespace opdnp {

namespace {
const double kMagicAngle = std::acos(1.0 / std::sqrt(3.0));
}

Mat3 g_tensor_a(const SpinSystemSpec& s) { return s.g_a.asDiagonal(); }

Mat3 g_tensor_b(const SpinSystemSpec& s) {
  const Mat3 R = rotation_matrix(s.euler_ab);
  return R * s.g_b.asDiagonal() * R.transpose();
}

Vec3 field_in_rotor_frame(double rotor_phase) {
  // lab <- rotor is Ry(magic) Rz(phase); invert and apply to the lab z axis
  const Vec3 tilted(-std::sin(kMagicAngle), 0.0, std::cos(kMagicAngle));
  return rotation_z(-rotor_phase) * tilted;
}

Vec3 field_in_molecular_frame(const EulerAngles& crystallite, double rotor_phase) {
  return rotation_matrix(crystallite).transpose() * field_in_rotor_frame(rotor_phase);
}

double electron_frequency(const Mat3& g, const Vec3& b_mol, double B0) {
  return (g * b_mol).norm() * units::bohr_hz_per_t * B0;
}

double proton_larmor(double B0) { return units::proton_gyro_hz_per_t * B0; }

Offsets instantaneous_offsets(const SpinSystemSpec& spec, const EulerAngles& crystallite,
                              double rotor_phase, const DriveConfig& drive) {
  const Vec3 b = field_in_molecular_frame(crystallite, rotor_phase);
  Offsets o;
  o.offset_a = electron_frequency(g_tensor_a(spec), b, drive.B0) - drive.uw_frequency;
  o.offset_b = electron_frequency(g_tensor_b(spec), b, drive.B0) - drive.uw_frequency;
  o.nuclear_larmor = proton_larmor(drive.B0);
  return o;
}

}  // namespace opdnp
