#include "opdnp/errors.hpp"
#include "opdnp/spincore.hpp"
#include "opdnp/units.hpp"

#include <cmath>

namespace opdnp {

double thermal_polarization(double frequency_hz, double temperature_k) {
  if (!(temperature_k > 0))
    throw InvalidArgument("thermal_polarization: temperature must be > 0 K");
  return std::tanh(units::planck * frequency_hz / (2.0 * units::boltzmann * temperature_k));
}

}  // namespace opdnp
