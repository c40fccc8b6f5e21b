#include "frbc/rng.hpp"

#include <cmath>
#include <numbers>

namespace frbc {

double Rng::normal(double mean, double stddev) {
  // Box-Muller: z = sqrt(-2 ln u1) * cos(2*pi*u2), u1 in (0,1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mean + stddev * z;
}

}  // namespace frbc
