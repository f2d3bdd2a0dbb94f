#include "homlp/stats.hpp"

#include <cmath>

#include "homlp/errors.hpp"

namespace homlp {

double shifted_geomean(const std::vector<double>& times, double shift) {
  if (times.empty()) throw PreconditionError("shifted_geomean: no values");
  if (!(shift >= 0.0)) throw PreconditionError("shifted_geomean: negative shift");
  double acc = 0.0;
  for (double t : times) {
    if (!(t >= 0.0)) throw PreconditionError("shifted_geomean: negative time");
    acc += std::log(t + shift);
  }
  return std::exp(acc / double(times.size())) - shift;
}

}  // namespace homlp
