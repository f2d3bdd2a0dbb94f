#pragma once

#include <vector>

namespace homlp {

/// exp(mean(log(t + shift))) - shift. Throws PreconditionError on negative
/// or empty input.
double shifted_geomean(const std::vector<double>& times, double shift = 10.0);

}  // namespace homlp
