#pragma once

#include <optional>
#include <vector>

#include "hyporb/group.hpp"
#include "hyporb/orbit.hpp"

namespace hyporb {

// a real harmonic 1-form represented by its periods over the homology
// basis; the L2 and sup norms are independent optional inputs because
// neither is computable from periods alone
struct PeriodForm {
  std::vector<double> periods;
  std::optional<double> norm_sq;
  std::optional<double> sup_norm;
};

// throws unless periods is a nonzero finite vector of length 2*genus and
// the optional norms, when present, are strictly positive
void validate_form(const PeriodForm& f, int genus);

// the modular symbol: the period pairing of the element's homology class
double symbol(const GroupElement& e, const PeriodForm& f);

// sqrt(vol / (2 norm_sq r)) * symbol; the normalization under which the
// limiting distribution is standard Gaussian
double normalized_symbol(const GroupElement& e, const PeriodForm& f, double r,
                         double vol);

// max over positive-distance records of |symbol| / (1 + distance); bounded
// in the radius, which is the testable shape of the linear-growth bound
double eichler_ratio(const OrbitBall& ball, const PeriodForm& f);

}  // namespace hyporb
