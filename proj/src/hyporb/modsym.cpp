#include "hyporb/modsym.hpp"

#include <cmath>

namespace hyporb {

void validate_form(const PeriodForm& f, int genus) {
  if (static_cast<int>(f.periods.size()) != 2 * genus)
    throw Error(Status::invalid_argument,
                "period vector length must be twice the genus");
  bool nonzero = false;
  for (double p : f.periods) {
    if (!std::isfinite(p))
      throw Error(Status::invalid_argument, "periods must be finite");
    if (p != 0.0) nonzero = true;
  }
  if (!nonzero)
    throw Error(Status::invalid_argument, "period vector must be nonzero");
  for (const std::optional<double>& v : {f.norm_sq, f.sup_norm}) {
    if (v && !(*v > 0.0 && std::isfinite(*v)))
      throw Error(Status::invalid_argument,
                  "form norms must be finite and positive when given");
  }
}

double symbol(const GroupElement& e, const PeriodForm& f) {
  if (e.abelianization.size() != f.periods.size())
    throw Error(Status::invalid_argument,
                "abelianization and period lengths differ");
  double s = 0.0;
  for (size_t k = 0; k < f.periods.size(); ++k)
    s += e.abelianization[k] * f.periods[k];
  return s;
}

double normalized_symbol(const GroupElement& e, const PeriodForm& f, double r,
                         double vol) {
  if (!(r > 0.0))
    throw Error(Status::invalid_argument,
                "normalized symbol needs a positive distance");
  if (!f.norm_sq)
    throw Error(Status::invalid_argument,
                "normalized symbol needs the form's norm_sq");
  if (!(*f.norm_sq > 0.0) || !(vol > 0.0))
    throw Error(Status::invalid_argument,
                "norm_sq and volume must be positive");
  return std::sqrt(vol / (2.0 * *f.norm_sq * r)) * symbol(e, f);
}

double eichler_ratio(const OrbitBall& ball, const PeriodForm& f) {
  double best = 0.0;
  for (const OrbitRecord& rec : ball.records) {
    if (!(rec.distance > 0.0)) continue;
    const double v = std::fabs(symbol(rec.element, f)) / (1.0 + rec.distance);
    if (v > best) best = v;
  }
  return best;
}

}  // namespace hyporb
