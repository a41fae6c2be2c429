#include "blockarrival/delay_model.hpp"

#include "blockarrival/errors.hpp"

namespace blockarrival {

DelayModel DelayModel::constant(double dead_time) {
  if (!(dead_time >= 0.0)) throw ParameterError("dead time must be non-negative");
  DelayModel d;
  d.kind = Kind::constant;
  d.dead_time = dead_time;
  return d;
}

DelayModel DelayModel::exp_ramp(double c) {
  if (!(c > 0.0)) throw ParameterError("delay rate c must be positive");
  DelayModel d;
  d.kind = Kind::exp_ramp;
  d.c = c;
  return d;
}

DelayModel DelayModel::exp_ramp_from_median(double median_seconds) {
  if (median_seconds == 0.0) return none();
  if (!(median_seconds > 0.0)) throw ParameterError("median delay must be non-negative");
  return exp_ramp(std::numbers::ln2 / median_seconds);
}

double DelayModel::median() const {
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::constant:
      return dead_time;
    case Kind::exp_ramp:
      return std::numbers::ln2 / c;
  }
  return 0.0;
}

double DelayModel::mean() const {
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::constant:
      return dead_time;
    case Kind::exp_ramp:
      return 1.0 / c;
  }
  return 0.0;
}

std::string_view to_string(DelayModel::Kind k) {
  switch (k) {
    case DelayModel::Kind::none:
      return "none";
    case DelayModel::Kind::constant:
      return "constant";
    case DelayModel::Kind::exp_ramp:
      return "exp_ramp";
  }
  return "unknown";
}

}  // namespace blockarrival
