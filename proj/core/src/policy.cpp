#include "levelk/policy.hpp"

#include <cmath>
#include <string>

#include "levelk/error.hpp"

namespace levelk {

PolicySkeleton Policy::skeleton() const {
  PolicySkeleton out;
  out.reserve(maneuvers.size());
  for (const ManeuverInstance& m : maneuvers) out.push_back(m.type);
  return out;
}

const ManeuverInstance& Policy::active_at(double t) const {
  if (maneuvers.empty()) throw ContractViolation("empty policy");
  std::size_t k = 0;
  while (k + 1 < maneuvers.size() && maneuvers[k + 1].start_time <= t + 1e-9) ++k;
  return maneuvers[k];
}

VehicleState Policy::state_at(double t, const RoadGeometry& road) const {
  return evaluate_maneuver(active_at(t), t, road);
}

void Policy::validate() const {
  if (maneuvers.empty()) throw ContractViolation("policy has no maneuvers");
  for (std::size_t k = 1; k < maneuvers.size(); ++k) {
    if (std::abs(maneuvers[k].start_time - maneuvers[k - 1].end_time()) > 1e-9) {
      throw ContractViolation("policy of vehicle " + std::to_string(owner) +
                              " has unchained maneuver at position " + std::to_string(k));
    }
  }
}

bool operator==(const Policy& a, const Policy& b) {
  if (a.owner != b.owner || a.level != b.level || a.maneuvers.size() != b.maneuvers.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.maneuvers.size(); ++k) {
    const ManeuverInstance& x = a.maneuvers[k];
    const ManeuverInstance& y = b.maneuvers[k];
    if (x.type != y.type || x.start_time != y.start_time || !(x.start_state == y.start_state) ||
        !(x.params == y.params)) {
      return false;
    }
  }
  return true;
}

Policy instantiate_policy(const VehicleState& initial, double start_time,
                          const PolicySkeleton& skeleton, const ManeuverParams& params,
                          const RoadGeometry& road, int level) {
  if (skeleton.empty()) throw ContractViolation("empty policy skeleton");
  Policy policy{initial.id, level, {}};
  policy.maneuvers.reserve(skeleton.size());
  VehicleState state = initial;
  double t = start_time;
  for (std::size_t k = 0; k < skeleton.size(); ++k) {
    ManeuverInstance inst{skeleton[k], t, state, params};
    const double end = inst.end_time();
    if (k + 1 < skeleton.size()) state = evaluate_maneuver(inst, end, road);
    policy.maneuvers.push_back(inst);
    t = end;
  }
  // Evaluate the final maneuver once so infeasible lane changes surface here.
  (void)evaluate_maneuver(policy.maneuvers.back(), policy.maneuvers.back().start_time, road);
  return policy;
}

Policy hold_policy(const VehicleState& initial, double start_time, const ManeuverParams& params,
                   int level) {
  return Policy{initial.id, level, {ManeuverInstance{ManeuverType::kNoAction, start_time, initial, params}}};
}

Trajectory sample_trajectory(const Policy& policy, double start_time, int steps, double dt,
                             const RoadGeometry& road) {
  Trajectory out;
  out.reserve(static_cast<std::size_t>(steps));
  std::size_t k = 0;
  for (int n = 0; n < steps; ++n) {
    const double t = start_time + n * dt;
    while (k + 1 < policy.maneuvers.size() && policy.maneuvers[k + 1].start_time <= t + 1e-9) ++k;
    out.push_back(evaluate_maneuver(policy.maneuvers[k], t, road));
  }
  return out;
}

}  // namespace levelk
