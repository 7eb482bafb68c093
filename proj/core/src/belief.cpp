#include "levelk/belief.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "levelk/error.hpp"

namespace levelk {

int LevelBelief::most_likely() const {
  int best = 0;
  for (int k = 1; k < kNumLevels; ++k) {
    if (p[k] > p[best]) best = k;
  }
  return best;
}

void LevelBelief::validate() const {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) {
      throw InvalidArgument("belief of vehicle " + std::to_string(vehicle) +
                            " has a negative entry");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw InvalidArgument("belief of vehicle " + std::to_string(vehicle) +
                          " is not normalized (sum " + std::to_string(sum) + ")");
  }
}

void BeliefConfig::validate() const {
  if (!(delta > 0.0)) throw InvalidArgument("belief update step must be positive");
  if (weights.position < 0.0 || weights.velocity < 0.0) {
    throw InvalidArgument("distance weights must be non-negative");
  }
  LevelBelief{0, initial, 0}.validate();
}

double joint_state_distance(const Scene& simulated, const Scene& measured,
                            const DistanceWeights& weights) {
  if (simulated.size() != measured.size()) {
    throw InvalidArgument("scenes hold different numbers of vehicles");
  }
  double total = 0.0;
  for (const VehicleState& a : simulated.vehicles()) {
    if (!measured.contains(a.id)) {
      throw InvalidArgument("vehicle " + std::to_string(a.id) + " missing from measured scene");
    }
    const VehicleState& b = measured.at(a.id);
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dvx = a.vx - b.vx;
    const double dvy = a.vy - b.vy;
    total += weights.position * (dx * dx + dy * dy) + weights.velocity * (dvx * dvx + dvy * dvy);
  }
  return total;
}

LevelBelief reinforce_level(const LevelBelief& belief, int k_star, double delta) {
  if (k_star < 0 || k_star >= kNumLevels) throw InvalidArgument("level out of range");
  LevelBelief out = belief;
  out.p[k_star] += delta;
  const double sum = out.p[0] + out.p[1] + out.p[2];
  for (double& v : out.p) v /= sum;

  // Keep positive entries strictly positive; the excess comes off the largest entry.
  int largest = out.most_likely();
  for (int k = 0; k < kNumLevels; ++k) {
    if (belief.p[k] > 0.0 && out.p[k] < kProbabilityFloor && k != largest) {
      out.p[largest] -= kProbabilityFloor - out.p[k];
      out.p[k] = kProbabilityFloor;
    }
  }
  ++out.updates;
  return out;
}

int closest_level(const std::array<Scene, kNumLevels>& simulated, const Scene& measured,
                  const DistanceWeights& weights) {
  int best = 0;
  double best_d = joint_state_distance(simulated[0], measured, weights);
  for (int k = 1; k < kNumLevels; ++k) {
    const double d = joint_state_distance(simulated[k], measured, weights);
    if (d < best_d) {
      best = k;
      best_d = d;
    }
  }
  return best;
}

LevelBelief update_belief(const LevelBelief& belief, const std::array<Scene, kNumLevels>& simulated,
                          const Scene& measured, const BeliefConfig& config) {
  return reinforce_level(belief, closest_level(simulated, measured, config.weights), config.delta);
}

}  // namespace levelk
