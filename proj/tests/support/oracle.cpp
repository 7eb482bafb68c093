#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <levelk/error.hpp>

namespace oracle {
namespace {

using namespace levelk;

bool boxes_meet(double ax, double ay, double al, double aw, double bx, double by, double bl,
                double bw) {
  const double gap_x = std::abs(ax - bx) - (al + bl) / 2.0;
  const double gap_y = std::abs(ay - by) - (aw + bw) / 2.0;
  return gap_x <= 0.0 && gap_y <= 0.0;
}

// Sequences of 1..depth maneuvers, stopped at the first covering position or
// at the depth limit, in lexicographic order.
std::vector<PolicySkeleton> all_sequences(const SolverConfig& cfg) {
  const double horizon = cfg.horizon.length();
  std::vector<PolicySkeleton> out;
  for (int len = 1; len <= cfg.max_sequence_depth; ++len) {
    int total = 1;
    for (int i = 0; i < len; ++i) total *= 5;
    for (int code = 0; code < total; ++code) {
      PolicySkeleton seq(len);
      int c = code;
      for (int i = len - 1; i >= 0; --i) {
        seq[i] = kAllManeuvers[c % 5];
        c /= 5;
      }
      double covered = 0.0;
      bool early = false;
      for (int i = 0; i < len; ++i) {
        covered += maneuver_duration(seq[i], cfg.maneuver);
        if (covered >= horizon - 1e-9 && i + 1 < len) early = true;
      }
      const bool covers = covered >= horizon - 1e-9;
      if (!early && (covers || len == cfg.max_sequence_depth)) out.push_back(seq);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Chain {
  std::vector<ManeuverInstance> parts;
};

std::optional<Chain> build_chain(const VehicleState& s0, double t0, const PolicySkeleton& seq,
                                 const ManeuverParams& p, const RoadGeometry& road) {
  Chain chain;
  VehicleState s = s0;
  double t = t0;
  try {
    for (ManeuverType m : seq) {
      ManeuverInstance inst{m, t, s, p};
      (void)evaluate_maneuver(inst, t, road);
      chain.parts.push_back(inst);
      t = inst.end_time();
      s = evaluate_maneuver(inst, t, road);
    }
  } catch (const InfeasibleManeuver&) {
    return std::nullopt;
  }
  return chain;
}

VehicleState chain_state(const Chain& c, double t, const RoadGeometry& road) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < c.parts.size(); ++i) {
    if (c.parts[i].start_time <= t + 1e-9) k = i;
  }
  return evaluate_maneuver(c.parts[k], t, road);
}

class Brute {
 public:
  Brute(const Scene& scene, const SolverConfig& cfg, const RewardWeights& w)
      : scene_(scene), cfg_(cfg), w_(w) {
    const auto seqs = all_sequences(cfg);
    for (const VehicleState& v : scene.vehicles()) {
      std::vector<std::pair<PolicySkeleton, Chain>> feasible;
      for (const PolicySkeleton& s : seqs) {
        if (auto c = build_chain(v, scene.time(), s, cfg.maneuver, scene.road())) {
          feasible.emplace_back(s, *c);
        }
      }
      options_.push_back(std::move(feasible));
      holds_.push_back(Chain{{ManeuverInstance{ManeuverType::kNoAction, scene.time(), v, cfg.maneuver}}});
    }
  }

  double cost(const std::vector<const Chain*>& chains) const {
    double total = 0.0;
    double discount = 1.0;
    for (int n = 0; n < cfg_.horizon.steps; ++n) {
      const double t = scene_.time() + n * cfg_.horizon.dt;
      std::vector<VehicleState> frame;
      for (const Chain* c : chains) frame.push_back(chain_state(*c, t, scene_.road()));
      total += discount * naive_step_reward(frame, scene_.road(), w_, cfg_.maneuver.vmax);
      discount *= cfg_.horizon.gamma;
    }
    return total;
  }

  std::size_t best(std::size_t ego, std::vector<const Chain*> chains) const {
    std::size_t arg = 0;
    double value = 0.0;
    for (std::size_t k = 0; k < options_[ego].size(); ++k) {
      chains[ego] = &options_[ego][k].second;
      const double c = cost(chains);
      if (k == 0 || c > value) {
        arg = k;
        value = c;
      }
    }
    return arg;
  }

  const Scene& scene_;
  SolverConfig cfg_;
  RewardWeights w_;
  std::vector<std::vector<std::pair<PolicySkeleton, Chain>>> options_;
  std::vector<Chain> holds_;
};

}  // namespace

double naive_step_reward(const std::vector<VehicleState>& vs, const RoadGeometry& road,
                         const RewardWeights& w, double vmax) {
  double rc = 0.0, rs = 0.0, ro = 0.0;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = 0; j < vs.size(); ++j) {
      if (i == j) continue;
      const VehicleState& a = vs[i];
      const VehicleState& b = vs[j];
      if (boxes_meet(a.x, a.y, a.length, a.width, b.x, b.y, b.length, b.width)) rc = -1.0;
      if (boxes_meet(a.x, a.y, 1.25 * a.length, 1.25 * a.width, b.x, b.y, 1.25 * b.length,
                     1.25 * b.width)) {
        rs = -1.0;
      }
    }
  }
  double speed = 0.0;
  for (const VehicleState& v : vs) {
    const double right = v.y - v.width / 2.0;
    const double left = v.y + v.width / 2.0;
    if (right < 0.0 || left > road.num_lanes * road.lane_width) ro = -1.0;
    if (v.lane < 0 || v.lane >= road.num_lanes) ro = -1.0;
    speed += v.vx;
  }
  double rf = vs.empty() ? 0.0 : speed / static_cast<double>(vs.size()) / vmax;
  rf = std::min(1.0, std::max(0.0, rf));
  return w.collision * rc + w.safety * rs + w.road * ro + w.objective * rf;
}

Result brute_force(const Scene& scene, const BeliefMap& beliefs, const SolverConfig& config,
                   const RewardWeights& weights) {
  if (scene.size() > 3 || config.max_sequence_depth > 2) {
    throw std::invalid_argument("oracle instance too large");
  }
  Brute b(scene, config, weights);
  const std::size_t m = scene.size();

  std::vector<std::array<std::size_t, 3>> choice(m);
  {
    std::vector<const Chain*> chains(m);
    for (std::size_t v = 0; v < m; ++v) chains[v] = &b.holds_[v];
    for (std::size_t v = 0; v < m; ++v) choice[v][0] = b.best(v, chains);
  }
  for (int k = 1; k < 3; ++k) {
    for (std::size_t v = 0; v < m; ++v) {
      std::vector<const Chain*> chains(m);
      for (std::size_t j = 0; j < m; ++j) chains[j] = &b.options_[j][choice[j][k - 1]].second;
      choice[v][k] = b.best(v, chains);
    }
  }

  Result r;
  for (std::size_t v = 0; v < m; ++v) {
    std::array<PolicySkeleton, 3> lv;
    for (int k = 0; k < 3; ++k) lv[k] = b.options_[v][choice[v][k]].first;
    r.levels.emplace(scene.vehicles()[v].id, lv);
  }

  const std::size_t target = scene.index_of(scene.target_id());
  std::vector<std::size_t> others;
  for (std::size_t v = 0; v < m; ++v) {
    if (v != target) others.push_back(v);
  }
  const auto belief_of = [&](std::size_t v) { return beliefs.at(scene.vehicles()[v].id).p; };

  bool first = true;
  for (const auto& [seq, chain] : b.options_[target]) {
    double expected = 0.0;
    std::vector<const Chain*> chains(m);
    chains[target] = &chain;
    if (others.empty()) {
      expected = b.cost(chains);
    } else if (others.size() == 1) {
      const auto p = belief_of(others[0]);
      for (int a = 0; a < 3; ++a) {
        const double wgt = 1.0 * p[a];
        if (wgt == 0.0) continue;
        chains[others[0]] = &b.options_[others[0]][choice[others[0]][a]].second;
        expected += wgt * b.cost(chains);
      }
    } else {
      const auto p = belief_of(others[0]);
      const auto q = belief_of(others[1]);
      for (int a = 0; a < 3; ++a) {
        for (int c = 0; c < 3; ++c) {
          const double wgt = 1.0 * p[a] * q[c];
          if (wgt == 0.0) continue;
          chains[others[0]] = &b.options_[others[0]][choice[others[0]][a]].second;
          chains[others[1]] = &b.options_[others[1]][choice[others[1]][c]].second;
          expected += wgt * b.cost(chains);
        }
      }
    }
    r.candidates.emplace_back(seq, expected);
    if (first || expected > r.value) {
      r.target = seq;
      r.value = expected;
      first = false;
    }
    auto& slot = r.first_maneuver_values[index_of(seq.front())];
    if (!slot || expected > *slot) slot = expected;
  }
  return r;
}

}  // namespace oracle
