#pragma once

#include <vector>

#include "easyo/model.hpp"
#include "easyo/stochastic.hpp"

namespace easyo {

inline constexpr double kFeasibilityTol = 1e-9;

struct QueueState {
  std::vector<std::vector<double>> backlog;  // [node][session]
  std::vector<double> energy;                // [node]

  static QueueState initial(const Network& net, double energy0 = 0.0, double backlog0 = 0.0);
};

struct Decision {
  std::vector<double> harvest;               // e_n
  std::vector<double> purchase;              // g_n
  std::vector<double> rate;                  // r_f
  std::vector<double> power;                 // p^T per link
  std::vector<std::vector<double>> routed;   // x per [link][session]

  static Decision zero(const Network& net);
};

// Energy spent by a node in one slot: sensing + transmission + reception.
double total_consumption(NodeId node, const Decision& dec, const Network& net);

// Applies the data and energy queue dynamics. Destination backlogs stay at zero.
// Throws AvailabilityError when a node spends more than it stores or a queue
// would go negative.
QueueState step(const QueueState& state, const Decision& dec, const SlotState& slot,
                const Network& net);

// Every per-slot constraint on a decision. The link capacity is the effective
// one (log(K*sinr) clamped to [0, x_max]) computed from dec.power.
std::vector<Violation> check_feasible(const Decision& dec, const QueueState& state,
                                      const SlotState& slot, const Network& net,
                                      const Params& params, const InterferenceMap& imap);

}  // namespace easyo
