#pragma once

#include <cstdint>
#include <vector>

#include "easyo/model.hpp"

namespace easyo {

// Who interferes with whom. For link (n,b) the interferers are the other
// co-channel links whose transmitter is neither n nor b.
struct Interferer {
  LinkId link = 0;        // interfering link (a,m)
  NodeId tx = 0;          // a
  int pair = -1;          // index into InterferenceMap::pairs when (a,b) is not a link
  LinkId direct = -1;     // link (a,b) when it exists; its coefficient is reused
  double distance = 0.0;  // |a - b|
};

struct InterferenceMap {
  std::vector<std::vector<Interferer>> by_link;
  // Interferer->receiver pairs that are not links, ascending (a, b).
  std::vector<std::pair<NodeId, NodeId>> pairs;
  std::vector<double> pair_distance;
};

InterferenceMap build_interference(const Network& net);

struct SlotState {
  std::vector<double> channel;      // S^C per link, includes the d^-4 path loss
  std::vector<double> harvest;      // h_n; zero for EG nodes
  std::vector<double> price_state;  // S^G_n; zero for EH nodes
  std::vector<double> pair_gain;    // aligned with InterferenceMap::pairs

  // Gain from the interferer's transmitter to link l's receiver.
  double cross_gain(const Interferer& i) const {
    return i.direct >= 0 ? channel[i.direct] : pair_gain[i.pair];
  }
};

// Draw order: links ascending, EH/ME nodes ascending, EG/ME nodes ascending,
// then non-link interference pairs ascending. The state is a pure function of
// (seed, slot).
SlotState sample_slot(std::uint64_t seed, std::uint64_t slot, const Network& net,
                      const Params& params, const InterferenceMap& imap);

// Unit price P^G_n for buying g at node n. Throws DomainError for EH nodes.
double electricity_price(const SlotState& state, const Network& net, NodeId node, double g,
                         const PriceModel& model);

}  // namespace easyo
