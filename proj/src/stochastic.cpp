#include "easyo/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "easyo/error.hpp"
#include "easyo/rng.hpp"

namespace easyo {

InterferenceMap build_interference(const Network& net) {
  InterferenceMap imap;
  imap.by_link.resize(net.links.size());

  std::map<std::pair<NodeId, NodeId>, int> pair_index;
  for (const auto& l : net.links) {
    for (const auto& j : net.links) {
      if (j.channel != l.channel || j.tx == l.tx || j.tx == l.rx) continue;
      if (!net.find_link(j.tx, l.rx)) pair_index.emplace(std::pair(j.tx, l.rx), 0);
    }
  }
  int k = 0;
  for (auto& [p, idx] : pair_index) {
    idx = k++;
    imap.pairs.push_back(p);
    imap.pair_distance.push_back(distance(net.nodes[p.first].pos, net.nodes[p.second].pos));
  }

  for (const auto& l : net.links) {
    for (const auto& j : net.links) {
      if (j.channel != l.channel || j.tx == l.tx || j.tx == l.rx) continue;
      Interferer i;
      i.link = j.id;
      i.tx = j.tx;
      if (auto direct = net.find_link(j.tx, l.rx)) {
        i.direct = *direct;
        i.distance = net.links[*direct].distance;
      } else {
        i.pair = pair_index.at({j.tx, l.rx});
        i.distance = imap.pair_distance[i.pair];
      }
      imap.by_link[l.id].push_back(i);
    }
  }
  return imap;
}

SlotState sample_slot(std::uint64_t seed, std::uint64_t slot, const Network& net,
                      const Params& params, const InterferenceMap& imap) {
  Rng rng(seed, slot);
  SlotState s;
  s.channel.resize(net.links.size());
  for (const auto& l : net.links)
    s.channel[l.id] = rng.uniform(params.sc_min, params.sc_max) * std::pow(l.distance, -4.0);

  s.harvest.assign(net.nodes.size(), 0.0);
  for (const auto& n : net.nodes)
    if (harvests(n.supply)) s.harvest[n.id] = rng.uniform(0.0, params.h_max);

  s.price_state.assign(net.nodes.size(), 0.0);
  for (const auto& n : net.nodes)
    if (buys(n.supply)) s.price_state[n.id] = rng.uniform(params.sg_min, params.sg_max);

  s.pair_gain.resize(imap.pairs.size());
  for (std::size_t i = 0; i < imap.pairs.size(); ++i)
    s.pair_gain[i] = rng.uniform(params.sc_min, params.sc_max) * std::pow(imap.pair_distance[i], -4.0);
  return s;
}

double electricity_price(const SlotState& state, const Network& net, NodeId node, double g,
                         const PriceModel& model) {
  if (node < 0 || node >= static_cast<int>(net.nodes.size()) || !buys(net.nodes[node].supply))
    throw DomainError("node " + std::to_string(node) + " has no grid supply");
  if (g < 0.0) throw DomainError("negative purchase at node " + std::to_string(node));
  switch (model.form) {
    case PriceForm::Flat: return state.price_state[node];
    case PriceForm::Affine: return model.a + model.b * g;
  }
  return state.price_state[node];
}

}  // namespace easyo
