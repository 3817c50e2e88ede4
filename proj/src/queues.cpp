#include "easyo/queues.hpp"

#include <cmath>
#include <string>

#include "easyo/error.hpp"
#include "easyo/powalloc.hpp"

namespace easyo {

QueueState QueueState::initial(const Network& net, double energy0, double backlog0) {
  QueueState s;
  s.backlog.assign(net.nodes.size(), std::vector<double>(net.sessions.size(), backlog0));
  for (const auto& f : net.sessions) s.backlog[f.destination][f.id] = 0.0;
  s.energy.assign(net.nodes.size(), energy0);
  return s;
}

Decision Decision::zero(const Network& net) {
  Decision d;
  d.harvest.assign(net.nodes.size(), 0.0);
  d.purchase.assign(net.nodes.size(), 0.0);
  d.rate.assign(net.sessions.size(), 0.0);
  d.power.assign(net.links.size(), 0.0);
  d.routed.assign(net.links.size(), std::vector<double>(net.sessions.size(), 0.0));
  return d;
}

double total_consumption(NodeId node, const Decision& dec, const Network& net) {
  const Node& n = net.nodes[node];
  double sensing = 0.0;
  for (SessionId f : n.sessions_sourced) sensing += net.sessions[f].sense_cost * dec.rate[f];
  double transmit = 0.0;
  for (LinkId l : net.out_links[node]) transmit += dec.power[l];
  double received = 0.0;
  for (LinkId l : net.in_links[node])
    for (double x : dec.routed[l]) received += x;
  return sensing + transmit + n.recv_cost * received;
}

QueueState step(const QueueState& state, const Decision& dec, const SlotState& /*slot*/,
                const Network& net) {
  QueueState next = state;

  for (const auto& n : net.nodes) {
    const double spend = total_consumption(n.id, dec, net);
    if (state.energy[n.id] + kFeasibilityTol < spend)
      throw AvailabilityError("energy availability violated at node " + std::to_string(n.id) +
                              ": stored " + std::to_string(state.energy[n.id]) + ", consumption " +
                              std::to_string(spend));
    double e = state.energy[n.id] - spend;
    if (harvests(n.supply)) e += dec.harvest[n.id];
    if (buys(n.supply)) e += dec.purchase[n.id];
    next.energy[n.id] = e < 0.0 ? 0.0 : e;
  }

  for (const auto& l : net.links) {
    for (const auto& f : net.sessions) {
      const double x = dec.routed[l.id][f.id];
      if (x == 0.0) continue;
      next.backlog[l.tx][f.id] -= x;
      next.backlog[l.rx][f.id] += x;
    }
  }
  for (const auto& f : net.sessions) next.backlog[f.source][f.id] += dec.rate[f.id];

  for (const auto& n : net.nodes) {
    for (const auto& f : net.sessions) {
      double& q = next.backlog[n.id][f.id];
      if (q < 0.0) {
        if (q < -kFeasibilityTol)
          throw AvailabilityError("data availability violated at node " + std::to_string(n.id) +
                                  " session " + std::to_string(f.id) + ": backlog would be " +
                                  std::to_string(q));
        q = 0.0;
      }
    }
  }
  for (const auto& f : net.sessions) next.backlog[f.destination][f.id] = 0.0;
  return next;
}

std::vector<Violation> check_feasible(const Decision& dec, const QueueState& state,
                                      const SlotState& slot, const Network& net,
                                      const Params& params, const InterferenceMap& imap) {
  std::vector<Violation> v;
  const double tol = kFeasibilityTol;
  auto node_where = [](NodeId n) { return "node " + std::to_string(n); };

  for (const auto& f : net.sessions) {
    const double r = dec.rate[f.id];
    if (r < -tol || r > f.r_max + tol)
      v.push_back({"source rate bound", "session " + std::to_string(f.id), r});
  }

  for (const auto& n : net.nodes) {
    double total_power = 0.0;
    for (LinkId l : net.out_links[n.id]) {
      if (dec.power[l] < -tol) v.push_back({"negative power", "link " + std::to_string(l), dec.power[l]});
      total_power += dec.power[l];
    }
    if (total_power > n.p_max + tol) v.push_back({"power budget", node_where(n.id), total_power - n.p_max});

    const double e = dec.harvest[n.id];
    const double g = dec.purchase[n.id];
    if (harvests(n.supply)) {
      if (e < -tol || e > slot.harvest[n.id] + tol) v.push_back({"harvest bound", node_where(n.id), e});
    } else if (std::abs(e) > tol) {
      v.push_back({"harvest at non-harvesting node", node_where(n.id), e});
    }
    if (buys(n.supply)) {
      if (g < -tol || g > n.g_max + tol) v.push_back({"purchase bound", node_where(n.id), g});
    } else if (std::abs(g) > tol) {
      v.push_back({"purchase at non-grid node", node_where(n.id), g});
    }

    const double stored = state.energy[n.id];
    const double spend = total_consumption(n.id, dec, net);
    if (stored + tol < spend) v.push_back({"energy availability", node_where(n.id), spend - stored});
    const double inflow = (harvests(n.supply) ? e : 0.0) + (buys(n.supply) ? g : 0.0);
    if (stored + inflow > n.battery_capacity + tol)
      v.push_back({"battery capacity", node_where(n.id), stored + inflow - n.battery_capacity});
  }

  for (const auto& l : net.links) {
    double total = 0.0;
    for (double x : dec.routed[l.id]) {
      if (x < -tol) v.push_back({"negative routed rate", "link " + std::to_string(l.id), x});
      total += x;
    }
    if (total > 0.0) {
      const double cap = effective_capacity(l.id, dec.power, slot, net, imap, params.x_max);
      if (total > cap + tol) v.push_back({"link capacity", "link " + std::to_string(l.id), total - cap});
    }
  }

  for (const auto& n : net.nodes) {
    for (const auto& f : net.sessions) {
      double out = 0.0;
      for (LinkId l : net.out_links[n.id]) out += dec.routed[l][f.id];
      if (out > state.backlog[n.id][f.id] + tol)
        v.push_back({"data availability",
                     node_where(n.id) + " session " + std::to_string(f.id),
                     out - state.backlog[n.id][f.id]});
    }
  }
  return v;
}

}  // namespace easyo
