#include "easyo/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "easyo/error.hpp"

namespace easyo {

namespace {

double price_weight(const Params& p) { return p.V * (1.0 - p.w1) * p.w2; }

double backlog_at(const QueueState& s, NodeId n, SessionId f) { return s.backlog[n][f]; }

}  // namespace

SlotWeights compute_weights(const QueueState& state, const SlotState& slot, const Network& net,
                            const Params& params, const BoundConstants& bounds) {
  SlotWeights w;
  const std::size_t num_nodes = net.nodes.size();
  const std::size_t num_sessions = net.sessions.size();
  const double k = price_weight(params);

  w.a.resize(num_nodes);
  w.d.assign(num_nodes, 0.0);
  w.d_slope.assign(num_nodes, 0.0);
  w.active.assign(num_nodes, true);
  for (const auto& n : net.nodes) {
    w.a[n.id] = state.energy[n.id] - bounds.theta[n.id];
    if (buys(n.supply)) {
      w.d[n.id] = k * electricity_price(slot, net, n.id, 0.0, params.price);
      if (params.price.form == PriceForm::Affine) w.d_slope[n.id] = k * params.price.b;
    }
    if (params.energy_gate) w.active[n.id] = state.energy[n.id] >= bounds.p_total_max[n.id];
  }

  w.w.assign(net.links.size(), std::vector<double>(num_sessions, 0.0));
  w.w_tilde.assign(net.links.size(), std::vector<double>(num_sessions, 0.0));
  w.fstar.assign(net.links.size(), -1);
  w.w_star.assign(net.links.size(), 0.0);
  for (const auto& l : net.links) {
    const double reception = w.a[l.rx] * net.nodes[l.rx].recv_cost;
    double best = 0.0;
    int best_f = -1;
    for (const auto& f : net.sessions) {
      const double wf = backlog_at(state, l.tx, f.id) - backlog_at(state, l.rx, f.id) + reception;
      const double shifted = std::max(wf - bounds.sigma, 0.0);
      w.w[l.id][f.id] = wf;
      w.w_tilde[l.id][f.id] = shifted;
      if (shifted > best) {
        best = shifted;
        best_f = f.id;
      }
    }
    if (w.active[l.tx] && w.active[l.rx]) {
      w.fstar[l.id] = best_f;
      w.w_star[l.id] = best;
    }
  }
  return w;
}

EnergyDecision energy_management(const EnergyInputs& in) {
  if (in.energy > in.capacity + kFeasibilityTol)
    throw StateError("stored energy " + std::to_string(in.energy) + " exceeds battery capacity " +
                     std::to_string(in.capacity));
  const double room = std::max(in.capacity - in.energy, 0.0);
  EnergyDecision out;
  if (room <= 0.0) return out;

  // Harvesting has coefficient A = -room, purchasing A + D >= A: harvest first.
  if (harvests(in.supply)) out.harvest = std::min(std::max(in.harvestable, 0.0), room);
  if (buys(in.supply)) {
    const double limit = std::min(in.g_max, room - out.harvest);
    if (limit > 0.0) {
      if (in.d_slope > 0.0)
        out.purchase = std::clamp((room - in.d) / (2.0 * in.d_slope), 0.0, limit);
      else if (in.d < room)
        out.purchase = limit;
    }
  }
  return out;
}

double utility(const Session& session, double rate) {
  switch (session.utility) {
    case Utility::Log1p: return std::log1p(rate);
  }
  return 0.0;
}

double source_rate(const Session& session, double backlog, double a, const Params& params) {
  const double price = backlog - a * session.sense_cost;
  if (price <= 0.0) return session.r_max;
  // U'(r) = 1/(1+r) for log(1+r).
  const double r = params.V * params.w1 / price - 1.0;
  return std::clamp(r, 0.0, session.r_max);
}

std::vector<std::vector<double>> schedule(const SlotWeights& weights,
                                          std::span<const double> capacities,
                                          std::size_t num_sessions) {
  std::vector<std::vector<double>> x(weights.w_star.size(), std::vector<double>(num_sessions, 0.0));
  for (std::size_t l = 0; l < weights.w_star.size(); ++l) {
    const int f = weights.fstar[l];
    if (f >= 0 && weights.w_star[l] > 0.0 && capacities[l] > 0.0) x[l][f] = capacities[l];
  }
  return x;
}

ObjectiveParts slot_objective(const Decision& dec, const SlotState& slot, const Network& net,
                              const Params& params) {
  ObjectiveParts o;
  for (const auto& f : net.sessions) o.utility += utility(f, dec.rate[f.id]);
  for (const auto& n : net.nodes) {
    if (!buys(n.supply)) continue;
    const double g = dec.purchase[n.id];
    if (g != 0.0) o.cost += electricity_price(slot, net, n.id, g, params.price) * g;
  }
  o.objective = params.w1 * o.utility - (1.0 - params.w1) * params.w2 * o.cost;
  return o;
}

DriftBound delta_tilde(const QueueState& state, const Decision& dec, const SlotState& slot,
                       const Network& net, const Params& params) {
  DriftBound out;
  const double k = price_weight(params);
  std::vector<double> a(net.nodes.size());
  for (const auto& n : net.nodes) a[n.id] = state.energy[n.id] - n.battery_capacity;

  for (const auto& n : net.nodes) {
    if (harvests(n.supply)) out.energy += a[n.id] * dec.harvest[n.id];
    if (buys(n.supply)) {
      const double g = dec.purchase[n.id];
      const double d = k * electricity_price(slot, net, n.id, g, params.price);
      out.energy += (d + a[n.id]) * g;
    }
  }
  for (const auto& f : net.sessions) {
    const double r = dec.rate[f.id];
    out.rate -= params.V * params.w1 * utility(f, r) - backlog_at(state, f.source, f.id) * r +
                a[f.source] * f.sense_cost * r;
  }
  for (const auto& l : net.links) {
    double term = a[l.tx] * dec.power[l.id];
    const double reception = a[l.rx] * net.nodes[l.rx].recv_cost;
    for (const auto& f : net.sessions) {
      const double x = dec.routed[l.id][f.id];
      if (x == 0.0) continue;
      term += (backlog_at(state, l.tx, f.id) - backlog_at(state, l.rx, f.id) + reception) * x;
    }
    out.link -= term;
  }
  return out;
}

SlotOutput run_slot(const QueueState& state, const SlotState& slot, const Network& net,
                    const Params& params, const BoundConstants& bounds, const InterferenceMap& imap) {
  SlotOutput out;
  Decision& dec = out.decision;
  Diagnostics& diag = out.diagnostics;
  dec = Decision::zero(net);

  const SlotWeights weights = compute_weights(state, slot, net, params, bounds);

  for (const auto& n : net.nodes) {
    EnergyInputs in;
    in.energy = state.energy[n.id];
    in.capacity = bounds.theta[n.id];
    in.d = weights.d[n.id];
    in.d_slope = weights.d_slope[n.id];
    in.harvestable = slot.harvest[n.id];
    in.g_max = n.g_max;
    in.supply = n.supply;
    const EnergyDecision ed = energy_management(in);
    dec.harvest[n.id] = ed.harvest;
    dec.purchase[n.id] = ed.purchase;
    diag.active_nodes += weights.active[n.id] ? 1 : 0;
  }

  for (const auto& f : net.sessions) {
    if (!weights.active[f.source]) continue;
    dec.rate[f.id] = source_rate(f, state.backlog[f.source][f.id], weights.a[f.source], params);
  }

  const PowerProblem prob = make_power_problem(net, slot, imap, weights.w_star, weights.a);
  BcdResult solved = bcd_solve(prob);
  for (std::size_t k = 0; k < prob.terms.size(); ++k) dec.power[prob.terms[k].link] = solved.power[k];
  diag.bcd = std::move(solved.report);

  diag.capacity.assign(net.links.size(), 0.0);
  diag.raw_capacity.assign(net.links.size(), -std::numeric_limits<double>::infinity());
  for (const auto& l : net.links) {
    if (dec.power[l.id] <= 0.0) continue;
    const double c = capacity(l.id, dec.power, slot, net, imap);
    diag.raw_capacity[l.id] = c;
    diag.capacity[l.id] = c > 0.0 ? std::min(c, params.x_max) : 0.0;
    if (c > params.delta * dec.power[l.id] + kFeasibilityTol) ++diag.delta_violations;
  }
  dec.routed = schedule(weights, diag.capacity, net.sessions.size());

  diag.w_star = weights.w_star;
  diag.objective = slot_objective(dec, slot, net, params);
  diag.drift = delta_tilde(state, dec, slot, net, params);
  return out;
}

}  // namespace easyo
