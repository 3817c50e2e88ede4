#pragma once

#include <span>
#include <vector>

#include "easyo/model.hpp"
#include "easyo/powalloc.hpp"
#include "easyo/queues.hpp"
#include "easyo/stochastic.hpp"

namespace easyo {

struct SlotWeights {
  std::vector<double> a;                     // A_n = E_n - theta_n
  std::vector<double> d;                     // D_n = V(1-w1)w2 P^G_n at g = 0
  std::vector<double> d_slope;               // V(1-w1)w2 dP^G/dg (affine prices)
  std::vector<std::vector<double>> w;        // W^f_nb [link][session]
  std::vector<std::vector<double>> w_tilde;  // [W - sigma]^+
  std::vector<int> fstar;                    // argmax session per link, -1 if none
  std::vector<double> w_star;                // max_f W~ per link (0 on gated links)
  std::vector<bool> active;                  // node may consume energy this slot
};

SlotWeights compute_weights(const QueueState& state, const SlotState& slot, const Network& net,
                            const Params& params, const BoundConstants& bounds);

struct EnergyInputs {
  double energy = 0.0;        // E_n
  double capacity = 0.0;      // theta_n
  double d = 0.0;             // D_n
  double d_slope = 0.0;       // >0 only for g-dependent prices
  double harvestable = 0.0;   // h_n
  double g_max = 0.0;
  SupplyClass supply = SupplyClass::ME;
};

struct EnergyDecision {
  double harvest = 0.0;
  double purchase = 0.0;
};

// Minimizes A*e + (D + A)*g (plus the price-slope term) over the harvest,
// purchase and battery limits. Throws StateError when E > theta.
EnergyDecision energy_management(const EnergyInputs& in);

// Closed-form rate maximizing V*w1*U(r) - (Q - A*P^S)*r on [0, r_max].
double source_rate(const Session& session, double backlog, double a, const Params& params);

double utility(const Session& session, double rate);

// Max-weight rule: link carries its best session at full capacity when W* > 0
// and the capacity is positive. capacities is per link.
std::vector<std::vector<double>> schedule(const SlotWeights& weights,
                                          std::span<const double> capacities,
                                          std::size_t num_sessions);

struct ObjectiveParts {
  double utility = 0.0;       // sum U_f(r_f)
  double cost = 0.0;          // sum P^G_n g_n
  double objective = 0.0;     // w1*utility - (1-w1)*w2*cost
};

ObjectiveParts slot_objective(const Decision& dec, const SlotState& slot, const Network& net,
                              const Params& params);

// Right-hand side pieces of the drift-plus-penalty bound, grouped per control
// component.
struct DriftBound {
  double energy = 0.0;   // sum A e + (D + A) g
  double rate = 0.0;     // -sum [V w1 U - Q r + A P^S r]
  double link = 0.0;     // -sum [W x + A p]
  double total() const { return energy + rate + link; }
};

DriftBound delta_tilde(const QueueState& state, const Decision& dec, const SlotState& slot,
                       const Network& net, const Params& params);

struct Diagnostics {
  ObjectiveParts objective;
  DriftBound drift;
  BcdReport bcd;
  std::vector<double> capacity;       // effective capacity per link
  std::vector<double> raw_capacity;   // log(K*sinr) per link (-inf when silent)
  std::vector<double> w_star;
  int delta_violations = 0;           // links with C > delta * p
  int active_nodes = 0;
};

struct SlotOutput {
  Decision decision;
  Diagnostics diagnostics;
};

SlotOutput run_slot(const QueueState& state, const SlotState& slot, const Network& net,
                    const Params& params, const BoundConstants& bounds, const InterferenceMap& imap);

}  // namespace easyo
