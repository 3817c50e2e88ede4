#pragma once

// Brute-force reference solvers. They only read the simulator's data types and
// recompute everything from the raw definitions; nothing here calls into the
// control, powalloc or sim code they are used to check.

#include <vector>

#include "easyo/model.hpp"
#include "easyo/powalloc.hpp"
#include "easyo/queues.hpp"
#include "easyo/stochastic.hpp"

namespace oracle {

// argmax over an evenly spaced grid on [0, r_max] of
//   V*w1*log(1+r) - (Q - A*sense_cost)*r.
double grid_rate_oracle(double Q, double A, double V, double w1, double sense_cost, double r_max,
                        int points = 100001);

struct EnergyLp {
  double e = 0.0;
  double g = 0.0;
};

// Minimizes (E-theta)*e + (D+E-theta)*g over 0<=e<=h, 0<=g<=g_max, e+g<=theta-E
// (masked by class) by enumerating the vertices of the feasible polygon.
// Ties go to the larger e, then the smaller g.
EnergyLp lp_energy_oracle(double E, double theta, double D, double h, double g_max,
                          easyo::SupplyClass supply);

struct PowerOptimum {
  std::vector<double> power;  // per term
  double objective = 0.0;     // sum W*log(K*S*p/(N0+I)) + a*p
};

// Exhaustive log-spaced grid (points per dimension) over [1e-9, P_max] per
// term, with the per-block budget, followed by zoomed local grids. At most 3
// terms; throws std::invalid_argument otherwise.
PowerOptimum grid_power_oracle(const easyo::PowerProblem& prob, int points = 400);

// Objective of the power problem written out from the raw SINR definition.
double power_objective(const easyo::PowerProblem& prob, const std::vector<double>& p);

struct DriftTerms {
  double lyapunov_before = 0.0;
  double lyapunov_after = 0.0;
  double drift = 0.0;               // L(t+1) - L(t)
  double penalty = 0.0;             // V*O(t)
  double utility = 0.0;             // sum log(1+r)
  double cost = 0.0;                // sum P^G g
  double queue_term = 0.0;          // sum_n,f Q (arrivals - departures)
  double energy_term = 0.0;         // sum_n A (e + g - consumption)
  double delta_tilde = 0.0;         // queue_term + energy_term - V*O
  double B = 0.0;
  double rhs = 0.0;                 // B + delta_tilde
  double lhs = 0.0;                 // drift - penalty
};

// Recomputes both sides of the Lemma 1 inequality in the raw queue-difference
// form. theta is read from the nodes' battery_capacity (as set on the network).
DriftTerms drift_term_oracle(const easyo::QueueState& before, const easyo::QueueState& after,
                             const easyo::Decision& dec, const easyo::SlotState& slot,
                             const easyo::Network& net, const easyo::Params& params);

}  // namespace oracle
