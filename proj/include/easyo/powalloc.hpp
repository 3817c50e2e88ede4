#pragma once

#include <limits>
#include <span>
#include <vector>

#include "easyo/model.hpp"
#include "easyo/stochastic.hpp"

namespace easyo {

// Lower bound on log-power; a block optimum at this floor is committed as p = 0.
inline constexpr double kLogPowerFloor = -20.723265836946411;  // log(1e-9)

// ---------------------------------------------------------------------------
// Link capacity under a committed allocation.

// SINR without the processing gain; 0 when the link does not transmit.
double sinr(LinkId link, std::span<const double> power, const SlotState& slot, const Network& net,
            const InterferenceMap& imap);

// C = log(K * sinr); -infinity when p = 0.
double capacity(LinkId link, std::span<const double> power, const SlotState& slot,
                const Network& net, const InterferenceMap& imap);

// Rate the link can actually carry: C clamped to [0, x_max].
double effective_capacity(LinkId link, std::span<const double> power, const SlotState& slot,
                          const Network& net, const InterferenceMap& imap, double x_max);

// ---------------------------------------------------------------------------
// The per-slot power allocation problem, restricted to links with W* > 0.

struct PowerProblem {
  struct Term {
    LinkId link = 0;
    int block = 0;                 // index into blocks
    double weight = 0.0;           // W*
    double gain = 0.0;             // S^C of the link
    double noise = 0.0;            // N0 at the receiver
    double log_k = 0.0;            // log processing gain
    std::vector<std::pair<int, double>> interferers;  // (term index, cross gain)
  };
  struct Block {
    NodeId node = 0;
    double a = 0.0;                // A_n = E_n - theta_n (<= 0)
    double p_max = 0.0;
    std::vector<int> terms;
  };

  std::vector<Term> terms;
  std::vector<Block> blocks;
  // affects[k]: terms whose interference includes term k, with the cross gain.
  std::vector<std::vector<std::pair<int, double>>> affects;

  // Rebuilds `affects`; call after filling terms and blocks.
  void finalize();
  std::size_t size() const { return terms.size(); }
};

// Builds the problem for one slot. weight[l] is W*_l (links with weight <= 0 are
// left out), a[n] is A_n.
PowerProblem make_power_problem(const Network& net, const SlotState& slot,
                                const InterferenceMap& imap, std::span<const double> weight,
                                std::span<const double> a);

// Psi for term k at log-power vector y (one entry per term).
double psi(int term, std::span<const double> y, const PowerProblem& prob);

// Full log-domain objective: sum W*(log K + Psi) + A e^y.
double objective_log(std::span<const double> y, const PowerProblem& prob);

// Objective of the power problem in linear power (p per term); -inf if a weighted
// link has p = 0.
double objective_G(std::span<const double> p, const PowerProblem& prob);

// Gradient of objective_log with respect to the terms of one block, in block order.
std::vector<double> psi_gradient(int block, std::span<const double> y, const PowerProblem& prob);

// Euclidean projection of z onto {y >= floor, sum e^y <= p_max}.
std::vector<double> project_block(std::span<const double> z, double p_max,
                                  double floor = kLogPowerFloor);

struct BlockResult {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Maximizes the objective over one block with the others fixed (projected
// gradient ascent with backtracking). Updates y in place.
BlockResult block_update(int block, std::vector<double>& y, const PowerProblem& prob);

struct BcdReport {
  int iterations = 0;                 // Gauss-Seidel sweeps
  std::vector<double> objective;      // initial value, then after each sweep
  bool converged = true;
  double residual = 0.0;              // worst block residual in the last sweep
  int block_failures = 0;
};

struct BcdResult {
  std::vector<double> power;          // linear power per term (0 at the floor)
  std::vector<double> log_power;
  BcdReport report;
};

BcdResult bcd_solve(const PowerProblem& prob);

}  // namespace easyo
