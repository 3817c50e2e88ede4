#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "easyo/control.hpp"
#include "easyo/model.hpp"
#include "easyo/queues.hpp"
#include "easyo/stochastic.hpp"

namespace easyo {

struct AuditRecord {
  double lhs = 0.0;          // L(t+1) - L(t) - V*O(t)
  double rhs = 0.0;          // B + delta_tilde
  double slack = 0.0;        // rhs - lhs
  double drift = 0.0;        // L(t+1) - L(t)
  double penalty = 0.0;      // V*O(t)
  DriftBound terms;
  bool passed = true;
};

double lyapunov(const QueueState& state, const Network& net);

AuditRecord lemma1_audit(const QueueState& before, const QueueState& after, const Decision& dec,
                         const SlotState& slot, const Network& net, const Params& params,
                         const BoundConstants& bounds);

struct MonitorViolation {
  char part = 'A';           // Theorem 1 part: A, C or D
  std::string what;
  double value = 0.0;
  double bound = 0.0;
};

std::vector<MonitorViolation> theorem1_monitor(const QueueState& state, const Decision& dec,
                                               const Network& net, const Params& params,
                                               const BoundConstants& bounds);

enum class AuditMode { Sampled, Full, Off };

struct RunOptions {
  std::uint64_t slots = 10000;
  std::uint64_t seed = 1;
  AuditMode audit = AuditMode::Sampled;
  std::uint64_t csv_every = 1;          // per-slot CSV cadence; 0 disables the file
  std::uint64_t snapshot_every = 0;     // full QueueState rows; 0 disables
  std::uint64_t bcd_trace_every = 0;    // BCD objective traces; 0 disables
  std::filesystem::path out_dir;        // empty: no files
};

struct RunMetrics {
  std::uint64_t slots = 0;
  double V = 0.0;
  std::uint64_t seed = 0;
  double avg_objective = 0.0;
  double avg_utility = 0.0;             // sum_f U(r_f), time average
  double avg_cost = 0.0;                // sum_n P^G g, time average
  double avg_utility_term = 0.0;        // w1 * avg_utility
  double avg_cost_term = 0.0;           // (1-w1) w2 * avg_cost
  double q_max_bound = 0.0;
  double theta_min = 0.0;
  double theta_max = 0.0;
  double avg_data_queue = 0.0;          // mean over non-destination (node, session) queues
  double avg_total_backlog = 0.0;
  double max_data_queue = 0.0;
  double avg_energy = 0.0;              // mean over nodes
  double max_energy = 0.0;
  double max_energy_ratio = 0.0;        // max E_n / theta_n
  double avg_admitted = 0.0;            // sum_f r_f per slot
  double avg_delivered = 0.0;           // data absorbed at destinations per slot
  std::vector<double> avg_energy_by_node;
  std::vector<std::int64_t> first_active_slot;  // -1 if never active

  std::uint64_t feasibility_violations = 0;
  std::uint64_t monitor_violations_a = 0;
  std::uint64_t monitor_violations_c = 0;
  std::uint64_t monitor_violations_d = 0;
  std::uint64_t audits = 0;
  std::uint64_t audit_failures = 0;
  double min_audit_slack = 0.0;
  std::uint64_t delta_violations = 0;
  std::uint64_t bcd_nonconvergence = 0;
  std::uint64_t bcd_sweeps = 0;
  double wall_seconds = 0.0;

  std::uint64_t monitor_violations() const {
    return monitor_violations_a + monitor_violations_c + monitor_violations_d;
  }
  // Failures that make a run unacceptable (delta-assumption breaches are reported only).
  bool passed() const {
    return feasibility_violations == 0 && monitor_violations() == 0 && audit_failures == 0;
  }
};

// Runs the slot loop. Bound constants are recomputed for params.V and written
// onto a private copy of the network.
RunMetrics run(const Network& net, const Params& params, const RunOptions& options);

struct SweepCell {
  double V = 0.0;
  std::uint64_t seed = 0;
  RunMetrics metrics;
  std::optional<std::string> error;
  std::exception_ptr failure;           // set together with error
};

// One run per V with seed = options.seed + index. Per-cell files go to
// out_dir/V_<v>/ and the table to out_dir/summary.csv.
std::vector<SweepCell> sweep_V(const Network& net, const Params& params,
                               const std::vector<double>& Vs, const RunOptions& options);

// CSV schema helpers (column names are part of the external interface).
std::string summary_csv_header();
std::string summary_csv_row(const RunMetrics& m, const std::string& status = "ok");
std::string slot_csv_header();

}  // namespace easyo
