#include "easyo/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <thread>

#include "csv.hpp"
#include "easyo/error.hpp"

namespace easyo {

namespace {

constexpr double kAuditRelTol = 1e-6;
constexpr double kMonitorTol = 1e-9;

std::ofstream open_csv(const std::filesystem::path& path, const std::string& header) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << header << '\n';
  return out;
}

void write_bounds(const std::filesystem::path& path, const Network& net, const BoundConstants& bc) {
  auto out = open_csv(path, "name,index,class,value");
  out << "sigma,,," << csv::num(bc.sigma) << '\n';
  out << "q_max,,," << csv::num(bc.q_max) << '\n';
  for (std::size_t f = 0; f < bc.q_max_session.size(); ++f)
    out << "q_max_session," << f << ",," << csv::num(bc.q_max_session[f]) << '\n';
  for (const auto& n : net.nodes) {
    out << "theta," << n.id << ',' << to_string(n.supply) << ',' << csv::num(bc.theta[n.id]) << '\n';
    out << "p_total_max," << n.id << ',' << to_string(n.supply) << ','
        << csv::num(bc.p_total_max[n.id]) << '\n';
  }
  out << "B,,," << csv::num(bc.b) << '\n';
  out << "B_tilde,,," << csv::num(bc.b_tilde) << '\n';
}

void dump_state(const std::filesystem::path& path, std::uint64_t slot, const QueueState& state,
                const Decision& dec, const Network& net) {
  std::ofstream out(path);
  if (!out) return;
  out << "slot " << slot << '\n';
  for (const auto& n : net.nodes) {
    out << "node " << n.id << ' ' << to_string(n.supply) << " E=" << csv::num(state.energy[n.id])
        << " theta=" << csv::num(n.battery_capacity) << " e=" << csv::num(dec.harvest[n.id])
        << " g=" << csv::num(dec.purchase[n.id])
        << " consumption=" << csv::num(total_consumption(n.id, dec, net)) << '\n';
    for (const auto& f : net.sessions)
      out << "  Q[" << f.id << "]=" << csv::num(state.backlog[n.id][f.id]) << '\n';
  }
  for (const auto& l : net.links) {
    out << "link " << l.id << ' ' << l.tx << "->" << l.rx << " p=" << csv::num(dec.power[l.id]);
    for (const auto& f : net.sessions)
      if (dec.routed[l.id][f.id] != 0.0) out << " x[" << f.id << "]=" << csv::num(dec.routed[l.id][f.id]);
    out << '\n';
  }
}

}  // namespace

double lyapunov(const QueueState& state, const Network& net) {
  double l = 0.0;
  for (const auto& row : state.backlog)
    for (double q : row) l += 0.5 * q * q;
  for (const auto& n : net.nodes) {
    const double gap = state.energy[n.id] - n.battery_capacity;
    l += 0.5 * gap * gap;
  }
  return l;
}

AuditRecord lemma1_audit(const QueueState& before, const QueueState& after, const Decision& dec,
                         const SlotState& slot, const Network& net, const Params& params,
                         const BoundConstants& bounds) {
  AuditRecord rec;
  rec.drift = lyapunov(after, net) - lyapunov(before, net);
  rec.penalty = params.V * slot_objective(dec, slot, net, params).objective;
  rec.lhs = rec.drift - rec.penalty;
  rec.terms = delta_tilde(before, dec, slot, net, params);
  rec.rhs = bounds.b + rec.terms.total();
  rec.slack = rec.rhs - rec.lhs;
  const double scale = std::max({1.0, std::abs(rec.lhs), std::abs(rec.rhs)});
  rec.passed = rec.slack >= -kAuditRelTol * scale;
  return rec;
}

std::vector<MonitorViolation> theorem1_monitor(const QueueState& state, const Decision& dec,
                                               const Network& net, const Params& params,
                                               const BoundConstants& bounds) {
  std::vector<MonitorViolation> v;
  for (const auto& n : net.nodes) {
    for (const auto& f : net.sessions) {
      const double q = state.backlog[n.id][f.id];
      const double cap = bounds.q_max_session[f.id];
      if (q > cap + kMonitorTol || q < -kMonitorTol)
        v.push_back({'A', "data backlog at node " + std::to_string(n.id) + " session " +
                              std::to_string(f.id), q, cap});
    }
    const double e = state.energy[n.id];
    if (e > bounds.theta[n.id] + kMonitorTol || e < -kMonitorTol)
      v.push_back({'A', "energy at node " + std::to_string(n.id), e, bounds.theta[n.id]});

    if (total_consumption(n.id, dec, net) > 0.0 && e < bounds.p_total_max[n.id] - kMonitorTol)
      v.push_back({'C', "consuming below P_total_max at node " + std::to_string(n.id), e,
                   bounds.p_total_max[n.id]});
  }
  const double floor = params.l_max * params.x_max;
  for (const auto& l : net.links) {
    for (const auto& f : net.sessions) {
      if (dec.routed[l.id][f.id] <= 0.0) continue;
      const double q = state.backlog[l.tx][f.id];
      if (q < floor - kMonitorTol)
        v.push_back({'D', "transmitting session " + std::to_string(f.id) + " from node " +
                              std::to_string(l.tx) + " with low backlog", q, floor});
    }
  }
  return v;
}

std::string summary_csv_header() {
  return "V,seed,slots,avg_objective,avg_utility,avg_cost,avg_utility_term,avg_cost_term,"
         "avg_data_queue,avg_total_backlog,max_data_queue,q_max_bound,avg_energy,max_energy,"
         "max_energy_ratio,theta_min,theta_max,avg_admitted,avg_delivered,feasibility_violations,"
         "monitor_violations_a,monitor_violations_c,monitor_violations_d,audits,audit_failures,"
         "min_audit_slack,delta_violations,bcd_nonconvergence,bcd_sweeps,status";
}

std::string summary_csv_row(const RunMetrics& m, const std::string& status) {
  using csv::num;
  std::string s;
  for (const std::string& field :
       {num(m.V), num(m.seed), num(m.slots), num(m.avg_objective), num(m.avg_utility),
        num(m.avg_cost), num(m.avg_utility_term), num(m.avg_cost_term), num(m.avg_data_queue),
        num(m.avg_total_backlog), num(m.max_data_queue), num(m.q_max_bound), num(m.avg_energy),
        num(m.max_energy), num(m.max_energy_ratio), num(m.theta_min), num(m.theta_max),
        num(m.avg_admitted), num(m.avg_delivered), num(m.feasibility_violations),
        num(m.monitor_violations_a), num(m.monitor_violations_c), num(m.monitor_violations_d),
        num(m.audits), num(m.audit_failures), num(m.min_audit_slack), num(m.delta_violations),
        num(m.bcd_nonconvergence), num(m.bcd_sweeps)}) {
    s += field;
    s += ',';
  }
  // Status text may contain commas.
  std::string clean = status;
  std::replace(clean.begin(), clean.end(), ',', ';');
  std::replace(clean.begin(), clean.end(), '\n', ' ');
  return s + clean;
}

std::string slot_csv_header() {
  return "slot,objective,running_avg_objective,utility,cost,total_backlog,max_backlog,"
         "mean_energy_eh,mean_energy_eg,mean_energy_me,active_nodes,feasibility_violations,"
         "monitor_violations,audit_slack,bcd_sweeps,bcd_converged,delta_violations";
}

RunMetrics run(const Network& base_net, const Params& params, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  Network net = base_net;
  net.finalize();
  if (auto bad = validate_network(net, params); !bad.empty())
    throw ValidationError(bad.front().what + " (" + bad.front().where + ")");
  const BoundConstants bounds = bound_constants(net, params);
  const InterferenceMap imap = build_interference(net);

  RunMetrics m;
  m.slots = options.slots;
  m.V = params.V;
  m.seed = options.seed;
  m.q_max_bound = bounds.q_max;
  m.theta_min = *std::min_element(bounds.theta.begin(), bounds.theta.end());
  m.theta_max = *std::max_element(bounds.theta.begin(), bounds.theta.end());
  m.avg_energy_by_node.assign(net.nodes.size(), 0.0);
  m.first_active_slot.assign(net.nodes.size(), -1);
  m.min_audit_slack = std::numeric_limits<double>::infinity();

  for (const auto& n : net.nodes)
    if (params.initial_energy > bounds.theta[n.id])
      throw ValidationError("initial_energy exceeds the battery capacity of node " + std::to_string(n.id));
  if (params.initial_backlog > bounds.q_max)
    throw ValidationError("initial_backlog exceeds the data queue bound");
  QueueState state = QueueState::initial(net, params.initial_energy, params.initial_backlog);

  const bool files = !options.out_dir.empty();
  std::ofstream slot_csv, snap_csv, trace_csv;
  if (files) {
    std::filesystem::create_directories(options.out_dir);
    write_bounds(options.out_dir / "bounds.csv", net, bounds);
    if (options.csv_every > 0) slot_csv = open_csv(options.out_dir / "slots.csv", slot_csv_header());
    if (options.snapshot_every > 0)
      snap_csv = open_csv(options.out_dir / "snapshots.csv", "slot,kind,node,session,value");
    if (options.bcd_trace_every > 0)
      trace_csv = open_csv(options.out_dir / "bcd_trace.csv", "slot,iteration,objective");
  }

  std::size_t queue_count = 0;
  std::vector<bool> is_destination(net.nodes.size() * net.sessions.size(), false);
  for (const auto& f : net.sessions) is_destination[f.destination * net.sessions.size() + f.id] = true;
  queue_count = net.nodes.size() * net.sessions.size() - net.sessions.size();

  auto audit_slot = [&](std::uint64_t t) {
    switch (options.audit) {
      case AuditMode::Full: return true;
      case AuditMode::Off: return false;
      case AuditMode::Sampled: return options.slots <= 10000 || t % 10 == 0;
    }
    return false;
  };

  auto snapshot = [&](std::uint64_t t, const QueueState& s) {
    for (const auto& n : net.nodes) {
      snap_csv << t << ",E," << n.id << ",," << csv::num(s.energy[n.id]) << '\n';
      for (const auto& f : net.sessions) {
        if (f.destination == n.id) continue;
        snap_csv << t << ",Q," << n.id << ',' << f.id << ',' << csv::num(s.backlog[n.id][f.id]) << '\n';
      }
    }
  };

  double sum_objective = 0.0, sum_utility = 0.0, sum_cost = 0.0;
  double sum_backlog = 0.0, sum_energy = 0.0, sum_admitted = 0.0, sum_delivered = 0.0;

  auto observe_state = [&](const QueueState& s) {
    for (const auto& n : net.nodes) {
      m.max_energy = std::max(m.max_energy, s.energy[n.id]);
      m.max_energy_ratio = std::max(m.max_energy_ratio, s.energy[n.id] / bounds.theta[n.id]);
      for (const auto& f : net.sessions) m.max_data_queue = std::max(m.max_data_queue, s.backlog[n.id][f.id]);
    }
  };

  for (std::uint64_t t = 0; t < options.slots; ++t) {
    const SlotState slot = sample_slot(options.seed, t, net, params, imap);
    SlotOutput out = run_slot(state, slot, net, params, bounds, imap);
    const Decision& dec = out.decision;
    const Diagnostics& diag = out.diagnostics;

    const auto infeasible = check_feasible(dec, state, slot, net, params, imap);
    m.feasibility_violations += infeasible.size();
    const auto monitor = theorem1_monitor(state, dec, net, params, bounds);
    for (const auto& v : monitor) {
      if (v.part == 'A') ++m.monitor_violations_a;
      if (v.part == 'C') ++m.monitor_violations_c;
      if (v.part == 'D') ++m.monitor_violations_d;
    }
    m.delta_violations += static_cast<std::uint64_t>(diag.delta_violations);
    m.bcd_sweeps += static_cast<std::uint64_t>(diag.bcd.iterations);
    if (!diag.bcd.converged) ++m.bcd_nonconvergence;

    if (files && options.snapshot_every > 0 && t % options.snapshot_every == 0) snapshot(t, state);
    if (files && options.bcd_trace_every > 0 && t % options.bcd_trace_every == 0)
      for (std::size_t i = 0; i < diag.bcd.objective.size(); ++i)
        trace_csv << t << ',' << i << ',' << csv::num(diag.bcd.objective[i]) << '\n';

    QueueState next;
    try {
      next = step(state, dec, slot, net);
    } catch (const AvailabilityError&) {
      if (files) dump_state(options.out_dir / "state_dump.txt", t, state, dec, net);
      throw;
    }

    double slack = std::numeric_limits<double>::quiet_NaN();
    if (audit_slot(t)) {
      const AuditRecord rec = lemma1_audit(state, next, dec, slot, net, params, bounds);
      ++m.audits;
      if (!rec.passed) ++m.audit_failures;
      m.min_audit_slack = std::min(m.min_audit_slack, rec.slack);
      slack = rec.slack;
    }

    // Time averages over Q(t), E(t) for t = 0..T-1.
    observe_state(state);
    double backlog = 0.0, max_backlog = 0.0;
    for (const auto& row : state.backlog)
      for (double q : row) {
        backlog += q;
        max_backlog = std::max(max_backlog, q);
      }
    double energy = 0.0;
    double class_sum[3] = {0, 0, 0};
    int class_count[3] = {0, 0, 0};
    for (const auto& n : net.nodes) {
      energy += state.energy[n.id];
      m.avg_energy_by_node[n.id] += state.energy[n.id];
      const int c = static_cast<int>(n.supply);
      class_sum[c] += state.energy[n.id];
      ++class_count[c];
      if (m.first_active_slot[n.id] < 0 && total_consumption(n.id, dec, net) > 0.0)
        m.first_active_slot[n.id] = static_cast<std::int64_t>(t);
    }
    double admitted = 0.0, delivered = 0.0;
    for (double r : dec.rate) admitted += r;
    for (const auto& f : net.sessions)
      for (LinkId l : net.in_links[f.destination]) delivered += dec.routed[l][f.id];

    sum_objective += diag.objective.objective;
    sum_utility += diag.objective.utility;
    sum_cost += diag.objective.cost;
    sum_backlog += backlog;
    sum_energy += energy;
    sum_admitted += admitted;
    sum_delivered += delivered;

    if (files && options.csv_every > 0 && t % options.csv_every == 0) {
      auto mean = [&](int c) { return class_count[c] ? class_sum[c] / class_count[c] : 0.0; };
      slot_csv << t << ',' << csv::num(diag.objective.objective) << ','
               << csv::num(sum_objective / static_cast<double>(t + 1)) << ','
               << csv::num(diag.objective.utility) << ',' << csv::num(diag.objective.cost) << ','
               << csv::num(backlog) << ',' << csv::num(max_backlog) << ','
               << csv::num(mean(static_cast<int>(SupplyClass::EH))) << ','
               << csv::num(mean(static_cast<int>(SupplyClass::EG))) << ','
               << csv::num(mean(static_cast<int>(SupplyClass::ME))) << ',' << diag.active_nodes << ','
               << infeasible.size() << ',' << monitor.size() << ','
               << (std::isnan(slack) ? std::string() : csv::num(slack)) << ','
               << diag.bcd.iterations << ',' << (diag.bcd.converged ? 1 : 0) << ','
               << diag.delta_violations << '\n';
    }
    state = std::move(next);
  }
  observe_state(state);
  {
    // The bound must also hold for the state reached after the last slot.
    const auto tail = theorem1_monitor(state, Decision::zero(net), net, params, bounds);
    for (const auto& v : tail)
      if (v.part == 'A') ++m.monitor_violations_a;
  }
  if (files && options.snapshot_every > 0) snapshot(options.slots, state);

  const double T = static_cast<double>(std::max<std::uint64_t>(options.slots, 1));
  if (options.slots > 0) {
    m.avg_objective = sum_objective / T;
    m.avg_utility = sum_utility / T;
    m.avg_cost = sum_cost / T;
    m.avg_utility_term = params.w1 * m.avg_utility;
    m.avg_cost_term = (1.0 - params.w1) * params.w2 * m.avg_cost;
    m.avg_total_backlog = sum_backlog / T;
    m.avg_data_queue = queue_count ? m.avg_total_backlog / static_cast<double>(queue_count) : 0.0;
    m.avg_energy = sum_energy / T / static_cast<double>(net.nodes.size());
    m.avg_admitted = sum_admitted / T;
    m.avg_delivered = sum_delivered / T;
    for (double& e : m.avg_energy_by_node) e /= T;
  } else {
    m.max_energy = 0.0;
    m.max_energy_ratio = 0.0;
    m.max_data_queue = 0.0;
  }
  if (m.audits == 0) m.min_audit_slack = 0.0;

  if (files) {
    auto summary = open_csv(options.out_dir / "summary.csv", summary_csv_header());
    summary << summary_csv_row(m) << '\n';
  }
  m.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return m;
}

std::vector<SweepCell> sweep_V(const Network& net, const Params& params,
                               const std::vector<double>& Vs, const RunOptions& options) {
  if (Vs.empty()) throw ValidationError("sweep needs at least one V");
  std::vector<SweepCell> cells(Vs.size());

  auto run_cell = [&](std::size_t i) {
    SweepCell& cell = cells[i];
    cell.V = Vs[i];
    cell.seed = options.seed + i;
    Params p = params;
    p.V = Vs[i];
    RunOptions o = options;
    o.seed = cell.seed;
    if (!options.out_dir.empty()) o.out_dir = options.out_dir / ("V_" + csv::num(Vs[i]));
    try {
      cell.metrics = run(net, p, o);
    } catch (const std::exception& e) {
      cell.error = e.what();
      cell.failure = std::current_exception();
      cell.metrics.V = Vs[i];
      cell.metrics.seed = cell.seed;
      cell.metrics.slots = options.slots;
    }
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(Vs.size(), std::thread::hardware_concurrency()));
  if (workers == 1) {
    for (std::size_t i = 0; i < Vs.size(); ++i) run_cell(i);
  } else {
    std::vector<std::future<void>> pending;
    for (std::size_t i = 0; i < Vs.size(); ++i) {
      pending.push_back(std::async(std::launch::async, run_cell, i));
      if (pending.size() == workers) {
        for (auto& f : pending) f.get();
        pending.clear();
      }
    }
    for (auto& f : pending) f.get();
  }

  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    auto summary = open_csv(options.out_dir / "summary.csv", summary_csv_header());
    for (const auto& c : cells) summary << summary_csv_row(c.metrics, c.error ? "error: " + *c.error : "ok") << '\n';
  }
  return cells;
}

}  // namespace easyo
