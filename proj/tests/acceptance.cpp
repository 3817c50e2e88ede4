// Acceptance campaign: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [--out DIR] [--long-slots N]
//
// Campaign: default 20-node scenario, V in {100,300,500,700,1000,1500} for 10^4
// slots each (seed 1+i), plus one 10^5-slot run at V = 1000.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "easyo/config.hpp"
#include "easyo/control.hpp"
#include "easyo/powalloc.hpp"
#include "easyo/sim.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace easyo;

namespace {

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
  std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Fit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};

Fit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  Fit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

struct Campaign {
  std::vector<double> Vs{100.0, 300.0, 500.0, 700.0, 1000.0, 1500.0};
  std::vector<RunMetrics> sweep;
  RunMetrics long_run;
  std::vector<std::string> errors;
};

RunMetrics quiet_run(const Network& net, const Params& p, std::uint64_t slots, std::uint64_t seed,
                     AuditMode audit = AuditMode::Sampled) {
  RunOptions o;
  o.slots = slots;
  o.seed = seed;
  o.audit = audit;
  return run(net, p, o);
}

// ---------------------------------------------------------------------------

void theorem_criteria(const Campaign& c) {
  std::uint64_t a = 0, cd = 0, audits = 0, audit_fail = 0, feas = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  double worst_q = 0.0, worst_e = 0.0;
  auto add = [&](const RunMetrics& m) {
    a += m.monitor_violations_a;
    cd += m.monitor_violations_c + m.monitor_violations_d;
    audits += m.audits;
    audit_fail += m.audit_failures;
    feas += m.feasibility_violations;
    min_slack = std::min(min_slack, m.min_audit_slack);
    worst_q = std::max(worst_q, m.max_data_queue / m.q_max_bound);
    worst_e = std::max(worst_e, m.max_energy_ratio);
  };
  for (const auto& m : c.sweep) add(m);
  add(c.long_run);
  const bool ran = c.errors.empty();
  std::string err = ran ? "" : " error: " + c.errors.front();

  report(ran && a == 0 && c.long_run.wall_seconds <= 300.0, "theorem1_A_bounds",
         fmt("%llu violations; max Q/Qmax %.4f, max E/theta %.4f; 1e5-slot run %.1f s (limit 300 s)",
             (unsigned long long)a, worst_q, worst_e, c.long_run.wall_seconds) + err);
  report(ran && cd == 0, "theorem1_C_D_premises",
         fmt("%llu monitor violations (C: consume => E >= P_total_max, D: transmit => Q >= 12)",
             (unsigned long long)cd) + err);
  report(ran && audits >= 10000 && audit_fail == 0, "lemma1_audit",
         fmt("%llu audits, %llu failed, min slack %.6g (tol 1e-6 relative)", (unsigned long long)audits,
             (unsigned long long)audit_fail, min_slack) + err);
  report(ran && feas == 0, "feasibility_campaign",
         fmt("%llu violations over %zu campaign runs (tol 1e-9)", (unsigned long long)feas, c.sweep.size() + 1) + err);
}

void shape_criteria(const Campaign& c) {
  if (!c.errors.empty()) {
    report(false, "objective_O(1/V)_shape", "campaign failed");
    report(false, "linear_queue_growth", "campaign failed");
    return;
  }
  std::vector<double> inv_v, obj, q, e;
  std::string table;
  for (std::size_t i = 0; i < c.Vs.size(); ++i) {
    inv_v.push_back(1.0 / c.Vs[i]);
    obj.push_back(c.sweep[i].avg_objective);
    q.push_back(c.sweep[i].avg_data_queue);
    e.push_back(c.sweep[i].avg_energy);
    table += fmt(" %g:%.4f", c.Vs[i], c.sweep[i].avg_objective);
  }
  const Fit f = least_squares(inv_v, obj);  // O = O_inf + slope / V, b = -slope
  bool increasing = true;
  for (std::size_t i = 1; i < obj.size(); ++i) increasing = increasing && obj[i] > obj[i - 1];
  report(-f.slope > 0.0 && f.r2 >= 0.9 && increasing, "objective_O(1/V)_shape",
         fmt("O_inf %.4f, b %.2f, R^2 %.4f, strictly increasing: %s;", f.intercept, -f.slope, f.r2,
             increasing ? "yes" : "no") + table);

  const Fit fq = least_squares(c.Vs, q);
  const Fit fe = least_squares(c.Vs, e);
  report(fq.r2 >= 0.95 && fe.r2 >= 0.95, "linear_queue_growth",
         fmt("data queue: slope %.4f R^2 %.4f; energy queue: slope %.4f R^2 %.4f", fq.slope, fq.r2, fe.slope, fe.r2));
}

// ---------------------------------------------------------------------------

void oracle_criteria() {
  std::mt19937_64 gen(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Params defaults;

  // Source rate.
  {
    const int points = 100001;
    double worst = 0.0;
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
      Session f;
      f.r_max = 0.5 + 4.5 * u(gen);
      f.sense_cost = 0.5 * u(gen);
      Params p = defaults;
      p.V = 50.0 + 1950.0 * u(gen);
      p.w1 = u(gen);
      const double Q = (i % 7 == 0) ? 0.0 : 2.0 * p.V * u(gen);
      const double A = -1.5 * p.V * u(gen);
      const double got = source_rate(f, Q, A, p);
      const double want = oracle::grid_rate_oracle(Q, A, p.V, p.w1, f.sense_cost, f.r_max, points);
      const double err = std::abs(got - want);
      worst = std::max(worst, err);
      if (err > 1e-6 + f.r_max / (points - 1)) ++bad;
    }
    report(bad == 0, "oracle_source_rate", fmt("1000 instances, %d outside 1e-6 + grid spacing, max error %.3g", bad, worst));
  }

  // Energy management.
  {
    int bad = 0;
    double worst = 0.0;
    const SupplyClass classes[] = {SupplyClass::EH, SupplyClass::EG, SupplyClass::ME};
    for (int i = 0; i < 1000; ++i) {
      EnergyInputs in;
      in.capacity = 3.0 + 2000.0 * u(gen);
      const double r = u(gen);
      in.energy = i % 10 == 0 ? in.capacity : i % 10 == 1 ? in.capacity - 1.0 * u(gen) : in.capacity * r;
      in.d = (i % 5 == 0 ? 3000.0 : 100.0) * u(gen);
      in.harvestable = 2.0 * u(gen);
      in.g_max = 2.0 * u(gen);
      in.supply = classes[i % 3];
      const auto got = energy_management(in);
      const auto want = oracle::lp_energy_oracle(in.energy, in.capacity, in.d, in.harvestable, in.g_max, in.supply);
      const double err = std::max(std::abs(got.harvest - want.e), std::abs(got.purchase - want.g));
      worst = std::max(worst, err);
      if (err > 1e-12 * std::max(1.0, in.capacity)) ++bad;
    }
    report(bad == 0, "oracle_energy_management", fmt("1000 instances, %d mismatches, max |diff| %.3g", bad, worst));
  }

  // BCD vs grid.
  {
    int bad = 0, nonconv = 0;
    double worst = -std::numeric_limits<double>::infinity();
    const std::vector<std::vector<int>> two{{1, 1}, {2}};
    const std::vector<std::vector<int>> three{{1, 1, 1}, {2, 1}, {3}, {1, 2}};
    for (int i = 0; i < 100; ++i) {
      const std::vector<int> layout = i < 40 ? std::vector<int>{1} : i < 80 ? two[i % 2] : three[i % 4];
      const auto prob = testing::random_power_problem(gen, layout);
      const auto r = bcd_solve(prob);
      if (!r.report.converged) ++nonconv;
      const auto best = oracle::grid_power_oracle(prob);
      const double got = oracle::power_objective(prob, r.power);
      const double gap = (best.objective - got) / std::max(1.0, std::abs(best.objective));
      worst = std::max(worst, gap);
      if (gap > 1e-4) ++bad;
    }
    report(bad == 0 && nonconv == 0, "oracle_bcd_vs_grid",
           fmt("100 instances (40x1, 40x2, 20x3 links), %d with gap > 1e-4, max relative gap %.3g, %d non-converged",
               bad, worst, nonconv));
  }

  // Gradient vs finite differences.
  {
    int bad = 0;
    double worst = 0.0;
    const std::vector<std::vector<int>> layouts{{1}, {2}, {1, 1}, {2, 1}, {1, 1, 1}, {3, 2}};
    for (int i = 0; i < 100; ++i) {
      const auto prob = testing::random_power_problem(gen, layouts[i % layouts.size()]);
      std::vector<double> y(prob.size());
      for (double& v : y) v = std::log(0.01 + 2.0 * u(gen));
      const int b = static_cast<int>(gen() % prob.blocks.size());
      const auto grad = psi_gradient(b, y, prob);
      for (std::size_t j = 0; j < grad.size(); ++j) {
        const int k = prob.blocks[b].terms[j];
        const double h = 1e-6;
        auto yp = y, ym = y;
        yp[k] += h;
        ym[k] -= h;
        const double fd = (objective_log(yp, prob) - objective_log(ym, prob)) / (2.0 * h);
        const double rel = std::abs(grad[j] - fd) / std::max({1.0, std::abs(fd), std::abs(grad[j])});
        worst = std::max(worst, rel);
        if (rel > 1e-5) ++bad;
      }
    }
    report(bad == 0, "oracle_psi_gradient", fmt("100 instances, %d components above 1e-5, max relative error %.3g", bad, worst));
  }
}

// ---------------------------------------------------------------------------

void sensitivity_criteria(const Scenario& sc) {
  const std::uint64_t T = 10000;
  bool ok = true;
  std::string detail;
  std::uint64_t infeasible = 0;
  auto go = [&](TopologyConfig tc, const Params& p) {
    const Network net = build_topology(tc);
    RunMetrics m = quiet_run(net, p, T, p.seed, AuditMode::Off);
    infeasible += m.feasibility_violations + m.monitor_violations();
    return m;
  };
  try {
    RunMetrics sg[3];
    const double sg_max[] = {0.2, 1.0, 10.0};
    for (int i = 0; i < 3; ++i) {
      Params p = sc.params;
      p.sg_max = sg_max[i];
      p.sg_min = std::min(p.sg_min, p.sg_max);
      sg[i] = go(sc.topology, p);
    }
    const bool sg_ok = sg[0].avg_cost < sg[1].avg_cost && sg[1].avg_cost < sg[2].avg_cost &&
                       sg[0].avg_utility >= sg[1].avg_utility && sg[1].avg_utility >= sg[2].avg_utility;
    ok = ok && sg_ok;
    detail += fmt("S^G_max 0.2/1/10: cost %.3f/%.3f/%.3f utility %.3f/%.3f/%.3f [%s]; ", sg[0].avg_cost, sg[1].avg_cost,
                  sg[2].avg_cost, sg[0].avg_utility, sg[1].avg_utility, sg[2].avg_utility, sg_ok ? "ok" : "WRONG");

    RunMetrics w[3];
    const double w1[] = {0.3, 0.6, 0.9};
    for (int i = 0; i < 3; ++i) {
      Params p = sc.params;
      p.w1 = w1[i];
      w[i] = go(sc.topology, p);
    }
    const bool w_ok = w[0].avg_utility < w[1].avg_utility && w[1].avg_utility < w[2].avg_utility &&
                      w[0].avg_cost < w[1].avg_cost && w[1].avg_cost < w[2].avg_cost;
    ok = ok && w_ok;
    detail += fmt("w1 0.3/0.6/0.9: utility %.3f/%.3f/%.3f cost %.3f/%.3f/%.3f [%s]; ", w[0].avg_utility,
                  w[1].avg_utility, w[2].avg_utility, w[0].avg_cost, w[1].avg_cost, w[2].avg_cost, w_ok ? "ok" : "WRONG");

    RunMetrics ps[3];
    const double sense[] = {0.05, 0.1, 0.5};
    for (int i = 0; i < 3; ++i) {
      TopologyConfig tc = sc.topology;
      tc.defaults.sense_cost = sense[i];
      for (auto& f : tc.sessions) f.sense_cost = sense[i];
      ps[i] = go(tc, sc.params);
    }
    const bool ps_ok = ps[0].avg_utility > ps[1].avg_utility && ps[1].avg_utility > ps[2].avg_utility;
    ok = ok && ps_ok;
    detail += fmt("P^S 0.05/0.1/0.5: utility %.3f/%.3f/%.3f [%s]; ", ps[0].avg_utility, ps[1].avg_utility,
                  ps[2].avg_utility, ps_ok ? "ok" : "WRONG");

    // Index: [mix][h], mix 0 = all EH, 1 = all EG; h 0 = 0.2, 1 = 2.
    RunMetrics mix[2][2];
    for (int m = 0; m < 2; ++m)
      for (int h = 0; h < 2; ++h) {
        TopologyConfig tc = sc.topology;
        tc.mix = m == 0 ? SupplyMix::AllEH : SupplyMix::AllEG;
        Params p = sc.params;
        p.h_max = h == 0 ? 0.2 : 2.0;
        mix[m][h] = go(tc, p);
      }
    const double eh_hi = mix[0][1].avg_objective, eh_lo = mix[0][0].avg_objective;
    const double eg_lo = mix[1][0].avg_objective, eg_hi = mix[1][1].avg_objective;
    const bool mix_ok = eh_hi > std::max(eg_lo, eg_hi) && eh_lo < std::min(eg_lo, eg_hi);
    ok = ok && mix_ok;
    detail += fmt("objective EH h=2 %.3f, EG h=2 %.3f, EG h=0.2 %.3f, EH h=0.2 %.3f [%s]", eh_hi, eg_hi, eg_lo, eh_lo,
                  mix_ok ? "ok" : "WRONG");
  } catch (const std::exception& e) {
    ok = false;
    detail += std::string("error: ") + e.what();
  }
  report(ok && infeasible == 0, "sensitivity_directions",
         fmt("13 runs x 1e4 slots, %llu feasibility/monitor violations; ", (unsigned long long)infeasible) + detail);
}

void determinism_criterion(const Scenario& sc, const std::filesystem::path& out) {
  const Network net = build_topology(sc.topology);
  RunOptions o;
  o.slots = 2000;
  o.seed = 42;
  o.snapshot_every = 100;
  o.bcd_trace_every = 50;
  std::filesystem::remove_all(out / "determinism");
  o.out_dir = out / "determinism" / "a";
  run(net, sc.params, o);
  o.out_dir = out / "determinism" / "b";
  run(net, sc.params, o);
  const char* files[] = {"slots.csv", "summary.csv", "bounds.csv", "snapshots.csv", "bcd_trace.csv"};
  int same = 0;
  std::string differ;
  for (const char* f : files) {
    const auto a = testing::slurp(out / "determinism" / "a" / f);
    const auto b = testing::slurp(out / "determinism" / "b" / f);
    if (!a.empty() && a == b) ++same;
    else differ += std::string(" ") + f;
  }
  report(same == 5, "determinism", fmt("%d/5 CSV files byte-identical (2000 slots, seed 42)", same) + differ);
}

}  // namespace

int main(int argc, char** argv) {
  std::filesystem::path out = "acceptance_out";
  std::uint64_t long_slots = 100000;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--out") == 0 && i + 1 < argc) out = argv[++i];
    else if (std::strcmp(argv[i], "--long-slots") == 0 && i + 1 < argc) long_slots = std::stoull(argv[++i]);
    else {
      std::fprintf(stderr, "usage: acceptance [--out DIR] [--long-slots N]\n");
      return 2;
    }
  }
  std::filesystem::create_directories(out);
  const auto started = std::chrono::steady_clock::now();

  const Scenario sc = default_scenario();
  const Network net = build_topology(sc.topology);

  Campaign c;
  {
    RunOptions o;
    o.slots = 10000;
    o.seed = sc.params.seed;
    o.csv_every = 0;
    o.out_dir = out / "sweep";
    const auto cells = sweep_V(net, sc.params, c.Vs, o);
    for (const auto& cell : cells) {
      c.sweep.push_back(cell.metrics);
      if (cell.error) c.errors.push_back(*cell.error);
    }
  }
  try {
    Params p = sc.params;
    p.V = 1000.0;
    c.long_run = quiet_run(net, p, long_slots, sc.params.seed);
  } catch (const std::exception& e) {
    c.errors.push_back(e.what());
  }

  theorem_criteria(c);
  shape_criteria(c);
  oracle_criteria();
  sensitivity_criteria(sc);
  determinism_criterion(sc, out);

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::printf("%d criteria failed (%.0f s)\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
