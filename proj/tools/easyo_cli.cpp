// Command-line front end. Talks to the simulator exclusively through the C API.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "easyo/easyo.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitViolations = 2;

struct ScenarioDeleter {
  void operator()(easyo_scenario* s) const { easyo_scenario_free(s); }
};
using ScenarioPtr = std::unique_ptr<easyo_scenario, ScenarioDeleter>;

struct Failure {
  std::string message;
};

void check(easyo_status st, const std::string& what) {
  if (st != EASYO_OK)
    throw Failure{what + ": " + easyo_status_name(st) + ": " + easyo_last_error()};
}

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> slots;
  std::optional<std::uint64_t> seed;
  std::optional<double> V;
  std::string out;
  std::uint64_t csv_every = 1;
  std::uint64_t snapshot_every = 0;
  std::uint64_t bcd_trace_every = 0;
};

void add_scenario_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Scenario file (defaults to the built-in 20-node scenario)");
  cmd->add_option("--set", c.sets, "Override a [params] key, e.g. --set h_max=0.2 (repeatable)");
  cmd->add_option("--slots", c.slots, "Number of slots T");
  cmd->add_option("--seed", c.seed, "Run seed");
}

void add_output_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Output directory (default: $EASYO_OUT_DIR, else ./out)");
  cmd->add_option("--csv-every", c.csv_every, "Per-slot CSV cadence in slots; 0 disables slots.csv");
  cmd->add_option("--snapshot-every", c.snapshot_every, "Queue snapshot cadence; 0 disables");
  cmd->add_option("--bcd-trace-every", c.bcd_trace_every, "BCD trace cadence; 0 disables");
}

ScenarioPtr load(const Common& c) {
  easyo_scenario* raw = nullptr;
  if (c.config.empty())
    check(easyo_scenario_default(&raw), "default scenario");
  else
    check(easyo_scenario_load(c.config.c_str(), &raw), "loading " + c.config);
  ScenarioPtr s(raw);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Failure{"--set expects key=value, got '" + kv + "'"};
    check(easyo_scenario_set_param(s.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()),
          "--set " + kv);
  }
  if (c.V) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *c.V);
    check(easyo_scenario_set_param(s.get(), "V", buf), "--V");
  }
  return s;
}

std::string output_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("EASYO_OUT_DIR"); env && *env) return env;
  return "out";
}

easyo_run_options options_for(const easyo_scenario* s, const Common& c) {
  easyo_run_options o;
  check(easyo_run_options_init(s, &o), "run options");
  if (c.slots) o.slots = *c.slots;
  if (c.seed) o.seed = *c.seed;
  o.csv_every = c.csv_every;
  o.snapshot_every = c.snapshot_every;
  o.bcd_trace_every = c.bcd_trace_every;
  return o;
}

void print_metrics(const easyo_metrics& m) {
  std::printf("  avg objective        %.6f\n", m.avg_objective);
  std::printf("  avg utility / cost   %.6f / %.6f\n", m.avg_utility, m.avg_cost);
  std::printf("  avg data queue       %.4f (max %.4f, bound %.4f)\n", m.avg_data_queue, m.max_data_queue,
              m.q_max_bound);
  std::printf("  avg energy           %.4f (max E/theta %.6f)\n", m.avg_energy, m.max_energy_ratio);
  std::printf("  feasibility          %llu violations\n", static_cast<unsigned long long>(m.feasibility_violations));
  std::printf("  monitor A / C / D    %llu / %llu / %llu\n", static_cast<unsigned long long>(m.monitor_violations_a),
              static_cast<unsigned long long>(m.monitor_violations_c),
              static_cast<unsigned long long>(m.monitor_violations_d));
  std::printf("  lemma 1 audits       %llu (%llu failed, min slack %.6g)\n",
              static_cast<unsigned long long>(m.audits), static_cast<unsigned long long>(m.audit_failures),
              m.min_audit_slack);
  std::printf("  delta breaches       %llu (reported only)\n", static_cast<unsigned long long>(m.delta_violations));
  std::printf("  BCD non-convergence  %llu\n", static_cast<unsigned long long>(m.bcd_nonconvergence));
  std::printf("  wall time            %.2f s\n", m.wall_seconds);
}

bool clean(const easyo_metrics& m) {
  return m.feasibility_violations == 0 && m.monitor_violations_a == 0 && m.monitor_violations_c == 0 &&
         m.monitor_violations_d == 0 && m.audit_failures == 0;
}

int cmd_run(const Common& c, const std::string& audit) {
  ScenarioPtr s = load(c);
  easyo_run_options o = options_for(s.get(), c);
  o.audit = audit == "full" ? EASYO_AUDIT_FULL : audit == "off" ? EASYO_AUDIT_OFF : EASYO_AUDIT_SAMPLED;
  const std::string dir = output_dir(c);
  o.out_dir = dir.c_str();
  std::printf("run: seed %llu, %llu slots, output %s\n", static_cast<unsigned long long>(o.seed),
              static_cast<unsigned long long>(o.slots), dir.c_str());
  easyo_metrics m;
  check(easyo_run(s.get(), &o, &m), "run");
  std::printf("V = %g\n", m.V);
  print_metrics(m);
  return clean(m) ? kExitOk : kExitViolations;
}

int cmd_sweep(const Common& c, const std::vector<double>& vs) {
  ScenarioPtr s = load(c);
  easyo_run_options o = options_for(s.get(), c);
  const std::string dir = output_dir(c);
  o.out_dir = dir.c_str();
  std::printf("sweep: base seed %llu (cell i uses seed + i), %llu slots, output %s\n",
              static_cast<unsigned long long>(o.seed), static_cast<unsigned long long>(o.slots), dir.c_str());
  std::vector<easyo_metrics> m(vs.size());
  std::vector<easyo_status> st(vs.size());
  check(easyo_sweep(s.get(), vs.data(), vs.size(), &o, m.data(), st.data()), "sweep");
  int code = kExitOk;
  std::printf("%10s %8s %14s %14s %14s %s\n", "V", "seed", "avg_objective", "avg_data_q", "avg_energy", "status");
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const bool ok = st[i] == EASYO_OK;
    std::printf("%10g %8llu %14.6f %14.4f %14.4f %s\n", vs[i], static_cast<unsigned long long>(m[i].seed),
                m[i].avg_objective, m[i].avg_data_queue, m[i].avg_energy,
                ok ? (clean(m[i]) ? "ok" : "violations") : easyo_status_name(st[i]));
    if (!ok) code = kExitError;
    else if (!clean(m[i]) && code == kExitOk) code = kExitViolations;
  }
  if (code == kExitError) std::fprintf(stderr, "error: %s\n", easyo_last_error());
  return code;
}

int cmd_audit(Common c, bool full) {
  ScenarioPtr s = load(c);
  easyo_run_options o = options_for(s.get(), c);
  o.audit = full ? EASYO_AUDIT_FULL : EASYO_AUDIT_SAMPLED;
  std::string dir;
  if (!c.out.empty()) dir = c.out;
  o.out_dir = dir.empty() ? nullptr : dir.c_str();
  std::printf("audit: seed %llu, %llu slots, %s audits\n", static_cast<unsigned long long>(o.seed),
              static_cast<unsigned long long>(o.slots), full ? "full" : "sampled");
  easyo_metrics m;
  check(easyo_run(s.get(), &o, &m), "audit");
  print_metrics(m);
  const bool ok = clean(m);
  std::printf("%s\n", ok ? "PASS" : "FAIL");
  return ok ? kExitOk : kExitViolations;
}

int cmd_gen(int nodes, int channels, std::uint64_t seed, const std::string& out) {
  easyo_scenario* raw = nullptr;
  check(easyo_scenario_generate(nodes, channels, seed, &raw), "generating topology");
  ScenarioPtr s(raw);
  check(easyo_scenario_save(s.get(), out.c_str()), "writing " + out);
  int n = 0, l = 0, f = 0;
  check(easyo_scenario_counts(s.get(), &n, &l, &f), "counting");
  std::printf("gen-topology: seed %llu, %d nodes, %d links, %d sessions, %d channels -> %s\n",
              static_cast<unsigned long long>(seed), n, l, f, channels, out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EASYO simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(easyo_version()));

  Common run_c, sweep_c, audit_c;
  std::string audit_mode = "sampled";
  auto* run = app.add_subcommand("run", "Simulate one scenario");
  add_scenario_flags(run, run_c);
  add_output_flags(run, run_c);
  run->add_option("--V", run_c.V, "Penalty weight V");
  run->add_option("--audit", audit_mode, "Lemma 1 audit mode")->check(CLI::IsMember({"sampled", "full", "off"}));

  std::vector<double> vs;
  auto* sweep = app.add_subcommand("sweep", "One run per V");
  add_scenario_flags(sweep, sweep_c);
  add_output_flags(sweep, sweep_c);
  sweep->add_option("--V-list", vs, "Comma-separated V values")->delimiter(',')->required();

  bool full = false;
  auto* audit = app.add_subcommand("audit", "Run with Lemma 1 / Theorem 1 audits and report");
  add_scenario_flags(audit, audit_c);
  audit->add_option("--out", audit_c.out, "Also write CSVs to this directory");
  audit->add_flag("--full", full, "Audit every slot");

  int nodes = 20, channels = 14;
  std::uint64_t gen_seed = 7;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-topology", "Write a generated topology as a config file");
  gen->add_option("--nodes", nodes, "Number of nodes")->check(CLI::Range(2, 100000));
  gen->add_option("--channels", channels, "Number of channels")->check(CLI::Range(1, 100000));
  gen->add_option("--seed", gen_seed, "Topology seed");
  gen->add_option("--out", gen_out, "Output config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*run) return cmd_run(run_c, audit_mode);
    if (*sweep) return cmd_sweep(sweep_c, vs);
    if (*audit) return cmd_audit(audit_c, full);
    if (*gen) return cmd_gen(nodes, channels, gen_seed, gen_out);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return kExitError;
  }
  return kExitError;
}
