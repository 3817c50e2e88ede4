#include "easyo/easyo.h"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <new>
#include <string>
#include <vector>

#include "easyo/config.hpp"
#include "easyo/error.hpp"
#include "easyo/sim.hpp"

struct easyo_scenario {
  easyo::Scenario scenario;
};

namespace {

thread_local std::string g_last_error;

easyo_status remember(easyo_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Maps the in-flight exception to a status code.
easyo_status classify(std::exception_ptr failure) {
  try {
    std::rethrow_exception(failure);
  } catch (const easyo::ConfigError& e) {
    return remember(EASYO_ERR_CONFIG, e.what());
  } catch (const easyo::TopologyError& e) {
    return remember(EASYO_ERR_TOPOLOGY, e.what());
  } catch (const easyo::ValidationError& e) {
    return remember(EASYO_ERR_VALIDATION, e.what());
  } catch (const easyo::DomainError& e) {
    return remember(EASYO_ERR_DOMAIN, e.what());
  } catch (const easyo::AvailabilityError& e) {
    return remember(EASYO_ERR_AVAILABILITY, e.what());
  } catch (const easyo::StateError& e) {
    return remember(EASYO_ERR_STATE, e.what());
  } catch (const easyo::InternalError& e) {
    return remember(EASYO_ERR_INTERNAL, e.what());
  } catch (const easyo::Error& e) {
    return remember(EASYO_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return remember(EASYO_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return remember(EASYO_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return remember(EASYO_ERR_INTERNAL, e.what());
  } catch (...) {
    return remember(EASYO_ERR_INTERNAL, "unknown error");
  }
}

template <class F>
easyo_status guarded(F&& body) {
  try {
    body();
    return EASYO_OK;
  } catch (...) {
    return classify(std::current_exception());
  }
}

easyo_status null_argument(const char* name) {
  return remember(EASYO_ERR_ARGUMENT, std::string(name) + " is null");
}

easyo::RunOptions to_options(const easyo_run_options& o) {
  easyo::RunOptions r;
  r.slots = o.slots;
  r.seed = o.seed;
  switch (o.audit) {
    case EASYO_AUDIT_SAMPLED: r.audit = easyo::AuditMode::Sampled; break;
    case EASYO_AUDIT_FULL: r.audit = easyo::AuditMode::Full; break;
    case EASYO_AUDIT_OFF: r.audit = easyo::AuditMode::Off; break;
    default: throw std::invalid_argument("unknown audit mode " + std::to_string(o.audit));
  }
  r.csv_every = o.csv_every;
  r.snapshot_every = o.snapshot_every;
  r.bcd_trace_every = o.bcd_trace_every;
  if (o.out_dir) r.out_dir = o.out_dir;
  return r;
}

void to_metrics(const easyo::RunMetrics& m, easyo_metrics& out) {
  out.slots = m.slots;
  out.seed = m.seed;
  out.V = m.V;
  out.avg_objective = m.avg_objective;
  out.avg_utility = m.avg_utility;
  out.avg_cost = m.avg_cost;
  out.avg_utility_term = m.avg_utility_term;
  out.avg_cost_term = m.avg_cost_term;
  out.avg_data_queue = m.avg_data_queue;
  out.avg_total_backlog = m.avg_total_backlog;
  out.max_data_queue = m.max_data_queue;
  out.q_max_bound = m.q_max_bound;
  out.avg_energy = m.avg_energy;
  out.max_energy = m.max_energy;
  out.max_energy_ratio = m.max_energy_ratio;
  out.theta_min = m.theta_min;
  out.theta_max = m.theta_max;
  out.avg_admitted = m.avg_admitted;
  out.avg_delivered = m.avg_delivered;
  out.feasibility_violations = m.feasibility_violations;
  out.monitor_violations_a = m.monitor_violations_a;
  out.monitor_violations_c = m.monitor_violations_c;
  out.monitor_violations_d = m.monitor_violations_d;
  out.audits = m.audits;
  out.audit_failures = m.audit_failures;
  out.min_audit_slack = m.min_audit_slack;
  out.delta_violations = m.delta_violations;
  out.bcd_nonconvergence = m.bcd_nonconvergence;
  out.bcd_sweeps = m.bcd_sweeps;
  out.wall_seconds = m.wall_seconds;
}

easyo_status adopt(easyo::Scenario&& s, easyo_scenario** out) {
  *out = new easyo_scenario{std::move(s)};
  return EASYO_OK;
}

}  // namespace

extern "C" {

const char* easyo_version(void) { return "1.0.0"; }

const char* easyo_last_error(void) { return g_last_error.c_str(); }

const char* easyo_status_name(easyo_status status) {
  switch (status) {
    case EASYO_OK: return "ok";
    case EASYO_ERR_ARGUMENT: return "invalid argument";
    case EASYO_ERR_CONFIG: return "config error";
    case EASYO_ERR_TOPOLOGY: return "topology error";
    case EASYO_ERR_VALIDATION: return "validation error";
    case EASYO_ERR_DOMAIN: return "domain error";
    case EASYO_ERR_AVAILABILITY: return "availability error";
    case EASYO_ERR_STATE: return "state error";
    case EASYO_ERR_INTERNAL: return "internal error";
    case EASYO_ERR_IO: return "i/o error";
  }
  return "unknown status";
}

easyo_status easyo_scenario_default(easyo_scenario** out) {
  if (!out) return null_argument("out");
  return guarded([&] { adopt(easyo::default_scenario(), out); });
}

easyo_status easyo_scenario_load(const char* path, easyo_scenario** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] { adopt(easyo::load_config(path), out); });
}

easyo_status easyo_scenario_parse(const char* text, easyo_scenario** out) {
  if (!text) return null_argument("text");
  if (!out) return null_argument("out");
  return guarded([&] { adopt(easyo::parse_config(text), out); });
}

easyo_status easyo_scenario_generate(int nodes, int channels, uint64_t seed, easyo_scenario** out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    easyo::Scenario s = easyo::default_scenario();
    easyo::GeneratorConfig gen = s.topology.generator;
    gen.nodes = nodes;
    gen.channels = channels;
    gen.seed = seed;
    // Keep the default density (78 directed links for 20 nodes) for other sizes.
    gen.target_links = std::max(2 * (nodes - 1), (78 * nodes) / 20 / 2 * 2);
    s.topology = easyo::generate_topology(gen, s.topology.defaults);
    easyo::build_topology(s.topology);  // reject topologies the builder would refuse
    adopt(std::move(s), out);
  });
}

easyo_status easyo_scenario_clone(const easyo_scenario* scenario, easyo_scenario** out) {
  if (!scenario) return null_argument("scenario");
  if (!out) return null_argument("out");
  return guarded([&] { adopt(easyo::Scenario(scenario->scenario), out); });
}

void easyo_scenario_free(easyo_scenario* scenario) { delete scenario; }

easyo_status easyo_scenario_set_param(easyo_scenario* scenario, const char* key, const char* value) {
  if (!scenario) return null_argument("scenario");
  if (!key) return null_argument("key");
  if (!value) return null_argument("value");
  return guarded([&] { easyo::set_param(scenario->scenario, key, value); });
}

easyo_status easyo_scenario_save(const easyo_scenario* scenario, const char* path) {
  if (!scenario) return null_argument("scenario");
  if (!path) return null_argument("path");
  return guarded([&] { easyo::save_config(scenario->scenario, path); });
}

easyo_status easyo_scenario_counts(const easyo_scenario* scenario, int* nodes, int* links,
                                   int* sessions) {
  if (!scenario) return null_argument("scenario");
  return guarded([&] {
    const easyo::Network net = easyo::build_topology(scenario->scenario.topology);
    if (nodes) *nodes = static_cast<int>(net.nodes.size());
    if (links) *links = static_cast<int>(net.links.size());
    if (sessions) *sessions = static_cast<int>(net.sessions.size());
  });
}

easyo_status easyo_scenario_bounds(const easyo_scenario* scenario, easyo_bounds* out) {
  if (!scenario) return null_argument("scenario");
  if (!out) return null_argument("out");
  return guarded([&] {
    const easyo::Network net = easyo::build_topology(scenario->scenario.topology);
    const auto bc = easyo::compute_bound_constants(net, scenario->scenario.params);
    out->sigma = bc.sigma;
    out->q_max = bc.q_max;
    out->theta_min = *std::min_element(bc.theta.begin(), bc.theta.end());
    out->theta_max = *std::max_element(bc.theta.begin(), bc.theta.end());
    out->p_total_max_max = *std::max_element(bc.p_total_max.begin(), bc.p_total_max.end());
    out->b = bc.b;
    out->b_tilde = bc.b_tilde;
  });
}

easyo_status easyo_run_options_init(const easyo_scenario* scenario, easyo_run_options* options) {
  if (!options) return null_argument("options");
  const easyo::Params params = scenario ? scenario->scenario.params : easyo::Params{};
  *options = easyo_run_options{};
  options->slots = params.slots;
  options->seed = params.seed;
  options->audit = EASYO_AUDIT_SAMPLED;
  options->csv_every = 1;
  options->out_dir = nullptr;
  return EASYO_OK;
}

easyo_status easyo_run(const easyo_scenario* scenario, const easyo_run_options* options,
                       easyo_metrics* out) {
  if (!scenario) return null_argument("scenario");
  if (!options) return null_argument("options");
  if (!out) return null_argument("out");
  if (options->audit < EASYO_AUDIT_SAMPLED || options->audit > EASYO_AUDIT_OFF)
    return remember(EASYO_ERR_ARGUMENT, "unknown audit mode " + std::to_string(options->audit));
  return guarded([&] {
    const easyo::Network net = easyo::build_topology(scenario->scenario.topology);
    to_metrics(easyo::run(net, scenario->scenario.params, to_options(*options)), *out);
  });
}

easyo_status easyo_sweep(const easyo_scenario* scenario, const double* vs, size_t count,
                         const easyo_run_options* options, easyo_metrics* metrics,
                         easyo_status* cell_status) {
  if (!scenario) return null_argument("scenario");
  if (!vs) return null_argument("vs");
  if (!options) return null_argument("options");
  if (!metrics) return null_argument("metrics");
  if (count == 0) return remember(EASYO_ERR_ARGUMENT, "sweep needs at least one V");
  if (options->audit < EASYO_AUDIT_SAMPLED || options->audit > EASYO_AUDIT_OFF)
    return remember(EASYO_ERR_ARGUMENT, "unknown audit mode " + std::to_string(options->audit));
  for (size_t i = 0; i < count; ++i)
    if (!(vs[i] > 0.0)) return remember(EASYO_ERR_ARGUMENT, "V values must be > 0");
  return guarded([&] {
    const easyo::Network net = easyo::build_topology(scenario->scenario.topology);
    const std::vector<double> grid(vs, vs + count);
    const auto cells = easyo::sweep_V(net, scenario->scenario.params, grid, to_options(*options));
    std::string first_error;
    for (size_t i = 0; i < count; ++i) {
      to_metrics(cells[i].metrics, metrics[i]);
      easyo_status st = EASYO_OK;
      if (cells[i].failure) {
        st = classify(cells[i].failure);
        if (first_error.empty()) first_error = g_last_error;
      }
      if (cell_status) cell_status[i] = st;
    }
    g_last_error = first_error;
  });
}

}  // extern "C"
