#include "easyo/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "easyo/error.hpp"
#include "easyo/rng.hpp"

namespace easyo {

const char* to_string(SupplyClass c) {
  switch (c) {
    case SupplyClass::EH: return "EH";
    case SupplyClass::EG: return "EG";
    case SupplyClass::ME: return "ME";
  }
  return "?";
}

std::optional<SupplyClass> parse_supply_class(const std::string& s) {
  if (s == "EH") return SupplyClass::EH;
  if (s == "EG") return SupplyClass::EG;
  if (s == "ME") return SupplyClass::ME;
  return std::nullopt;
}

double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void Network::finalize() {
  out_links.assign(nodes.size(), {});
  in_links.assign(nodes.size(), {});
  for (const auto& l : links) {
    if (l.tx >= 0 && l.tx < static_cast<int>(nodes.size())) out_links[l.tx].push_back(l.id);
    if (l.rx >= 0 && l.rx < static_cast<int>(nodes.size())) in_links[l.rx].push_back(l.id);
  }
  for (auto& n : nodes) n.sessions_sourced.clear();
  for (const auto& s : sessions) {
    if (s.source >= 0 && s.source < static_cast<int>(nodes.size()))
      nodes[s.source].sessions_sourced.push_back(s.id);
  }
}

std::optional<LinkId> Network::find_link(NodeId tx, NodeId rx) const {
  if (tx < 0 || tx >= static_cast<int>(out_links.size())) return std::nullopt;
  for (LinkId l : out_links[tx])
    if (links[l].rx == rx) return l;
  return std::nullopt;
}

int Network::max_out_degree() const {
  std::size_t d = 0;
  for (const auto& v : out_links) d = std::max(d, v.size());
  return static_cast<int>(d);
}

int Network::max_in_degree() const {
  std::size_t d = 0;
  for (const auto& v : in_links) d = std::max(d, v.size());
  return static_cast<int>(d);
}

double Network::r_max_overall() const {
  double r = 0.0;
  for (const auto& s : sessions) r = std::max(r, s.r_max);
  return r;
}

namespace {

bool reachable(const Network& net, NodeId from, NodeId to) {
  std::vector<bool> seen(net.nodes.size(), false);
  std::deque<NodeId> frontier{from};
  seen[from] = true;
  while (!frontier.empty()) {
    NodeId n = frontier.front();
    frontier.pop_front();
    if (n == to) return true;
    for (LinkId l : net.out_links[n]) {
      NodeId m = net.links[l].rx;
      if (!seen[m]) {
        seen[m] = true;
        frontier.push_back(m);
      }
    }
  }
  return false;
}

std::string node_label(NodeId n) { return "node " + std::to_string(n); }

SupplyClass apply_mix(SupplyMix mix, SupplyClass listed) {
  switch (mix) {
    case SupplyMix::AllEH: return SupplyClass::EH;
    case SupplyMix::AllEG: return SupplyClass::EG;
    case SupplyMix::AllME: return SupplyClass::ME;
    case SupplyMix::AsListed: break;
  }
  return listed;
}

}  // namespace

Network build_topology(const TopologyConfig& config) {
  if (config.nodes.empty()) {
    TopologyConfig explicit_cfg = generate_topology(config.generator, config.defaults);
    explicit_cfg.mix = config.mix;
    return build_topology(explicit_cfg);
  }

  const auto& d = config.defaults;
  Network net;
  net.num_channels = config.num_channels;

  for (std::size_t i = 0; i < config.nodes.size(); ++i) {
    const auto& spec = config.nodes[i];
    if (spec.id != static_cast<int>(i))
      throw ValidationError("node ids must be 0..N-1 in order; got " + std::to_string(spec.id) +
                            " at position " + std::to_string(i));
    Node n;
    n.id = spec.id;
    n.supply = apply_mix(config.mix, spec.supply);
    n.pos = spec.pos;
    n.noise = spec.noise.value_or(d.noise);
    n.p_max = spec.p_max.value_or(d.p_max);
    n.g_max = spec.g_max.value_or(d.g_max);
    n.recv_cost = spec.recv_cost.value_or(d.recv_cost);
    net.nodes.push_back(n);
  }

  const int num_nodes = static_cast<int>(net.nodes.size());
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& spec : config.links) {
    if (spec.tx < 0 || spec.tx >= num_nodes || spec.rx < 0 || spec.rx >= num_nodes)
      throw ValidationError("link " + std::to_string(spec.tx) + "->" + std::to_string(spec.rx) +
                            " references an unknown node");
    if (!seen.insert({spec.tx, spec.rx}).second)
      throw ValidationError("duplicate link " + std::to_string(spec.tx) + "->" +
                            std::to_string(spec.rx));
    Link l;
    l.id = static_cast<LinkId>(net.links.size());
    l.tx = spec.tx;
    l.rx = spec.rx;
    l.channel = spec.channel.value_or(l.id % std::max(1, config.num_channels));
    l.distance = distance(net.nodes[spec.tx].pos, net.nodes[spec.rx].pos);
    l.processing_gain = spec.processing_gain.value_or(d.processing_gain);
    net.links.push_back(l);
  }

  for (std::size_t i = 0; i < config.sessions.size(); ++i) {
    const auto& spec = config.sessions[i];
    if (spec.id != static_cast<int>(i))
      throw ValidationError("session ids must be 0..F-1 in order; got " + std::to_string(spec.id));
    if (spec.source == spec.destination)
      throw ValidationError("session " + std::to_string(spec.id) + " has source == destination");
    if (spec.source < 0 || spec.source >= num_nodes || spec.destination < 0 ||
        spec.destination >= num_nodes)
      throw ValidationError("session " + std::to_string(spec.id) + " references an unknown node");
    Session s;
    s.id = spec.id;
    s.source = spec.source;
    s.destination = spec.destination;
    s.r_max = spec.r_max.value_or(d.r_max);
    s.sense_cost = spec.sense_cost.value_or(d.sense_cost);
    net.sessions.push_back(s);
  }

  net.finalize();
  for (const auto& s : net.sessions) {
    if (!reachable(net, s.source, s.destination))
      throw TopologyError("session " + std::to_string(s.id) + ": no path from node " +
                          std::to_string(s.source) + " to node " + std::to_string(s.destination));
  }
  return net;
}

TopologyConfig generate_topology(const GeneratorConfig& gen, const NodeDefaults& defaults) {
  if (gen.nodes < 2) throw ValidationError("generator needs at least 2 nodes");
  if (gen.channels < 1) throw ValidationError("generator needs at least 1 channel");
  if (gen.target_links < 2 * (gen.nodes - 1))
    throw ValidationError("generator target_links too small to connect the network");

  Rng rng(gen.seed);
  const int pairs_wanted = gen.target_links / 2;

  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<Position> pos;
    int guard = 0;
    while (static_cast<int>(pos.size()) < gen.nodes && guard < 100000) {
      ++guard;
      Position p{rng.uniform(0.0, gen.area), rng.uniform(0.0, gen.area)};
      bool ok = std::all_of(pos.begin(), pos.end(),
                            [&](const Position& q) { return distance(p, q) >= gen.min_separation; });
      if (ok) pos.push_back(p);
    }
    if (static_cast<int>(pos.size()) < gen.nodes)
      throw ValidationError("generator could not place nodes with the requested separation");

    struct Pair {
      double d;
      int a, b;
    };
    std::vector<Pair> all;
    for (int a = 0; a < gen.nodes; ++a)
      for (int b = a + 1; b < gen.nodes; ++b) all.push_back({distance(pos[a], pos[b]), a, b});
    std::sort(all.begin(), all.end(), [](const Pair& x, const Pair& y) {
      if (x.d != y.d) return x.d < y.d;
      return std::pair(x.a, x.b) < std::pair(y.a, y.b);
    });

    std::vector<int> degree(gen.nodes, 0);
    std::vector<std::pair<int, int>> chosen;
    for (const auto& p : all) {
      if (static_cast<int>(chosen.size()) == pairs_wanted) break;
      if (degree[p.a] < gen.max_degree && degree[p.b] < gen.max_degree) {
        chosen.emplace_back(p.a, p.b);
        ++degree[p.a];
        ++degree[p.b];
      }
    }
    if (static_cast<int>(chosen.size()) < pairs_wanted) continue;

    // Undirected connectivity.
    std::vector<int> parent(gen.nodes);
    for (int i = 0; i < gen.nodes; ++i) parent[i] = i;
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (auto [a, b] : chosen) parent[find(a)] = find(b);
    int roots = 0;
    for (int i = 0; i < gen.nodes; ++i) roots += find(i) == i;
    if (roots != 1) continue;

    TopologyConfig cfg;
    cfg.defaults = defaults;
    cfg.num_channels = gen.channels;
    cfg.generator = gen;
    static constexpr SupplyClass kCycle[] = {SupplyClass::EG, SupplyClass::EH, SupplyClass::ME};
    for (int i = 0; i < gen.nodes; ++i) {
      NodeSpec n;
      n.id = i;
      n.supply = kCycle[i % 3];
      n.pos = pos[i];
      cfg.nodes.push_back(n);
    }
    int link_index = 0;
    for (auto [a, b] : chosen) {
      cfg.links.push_back({a, b, link_index % gen.channels, std::nullopt});
      ++link_index;
      cfg.links.push_back({b, a, link_index % gen.channels, std::nullopt});
      ++link_index;
    }

    // Hop distances for multihop session selection.
    std::vector<std::vector<int>> adj(gen.nodes);
    for (auto [a, b] : chosen) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    auto hops_from = [&](int src) {
      std::vector<int> h(gen.nodes, -1);
      std::deque<int> q{src};
      h[src] = 0;
      while (!q.empty()) {
        int n = q.front();
        q.pop_front();
        for (int m : adj[n])
          if (h[m] < 0) {
            h[m] = h[n] + 1;
            q.push_back(m);
          }
      }
      return h;
    };

    std::vector<bool> is_source(gen.nodes, false);
    int placed = 0;
    int tries = 0;
    while (placed < gen.sessions && tries < 10000) {
      ++tries;
      int src = static_cast<int>(rng.below(gen.nodes));
      int dst = static_cast<int>(rng.below(gen.nodes));
      if (src == dst || is_source[src]) continue;
      if (placed < gen.nodes && hops_from(src)[dst] < 2) continue;
      is_source[src] = true;
      cfg.sessions.push_back({placed, src, dst, std::nullopt, std::nullopt});
      ++placed;
    }
    if (placed < gen.sessions) continue;
    return cfg;
  }
  throw TopologyError("generator failed to produce a connected topology after 1000 attempts");
}

BoundConstants compute_bound_constants(const Network& net, const Params& p) {
  BoundConstants bc;
  const double r_max = net.r_max_overall();
  const double lx = p.l_max * p.x_max;
  bc.sigma = lx + r_max;
  bc.q_max = p.w1 * p.beta_u * p.V + r_max;
  for (const auto& s : net.sessions) bc.q_max_session.push_back(p.w1 * p.beta_u * p.V + s.r_max);

  bc.b_q = 1.5 * lx * lx + r_max * r_max;
  const double nf = static_cast<double>(net.nodes.size()) * static_cast<double>(net.sessions.size());
  bc.b = nf * bc.b_q;
  for (const auto& n : net.nodes) {
    double sensing = 0.0;
    for (SessionId f : n.sessions_sourced) sensing += net.sessions[f].sense_cost * net.sessions[f].r_max;
    const double total = sensing + n.p_max + n.recv_cost * lx;
    bc.p_total_max.push_back(total);
    bc.theta.push_back(p.delta * p.w1 * p.beta_u * p.V + total);
    const double inflow = (harvests(n.supply) ? p.h_max : 0.0) + (buys(n.supply) ? n.g_max : 0.0);
    const double be = 0.5 * inflow * inflow + 0.5 * total * total;
    bc.b_e.push_back(be);
    bc.b += be;
  }
  bc.b_tilde = bc.b + nf * bc.sigma * lx;
  return bc;
}

BoundConstants bound_constants(Network& net, const Params& params) {
  BoundConstants bc = compute_bound_constants(net, params);
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    net.nodes[i].battery_capacity = bc.theta[i];
    net.nodes[i].p_total_max = bc.p_total_max[i];
  }
  return bc;
}

std::vector<Violation> validate_params(const Params& p) {
  std::vector<Violation> v;
  auto positive = [&](const char* name, double value) {
    if (!(value > 0.0)) v.push_back({std::string(name) + " must be > 0", "params", value});
  };
  if (!(p.w1 >= 0.0 && p.w1 <= 1.0)) v.push_back({"w1 must lie in [0,1]", "params", p.w1});
  positive("w2", p.w2);
  positive("V", p.V);
  positive("delta", p.delta);
  if (!(p.h_max >= 0.0)) v.push_back({"h_max must be >= 0", "params", p.h_max});
  positive("x_max", p.x_max);
  if (p.l_max < 1) v.push_back({"l_max must be >= 1", "params", static_cast<double>(p.l_max)});
  positive("beta_u", p.beta_u);
  positive("sc_min", p.sc_min);
  if (!(p.sc_max >= p.sc_min)) v.push_back({"sc_max must be >= sc_min", "params", p.sc_max});
  if (!(p.sg_min >= 0.0)) v.push_back({"sg_min must be >= 0", "params", p.sg_min});
  if (!(p.sg_max >= p.sg_min)) v.push_back({"sg_max must be >= sg_min", "params", p.sg_max});
  if (!(p.initial_energy >= 0.0)) v.push_back({"initial_energy must be >= 0", "params", p.initial_energy});
  if (!(p.initial_backlog >= 0.0))
    v.push_back({"initial_backlog must be >= 0", "params", p.initial_backlog});
  if (p.price.form == PriceForm::Affine && (p.price.a < 0.0 || p.price.b < 0.0))
    v.push_back({"affine price coefficients must be >= 0", "params", std::min(p.price.a, p.price.b)});
  return v;
}

std::vector<Violation> validate_network(const Network& net, const Params& params) {
  std::vector<Violation> v = validate_params(params);
  const int num_nodes = static_cast<int>(net.nodes.size());
  for (const auto& n : net.nodes) {
    const std::string where = node_label(n.id);
    if (!(n.noise > 0.0)) v.push_back({"noise floor must be > 0", where, n.noise});
    if (!(n.p_max > 0.0)) v.push_back({"p_max must be > 0", where, n.p_max});
    if (buys(n.supply) && !(n.g_max >= 0.0)) v.push_back({"g_max must be >= 0", where, n.g_max});
    if (!(n.recv_cost >= 0.0)) v.push_back({"recv_cost must be >= 0", where, n.recv_cost});
  }
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& l : net.links) {
    const std::string where = "link " + std::to_string(l.id) + " (" + std::to_string(l.tx) + "->" +
                              std::to_string(l.rx) + ")";
    if (l.tx < 0 || l.tx >= num_nodes || l.rx < 0 || l.rx >= num_nodes) {
      v.push_back({"link endpoint out of range", where, 0.0});
      continue;
    }
    if (l.tx == l.rx) v.push_back({"self link", where, 0.0});
    if (!seen.insert({l.tx, l.rx}).second) v.push_back({"duplicate link", where, 0.0});
    if (!(l.distance > 0.0)) v.push_back({"distance must be > 0", where, l.distance});
    if (l.channel < 0 || l.channel >= net.num_channels)
      v.push_back({"channel out of range", where, static_cast<double>(l.channel)});
    if (!(l.processing_gain > 1.0)) v.push_back({"processing gain must be > 1", where, l.processing_gain});
  }
  for (const auto& s : net.sessions) {
    const std::string where = "session " + std::to_string(s.id);
    if (s.source == s.destination) v.push_back({"source == destination", where, 0.0});
    if (!(s.r_max > 0.0)) v.push_back({"r_max must be > 0", where, s.r_max});
    if (!(s.sense_cost >= 0.0)) v.push_back({"sense_cost must be >= 0", where, s.sense_cost});
  }
  // Degrees are counted directly so a Network whose adjacency was not rebuilt is still checked.
  std::vector<int> out_deg(num_nodes, 0), in_deg(num_nodes, 0);
  for (const auto& l : net.links) {
    if (l.tx >= 0 && l.tx < num_nodes) ++out_deg[l.tx];
    if (l.rx >= 0 && l.rx < num_nodes) ++in_deg[l.rx];
  }
  for (int n = 0; n < num_nodes; ++n) {
    if (out_deg[n] > params.l_max)
      v.push_back({"out-degree exceeds l_max", node_label(n), static_cast<double>(out_deg[n])});
    if (in_deg[n] > params.l_max)
      v.push_back({"in-degree exceeds l_max", node_label(n), static_cast<double>(in_deg[n])});
  }
  return v;
}

}  // namespace easyo
