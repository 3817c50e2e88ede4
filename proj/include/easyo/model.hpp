#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace easyo {

using NodeId = int;
using LinkId = int;
using SessionId = int;

enum class SupplyClass { EH, EG, ME };

inline bool harvests(SupplyClass c) { return c == SupplyClass::EH || c == SupplyClass::ME; }
inline bool buys(SupplyClass c) { return c == SupplyClass::EG || c == SupplyClass::ME; }

const char* to_string(SupplyClass c);
std::optional<SupplyClass> parse_supply_class(const std::string& s);

struct Position {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Position& a, const Position& b);

struct Node {
  NodeId id = 0;
  SupplyClass supply = SupplyClass::ME;
  Position pos;
  double noise = 5e-13;       // N0 at this node as a receiver (W)
  double p_max = 2.0;         // transmit power budget
  double g_max = 2.0;         // grid purchase limit per slot (EG/ME)
  double recv_cost = 0.05;    // energy per received data unit
  std::vector<SessionId> sessions_sourced;
  // Written by bound_constants().
  double battery_capacity = 0.0;
  double p_total_max = 0.0;
};

struct Link {
  LinkId id = 0;
  NodeId tx = 0;
  NodeId rx = 0;
  int channel = 0;
  double distance = 1.0;
  double processing_gain = 100.0;
};

enum class Utility { Log1p };

struct Session {
  SessionId id = 0;
  NodeId source = 0;
  NodeId destination = 0;
  double r_max = 3.0;
  double sense_cost = 0.1;
  Utility utility = Utility::Log1p;
};

enum class PriceForm { Flat, Affine };

// Unit electricity price: Flat gives P^G = S^G; Affine gives P^G = a + b*g
// (increasing in g when b > 0, independent of S^G).
struct PriceModel {
  PriceForm form = PriceForm::Flat;
  double a = 0.0;
  double b = 0.0;
};

struct Params {
  double w1 = 0.6;            // utility/cost weight
  double w2 = 0.5;            // cost mapping factor
  double V = 1000.0;
  double delta = 2.0;         // capacity-to-power ratio bound
  double h_max = 2.0;
  double x_max = 2.0;
  int l_max = 6;
  double beta_u = 1.0;
  double sc_min = 0.9;
  double sc_max = 1.1;
  double sg_min = 0.5;
  double sg_max = 1.0;
  std::uint64_t slots = 100000;
  std::uint64_t seed = 1;
  PriceModel price;
  double initial_energy = 0.0;
  double initial_backlog = 0.0;
  bool energy_gate = true;
};

struct Network {
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::vector<Session> sessions;
  int num_channels = 1;

  // Adjacency, rebuilt by finalize().
  std::vector<std::vector<LinkId>> out_links;
  std::vector<std::vector<LinkId>> in_links;

  void finalize();
  std::optional<LinkId> find_link(NodeId tx, NodeId rx) const;
  int max_out_degree() const;
  int max_in_degree() const;
  double r_max_overall() const;
};

struct BoundConstants {
  double sigma = 0.0;
  double q_max = 0.0;                   // with R_max = max_f r_f^max
  std::vector<double> q_max_session;    // w1*beta_U*V + r_f^max
  std::vector<double> theta;            // per node battery capacity
  std::vector<double> p_total_max;      // per node
  double b_q = 0.0;
  std::vector<double> b_e;              // per node
  double b = 0.0;
  double b_tilde = 0.0;
};

struct NodeSpec {
  NodeId id = 0;
  SupplyClass supply = SupplyClass::ME;
  Position pos;
  std::optional<double> noise, p_max, g_max, recv_cost;
};

struct LinkSpec {
  NodeId tx = 0;
  NodeId rx = 0;
  std::optional<int> channel;
  std::optional<double> processing_gain;
};

struct SessionSpec {
  SessionId id = 0;
  NodeId source = 0;
  NodeId destination = 0;
  std::optional<double> r_max, sense_cost;
};

enum class SupplyMix { AsListed, AllEH, AllEG, AllME };

struct GeneratorConfig {
  int nodes = 20;
  int channels = 14;
  int target_links = 78;        // directed links; pairs are added in both directions
  int sessions = 6;
  double area = 6000.0;         // side of the square deployment area
  double min_separation = 250.0;
  int max_degree = 6;
  std::uint64_t seed = 7;
};

// Node defaults applied to entries that do not override them.
struct NodeDefaults {
  double noise = 5e-13;
  double p_max = 2.0;
  double g_max = 2.0;
  double recv_cost = 0.05;
  double r_max = 3.0;
  double sense_cost = 0.1;
  double processing_gain = 100.0;
};

struct TopologyConfig {
  // Explicit mode when nodes is non-empty; generator mode otherwise.
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  std::vector<SessionSpec> sessions;
  int num_channels = 14;
  GeneratorConfig generator;
  NodeDefaults defaults;
  SupplyMix mix = SupplyMix::AsListed;
};

Network build_topology(const TopologyConfig& config);

// Seeded random-geometric generator: returns an explicit config (so it can be
// written out and reloaded bit-identically).
TopologyConfig generate_topology(const GeneratorConfig& gen, const NodeDefaults& defaults = {});

BoundConstants bound_constants(Network& net, const Params& params);
BoundConstants compute_bound_constants(const Network& net, const Params& params);

struct Violation {
  std::string what;
  std::string where;
  double amount = 0.0;
};

std::vector<Violation> validate_network(const Network& net, const Params& params);
std::vector<Violation> validate_params(const Params& params);

}  // namespace easyo
