#pragma once

#include <cstring>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "easyo/config.hpp"
#include "easyo/model.hpp"
#include "easyo/powalloc.hpp"

namespace testing {

inline easyo::NodeSpec node(int id, easyo::SupplyClass c, double x, double y = 0.0) {
  easyo::NodeSpec n;
  n.id = id;
  n.supply = c;
  n.pos = {x, y};
  return n;
}

inline easyo::LinkSpec link(int tx, int rx, int channel = 0) {
  easyo::LinkSpec l;
  l.tx = tx;
  l.rx = rx;
  l.channel = channel;
  return l;
}

inline easyo::SessionSpec session(int id, int src, int dst) {
  easyo::SessionSpec s;
  s.id = id;
  s.source = src;
  s.destination = dst;
  return s;
}

// 0 -> 1, one session, both nodes mixed-supply, 100 distance units apart.
inline easyo::TopologyConfig two_nodes(easyo::SupplyClass c0 = easyo::SupplyClass::ME,
                                       easyo::SupplyClass c1 = easyo::SupplyClass::ME) {
  easyo::TopologyConfig tc;
  tc.num_channels = 1;
  tc.nodes = {node(0, c0, 0.0), node(1, c1, 100.0)};
  tc.links = {link(0, 1)};
  tc.sessions = {session(0, 0, 1)};
  return tc;
}

// Bidirectional line 0 - 1 - 2 (- 3 ...), sessions given by the caller.
inline easyo::TopologyConfig line(int n, double spacing = 300.0, int channels = 1) {
  easyo::TopologyConfig tc;
  tc.num_channels = channels;
  for (int i = 0; i < n; ++i) {
    static constexpr easyo::SupplyClass kCycle[] = {easyo::SupplyClass::EG, easyo::SupplyClass::EH,
                                                    easyo::SupplyClass::ME};
    tc.nodes.push_back(node(i, kCycle[i % 3], spacing * i));
  }
  int id = 0;
  for (int i = 0; i + 1 < n; ++i) {
    tc.links.push_back(link(i, i + 1, id++ % channels));
    tc.links.push_back(link(i + 1, i, id++ % channels));
  }
  return tc;
}

inline bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

// Field-by-field, bitwise comparison of two networks.
inline bool identical(const easyo::Network& a, const easyo::Network& b) {
  if (a.nodes.size() != b.nodes.size() || a.links.size() != b.links.size() ||
      a.sessions.size() != b.sessions.size() || a.num_channels != b.num_channels)
    return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const auto &x = a.nodes[i], &y = b.nodes[i];
    if (x.id != y.id || x.supply != y.supply || !same_bits(x.pos.x, y.pos.x) || !same_bits(x.pos.y, y.pos.y) ||
        !same_bits(x.noise, y.noise) || !same_bits(x.p_max, y.p_max) || !same_bits(x.g_max, y.g_max) ||
        !same_bits(x.recv_cost, y.recv_cost) || x.sessions_sourced != y.sessions_sourced)
      return false;
  }
  for (std::size_t i = 0; i < a.links.size(); ++i) {
    const auto &x = a.links[i], &y = b.links[i];
    if (x.id != y.id || x.tx != y.tx || x.rx != y.rx || x.channel != y.channel ||
        !same_bits(x.distance, y.distance) || !same_bits(x.processing_gain, y.processing_gain))
      return false;
  }
  for (std::size_t i = 0; i < a.sessions.size(); ++i) {
    const auto &x = a.sessions[i], &y = b.sessions[i];
    if (x.id != y.id || x.source != y.source || x.destination != y.destination ||
        !same_bits(x.r_max, y.r_max) || !same_bits(x.sense_cost, y.sense_cost))
      return false;
  }
  return true;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("easyo_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Random power problem in normalized units: blocks[b] is the number of terms
// owned by block b; every pair of terms in different blocks interferes.
inline easyo::PowerProblem random_power_problem(std::mt19937_64& gen, const std::vector<int>& blocks,
                                                bool interference = true) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(gen)); };
  easyo::PowerProblem prob;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    easyo::PowerProblem::Block block;
    block.node = static_cast<easyo::NodeId>(b);
    block.a = -log_uniform(0.1, 20.0);
    block.p_max = 0.5 + 2.5 * u(gen);
    for (int i = 0; i < blocks[b]; ++i) {
      easyo::PowerProblem::Term t;
      t.link = static_cast<easyo::LinkId>(prob.terms.size());
      t.block = static_cast<int>(b);
      t.weight = log_uniform(0.1, 10.0);
      t.gain = log_uniform(0.5, 5.0);
      t.noise = 1.0;
      t.log_k = std::log(100.0);
      block.terms.push_back(static_cast<int>(prob.terms.size()));
      prob.terms.push_back(t);
    }
    prob.blocks.push_back(block);
  }
  if (interference)
    for (auto& t : prob.terms)
      for (std::size_t j = 0; j < prob.terms.size(); ++j)
        if (prob.terms[j].block != t.block) t.interferers.emplace_back(static_cast<int>(j), log_uniform(0.05, 2.0));
  prob.finalize();
  return prob;
}

}  // namespace testing
