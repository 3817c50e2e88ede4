#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "easyo/model.hpp"

namespace easyo {

// Everything a run needs besides the run options: topology description and
// algorithm/environment parameters.
struct Scenario {
  TopologyConfig topology;
  Params params;
};

// The 20-node generated scenario with all parameters at their defaults.
Scenario default_scenario();

// Structured text:
//
//   # comment
//   [params]
//   V = 1000
//   [nodes]
//   <id> <EH|EG|ME> <x> <y> [noise=..] [p_max=..] [g_max=..] [recv_cost=..]
//   [links]
//   <tx> <rx> [channel=..] [K=..]
//   [sessions]
//   <id> <source> <destination> [r_max=..] [sense_cost=..]
//
// A [nodes] block switches to explicit mode; otherwise the generator keys in
// [params] describe the topology. Errors name the key and line.
Scenario parse_config(std::string_view text, const std::string& origin = "<config>");
Scenario load_config(const std::filesystem::path& path);

// Applies one [params] key with the same validation as the file parser.
void set_param(Scenario& scenario, const std::string& key, const std::string& value);

// Writes every [params] key and, in explicit mode, the topology blocks. Doubles
// use the shortest round-trip form so reloading yields an identical Network.
std::string format_config(const Scenario& scenario);
void save_config(const Scenario& scenario, const std::filesystem::path& path);

}  // namespace easyo
