#include "easyo/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "csv.hpp"
#include "easyo/error.hpp"

namespace easyo {

namespace {

// Thrown by value parsers; the caller adds the key and line.
struct BadValue {
  std::string why;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) throw BadValue{"'" + s + "' is not a finite number"};
  return v;
}

std::int64_t to_int(const std::string& s) {
  std::int64_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw BadValue{"'" + s + "' is not an integer"};
  return v;
}

std::uint64_t to_uint(const std::string& s) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw BadValue{"'" + s + "' is not a non-negative integer"};
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw BadValue{"'" + s + "' is not a boolean"};
}

enum class Bound { Any, Positive, NonNegative, Unit, AboveOne };

double bounded(const std::string& s, Bound b) {
  const double v = to_double(s);
  switch (b) {
    case Bound::Any: break;
    case Bound::Positive:
      if (!(v > 0.0)) throw BadValue{"must be > 0, got " + s};
      break;
    case Bound::NonNegative:
      if (!(v >= 0.0)) throw BadValue{"must be >= 0, got " + s};
      break;
    case Bound::Unit:
      if (!(v >= 0.0 && v <= 1.0)) throw BadValue{"must lie in [0, 1], got " + s};
      break;
    case Bound::AboveOne:
      if (!(v > 1.0)) throw BadValue{"must be > 1, got " + s};
      break;
  }
  return v;
}

int int_at_least(const std::string& s, std::int64_t lo) {
  const auto v = to_int(s);
  if (v < lo || v > 1000000000) throw BadValue{"must be an integer >= " + std::to_string(lo) + ", got " + s};
  return static_cast<int>(v);
}

struct Key {
  std::function<void(Scenario&, const std::string&)> set;
  std::function<std::string(const Scenario&)> get;
};

const char* mix_name(SupplyMix m) {
  switch (m) {
    case SupplyMix::AsListed: return "as_listed";
    case SupplyMix::AllEH: return "eh";
    case SupplyMix::AllEG: return "eg";
    case SupplyMix::AllME: return "me";
  }
  return "as_listed";
}

// Insertion-ordered table of [params] keys.
const std::vector<std::pair<std::string, Key>>& keys() {
  static const std::vector<std::pair<std::string, Key>> table = [] {
    std::vector<std::pair<std::string, Key>> t;
    auto real = [&](const std::string& name, Bound b, auto field) {
      t.push_back({name, Key{[=](Scenario& s, const std::string& v) { field(s) = bounded(v, b); },
                             [=](const Scenario& s) { return csv::num(field(const_cast<Scenario&>(s))); }}});
    };
    auto integer = [&](const std::string& name, std::int64_t lo, auto field) {
      t.push_back({name, Key{[=](Scenario& s, const std::string& v) { field(s) = int_at_least(v, lo); },
                             [=](const Scenario& s) { return std::to_string(field(const_cast<Scenario&>(s))); }}});
    };
    auto count = [&](const std::string& name, auto field) {
      t.push_back({name, Key{[=](Scenario& s, const std::string& v) { field(s) = to_uint(v); },
                             [=](const Scenario& s) { return std::to_string(field(const_cast<Scenario&>(s))); }}});
    };

    real("V", Bound::Positive, [](Scenario& s) -> double& { return s.params.V; });
    real("w1", Bound::Unit, [](Scenario& s) -> double& { return s.params.w1; });
    real("w2", Bound::Positive, [](Scenario& s) -> double& { return s.params.w2; });
    real("delta", Bound::Positive, [](Scenario& s) -> double& { return s.params.delta; });
    real("h_max", Bound::NonNegative, [](Scenario& s) -> double& { return s.params.h_max; });
    real("x_max", Bound::Positive, [](Scenario& s) -> double& { return s.params.x_max; });
    integer("l_max", 1, [](Scenario& s) -> int& { return s.params.l_max; });
    real("beta_u", Bound::Positive, [](Scenario& s) -> double& { return s.params.beta_u; });
    real("sc_min", Bound::Positive, [](Scenario& s) -> double& { return s.params.sc_min; });
    real("sc_max", Bound::Positive, [](Scenario& s) -> double& { return s.params.sc_max; });
    real("sg_min", Bound::NonNegative, [](Scenario& s) -> double& { return s.params.sg_min; });
    real("sg_max", Bound::NonNegative, [](Scenario& s) -> double& { return s.params.sg_max; });
    count("slots", [](Scenario& s) -> std::uint64_t& { return s.params.slots; });
    count("seed", [](Scenario& s) -> std::uint64_t& { return s.params.seed; });
    t.push_back({"price_model",
                 Key{[](Scenario& s, const std::string& v) {
                       if (v == "flat")
                         s.params.price.form = PriceForm::Flat;
                       else if (v == "affine")
                         s.params.price.form = PriceForm::Affine;
                       else
                         throw BadValue{"expected flat or affine, got '" + v + "'"};
                     },
                     [](const Scenario& s) {
                       return std::string(s.params.price.form == PriceForm::Flat ? "flat" : "affine");
                     }}});
    real("price_a", Bound::NonNegative, [](Scenario& s) -> double& { return s.params.price.a; });
    real("price_b", Bound::NonNegative, [](Scenario& s) -> double& { return s.params.price.b; });
    real("initial_energy", Bound::NonNegative, [](Scenario& s) -> double& { return s.params.initial_energy; });
    real("initial_backlog", Bound::NonNegative, [](Scenario& s) -> double& { return s.params.initial_backlog; });
    t.push_back({"energy_gate",
                 Key{[](Scenario& s, const std::string& v) { s.params.energy_gate = to_bool(v); },
                     [](const Scenario& s) { return std::string(s.params.energy_gate ? "true" : "false"); }}});

    // Generator.
    count("topology_seed", [](Scenario& s) -> std::uint64_t& { return s.topology.generator.seed; });
    integer("num_nodes", 2, [](Scenario& s) -> int& { return s.topology.generator.nodes; });
    integer("num_links", 2, [](Scenario& s) -> int& { return s.topology.generator.target_links; });
    integer("num_sessions", 1, [](Scenario& s) -> int& { return s.topology.generator.sessions; });
    real("area", Bound::Positive, [](Scenario& s) -> double& { return s.topology.generator.area; });
    real("min_separation", Bound::NonNegative,
         [](Scenario& s) -> double& { return s.topology.generator.min_separation; });
    integer("max_degree", 1, [](Scenario& s) -> int& { return s.topology.generator.max_degree; });
    t.push_back({"channels", Key{[](Scenario& s, const std::string& v) {
                                   const int c = int_at_least(v, 1);
                                   s.topology.generator.channels = c;
                                   s.topology.num_channels = c;
                                 },
                                 [](const Scenario& s) { return std::to_string(s.topology.num_channels); }}});
    t.push_back({"supply_mix",
                 Key{[](Scenario& s, const std::string& v) {
                       if (v == "as_listed")
                         s.topology.mix = SupplyMix::AsListed;
                       else if (v == "eh")
                         s.topology.mix = SupplyMix::AllEH;
                       else if (v == "eg")
                         s.topology.mix = SupplyMix::AllEG;
                       else if (v == "me")
                         s.topology.mix = SupplyMix::AllME;
                       else
                         throw BadValue{"expected as_listed, eh, eg or me, got '" + v + "'"};
                     },
                     [](const Scenario& s) { return std::string(mix_name(s.topology.mix)); }}});

    // Defaults for entries without their own override.
    real("noise", Bound::Positive, [](Scenario& s) -> double& { return s.topology.defaults.noise; });
    real("p_max", Bound::Positive, [](Scenario& s) -> double& { return s.topology.defaults.p_max; });
    real("g_max", Bound::NonNegative, [](Scenario& s) -> double& { return s.topology.defaults.g_max; });
    real("recv_cost", Bound::NonNegative, [](Scenario& s) -> double& { return s.topology.defaults.recv_cost; });
    real("r_max", Bound::Positive, [](Scenario& s) -> double& { return s.topology.defaults.r_max; });
    real("sense_cost", Bound::NonNegative, [](Scenario& s) -> double& { return s.topology.defaults.sense_cost; });
    real("K", Bound::AboveOne, [](Scenario& s) -> double& { return s.topology.defaults.processing_gain; });
    return t;
  }();
  return table;
}

const Key* find_key(const std::string& name) {
  for (const auto& [k, v] : keys())
    if (k == name) return &v;
  return nullptr;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

class Parser {
 public:
  Parser(std::string origin, Scenario& s) : origin_(std::move(origin)), s_(s) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin_ + ":" + std::to_string(line_) + ": " + msg);
  }

  void run(std::string_view text) {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
      ++line_;
      if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
      const std::string line = trim(raw);
      if (!line.empty()) handle(line);
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    finish();
  }

 private:
  void handle(const std::string& line) {
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header '" + line + "'");
      section_ = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section_ != "params" && section_ != "nodes" && section_ != "links" && section_ != "sessions")
        fail("unknown section [" + section_ + "]");
      if (section_ == "nodes") explicit_ = true;
      return;
    }
    if (section_.empty()) fail("entry outside of a section");
    if (section_ == "params") return param(line);
    const auto tokens = split_ws(line);
    if (section_ == "nodes") return node(tokens);
    if (section_ == "links") return link(tokens);
    return session(tokens);
  }

  void param(const std::string& line) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value, got '" + line + "'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const Key* k = find_key(key);
    if (!k) fail("unknown key '" + key + "'");
    if (value.empty()) fail("key '" + key + "' has no value");
    if (!param_lines_.emplace(key, line_).second)
      fail("key '" + key + "' repeated (first set on line " + std::to_string(param_lines_[key]) + ")");
    try {
      k->set(s_, value);
    } catch (const BadValue& e) {
      fail("key '" + key + "': " + e.why);
    }
  }

  template <class F>
  void options(const std::vector<std::string>& tokens, std::size_t first, F&& apply) {
    std::map<std::string, bool> seen;
    for (std::size_t i = first; i < tokens.size(); ++i) {
      const auto eq = tokens[i].find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == tokens[i].size())
        fail("expected key=value, got '" + tokens[i] + "'");
      const std::string key = tokens[i].substr(0, eq);
      const std::string value = tokens[i].substr(eq + 1);
      if (seen[key]) fail("key '" + key + "' repeated");
      seen[key] = true;
      try {
        if (!apply(key, value)) fail("unknown key '" + key + "' in [" + section_ + "]");
      } catch (const BadValue& e) {
        fail("key '" + key + "': " + e.why);
      }
    }
  }

  template <class T>
  T field(const std::string& token, const char* what, T (*conv)(const std::string&)) {
    try {
      return conv(token);
    } catch (const BadValue& e) {
      fail(std::string(what) + ": " + e.why);
    }
  }

  static std::int64_t any_int(const std::string& s) { return to_int(s); }
  static double any_double(const std::string& s) { return to_double(s); }

  void node(const std::vector<std::string>& t) {
    if (t.size() < 4) fail("node entry needs: id class x y");
    NodeSpec n;
    n.id = static_cast<NodeId>(field(t[0], "node id", any_int));
    const auto cls = parse_supply_class(t[1]);
    if (!cls) fail("unknown supply class '" + t[1] + "' (expected EH, EG or ME)");
    n.supply = *cls;
    n.pos = {field(t[2], "x", any_double), field(t[3], "y", any_double)};
    options(t, 4, [&](const std::string& k, const std::string& v) {
      if (k == "noise") n.noise = bounded(v, Bound::Positive);
      else if (k == "p_max") n.p_max = bounded(v, Bound::Positive);
      else if (k == "g_max") n.g_max = bounded(v, Bound::NonNegative);
      else if (k == "recv_cost") n.recv_cost = bounded(v, Bound::NonNegative);
      else return false;
      return true;
    });
    nodes_.push_back(n);
  }

  void link(const std::vector<std::string>& t) {
    if (t.size() < 2) fail("link entry needs: tx rx");
    LinkSpec l;
    l.tx = static_cast<NodeId>(field(t[0], "tx", any_int));
    l.rx = static_cast<NodeId>(field(t[1], "rx", any_int));
    if (l.tx == l.rx) fail("link " + t[0] + "->" + t[1] + " connects a node to itself");
    options(t, 2, [&](const std::string& k, const std::string& v) {
      if (k == "channel") l.channel = int_at_least(v, 0);
      else if (k == "K") l.processing_gain = bounded(v, Bound::AboveOne);
      else return false;
      return true;
    });
    link_lines_.push_back(line_);
    links_.push_back(l);
  }

  void session(const std::vector<std::string>& t) {
    if (t.size() < 3) fail("session entry needs: id source destination");
    SessionSpec f;
    f.id = static_cast<SessionId>(field(t[0], "session id", any_int));
    f.source = static_cast<NodeId>(field(t[1], "source", any_int));
    f.destination = static_cast<NodeId>(field(t[2], "destination", any_int));
    if (f.source == f.destination) fail("session " + t[0] + " has source == destination");
    options(t, 3, [&](const std::string& k, const std::string& v) {
      if (k == "r_max") f.r_max = bounded(v, Bound::Positive);
      else if (k == "sense_cost") f.sense_cost = bounded(v, Bound::NonNegative);
      else return false;
      return true;
    });
    sessions_.push_back(f);
  }

  void finish() {
    if (explicit_) {
      if (nodes_.empty()) {
        line_ = 0;
        fail("[nodes] block is empty");
      }
      for (std::size_t i = 0; i < links_.size(); ++i) {
        if (links_[i].channel && *links_[i].channel >= s_.topology.num_channels) {
          line_ = link_lines_[i];
          fail("key 'channel': " + std::to_string(*links_[i].channel) + " is not below channels = " +
               std::to_string(s_.topology.num_channels));
        }
      }
      s_.topology.nodes = std::move(nodes_);
      s_.topology.links = std::move(links_);
      s_.topology.sessions = std::move(sessions_);
    } else if (!links_.empty() || !sessions_.empty()) {
      line_ = 0;
      fail("[links]/[sessions] given without a [nodes] block");
    }
    for (const auto& v : validate_params(s_.params)) {
      // Messages start with the offending key.
      const std::string key = v.what.substr(0, v.what.find(' '));
      const auto it = param_lines_.find(key);
      line_ = it == param_lines_.end() ? 0 : it->second;
      fail("key '" + key + "': " + v.what);
    }
  }

  std::string origin_;
  Scenario& s_;
  int line_ = 0;
  std::string section_;
  bool explicit_ = false;
  std::map<std::string, int> param_lines_;
  std::vector<NodeSpec> nodes_;
  std::vector<LinkSpec> links_;
  std::vector<int> link_lines_;
  std::vector<SessionSpec> sessions_;
};

}  // namespace

Scenario default_scenario() { return Scenario{}; }

Scenario parse_config(std::string_view text, const std::string& origin) {
  Scenario s = default_scenario();
  Parser(origin, s).run(text);
  return s;
}

Scenario load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

void set_param(Scenario& scenario, const std::string& key, const std::string& value) {
  const Key* k = find_key(key);
  if (!k) throw ConfigError("unknown key '" + key + "'");
  Scenario trial = scenario;
  try {
    k->set(trial, trim(value));
  } catch (const BadValue& e) {
    throw ConfigError("key '" + key + "': " + e.why);
  }
  if (const auto bad = validate_params(trial.params); !bad.empty())
    throw ConfigError("key '" + key + "': " + bad.front().what);
  scenario = std::move(trial);
}

std::string format_config(const Scenario& s) {
  std::ostringstream out;
  out << "[params]\n";
  for (const auto& [name, key] : keys()) out << name << " = " << key.get(s) << '\n';
  if (s.topology.nodes.empty()) return out.str();

  out << "\n[nodes]\n# id class x y\n";
  for (const auto& n : s.topology.nodes) {
    out << n.id << ' ' << to_string(n.supply) << ' ' << csv::num(n.pos.x) << ' ' << csv::num(n.pos.y);
    if (n.noise) out << " noise=" << csv::num(*n.noise);
    if (n.p_max) out << " p_max=" << csv::num(*n.p_max);
    if (n.g_max) out << " g_max=" << csv::num(*n.g_max);
    if (n.recv_cost) out << " recv_cost=" << csv::num(*n.recv_cost);
    out << '\n';
  }
  out << "\n[links]\n# tx rx\n";
  for (const auto& l : s.topology.links) {
    out << l.tx << ' ' << l.rx;
    if (l.channel) out << " channel=" << *l.channel;
    if (l.processing_gain) out << " K=" << csv::num(*l.processing_gain);
    out << '\n';
  }
  out << "\n[sessions]\n# id source destination\n";
  for (const auto& f : s.topology.sessions) {
    out << f.id << ' ' << f.source << ' ' << f.destination;
    if (f.r_max) out << " r_max=" << csv::num(*f.r_max);
    if (f.sense_cost) out << " sense_cost=" << csv::num(*f.sense_cost);
    out << '\n';
  }
  return out.str();
}

void save_config(const Scenario& scenario, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << format_config(scenario);
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace easyo
