#include "m2msim/cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include <m2msim/error.hpp>

#include "profiles.hpp"

namespace m2msim::cli {

namespace {

template <class T>
const char* type_name() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else if constexpr (std::is_floating_point_v<T>) return "a number";
  else return "a string";
}

// A mapping node that remembers which keys were read, so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.IsMap()) throw ConfigError(where() + ": expected a mapping");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

  template <class T>
  T get(const std::string& key) {
    seen_.insert(key);
    const YAML::Node v = node_[key];
    if (!v) throw ConfigError(at(key) + ": missing");
    if (!v.IsScalar()) throw ConfigError(at(key) + ": expected " + type_name<T>());
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(at(key) + ": cannot read '" + v.Scalar() + "' as " + type_name<T>());
    }
  }

  template <class T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : (seen_.insert(key), fallback);
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) throw ConfigError(at(key) + ": missing");
    return Section(node_[key], at(key));
  }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }

  void finish() const {
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError(at(key) + ": unknown key");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class E, class F>
E parse_choice(Section& s, const std::string& key, F parse) {
  const auto text = s.get<std::string>(key);
  try {
    return parse(text);
  } catch (const ConfigError& e) {
    throw ConfigError(s.at(key) + ": " + e.what());
  }
}

SensingLaw parse_law(const std::string& s) {
  if (s == "symmetric") return SensingLaw::symmetric;
  if (s == "busy_as_idle") return SensingLaw::busy_as_idle;
  throw ConfigError("unknown law '" + s + "' (valid: symmetric, busy_as_idle)");
}

SolverMode parse_mode(const std::string& s) {
  if (s == "exact") return SolverMode::exact;
  if (s == "grid") return SolverMode::grid;
  throw ConfigError("unknown solver mode '" + s + "' (valid: exact, grid)");
}

std::vector<std::string> split_path(const std::string& path) {
  std::string norm;
  for (char ch : path) {
    if (ch == '[') norm += '.';
    else if (ch != ']') norm += ch;
  }
  std::vector<std::string> parts;
  std::stringstream ss(norm);
  for (std::string p; std::getline(ss, p, '.');)
    if (!p.empty()) parts.push_back(p);
  return parts;
}

bool is_index(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
}

void apply_override(YAML::Node& root, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + spec + "'");
  const std::string key = spec.substr(0, eq);
  const auto parts = split_path(key);
  if (parts.empty()) throw ConfigError("--set: empty key in '" + spec + "'");
  YAML::Node value;
  try {
    value = YAML::Load(spec.substr(eq + 1));
  } catch (const YAML::Exception&) {
    throw ConfigError(key + ": cannot parse override value");
  }
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node cur = chain.back();
    YAML::Node next;
    if (cur.IsSequence() && is_index(parts[i])) {
      const auto idx = std::stoul(parts[i]);
      if (idx >= cur.size()) throw ConfigError(key + ": index " + parts[i] + " out of range");
      next = cur[idx];
    } else if (cur.IsMap() && cur[parts[i]]) {
      next = cur[parts[i]];
    } else {
      throw ConfigError(key + ": unknown key");
    }
    chain.push_back(next);
  }
  YAML::Node parent = chain.back();
  if (parent.IsSequence() && is_index(parts.back())) {
    const auto idx = std::stoul(parts.back());
    if (idx >= parent.size()) throw ConfigError(key + ": index out of range");
    parent[idx] = value;
  } else if (parent.IsMap()) {
    parent[parts.back()] = value;  // unknown leaf keys are caught by the strict reader
  } else {
    throw ConfigError(key + ": unknown key");
  }
}

ScenarioConfig read(const YAML::Node& root) {
  Section top(root, "");
  ScenarioConfig c;
  c.seed = top.get<std::uint64_t>("seed");
  c.scheme = parse_choice<Scheme>(top, "scheme", [](const std::string& s) { return parse_scheme(s); });
  c.contention = parse_choice<Contention>(top, "contention", [](const std::string& s) { return parse_contention(s); });
  c.controller_enabled = top.get<bool>("controller_enabled");
  c.record_slots = top.get_or<bool>("record_slots", false);
  c.discount = top.get<double>("discount");

  auto t = top.child("topology");
  c.topology = {t.get<int>("total_rbs"), t.get<int>("access_rbs"), t.get<int>("data_rbs"), t.get<int>("devices")};
  t.finish();

  auto tb = top.child("timebase");
  c.timebase = {tb.get<double>("slot_duration"), tb.get<int>("slots_per_period"), tb.get<int>("periods")};
  tb.finish();

  auto r = top.child("radio");
  c.radio.bandwidth_hz = r.get<double>("bandwidth_hz");
  if (r.has("tx_power_dbm") == r.has("tx_power_w"))
    throw ConfigError("radio: give exactly one of tx_power_dbm, tx_power_w");
  c.radio.tx_power_w = r.has("tx_power_w") ? r.get<double>("tx_power_w") : dbm_to_watt(r.get<double>("tx_power_dbm"));
  c.radio.noise_power_w = r.get<double>("noise_power_w");
  r.finish();

  auto m = top.child("rb_markov");
  const double pii = m.get<double>("p_idle_idle"), pib = m.get<double>("p_idle_busy");
  const double pbi = m.get<double>("p_busy_idle"), pbb = m.get<double>("p_busy_busy");
  m.finish();
  c.rb_markov = RbMarkov(pii, pib, pbi, pbb);

  auto o = top.child("observation");
  c.observation.epsilon = o.get<double>("epsilon");
  c.observation.phi = o.get<double>("phi");
  c.observation.law = parse_choice<SensingLaw>(o, "law", parse_law);
  c.observation.broadcast_sensing = o.get<bool>("broadcast_sensing");
  c.observation.tie_phi_to_epsilon = o.get<bool>("tie_phi_to_epsilon");
  o.finish();

  auto k = top.child("controller");
  c.controller = {k.get<double>("omega"), k.get<double>("mu"), k.get<double>("rate_unit_bps")};
  k.finish();

  auto s = top.child("solver");
  c.solver.mode = parse_choice<SolverMode>(s, "mode", parse_mode);
  c.solver.grid_resolution = s.get<int>("grid_resolution");
  c.solver.max_exact_rbs = s.get<int>("max_exact_rbs");
  c.solver.max_alpha_vectors = s.get<std::size_t>("max_alpha_vectors");
  c.solver.max_observation_branches = s.get<std::size_t>("max_observation_branches");
  s.finish();

  auto p = top.child("planner");
  c.slot_csi = p.get<bool>("slot_csi");
  p.finish();

  const YAML::Node list = top.raw("slices");
  if (!list || !list.IsSequence()) throw ConfigError("slices: expected a list");
  for (std::size_t i = 0; i < list.size(); ++i) {
    Section e(list[i], "slices[" + std::to_string(i) + "]");
    VirtualNetwork v;
    v.id = e.get<int>("id");
    v.devices = e.get<int>("devices");
    v.access_rbs = e.get<int>("access_rbs");
    v.weight = e.get<double>("weight");
    v.bandwidth_hz = e.get_or<double>("bandwidth_hz", c.radio.bandwidth_hz);
    e.finish();
    c.slices.push_back(v);
  }
  top.finish();
  c.validate();
  return c;
}

bool sets(std::span<const std::string> overrides, const std::string& key) {
  for (const auto& o : overrides)
    if (o.rfind(key + "=", 0) == 0) return true;
  return false;
}

}  // namespace

std::string_view builtin_profile(std::string_view name) {
  if (name == "paper-default") return paper_default_yaml;
  return {};
}

ScenarioConfig parse_config(const std::string& yaml_text, std::span<const std::string> overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: YAML syntax error: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("config: expected a mapping at the top level");
  for (const auto& o : overrides) apply_override(root, o);
  // A lone epsilon override carries phi along while the two are tied.
  if (sets(overrides, "observation.epsilon") && !sets(overrides, "observation.phi") && root["observation"] &&
      root["observation"]["tie_phi_to_epsilon"] && root["observation"]["tie_phi_to_epsilon"].as<std::string>() == "true")
    root["observation"]["phi"] = root["observation"]["epsilon"];
  return read(root);
}

ScenarioConfig load_config(const std::string& source, std::span<const std::string> overrides) {
  const auto profile = builtin_profile(source);
  if (!profile.empty()) return parse_config(std::string(profile), overrides);
  std::ifstream in(source);
  if (!in) throw ConfigError("config: cannot read '" + source + "' (and it is not a built-in profile)");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string serialize_config(const ScenarioConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  auto law = c.observation.law == SensingLaw::symmetric ? "symmetric" : "busy_as_idle";
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "scheme" << YAML::Value << to_string(c.scheme);
  out << YAML::Key << "contention" << YAML::Value << to_string(c.contention);
  out << YAML::Key << "controller_enabled" << YAML::Value << c.controller_enabled;
  out << YAML::Key << "record_slots" << YAML::Value << c.record_slots;
  out << YAML::Key << "discount" << YAML::Value << c.discount;
  out << YAML::Key << "topology" << YAML::Value << YAML::BeginMap << YAML::Key << "total_rbs" << YAML::Value
      << c.topology.total_rbs << YAML::Key << "access_rbs" << YAML::Value << c.topology.access_rbs << YAML::Key
      << "data_rbs" << YAML::Value << c.topology.data_rbs << YAML::Key << "devices" << YAML::Value
      << c.topology.devices << YAML::EndMap;
  out << YAML::Key << "timebase" << YAML::Value << YAML::BeginMap << YAML::Key << "slot_duration" << YAML::Value
      << c.timebase.slot_duration << YAML::Key << "slots_per_period" << YAML::Value << c.timebase.slots_per_period
      << YAML::Key << "periods" << YAML::Value << c.timebase.periods << YAML::EndMap;
  out << YAML::Key << "radio" << YAML::Value << YAML::BeginMap << YAML::Key << "bandwidth_hz" << YAML::Value
      << c.radio.bandwidth_hz << YAML::Key << "tx_power_w" << YAML::Value << c.radio.tx_power_w << YAML::Key
      << "noise_power_w" << YAML::Value << c.radio.noise_power_w << YAML::EndMap;
  out << YAML::Key << "rb_markov" << YAML::Value << YAML::BeginMap << YAML::Key << "p_idle_idle" << YAML::Value
      << c.rb_markov.p_idle_idle() << YAML::Key << "p_idle_busy" << YAML::Value << c.rb_markov.p_idle_busy()
      << YAML::Key << "p_busy_idle" << YAML::Value << c.rb_markov.p_busy_idle() << YAML::Key << "p_busy_busy"
      << YAML::Value << c.rb_markov.p_busy_busy() << YAML::EndMap;
  out << YAML::Key << "observation" << YAML::Value << YAML::BeginMap << YAML::Key << "epsilon" << YAML::Value
      << c.observation.epsilon << YAML::Key << "phi" << YAML::Value << c.observation.phi << YAML::Key << "law"
      << YAML::Value << law << YAML::Key << "broadcast_sensing" << YAML::Value << c.observation.broadcast_sensing
      << YAML::Key << "tie_phi_to_epsilon" << YAML::Value << c.observation.tie_phi_to_epsilon << YAML::EndMap;
  out << YAML::Key << "controller" << YAML::Value << YAML::BeginMap << YAML::Key << "omega" << YAML::Value
      << c.controller.omega << YAML::Key << "mu" << YAML::Value << c.controller.mu << YAML::Key << "rate_unit_bps"
      << YAML::Value << c.controller.rate_unit_bps << YAML::EndMap;
  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap << YAML::Key << "mode" << YAML::Value
      << (c.solver.mode == SolverMode::exact ? "exact" : "grid") << YAML::Key << "grid_resolution" << YAML::Value
      << c.solver.grid_resolution << YAML::Key << "max_exact_rbs" << YAML::Value << c.solver.max_exact_rbs
      << YAML::Key << "max_alpha_vectors" << YAML::Value << c.solver.max_alpha_vectors << YAML::Key
      << "max_observation_branches" << YAML::Value << c.solver.max_observation_branches << YAML::EndMap;
  out << YAML::Key << "planner" << YAML::Value << YAML::BeginMap << YAML::Key << "slot_csi" << YAML::Value
      << c.slot_csi << YAML::EndMap;
  out << YAML::Key << "slices" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : c.slices)
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << s.id << YAML::Key << "devices"
        << YAML::Value << s.devices << YAML::Key << "access_rbs" << YAML::Value << s.access_rbs << YAML::Key
        << "weight" << YAML::Value << s.weight << YAML::Key << "bandwidth_hz" << YAML::Value << s.bandwidth_hz
        << YAML::EndMap;
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace m2msim::cli
