#include "memheat/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "memheat/errors.hpp"

namespace memheat {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

const json& require(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError("missing required key '" + (where.empty() ? key : where + "." + key) + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& name) {
  if (!v.is_number()) throw ConfigError(name + " must be a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& where, const std::string& key, double fallback) {
  return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

std::vector<double> number_list(const json& v, const std::string& name) {
  if (!v.is_array()) throw ConfigError(name + " must be a list");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(number(e, name));
  return out;
}

CoefficientSpec parse_coefficient(const json& obj, const std::string& where) {
  check_keys(obj, where, {"family", "amplitude", "gamma", "lambda", "log_depth", "log_power", "table"});
  const json& fam = require(obj, where, "family");
  if (!fam.is_string()) throw ConfigError(where + ".family must be a string");
  CoefficientSpec s;
  try {
    s.family = family_from_string(fam.get<std::string>());
  } catch (const ConfigError& e) {
    throw ConfigError(where + ".family: " + e.what());
  }
  s.amplitude = number_or(obj, where, "amplitude", s.family == Family::Tabulated ? 0.0 : 1.0);
  s.gamma = number_or(obj, where, "gamma", 0.0);
  s.lambda = number_or(obj, where, "lambda", 0.0);
  const double depth = number_or(obj, where, "log_depth", 0.0);
  if (depth != std::floor(depth)) throw ConfigError(where + ".log_depth must be an integer");
  s.log_depth = static_cast<int>(depth);
  s.log_power = number_or(obj, where, "log_power", 0.0);
  if (obj.contains("table")) {
    const json& tab = obj.at("table");
    if (!tab.is_array()) throw ConfigError(where + ".table must be a list of [t, value] pairs");
    for (const auto& row : tab) {
      if (!row.is_array() || row.size() != 2) throw ConfigError(where + ".table must be a list of [t, value] pairs");
      s.table.emplace_back(number(row[0], where + ".table"), number(row[1], where + ".table"));
    }
  }
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return s;
}

json coefficient_json(const CoefficientSpec& s) {
  json j;
  j["family"] = to_string(s.family);
  j["amplitude"] = s.amplitude;
  j["gamma"] = s.gamma;
  j["lambda"] = s.lambda;
  j["log_depth"] = s.log_depth;
  j["log_power"] = s.log_power;
  if (!s.table.empty()) {
    json tab = json::array();
    for (const auto& [t, v] : s.table) tab.push_back({t, v});
    j["table"] = tab;
  }
  return j;
}

InitialSpec parse_initial(const json& obj) {
  check_keys(obj, "initial", {"family", "value", "nodes"});
  const json& fam = require(obj, "initial", "family");
  if (!fam.is_string()) throw ConfigError("initial.family must be a string");
  InitialSpec u0;
  u0.family = initial_family_from_string(fam.get<std::string>());
  if (u0.family == InitialFamily::Tabulated) {
    u0.nodes = number_list(require(obj, "initial", "nodes"), "initial.nodes");
  } else {
    u0.value = number(require(obj, "initial", "value"), "initial.value");
  }
  return u0;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  check_keys(doc, "", {"domain", "exponents", "c", "k", "initial", "solver", "output", "k_lower", "sweep", "oracle"});

  RunConfig cfg;
  Scenario& s = cfg.scenario;
  if (doc.contains("domain")) {
    const json& d = doc.at("domain");
    check_keys(d, "domain", {"length", "nodes"});
    s.length = number_or(d, "domain", "length", s.length);
    const double n = number_or(d, "domain", "nodes", s.controls.nodes);
    if (n != std::floor(n)) throw ConfigError("domain.nodes must be an integer");
    s.controls.nodes = static_cast<int>(n);
  }
  const json& ex = require(doc, "", "exponents");
  check_keys(ex, "exponents", {"p", "q"});
  s.p = number(require(ex, "exponents", "p"), "exponents.p");
  s.q = number(require(ex, "exponents", "q"), "exponents.q");
  s.c = parse_coefficient(require(doc, "", "c"), "c");
  s.k = parse_coefficient(require(doc, "", "k"), "k");
  s.u0 = parse_initial(require(doc, "", "initial"));

  if (doc.contains("solver")) {
    const json& sv = doc.at("solver");
    check_keys(sv, "solver", {"t_max", "blowup_threshold", "theta", "dt_max", "dt_init", "max_steps"});
    auto& c = s.controls;
    c.t_max = number_or(sv, "solver", "t_max", c.t_max);
    c.blowup_threshold = number_or(sv, "solver", "blowup_threshold", c.blowup_threshold);
    c.theta = number_or(sv, "solver", "theta", c.theta);
    c.dt_max = number_or(sv, "solver", "dt_max", c.dt_max);
    c.dt_init = number_or(sv, "solver", "dt_init", c.dt_init);
    const double steps = number_or(sv, "solver", "max_steps", static_cast<double>(c.max_steps));
    if (steps != std::floor(steps)) throw ConfigError("solver.max_steps must be an integer");
    c.max_steps = static_cast<long>(steps);
  }
  if (doc.contains("output")) {
    const json& out = doc.at("output");
    check_keys(out, "output", {"dir", "snapshot_every"});
    if (out.contains("dir")) {
      if (!out.at("dir").is_string()) throw ConfigError("output.dir must be a string");
      cfg.output_dir = out.at("dir").get<std::string>();
    }
    s.controls.snapshot_every = number_or(out, "output", "snapshot_every", 0.0);
  }
  if (doc.contains("k_lower")) cfg.k_lower = parse_coefficient(doc.at("k_lower"), "k_lower");
  if (doc.contains("sweep")) {
    const json& sw = doc.at("sweep");
    check_keys(sw, "sweep", {"p", "q", "c", "k", "initial_value"});
    if (sw.contains("p")) cfg.sweep.p = number_list(sw.at("p"), "sweep.p");
    if (sw.contains("q")) cfg.sweep.q = number_list(sw.at("q"), "sweep.q");
    if (sw.contains("initial_value")) cfg.sweep.initial_value = number_list(sw.at("initial_value"), "sweep.initial_value");
    for (const char* key : {"c", "k"}) {
      if (!sw.contains(key)) continue;
      const json& list = sw.at(key);
      if (!list.is_array()) throw ConfigError(std::string("sweep.") + key + " must be a list");
      auto& dst = key[0] == 'c' ? cfg.sweep.c : cfg.sweep.k;
      for (std::size_t i = 0; i < list.size(); ++i) {
        dst.push_back(parse_coefficient(list[i], std::string("sweep.") + key + "[" + std::to_string(i) + "]"));
      }
    }
  }
  if (doc.contains("oracle")) {
    const json& o = doc.at("oracle");
    check_keys(o, "oracle", {"b", "q", "a", "y_a", "yp_a", "r_max", "t_large"});
    OracleConfig oc;
    oc.b = parse_coefficient(require(o, "oracle", "b"), "oracle.b");
    oc.q = number_or(o, "oracle", "q", oc.q);
    oc.a = number_or(o, "oracle", "a", oc.a);
    oc.y_a = number_or(o, "oracle", "y_a", oc.y_a);
    oc.yp_a = number_or(o, "oracle", "yp_a", oc.yp_a);
    oc.r_max = number_or(o, "oracle", "r_max", oc.r_max);
    oc.t_large = number_or(o, "oracle", "t_large", oc.t_large);
    if (!(oc.r_max > oc.a)) throw ConfigError("oracle.r_max must exceed oracle.a");
    cfg.oracle = oc;
  }
  s.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
  const Scenario& s = cfg.scenario;
  json doc;
  doc["domain"] = {{"length", s.length}, {"nodes", s.controls.nodes}};
  doc["exponents"] = {{"p", s.p}, {"q", s.q}};
  doc["c"] = coefficient_json(s.c);
  doc["k"] = coefficient_json(s.k);
  json init;
  init["family"] = to_string(s.u0.family);
  if (s.u0.family == InitialFamily::Tabulated) {
    init["nodes"] = s.u0.nodes;
  } else {
    init["value"] = s.u0.value;
  }
  doc["initial"] = init;
  doc["solver"] = {{"t_max", s.controls.t_max},
                   {"blowup_threshold", s.controls.blowup_threshold},
                   {"theta", s.controls.theta},
                   {"dt_max", s.controls.dt_max},
                   {"dt_init", s.controls.dt_init},
                   {"max_steps", s.controls.max_steps}};
  doc["output"] = {{"dir", cfg.output_dir}, {"snapshot_every", s.controls.snapshot_every}};
  if (cfg.k_lower) doc["k_lower"] = coefficient_json(*cfg.k_lower);
  const auto& sw = cfg.sweep;
  if (!sw.p.empty() || !sw.q.empty() || !sw.c.empty() || !sw.k.empty() || !sw.initial_value.empty()) {
    json j = json::object();
    if (!sw.p.empty()) j["p"] = sw.p;
    if (!sw.q.empty()) j["q"] = sw.q;
    if (!sw.initial_value.empty()) j["initial_value"] = sw.initial_value;
    if (!sw.c.empty()) {
      j["c"] = json::array();
      for (const auto& c : sw.c) j["c"].push_back(coefficient_json(c));
    }
    if (!sw.k.empty()) {
      j["k"] = json::array();
      for (const auto& k : sw.k) j["k"].push_back(coefficient_json(k));
    }
    doc["sweep"] = j;
  }
  if (cfg.oracle) {
    const auto& o = *cfg.oracle;
    doc["oracle"] = {{"b", coefficient_json(o.b)}, {"q", o.q},         {"a", o.a},
                     {"y_a", o.y_a},               {"yp_a", o.yp_a},   {"r_max", o.r_max},
                     {"t_large", o.t_large}};
  }
  return doc.dump(2);
}

}  // namespace memheat
