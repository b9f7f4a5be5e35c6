#include "acstrace/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

namespace acstrace {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) fail(path + "." + key, "unknown key");
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail(path + "." + key, "missing required key");
  return obj.at(key);
}

std::int64_t get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<std::int64_t>();
}

double get_num(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::string get_str(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

NetworkCell parse_cell(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) fail(path, "expected [count, size]");
  return {get_int(v[0], path + "[0]"), static_cast<int>(get_int(v[1], path + "[1]"))};
}

DynamicsSetting parse_setting(const json& v, const std::string& path) {
  if (v.is_string()) return table3_setting(v.get<std::string>());
  if (!v.is_object()) fail(path, "expected a setting label or object");
  check_keys(v, path, {"label", "t1", "growing", "shrinking", "emerging"});
  DynamicsSetting s;
  s.label = v.contains("label") ? get_str(v.at("label"), path + ".label") : "custom";
  s.t1 = parse_cell(require(v, path, "t1"), path + ".t1");
  s.growing = v.contains("growing") ? parse_cell(v.at("growing"), path + ".growing") : NetworkCell{0, 0};
  if (v.contains("shrinking") && !v.at("shrinking").is_null())
    s.shrinking = parse_cell(v.at("shrinking"), path + ".shrinking");
  s.emerging = v.contains("emerging") ? parse_cell(v.at("emerging"), path + ".emerging") : NetworkCell{0, 0};
  try {
    s.validate();
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
  return s;
}

PopulationSpec parse_population(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
  check_keys(v, path,
             {"mode", "N", "theta", "k", "size_dist", "setting", "topology", "edge_nodes_per_network"});
  PopulationSpec spec;
  const std::string mode = get_str(require(v, path, "mode"), path + ".mode");
  if (mode == "person")
    spec.kind = PopKind::person_equal;
  else if (mode == "household")
    spec.kind = PopKind::household;
  else if (mode == "dynamics")
    spec.kind = PopKind::dynamics;
  else
    fail(path + ".mode", "expected person | household | dynamics");
  spec.n_units = get_int(require(v, path, "N"), path + ".N");
  if (spec.kind == PopKind::dynamics) {
    spec.setting = parse_setting(require(v, path, "setting"), path + ".setting");
    spec.theta = spec.setting->theta1();
    spec.k = spec.setting->t1.size;
    if (v.contains("theta") || v.contains("k"))
      fail(path, "dynamics populations take theta and k from the setting");
  } else {
    spec.theta = get_int(require(v, path, "theta"), path + ".theta");
    spec.k = static_cast<int>(get_int(require(v, path, "k"), path + ".k"));
    if (v.contains("setting")) fail(path + ".setting", "only valid for dynamics mode");
  }
  if (spec.kind == PopKind::household) {
    const json& d = require(v, path, "size_dist");
    if (!d.is_array() || d.empty()) fail(path + ".size_dist", "expected a nonempty array");
    for (std::size_t i = 0; i < d.size(); ++i)
      spec.size_dist.push_back(get_num(d[i], path + ".size_dist[" + std::to_string(i) + "]"));
  } else if (v.contains("size_dist")) {
    fail(path + ".size_dist", "only valid for household mode");
  }
  if (v.contains("topology")) {
    const std::string t = get_str(v.at("topology"), path + ".topology");
    if (t == "star")
      spec.net_opts.topology = NetworkTopology::star;
    else if (t == "path")
      spec.net_opts.topology = NetworkTopology::path;
    else if (t == "complete")
      spec.net_opts.topology = NetworkTopology::complete;
    else
      fail(path + ".topology", "expected star | path | complete");
  }
  if (v.contains("edge_nodes_per_network"))
    spec.net_opts.edge_nodes_per_network =
        static_cast<int>(get_int(v.at("edge_nodes_per_network"), path + ".edge_nodes_per_network"));
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
  return spec;
}

InitialDesign parse_initial(const json& v, const std::string& path, std::int64_t n_units) {
  if (!v.is_object()) fail(path, "expected an object");
  check_keys(v, path, {"kind", "m", "eta"});
  InitialDesign d;
  const std::string kind = get_str(require(v, path, "kind"), path + ".kind");
  if (kind == "srs")
    d.kind = InitialDesign::Kind::srs;
  else if (kind == "poisson_size_biased")
    d.kind = InitialDesign::Kind::poisson_size_biased;
  else
    fail(path + ".kind", "expected srs | poisson_size_biased");
  d.m = get_int(require(v, path, "m"), path + ".m");
  if (v.contains("eta")) {
    if (d.kind == InitialDesign::Kind::srs) fail(path + ".eta", "eta applies to poisson_size_biased only");
    d.eta = get_num(v.at("eta"), path + ".eta");
  }
  try {
    d.validate(n_units);
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
  return d;
}

TracingDesign parse_tracing(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
  check_keys(v, path, {"kind", "q", "psi0", "strengths"});
  TracingDesign d;
  const std::string kind = get_str(require(v, path, "kind"), path + ".kind");
  if (kind == "acs") {
    d.kind = TracingDesign::Kind::acs;
  } else if (kind == "qasbs") {
    d.kind = TracingDesign::Kind::qasbs;
    d.q = static_cast<int>(get_int(require(v, path, "q"), path + ".q"));
  } else if (kind == "dacs") {
    d.kind = TracingDesign::Kind::dacs;
    d.psi0 = get_num(require(v, path, "psi0"), path + ".psi0");
    const json& s = require(v, path, "strengths");
    if (!s.is_array()) fail(path + ".strengths", "expected an array of [i, j, psi]");
    EdgeStrengths es;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string p = path + ".strengths[" + std::to_string(i) + "]";
      if (!s[i].is_array() || s[i].size() != 3) fail(p, "expected [i, j, psi]");
      es.set(static_cast<UnitId>(get_int(s[i][0], p)), static_cast<UnitId>(get_int(s[i][1], p)),
             get_num(s[i][2], p));
    }
    d.edge_strengths = std::move(es);
  } else {
    fail(path + ".kind", "expected acs | dacs | qasbs");
  }
  try {
    d.validate();
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
  return d;
}

Scenario parse_scenario(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
  check_keys(v, path,
             {"id", "population", "initial", "tracing", "temporal", "replicates", "seed",
              "freeze_population"});
  Scenario sc;
  sc.id = get_str(require(v, path, "id"), path + ".id");
  sc.population = parse_population(require(v, path, "population"), path + ".population");
  sc.initial = parse_initial(require(v, path, "initial"), path + ".initial", sc.population.n_units);
  if (v.contains("tracing")) sc.tracing = parse_tracing(v.at("tracing"), path + ".tracing");
  const std::string temporal =
      v.contains("temporal") ? get_str(v.at("temporal"), path + ".temporal") : "cross_sectional";
  if (temporal == "cross_sectional")
    sc.temporal = TemporalDesign::cross_sectional;
  else if (temporal == "panel")
    sc.temporal = TemporalDesign::panel;
  else if (temporal == "pacs")
    sc.temporal = TemporalDesign::pacs;
  else if (temporal == "iacs")
    sc.temporal = TemporalDesign::iacs;
  else
    fail(path + ".temporal", "expected cross_sectional | panel | pacs | iacs");
  sc.replicates = get_int(require(v, path, "replicates"), path + ".replicates");
  sc.seed = static_cast<std::uint64_t>(get_int(require(v, path, "seed"), path + ".seed"));
  if (v.contains("freeze_population")) {
    if (!v.at("freeze_population").is_boolean()) fail(path + ".freeze_population", "expected a boolean");
    sc.freeze_population = v.at("freeze_population").get<bool>();
  }
  try {
    sc.validate();
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
  return sc;
}

json cell_to_json(const NetworkCell& c) { return json::array({c.count, c.size}); }

json setting_to_json(const DynamicsSetting& s) {
  json v{{"label", s.label},
         {"t1", cell_to_json(s.t1)},
         {"growing", cell_to_json(s.growing)},
         {"emerging", cell_to_json(s.emerging)}};
  if (s.shrinking)
    v["shrinking"] = cell_to_json(*s.shrinking);
  else
    v["shrinking"] = nullptr;
  return v;
}

json scenario_to_json(const Scenario& sc) {
  json pop;
  switch (sc.population.kind) {
    case PopKind::person_equal:
      pop = {{"mode", "person"}, {"N", sc.population.n_units}, {"theta", sc.population.theta},
             {"k", sc.population.k}};
      break;
    case PopKind::household:
      pop = {{"mode", "household"},
             {"N", sc.population.n_units},
             {"theta", sc.population.theta},
             {"k", sc.population.k},
             {"size_dist", sc.population.size_dist}};
      break;
    case PopKind::dynamics:
      pop = {{"mode", "dynamics"},
             {"N", sc.population.n_units},
             {"setting", setting_to_json(*sc.population.setting)}};
      break;
  }
  if (sc.population.net_opts.topology != NetworkTopology::star)
    pop["topology"] = sc.population.net_opts.topology == NetworkTopology::path ? "path" : "complete";
  if (sc.population.net_opts.edge_nodes_per_network != 0)
    pop["edge_nodes_per_network"] = sc.population.net_opts.edge_nodes_per_network;

  json initial{{"kind", sc.initial.kind == InitialDesign::Kind::srs ? "srs" : "poisson_size_biased"},
               {"m", sc.initial.m}};
  if (sc.initial.kind == InitialDesign::Kind::poisson_size_biased) initial["eta"] = sc.initial.eta;

  json tracing{{"kind", sc.tracing.kind == TracingDesign::Kind::acs     ? "acs"
                        : sc.tracing.kind == TracingDesign::Kind::dacs ? "dacs"
                                                                       : "qasbs"}};
  if (sc.tracing.kind == TracingDesign::Kind::qasbs) tracing["q"] = sc.tracing.q;
  if (sc.tracing.kind == TracingDesign::Kind::dacs) {
    tracing["psi0"] = sc.tracing.psi0;
    tracing["strengths"] = json::array();  // strengths are not round-tripped through presets
  }

  const char* temporal = sc.temporal == TemporalDesign::cross_sectional ? "cross_sectional"
                         : sc.temporal == TemporalDesign::panel         ? "panel"
                         : sc.temporal == TemporalDesign::pacs          ? "pacs"
                                                                        : "iacs";
  json v{{"id", sc.id},          {"population", pop},
         {"initial", initial},   {"tracing", tracing},
         {"temporal", temporal}, {"replicates", sc.replicates},
         {"seed", sc.seed}};
  if (sc.freeze_population) v["freeze_population"] = true;
  return v;
}

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string opt_str(const std::optional<double>& v, int precision) {
  return v ? format_double(*v, precision) : std::string();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(doc, "$", {"output", "verbosity", "replicates_override", "scenarios"});
  RunConfig config;
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    if (!o.is_object()) fail("$.output", "expected an object");
    check_keys(o, "$.output", {"path", "format"});
    if (o.contains("path")) config.output.path = get_str(o.at("path"), "$.output.path");
    if (o.contains("format")) {
      const std::string f = get_str(o.at("format"), "$.output.format");
      if (f == "csv")
        config.output.format = OutputSpec::Format::csv;
      else if (f == "json")
        config.output.format = OutputSpec::Format::json;
      else
        fail("$.output.format", "expected csv | json");
    }
  }
  if (doc.contains("verbosity"))
    config.verbosity = static_cast<int>(get_int(doc.at("verbosity"), "$.verbosity"));
  if (doc.contains("replicates_override"))
    config.replicates_override = get_int(doc.at("replicates_override"), "$.replicates_override");
  const json& scenarios = require(doc, "$", "scenarios");
  if (!scenarios.is_array() || scenarios.empty())
    throw ConfigError("config: $.scenarios: expected a nonempty array");
  for (std::size_t i = 0; i < scenarios.size(); ++i)
    config.scenarios.push_back(parse_scenario(scenarios[i], "$.scenarios[" + std::to_string(i) + "]"));
  return config;
}

std::string serialize_config(const RunConfig& config) {
  json doc;
  doc["output"] = {{"path", config.output.path},
                   {"format", config.output.format == OutputSpec::Format::csv ? "csv" : "json"}};
  doc["verbosity"] = config.verbosity;
  if (config.replicates_override) doc["replicates_override"] = *config.replicates_override;
  json arr = json::array();
  for (const auto& sc : config.scenarios) arr.push_back(scenario_to_json(sc));
  doc["scenarios"] = std::move(arr);
  return doc.dump(2) + "\n";
}

void write_csv(const std::vector<McSummary>& rows, std::ostream& os) {
  os << "scenario_id,design,m,eta,k_or_setting,R,seed,mean_n,cv_mc,cv_analytic,se_mc,se_analytic,"
        "re_mc,re_analytic\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6g", r.eta);
    os << r.scenario_id << ',' << r.design_label << ',' << r.m << ',' << buf << ',' << r.k_or_setting
       << ',' << r.replicates << ',' << r.seed << ',' << format_double(r.mean_n, 4) << ','
       << opt_str(r.cv_mc, 6) << ',' << opt_str(r.cv_analytic, 6) << ',' << opt_str(r.se_mc, 8) << ','
       << opt_str(r.se_analytic, 8) << ',' << opt_str(r.re_mc, 6) << ',' << opt_str(r.re_analytic, 6)
       << '\n';
  }
}

void write_json(const std::vector<McSummary>& rows, std::ostream& os) {
  json arr = json::array();
  const auto put = [](json& obj, const char* key, const std::optional<double>& v) {
    if (v) obj[key] = *v;
  };
  for (const auto& r : rows) {
    json obj{{"scenario_id", r.scenario_id},
             {"design", r.design_label},
             {"m", r.m},
             {"eta", r.eta},
             {"k_or_setting", r.k_or_setting},
             {"R", r.replicates},
             {"seed", r.seed},
             {"mean_n", r.mean_n},
             {"mean_estimate", r.mean_estimate},
             {"estimand", r.estimand},
             {"zero_network_replicates", r.zero_network_replicates}};
    put(obj, "cv_mc", r.cv_mc);
    put(obj, "cv_analytic", r.cv_analytic);
    put(obj, "se_mc", r.se_mc);
    put(obj, "se_analytic", r.se_analytic);
    put(obj, "re_mc", r.re_mc);
    put(obj, "re_analytic", r.re_analytic);
    put(obj, "baseline_cv_mc", r.baseline_cv_mc);
    put(obj, "baseline_cv_analytic", r.baseline_cv_analytic);
    put(obj, "baseline_se_mc", r.baseline_se_mc);
    put(obj, "baseline_se_analytic", r.baseline_se_analytic);
    put(obj, "re_mc_standard_error", r.re_mc_standard_error);
    put(obj, "en_analytic", r.en_analytic);
    arr.push_back(std::move(obj));
  }
  os << arr.dump(2) << "\n";
}

int run(const RunConfig& config, std::ostream& log, int threads) {
  std::vector<McSummary> rows;
  std::string failure;
  for (const auto& base_sc : config.scenarios) {
    Scenario sc = base_sc;
    if (config.replicates_override) sc.replicates = *config.replicates_override;
    try {
      if (config.verbosity >= 1)
        log << "running " << sc.id << " (R=" << sc.replicates << ", seed=" << sc.seed << ")\n";
      rows.push_back(run_scenario(sc, threads));
      if (config.verbosity >= 2) {
        const auto& r = rows.back();
        log << "  mean_n=" << format_double(r.mean_n, 2);
        if (r.cv_mc) log << " cv=" << format_double(*r.cv_mc, 4);
        if (r.se_mc) log << " se=" << format_double(*r.se_mc, 6);
        if (r.re_mc) log << " re=" << format_double(*r.re_mc, 4);
        log << "\n";
      }
    } catch (const std::exception& e) {
      failure = "scenario '" + sc.id + "': " + e.what();
      break;
    }
  }
  std::ofstream out(config.output.path, std::ios::binary);
  if (!out) {
    log << "error: cannot open output file " << config.output.path << "\n";
    return 2;
  }
  if (config.output.format == OutputSpec::Format::csv) {
    write_csv(rows, out);
    if (!failure.empty()) out << "# INCOMPLETE: " << failure << "\n";
  } else {
    if (failure.empty()) {
      write_json(rows, out);
    } else {
      std::ostringstream tmp;
      write_json(rows, tmp);
      out << "{\"incomplete\": \"" << failure << "\", \"rows\": " << tmp.str() << "}\n";
    }
  }
  if (!failure.empty()) {
    log << "error: " << failure << "\n";
    return 1;
  }
  if (config.verbosity >= 1) log << "wrote " << config.output.path << "\n";
  return 0;
}

}  // namespace acstrace
