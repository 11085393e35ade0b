#include "hvi/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "hvi/sobolev.hpp"

namespace hvi {

namespace {

using nlohmann::json;

void reject_unknown(const json& doc, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, _] : doc.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw InputError("unknown key '" + key + "' in " + where);
  }
}

double number(const json& doc, const char* key, const std::string& where) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_number()) throw InputError(where + ": '" + key + "' must be a number");
  return it->get<double>();
}

json resolve(const json& doc, const std::filesystem::path& base) {
  if (doc.is_string()) {
    std::filesystem::path p = doc.get<std::string>();
    if (p.is_relative()) p = base / p;
    return read_json_file(p);
  }
  return doc;
}

void emit_number(std::string& out, double x) {
  if (std::isnan(x)) {
    out += "\"nan\"";
  } else if (std::isinf(x)) {
    out += x > 0 ? "\"inf\"" : "\"-inf\"";
  } else {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out += buf;
  }
}

void emit(std::string& out, const json& doc, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (doc.type()) {
    case json::value_t::object: {
      if (doc.empty()) {
        out += "{}";
        break;
      }
      out += "{\n";
      bool first = true;
      for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        emit(out, it.value(), indent + 2);
      }
      out += "\n" + close + "}";
      break;
    }
    case json::value_t::array: {
      if (doc.empty()) {
        out += "[]";
        break;
      }
      out += "[\n";
      for (std::size_t i = 0; i < doc.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        emit(out, doc[i], indent + 2);
      }
      out += "\n" + close + "]";
      break;
    }
    case json::value_t::number_float:
      emit_number(out, doc.get<double>());
      break;
    default:
      out += doc.dump();
  }
}

void emit_human(std::ostringstream& out, const json& doc, const std::string& prefix) {
  if (doc.is_object()) {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
      if (it->is_structured() && !it->empty()) {
        emit_human(out, *it, key);
      } else {
        out << key << ": ";
        std::string s;
        emit(s, *it, 0);
        out << s << "\n";
      }
    }
  } else if (doc.is_array()) {
    for (std::size_t i = 0; i < doc.size(); ++i) emit_human(out, doc[i], prefix + "[" + std::to_string(i) + "]");
  } else {
    std::string s;
    emit(s, doc, 0);
    out << prefix << ": " << s << "\n";
  }
}

}  // namespace

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

NodeFunction parse_node_map(const WeightedGraph& g, const json& doc, const char* what, double fill) {
  if (!doc.is_object()) throw InputError(std::string(what) + " must be an object {node: value}");
  NodeFunction out(g.num_nodes(), fill);
  for (const auto& [key, value] : doc.items()) {
    if (!g.contains(key)) throw InputError(std::string(what) + ": unknown node id '" + key + "'");
    if (!value.is_number()) throw InputError(std::string(what) + "['" + key + "'] is not a number");
    out[g.index_of(key)] = value.get<double>();
  }
  return out;
}

nlohmann::json node_map(const WeightedGraph& g, const NodeFunction& phi) {
  json out = json::object();
  for (std::size_t v = 0; v < g.num_nodes(); ++v) out[g.id(v)] = phi[v];
  return out;
}

void apply_solver_section(const json& doc, SolverOptions& opts) {
  if (!doc.is_object()) throw InputError("'solver' must be an object");
  reject_unknown(doc, {"tol", "h_schedule", "strategy", "max_outer", "max_inner", "linear_tol"}, "solver section");
  if (doc.contains("tol")) opts.tol = number(doc, "tol", "solver");
  if (doc.contains("linear_tol")) opts.linear_tol = number(doc, "linear_tol", "solver");
  if (doc.contains("h_schedule")) {
    const auto& h = doc["h_schedule"];
    if (!h.is_array()) throw InputError("solver: 'h_schedule' must be an array");
    opts.h_schedule.clear();
    for (const auto& x : h) {
      if (!x.is_number() || !(x.get<double>() > 0.0)) throw InputError("solver: h_schedule entries must be positive");
      opts.h_schedule.push_back(x.get<double>());
      if (opts.h_schedule.size() > 1 && !(opts.h_schedule.back() < opts.h_schedule[opts.h_schedule.size() - 2])) {
        throw InputError("solver: h_schedule must be strictly decreasing");
      }
    }
  }
  if (doc.contains("strategy")) {
    const auto s = doc["strategy"].is_string() ? doc["strategy"].get<std::string>() : "";
    if (s == "semismooth_newton") {
      opts.strategy = Strategy::semismooth_newton;
    } else if (s == "picard") {
      opts.strategy = Strategy::picard;
    } else {
      throw InputError("solver: strategy must be 'semismooth_newton' or 'picard'");
    }
  }
  for (const char* key : {"max_outer", "max_inner"}) {
    if (!doc.contains(key)) continue;
    if (!doc[key].is_number_unsigned() || doc[key].get<std::size_t>() == 0) {
      throw InputError(std::string("solver: '") + key + "' must be a positive integer");
    }
    (std::string(key) == "max_outer" ? opts.max_outer : opts.max_inner) = doc[key].get<std::size_t>();
  }
  if (!(opts.tol > 0.0)) throw InputError("solver: tol must be positive");
}

ProblemFile parse_problem(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw InputError("problem document is not an object");
  reject_unknown(doc, {"graph", "superpotential", "f", "parabolic", "solver"}, "problem");
  if (!doc.contains("graph")) throw InputError("problem lacks 'graph'");
  if (!doc.contains("superpotential")) throw InputError("problem lacks 'superpotential'");

  ProblemFile p;
  p.graph = load_graph(resolve(doc["graph"], base_dir));
  p.sp = Superpotential(parse_density(resolve(doc["superpotential"], base_dir)));
  p.f = doc.contains("f") ? parse_node_map(p.graph, doc["f"], "f") : NodeFunction(p.graph.num_nodes());
  if (doc.contains("solver")) apply_solver_section(doc["solver"], p.solver);

  if (doc.contains("parabolic")) {
    const auto& s = doc["parabolic"];
    if (!s.is_object()) throw InputError("'parabolic' must be an object");
    reject_unknown(s, {"T", "steps", "phi0", "f_table", "sp_schedule"}, "parabolic section");
    if (!s.contains("steps") || !s["steps"].is_number_unsigned() || s["steps"].get<std::size_t>() == 0) {
      throw InputError("parabolic: 'steps' must be a positive integer");
    }
    ParabolicProblem pp;
    pp.graph = p.graph;
    pp.T = number(s, "T", "parabolic");
    pp.steps = s["steps"].get<std::size_t>();
    pp.phi0 = s.contains("phi0") ? parse_node_map(p.graph, s["phi0"], "parabolic.phi0")
                                 : NodeFunction(p.graph.num_nodes());
    if (s.contains("f_table")) {
      if (!s["f_table"].is_array()) throw InputError("parabolic: 'f_table' must be an array of node maps");
      for (const auto& row : s["f_table"]) pp.f_table.push_back(parse_node_map(p.graph, row, "parabolic.f_table"));
    } else {
      pp.f_table.push_back(p.f);
    }
    pp.schedule = s.contains("sp_schedule") ? parse_schedule(s["sp_schedule"]) : SuperpotentialSchedule(p.sp);
    pp.validate();
    p.parabolic = std::move(pp);
  }
  return p;
}

ProblemFile load_problem_file(const std::filesystem::path& path) {
  const auto doc = read_json_file(path);
  try {
    return parse_problem(doc, path.parent_path());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

WeightLaw parse_weight_law(const json& doc) {
  if (doc.is_number()) return WeightLaw::constant(doc.get<double>());
  if (!doc.is_object() || !doc.contains("law") || !doc["law"].is_string()) {
    throw InputError("weight law must be a number or {\"law\": id, ...}");
  }
  const auto id = doc["law"].get<std::string>();
  if (id == "constant") {
    reject_unknown(doc, {"law", "c"}, "constant law");
    return WeightLaw::constant(number(doc, "c", "constant law"));
  }
  if (id == "geometric") {
    reject_unknown(doc, {"law", "c", "q"}, "geometric law");
    return WeightLaw::geometric(number(doc, "c", "geometric law"), number(doc, "q", "geometric law"));
  }
  if (id == "power") {
    reject_unknown(doc, {"law", "c", "p"}, "power law");
    return WeightLaw::power(number(doc, "c", "power law"), number(doc, "p", "power law"));
  }
  throw InputError("unknown weight law '" + id + "' (expected constant, geometric or power)");
}

nlohmann::json weight_law_to_json(const WeightLaw& w) {
  switch (w.kind) {
    case WeightLaw::Kind::constant:
      return {{"law", "constant"}, {"c", w.c}};
    case WeightLaw::Kind::geometric:
      return {{"law", "geometric"}, {"c", w.c}, {"q", w.q}};
    case WeightLaw::Kind::power:
      return {{"law", "power"}, {"c", w.c}, {"p", w.q}};
  }
  return {};
}

GeneratorFile parse_generator(const json& doc) {
  if (!doc.is_object()) throw InputError("generator document is not an object");
  reject_unknown(doc, {"kind", "weights", "f", "max_nodes"}, "generator");
  GeneratorFile out;
  const auto kind = doc.contains("kind") && doc["kind"].is_string() ? doc["kind"].get<std::string>() : "";
  if (kind == "path") {
    out.generator.kind = GraphGenerator::Kind::path;
  } else if (kind == "binary-tree") {
    out.generator.kind = GraphGenerator::Kind::binary_tree;
  } else if (kind == "lattice-2d") {
    out.generator.kind = GraphGenerator::Kind::lattice_2d;
  } else {
    throw InputError("generator: 'kind' must be path, binary-tree or lattice-2d");
  }
  if (doc.contains("weights")) {
    const auto& w = doc["weights"];
    if (!w.is_object()) throw InputError("generator: 'weights' must be an object");
    reject_unknown(w, {"mu", "rho", "gamma", "kappa"}, "generator weights");
    if (w.contains("mu")) out.generator.mu = parse_weight_law(w["mu"]);
    if (w.contains("rho")) out.generator.rho = parse_weight_law(w["rho"]);
    if (w.contains("gamma")) out.generator.gamma = parse_weight_law(w["gamma"]);
    if (w.contains("kappa")) out.generator.kappa = parse_weight_law(w["kappa"]);
  }
  if (doc.contains("f")) out.f = parse_weight_law(doc["f"]);
  if (doc.contains("max_nodes")) {
    if (!doc["max_nodes"].is_number_unsigned()) throw InputError("generator: 'max_nodes' must be a positive integer");
    out.generator.max_nodes = doc["max_nodes"].get<std::size_t>();
  }
  out.generator.validate();
  return out;
}

GeneratorFile load_generator_file(const std::filesystem::path& path) {
  const auto doc = read_json_file(path);
  try {
    return parse_generator(doc);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string to_machine_text(const json& doc) {
  std::string out;
  emit(out, doc, 0);
  out += "\n";
  return out;
}

std::string to_human_text(const json& doc) {
  std::ostringstream out;
  emit_human(out, doc, "");
  return out.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(path.string() + ": cannot open for writing");
    out << content;
    out.flush();
    if (!out) throw InputError(path.string() + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InputError(path.string() + ": rename failed: " + ec.message());
  }
}

nlohmann::json constants_to_json(const OperatorConstants& c) {
  return {{"m_gamma_lo", c.m_gamma_lo}, {"m_gamma_hi", c.m_gamma_hi}, {"m_kappa_lo", c.m_kappa_lo},
          {"m_kappa_hi", c.m_kappa_hi}, {"m_coercive", c.m_coercive}, {"m_bounded", c.m_bounded},
          {"hilbert_margin", c.hilbert_margin()}};
}

nlohmann::json certificates_to_json(const std::vector<Certificate>& certs) {
  json out = json::array();
  for (const auto& c : certs) {
    out.push_back({{"kind", to_string(c.kind)}, {"satisfied", c.satisfied}, {"lhs", c.lhs}, {"rhs", c.rhs},
                   {"note", c.note}});
  }
  return out;
}

nlohmann::json solve_report_to_json(const WeightedGraph& g, const SolveReport& r) {
  json trace = json::array();
  for (const auto& t : r.iterations) {
    trace.push_back({{"phase", t.phase}, {"h", t.h}, {"steps", t.steps}, {"residual", t.residual}});
  }
  const auto norms = sobolev_norms(g, r.phi);
  return {{"phi", node_map(g, r.phi)},
          {"xi", node_map(g, r.xi)},
          {"inclusion_residual", node_map(g, r.inclusion_residual)},
          {"residual_norm", r.residual_norm},
          {"converged", r.converged},
          {"norms",
           {{"l2_node", norms.l2_node}, {"l2_edge", norms.l2_edge}, {"w_sum", norms.w_sum},
            {"w_hilbert", norms.w_hilbert}}},
          {"iterations", std::move(trace)},
          {"certificates", certificates_to_json(r.certificates)},
          {"warnings", r.warnings}};
}

}  // namespace hvi
