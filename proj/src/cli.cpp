#include "hvi/cli.hpp"

#include <algorithm>
#include <cmath>

#include "hvi/exhaustion.hpp"
#include "hvi/io.hpp"
#include "hvi/operators.hpp"
#include "hvi/sobolev.hpp"
#include "hvi/solvers.hpp"

namespace hvi {

namespace {

using nlohmann::json;

struct Reply {
  json body;
  bool converged = true;
};

const std::filesystem::path& need(const std::optional<std::filesystem::path>& p, const char* flag, Command c) {
  if (!p) throw InputError(std::string(command_name(c)) + " requires " + flag);
  return *p;
}

json graph_summary(const WeightedGraph& g) {
  json deg = json::object();
  const auto d = degrees(g);
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    deg[g.id(v)] = {{"out", d[v].deg_out}, {"in", d[v].deg_in}, {"deg", d[v].deg}};
  }
  return {{"nodes", g.num_nodes()},
          {"adjacencies", g.num_edges() / 2},
          {"degrees", std::move(deg)},
          {"vol_rho", volume(g)},
          {"mu_total", total_measure(g)},
          {"constants", constants_to_json(constants(g))}};
}

SolverOptions options_for(const RunConfig& cfg, SolverOptions base) {
  if (cfg.tol) {
    if (!(*cfg.tol > 0.0)) throw InputError("--tol must be positive");
    base.tol = *cfg.tol;
  }
  return base;
}

Reply do_validate(const RunConfig& cfg) {
  if (cfg.problem) {
    auto p = load_problem_file(*cfg.problem);
    json body = graph_summary(p.graph);
    body["superpotential"] = {{"breakpoints", p.sp.density().breakpoints.size()}, {"has_jumps", p.sp.has_jumps()}};
    body["parabolic"] = p.parabolic.has_value();
    return {body};
  }
  return {graph_summary(load_graph_file(need(cfg.graph, "--graph or --problem", cfg.command)))};
}

Reply do_certify(const RunConfig& cfg) {
  auto p = load_problem_file(need(cfg.problem, "--problem", cfg.command));
  EllipticProblem ep{p.graph, p.sp, p.f};
  const double R = default_certify_range(ep);
  const auto growth = growth_certificate(p.sp, R);
  return {{{"range", R},
           {"alpha_j", growth.alpha_j},
           {"growth_global", growth.global},
           {"constants", constants_to_json(constants(p.graph))},
           {"certificates", certificates_to_json(certify(ep, R))}}};
}

Reply do_solve_elliptic(const RunConfig& cfg) {
  auto p = load_problem_file(need(cfg.problem, "--problem", cfg.command));
  const auto opts = options_for(cfg, p.solver);
  const auto rep = solve_elliptic({p.graph, p.sp, p.f}, opts);
  json body = solve_report_to_json(p.graph, rep);
  body["constants"] = constants_to_json(constants(p.graph));
  body["tol"] = opts.tol;
  return {body, rep.converged};
}

Reply do_solve_parabolic(const RunConfig& cfg) {
  auto p = load_problem_file(need(cfg.problem, "--problem", cfg.command));
  if (!p.parabolic) throw InputError(cfg.problem->string() + ": problem has no 'parabolic' section");
  const auto opts = options_for(cfg, p.solver);
  const auto rep = solve_parabolic(*p.parabolic, opts);
  const auto& pp = *p.parabolic;
  json traj = json::array();
  for (std::size_t k = 0; k < rep.trajectory.size(); ++k) {
    const auto& sp = pp.schedule.at(rep.tau * static_cast<double>(k));
    const auto& f = pp.load(std::max<std::size_t>(k, 1));
    traj.push_back({{"k", k},
                    {"t", rep.tau * static_cast<double>(k)},
                    {"phi", node_map(p.graph, rep.trajectory[k])},
                    {"energy", energy(p.graph, sp, f, rep.trajectory[k])}});
  }
  json steps = json::array();
  for (std::size_t k = 0; k < rep.steps.size(); ++k) {
    const auto& s = rep.steps[k];
    steps.push_back({{"k", k + 1},
                     {"residual_norm", s.residual_norm},
                     {"converged", s.converged},
                     {"xi", node_map(p.graph, s.xi)}});
  }
  return {{{"tau", rep.tau},
           {"T", pp.T},
           {"steps", pp.steps},
           {"converged", rep.converged},
           {"trajectory", std::move(traj)},
           {"step_reports", std::move(steps)},
           {"constants", constants_to_json(constants(p.graph))},
           {"certificates", certificates_to_json(rep.certificates)},
           {"tol", opts.tol}},
          rep.converged};
}

Reply do_verify(const RunConfig& cfg) {
  auto p = load_problem_file(need(cfg.problem, "--problem", cfg.command));
  const auto& path = need(cfg.solution, "--solution", cfg.command);
  auto doc = read_json_file(path);
  if (doc.is_object() && doc.contains("phi")) doc = doc["phi"];
  NodeFunction phi;
  try {
    phi = parse_node_map(p.graph, doc, "solution");
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  for (const auto& id : p.graph.ids()) {
    if (!doc.contains(id)) throw InputError(path.string() + ": solution lacks node '" + id + "'");
  }
  const auto r = verify_inclusion(p.graph, p.sp, phi, p.f);
  const auto lphi = apply(assemble(p.graph), phi);
  NodeFunction xi(phi.size());
  for (std::size_t v = 0; v < phi.size(); ++v) xi[v] = p.sp.subdifferential(phi[v]).project(p.f[v] - lphi[v]);

  std::vector<NodeFunction> tests;
  for (std::size_t v = 0; v < phi.size(); ++v) {
    for (double s : {-1.0, 1.0}) {
      tests.push_back(phi);
      tests.back()[v] += s;
    }
  }
  const auto h = hvi_residual(p.graph, p.sp, phi, p.f, tests);
  const double hmin = h.empty() ? 0.0 : *std::min_element(h.begin(), h.end());
  return {{{"phi", node_map(p.graph, phi)},
           {"xi", node_map(p.graph, xi)},
           {"inclusion_residual", node_map(p.graph, r)},
           {"residual_norm", residual_norm(p.graph, r)},
           {"hvi_coordinate_min", hmin},
           {"constants", constants_to_json(constants(p.graph))}}};
}

Reply do_exhaust(const RunConfig& cfg) {
  const auto gen = load_generator_file(need(cfg.graph, "--graph (generator spec)", cfg.command));
  const auto& ppath = need(cfg.problem, "--problem", cfg.command);
  const auto doc = read_json_file(ppath);
  ExhaustionTemplate tmpl;
  try {
    if (!doc.is_object() || !doc.contains("superpotential")) throw InputError("exhaust problem lacks 'superpotential'");
    for (const auto& [key, _] : doc.items()) {
      if (key != "superpotential" && key != "solver") throw InputError("unknown key '" + key + "' in exhaust problem");
    }
    auto sp_doc = doc["superpotential"];
    if (sp_doc.is_string()) {
      std::filesystem::path sp_path = sp_doc.get<std::string>();
      if (sp_path.is_relative()) sp_path = ppath.parent_path() / sp_path;
      sp_doc = read_json_file(sp_path);
    }
    tmpl.sp = Superpotential(parse_density(sp_doc));
    if (doc.contains("solver")) apply_solver_section(doc["solver"], tmpl.options);
  } catch (const InputError& e) {
    throw InputError(ppath.string() + ": " + e.what());
  }
  tmpl.f = gen.f;
  tmpl.options = options_for(cfg, tmpl.options);
  if (cfg.radii.empty()) throw InputError("exhaust requires --radii");
  for (std::size_t i = 0; i < cfg.radii.size(); ++i) {
    if (!(cfg.radii[i] > 0.0) || (i > 0 && !(cfg.radii[i] > cfg.radii[i - 1]))) {
      throw InputError("--radii must be positive and strictly increasing");
    }
  }
  const double eps = cfg.eps.value_or(1e-6);
  if (!(eps > 0.0)) throw InputError("--eps must be positive");

  const auto rep = exhaust(gen.generator, tmpl, cfg.radii, eps);
  json levels = json::array();
  for (std::size_t i = 0; i < rep.solutions.size(); ++i) {
    levels.push_back({{"radius", rep.radii[i]},
                      {"nodes", rep.graphs[i].num_nodes()},
                      {"residual_norm", rep.solutions[i].residual_norm},
                      {"converged", rep.solutions[i].converged},
                      {"phi", node_map(rep.graphs[i], rep.solutions[i].phi)}});
  }
  json body = {{"radii", rep.radii},
               {"eps", eps},
               {"increments", rep.increments},
               {"tail_masses", rep.tail_masses},
               {"converged", rep.converged},
               {"levels", std::move(levels)},
               {"root", gen.generator.root()}};
  if (!rep.error.empty()) body["error"] = rep.error;
  return {body, rep.converged};
}

}  // namespace

std::optional<Command> parse_command(const std::string& name) {
  for (auto c : {Command::validate, Command::certify, Command::solve_elliptic, Command::solve_parabolic, Command::verify,
                 Command::exhaust}) {
    if (name == command_name(c)) return c;
  }
  return std::nullopt;
}

const char* command_name(Command c) {
  switch (c) {
    case Command::validate:
      return "validate";
    case Command::certify:
      return "certify";
    case Command::solve_elliptic:
      return "solve-elliptic";
    case Command::solve_parabolic:
      return "solve-parabolic";
    case Command::verify:
      return "verify";
    case Command::exhaust:
      return "exhaust";
  }
  return "?";
}

RunResult run(const RunConfig& cfg) {
  RunResult res;
  for (const auto* p : {&cfg.graph, &cfg.problem, &cfg.solution}) {
    if (*p && !std::filesystem::exists(**p)) {
      res.status = kExitInputError;
      res.error = (*p)->string() + ": file does not exist";
      return res;
    }
  }
  Reply reply;
  try {
    switch (cfg.command) {
      case Command::validate:
        reply = do_validate(cfg);
        break;
      case Command::certify:
        reply = do_certify(cfg);
        break;
      case Command::solve_elliptic:
        reply = do_solve_elliptic(cfg);
        break;
      case Command::solve_parabolic:
        reply = do_solve_parabolic(cfg);
        break;
      case Command::verify:
        reply = do_verify(cfg);
        break;
      case Command::exhaust:
        reply = do_exhaust(cfg);
        break;
    }
  } catch (const InputError& e) {
    res.status = kExitInputError;
    res.error = e.what();
    return res;
  } catch (const DimensionError& e) {
    res.status = kExitInputError;
    res.error = e.what();
    return res;
  } catch (const std::invalid_argument& e) {
    res.status = kExitInputError;
    res.error = e.what();
    return res;
  }

  reply.body["schema_version"] = kSchemaVersion;
  reply.body["command"] = command_name(cfg.command);
  res.report = cfg.format == ReportFormat::machine ? to_machine_text(reply.body) : to_human_text(reply.body);
  res.status = reply.converged ? kExitOk : kExitNoConvergence;
  if (cfg.out) {
    try {
      write_atomic(*cfg.out, res.report);
    } catch (const InputError& e) {
      res.status = kExitInputError;
      res.error = e.what();
    }
  }
  return res;
}

}  // namespace hvi
