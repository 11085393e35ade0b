#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hvi/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Hemivariational inequalities on weighted graphs"};
  app.require_subcommand(1, 1);

  hvi::RunConfig cfg;
  std::string graph, problem, solution, out, radii, format = "human";
  double tol = 0.0, eps = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--graph", graph, "graph file (exhaust: generator spec)");
    sub->add_option("--problem", problem, "problem file");
    sub->add_option("--out", out, "report path (default: stdout)");
    sub->add_option("--tol", tol, "inclusion residual tolerance");
    sub->add_option("--format", format, "human or machine")->check(CLI::IsMember({"human", "machine"}));
  };
  for (const char* name : {"validate", "certify", "solve-elliptic", "solve-parabolic", "verify", "exhaust"}) {
    auto* sub = app.add_subcommand(name);
    add_common(sub);
    if (std::string(name) == "verify") sub->add_option("--solution", solution, "phi node map or solve report");
    if (std::string(name) == "exhaust") {
      sub->add_option("--radii", radii, "comma-separated increasing radii");
      sub->add_option("--eps", eps, "convergence threshold");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : hvi::kExitInputError;
  }

  cfg.command = *hvi::parse_command(app.get_subcommands().front()->get_name());
  if (!graph.empty()) cfg.graph = graph;
  if (!problem.empty()) cfg.problem = problem;
  if (!solution.empty()) cfg.solution = solution;
  if (!out.empty()) cfg.out = out;
  if (app.get_subcommands().front()->count("--tol")) cfg.tol = tol;
  if (cfg.command == hvi::Command::exhaust && app.get_subcommands().front()->count("--eps")) cfg.eps = eps;
  cfg.format = format == "machine" ? hvi::ReportFormat::machine : hvi::ReportFormat::human;
  if (!radii.empty()) {
    std::stringstream ss(radii);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        cfg.radii.push_back(std::stod(item));
      } catch (const std::exception&) {
        std::cerr << "error: --radii entry '" << item << "' is not a number\n";
        return hvi::kExitInputError;
      }
    }
  }

  const auto res = hvi::run(cfg);
  if (!res.error.empty()) std::cerr << "error: " << res.error << "\n";
  if (!cfg.out && !res.report.empty()) std::cout << res.report;
  return res.status;
}
