#include "cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <ostream>
#include <stdexcept>
#include <variant>

#include <json.hpp>

#include "stokeshdg/analysis.hpp"

namespace stokeshdg::cli {

namespace {

using Cell = std::variant<long long, double, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string format_cell(const Cell& cell) {
  if (std::holds_alternative<long long>(cell))
    return std::to_string(std::get<long long>(cell));
  if (std::holds_alternative<double>(cell)) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15e", std::get<double>(cell));
    return buf;
  }
  return std::get<std::string>(cell);
}

void write_csv(const Table& table, std::ostream& out) {
  for (size_t c = 0; c < table.columns.size(); ++c)
    out << (c ? "," : "") << table.columns[c];
  out << "\n";
  for (const auto& row : table.rows) {
    for (size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << format_cell(row[c]);
    out << "\n";
  }
}

void write_json(const Table& table, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["command"] = table.name;
  doc["columns"] = table.columns;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json rec;
    for (size_t c = 0; c < row.size(); ++c) {
      const std::string& key = table.columns[c];
      if (std::holds_alternative<long long>(row[c]))
        rec[key] = std::get<long long>(row[c]);
      else if (std::holds_alternative<double>(row[c]))
        rec[key] = std::get<double>(row[c]);
      else
        rec[key] = std::get<std::string>(row[c]);
    }
    rows.push_back(std::move(rec));
  }
  doc["rows"] = std::move(rows);
  out << doc.dump(2) << "\n";
}

ConformityMode parse_mode(const std::string& mode) {
  if (mode == "relaxed") return ConformityMode::Relaxed;
  if (mode == "full") return ConformityMode::Full;
  throw std::invalid_argument("unknown mode: " + mode);
}

void validate(const RunConfig& config) {
  if (config.variant == "pr" && config.mode == "full")
    throw std::invalid_argument(
        "variant=pr requires mode=relaxed: the pressure-robust load is built "
        "from the averaging reconstruction, which acts on the relaxed space");
}

Solution run_solve(const Mesh& mesh, const RunConfig& config,
                   const ManufacturedCase& mc) {
  SolverOptions options;
  options.reduced = config.reduced_space;
  Solution sol =
      (config.variant == "pr")
          ? solve_pr(mesh, config.k, config.nu, config.lambda, mc.force,
                     options)
          : solve_basic(mesh, config.k, config.nu, config.lambda,
                        parse_mode(config.mode), mc.force, options);
  if (config.reconstruct)
    sol = reconstruct_solution(sol, build_reconstruction(mesh, sol.dof_map));
  return sol;
}

Table cmd_solve(const RunConfig& config) {
  const Mesh mesh = unit_square_mesh(config.mesh_n);
  const ManufacturedCase mc = manufactured_case(config.nu);
  const Solution sol = run_solve(mesh, config, mc);
  const ErrorReport err = compute_errors(mesh, sol, mc);

  Table t;
  t.name = "solve";
  t.columns = {"k",     "n",     "nu",   "mode",   "variant", "reconstructed",
               "dofs",  "gdofs", "nze",  "l2_u",   "h1_u",    "l2_p",
               "div_l2", "jump_n", "jump_t"};
  t.rows.push_back({static_cast<long long>(config.k),
                    static_cast<long long>(config.mesh_n), config.nu,
                    config.mode, config.variant,
                    static_cast<long long>(sol.reconstructed ? 1 : 0),
                    static_cast<long long>(err.dofs),
                    static_cast<long long>(err.gdofs),
                    static_cast<long long>(err.nze), err.l2_velocity,
                    err.h1_broken_velocity, err.l2_pressure, err.div_l2,
                    err.normal_jump_l2, err.tangential_jump_norm});
  return t;
}

Table cmd_convergence(const RunConfig& config) {
  SolverOptions options;
  options.reduced = config.reduced_space;
  const ConvergenceTable table = convergence_study(
      config.k, parse_mode(config.mode),
      config.variant == "pr" ? Variant::PressureRobust : Variant::Basic,
      config.reconstruct, config.levels, config.nu, config.lambda, options);

  Table t;
  t.name = "convergence";
  t.columns = {"level", "h",    "elements", "dofs",   "gdofs",
               "nze",   "l2_u", "h1_u",     "l2_p",   "div_l2",
               "jump_n", "rate_l2_u", "rate_h1_u"};
  for (const auto& row : table.rows)
    t.rows.push_back({static_cast<long long>(row.level), row.h,
                      static_cast<long long>(row.elements),
                      static_cast<long long>(row.errors.dofs),
                      static_cast<long long>(row.errors.gdofs),
                      static_cast<long long>(row.errors.nze),
                      row.errors.l2_velocity, row.errors.h1_broken_velocity,
                      row.errors.l2_pressure, row.errors.div_l2,
                      row.errors.normal_jump_l2, row.rate_l2_u,
                      row.rate_h1_u});
  return t;
}

Table cmd_nu_sweep(const RunConfig& config) {
  std::vector<double> nus = config.nus;
  if (nus.empty())
    for (int j = -6; j <= 2; ++j) nus.push_back(std::pow(10.0, j));
  const auto rows = nu_sweep(config.k, config.mesh_n, nus, config.lambda);

  Table t;
  t.name = "nu-sweep";
  t.columns = {"nu", "h1_basic", "h1_pr"};
  for (const auto& row : rows)
    t.rows.push_back({row.nu, row.h1_basic, row.h1_pr});
  return t;
}

Table cmd_counts(const RunConfig& config) {
  const Mesh mesh = unit_square_mesh(config.mesh_n);
  const CostReport r =
      count_costs(mesh, config.k, parse_mode(config.mode),
                  config.reduced_space);
  Table t;
  t.name = "counts";
  t.columns = {"k", "n", "mode", "dofs", "gdofs", "nze"};
  t.rows.push_back({static_cast<long long>(config.k),
                    static_cast<long long>(config.mesh_n), config.mode,
                    static_cast<long long>(r.dofs),
                    static_cast<long long>(r.gdofs),
                    static_cast<long long>(r.nze)});
  return t;
}

Table cmd_basis_check(const RunConfig& config, bool* failed) {
  Table t;
  t.name = "basis-check";
  t.columns = {"dim", "k", "facet_gram_offdiag", "volume_moment"};
  for (int dim : {2, 3}) {
    const int kmax = dim == 2 ? std::min(config.k, 6) : std::min(config.k, 4);
    for (int k = 1; k <= kmax; ++k) {
      const ReferenceBasis& basis = ReferenceBasis::get(dim, k);
      double gram = 0.0;
      for (int f = 0; f < basis.n_facets(); ++f)
        gram = std::max(gram, check_normal_orthogonality(basis, f));
      const double vol = check_highest_order_volume_orthogonality(basis);
      if (gram > 1e-12 || vol > 1e-12) *failed = true;
      t.rows.push_back({static_cast<long long>(dim),
                        static_cast<long long>(k), gram, vol});
    }
  }
  return t;
}

}  // namespace

int parse_args(int argc, const char* const* argv, RunConfig& config) {
  CLI::App app{"Stokes benchmark driver for a relaxed H(div)-conforming "
               "hybrid discretization"};
  app.set_config("--config", "", "Configuration file (key = value lines)");
  app.add_option("command", config.command,
                 "One of: solve, convergence, nu-sweep, counts, basis-check")
      ->required()
      ->check(CLI::IsMember(
          {"solve", "convergence", "nu-sweep", "counts", "basis-check"}));
  app.add_option("--k", config.k, "Polynomial order")->check(CLI::Range(1, 16));
  app.add_option("--mesh-n", config.mesh_n, "Structured mesh subdivisions")
      ->check(CLI::Range(1, 4096));
  app.add_option("--levels", config.levels, "Refinement levels")
      ->check(CLI::Range(1, 16));
  app.add_option("--nu", config.nu, "Viscosity")
      ->check(CLI::PositiveNumber);
  app.add_option("--nus", config.nus, "Viscosity list for nu-sweep")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  app.add_option("--mode", config.mode, "Velocity space conformity")
      ->check(CLI::IsMember({"relaxed", "full"}));
  app.add_option("--variant", config.variant, "Load treatment")
      ->check(CLI::IsMember({"basic", "pr"}));
  app.add_flag("--reconstruct", config.reconstruct,
               "Apply the averaging reconstruction to the solution");
  app.add_option("--lambda", config.lambda, "Tangential jump penalty")
      ->check(CLI::PositiveNumber);
  app.add_flag("--reduced-space", config.reduced_space,
               "Drop divergence-carrying cell dofs and non-constant pressures");
  app.add_option("--output", config.output, "Output file (default: stdout)");
  app.add_option("--format", config.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return -1;
}

int run(const RunConfig& config, std::ostream& fallback_out) {
  if (const char* threads = std::getenv("STOKES_HDG_THREADS"))
    Eigen::setNbThreads(std::max(1, std::atoi(threads)));

  validate(config);

  bool failed = false;
  Table table;
  if (config.command == "solve")
    table = cmd_solve(config);
  else if (config.command == "convergence")
    table = cmd_convergence(config);
  else if (config.command == "nu-sweep")
    table = cmd_nu_sweep(config);
  else if (config.command == "counts")
    table = cmd_counts(config);
  else if (config.command == "basis-check")
    table = cmd_basis_check(config, &failed);
  else
    throw std::invalid_argument("unknown command: " + config.command);

  std::ofstream file;
  std::ostream* out = &fallback_out;
  if (!config.output.empty()) {
    file.open(config.output, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + config.output);
    out = &file;
  }
  if (config.format == "json")
    write_json(table, *out);
  else
    write_csv(table, *out);
  out->flush();

  if (failed) {
    std::cerr << "basis-check: orthogonality violation above 1e-12\n";
    return 3;
  }
  return 0;
}

}  // namespace stokeshdg::cli
