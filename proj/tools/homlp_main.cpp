#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "homlp/colgen.hpp"
#include "homlp/mps.hpp"
#include "homlp/pipeline.hpp"
#include "homlp/stats.hpp"

namespace {

enum Exit { Ok = 0, IoError = 1, ParseError = 2, NumericalError = 3, ConfigError = 4 };

struct Config {
  std::string input, output, format = "auto";
  bool presolve = true;
  homlp::KKTBackend backend = homlp::KKTBackend::Ldl;
  double tol_p = 0, tol_d = 0, tol_g = 0, tol_i = 0;  // 0 keeps the scalar's default
  int max_iter = 100;
  double time_limit = 0;
  std::string precision = "double";
  std::uint64_t seed = 1;
  std::string log_level = "info";
};

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoFailure("cannot write " + path);
}

bool structured_input(const Config& cfg) {
  if (cfg.format != "auto") return cfg.format == "block";
  const auto dot = cfg.input.rfind('.');
  return dot != std::string::npos && cfg.input.substr(dot) == ".ba";
}

template <class T>
homlp::Parameters<T> parameters(const Config& cfg) {
  homlp::Parameters<T> p;
  if (cfg.tol_p > 0) p.eps_p = T(cfg.tol_p);
  if (cfg.tol_d > 0) p.eps_d = T(cfg.tol_d);
  if (cfg.tol_g > 0) p.eps_g = T(cfg.tol_g);
  if (cfg.tol_i > 0) p.eps_i = T(cfg.tol_i);
  p.max_iterations = cfg.max_iter;
  if (cfg.time_limit > 0) p.time_limit = cfg.time_limit;
  return p;
}

template <class T>
int solve_structured(const Config& cfg, std::ostream* log) {
  std::istringstream in(read_file(cfg.input));
  auto inst = homlp::read_block_angular<T>(in);
  homlp::StandardLP<T> lp;
  lp.b.assign(inst.matrix->blocks(), T(1));
  lp.b.insert(lp.b.end(), inst.rhs.begin(), inst.rhs.end());
  lp.c = inst.cost;
  std::shared_ptr<const homlp::AbstractMatrix<T>> A = inst.matrix;
  if (cfg.backend != homlp::KKTBackend::BlockAngular)
    A = std::make_shared<homlp::SparseMatrix<T>>(inst.matrix->to_sparse());
  lp.A = A;
  homlp::KKTOptions ko;
  ko.backend = cfg.backend;
  auto kkt = homlp::make_kkt_solver<T>(A, ko);
  if (log && cfg.log_level == "debug") *log << "structured input, presolve not applied\n";
  const auto sol = homlp::solve(lp, parameters<T>(cfg), *kkt, log);
  std::vector<T> activity;
  if (!sol.x.empty()) {
    activity.assign(lp.num_rows(), T(0));
    A->mul(std::span<const T>(sol.x), std::span<T>(activity), T(1), T(0));
  }
  write_output(cfg.output, homlp::write_solution(sol, {}, {}, activity));
  return sol.status == homlp::Status::NumericalFailure ? NumericalError : Ok;
}

template <class T>
int solve_mps(const Config& cfg, std::ostream* log) {
  if (cfg.backend == homlp::KKTBackend::BlockAngular)
    throw homlp::UnsupportedMatrixKind("the block-angular backend needs structured (.ba) input");
  const auto lp = homlp::parse_mps<T>(read_file(cfg.input));
  homlp::PipelineOptions<T> opt;
  opt.presolve = cfg.presolve;
  opt.kkt.backend = cfg.backend;
  opt.params = parameters<T>(cfg);
  if (log && cfg.log_level == "debug")
    *log << "problem " << lp.name << "  rows " << lp.num_rows() << "  cols " << lp.num_cols() << "  presolve "
         << (cfg.presolve ? "on" : "off") << "\n";
  const auto res = homlp::solve_lp(lp, opt, log);
  write_output(cfg.output, homlp::write_solution(res.solution, lp.row_names, lp.col_names, res.row_activity));
  return res.solution.status == homlp::Status::NumericalFailure ? NumericalError : Ok;
}

template <class T>
int run_solve(const Config& cfg) {
  std::ostream* log = cfg.log_level == "quiet" ? nullptr : &std::cerr;
  return structured_input(cfg) ? solve_structured<T>(cfg, log) : solve_mps<T>(cfg, log);
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return IoError;
  } catch (const homlp::MpsError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return ParseError;
  } catch (const homlp::NumericalBreakdown& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return NumericalError;
  } catch (const homlp::DegenerateTau& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return NumericalError;
  } catch (const homlp::UnsupportedMatrixKind& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ConfigError;
  } catch (const homlp::InfeasibleBounds& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ParseError;
  } catch (const homlp::PreconditionError& e) {
    // structured files report format problems as precondition failures
    std::cerr << "error: " << e.what() << "\n";
    return ParseError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return NumericalError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homogeneous interior-point LP solver"};
  app.require_subcommand(1);

  Config cfg;
  auto* solve = app.add_subcommand("solve", "Solve an LP given in MPS or the block-angular text format");
  solve->add_option("input", cfg.input, "Input file (.mps, or .ba for block-angular)")->required();
  solve->add_option("-o,--output", cfg.output, "Solution file (default: standard output)");
  solve->add_option("--format", cfg.format, "Input format")->check(CLI::IsMember({"auto", "mps", "block"}));
  std::string presolve = "on";
  solve->add_option("--presolve", presolve, "Presolve and scaling")->check(CLI::IsMember({"on", "off"}));
  std::string kkt = "ldl";
  solve->add_option("--kkt", kkt, "Linear solver backend")
      ->check(CLI::IsMember({"ldl", "dense", "block-angular"}));
  solve->add_option("--tol-p", cfg.tol_p, "Primal feasibility tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--tol-d", cfg.tol_d, "Dual feasibility tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--tol-g", cfg.tol_g, "Optimality gap tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--tol-i", cfg.tol_i, "Infeasibility tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--max-iter", cfg.max_iter, "Iteration limit")->check(CLI::Range(1, 1000000));
  solve->add_option("--time-limit", cfg.time_limit, "Time limit in seconds")->check(CLI::PositiveNumber);
  solve->add_option("--precision", cfg.precision, "Arithmetic")->check(CLI::IsMember({"double", "extended"}));
  solve->add_option("--seed", cfg.seed, "Random seed (kept for reproducible runs)");
  solve->add_option("--log-level", cfg.log_level, "Log verbosity on standard error")
      ->check(CLI::IsMember({"quiet", "info", "debug"}));

  std::vector<double> times;
  double shift = 10.0;
  auto* geo = app.add_subcommand("geomean", "Shifted geometric mean of run times");
  geo->add_option("times", times, "Times in seconds")->required()->check(CLI::NonNegativeNumber);
  geo->add_option("--shift", shift, "Shift")->check(CLI::NonNegativeNumber);

  std::size_t blocks = 64, linking = 8, columns = 4;
  double density = 1.0;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-master", "Write a random master problem in the block-angular format");
  gen->add_option("--blocks", blocks, "Number of blocks R")->check(CLI::Range(std::size_t(1), std::size_t(1) << 24));
  gen->add_option("--linking", linking, "Linking rows m0");
  gen->add_option("--density", density, "Density of linking coefficients in (0, 1]");
  gen->add_option("--columns", columns, "Columns per block")->check(CLI::Range(std::size_t(1), std::size_t(1) << 20));
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("-o,--output", gen_out, "Output file (default: standard output)");

  CLI11_PARSE(app, argc, argv);

  if (*solve) {
    cfg.presolve = presolve == "on";
    cfg.backend = kkt == "dense"           ? homlp::KKTBackend::Dense
                  : kkt == "block-angular" ? homlp::KKTBackend::BlockAngular
                                           : homlp::KKTBackend::Ldl;
    return guarded([&] { return cfg.precision == "extended" ? run_solve<homlp::Quad>(cfg) : run_solve<double>(cfg); });
  }
  if (*geo) {
    return guarded([&] {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.10g\n", homlp::shifted_geomean(times, shift));
      std::cout << buf;
      return int(Ok);
    });
  }
  return guarded([&] {
    const auto inst = homlp::generate_synthetic_master<double>(blocks, linking, density, gen_seed, columns);
    write_output(gen_out, homlp::write_block_angular(*inst.matrix, inst.cost, inst.rhs));
    return int(Ok);
  });
}
