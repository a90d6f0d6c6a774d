// proxpinv: pseudo-inverse by proximal iteration, matrix generation, rate analysis.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_support.hpp"

namespace {

using namespace proxpinv;
using namespace proxpinv::cli;

struct InputOptions {
  std::string path;
  std::string format;
  std::string gen;
  std::uint64_t gen_seed = 0;
};

struct SolverOptions {
  double mu = 1.0;
  std::string mu_geometric;
  double eps1 = 1e-8;
  double eps2 = 1e-8;
  std::string mode = "exact";
  double r = 2.0;
  double eps0 = 1e-2;
  double rho = 0.5;
  double delta = 0.1;
  int max_iter = 1000;
};

void add_input_options(CLI::App& app, InputOptions& in, const std::string& seed_flag) {
  auto* input = app.add_option("--input", in.path, "Matrix file");
  auto* gen = app.add_option("--gen", in.gen, "Generated matrix: hilbert:N, rank-deficient:M,N,R,COND, sv:M,N:S1,...");
  input->excludes(gen);
  app.add_option("--format", in.format, "Input format: mm or csv (default from extension)");
  app.add_option(seed_flag, in.gen_seed, "Seed for --gen");
}

void add_solver_options(CLI::App& app, SolverOptions& s, bool rates) {
  auto* mu = app.add_option("--mu", s.mu, "Constant proximal parameter");
  auto* geo = app.add_option("--mu-geometric", s.mu_geometric, "Geometric schedule MU0,GAMMA");
  mu->excludes(geo);
  app.add_option("--eps1", s.eps1, "Gradient tolerance")->capture_default_str();
  app.add_option("--eps2", s.eps2, "Step tolerance")->capture_default_str();
  app.add_option("--max-iter", s.max_iter, "Outer iteration cap")->capture_default_str();
  if (rates) return;
  app.add_option("--mode", s.mode, "Inner mode: exact, inexact or armijo")->capture_default_str();
  app.add_option("--r", s.r, "Inexact exponent, > 1")->capture_default_str();
  app.add_option("--eps0", s.eps0, "Inexact tolerance scale")->capture_default_str();
  app.add_option("--rho", s.rho, "Inexact tolerance ratio in (0,1)")->capture_default_str();
  app.add_option("--delta", s.delta, "Armijo fraction in (0,1)")->capture_default_str();
}

ProxConfig make_config(const SolverOptions& s) {
  ProxConfig cfg;
  if (s.mu_geometric.empty()) {
    cfg.mu_schedule = ConstantMu{s.mu};
  } else {
    const auto v = parse_list<double>(s.mu_geometric, "--mu-geometric", 2);
    cfg.mu_schedule = GeometricMu{v[0], v[1]};
  }
  cfg.eps1 = s.eps1;
  cfg.eps2 = s.eps2;
  cfg.mode = parse_inner_mode(s.mode);
  cfg.r = s.r;
  cfg.eps0 = s.eps0;
  cfg.rho = s.rho;
  cfg.delta = s.delta;
  cfg.max_outer = s.max_iter;
  validate(cfg);
  return cfg;
}

struct LoadedInput {
  ProblemData problem;
  ordered_json provenance;
};

LoadedInput load_input(const InputOptions& in) {
  if (in.path.empty() == in.gen.empty()) {
    throw ConfigError("exactly one of --input or --gen is required");
  }
  if (!in.path.empty()) {
    const matio::Format fmt = resolve_format(in.format, in.path);
    ProblemData p = matio::read_matrix(in.path, fmt);
    ordered_json prov = {{"source", "file"}, {"path", in.path}, {"format", matio::to_string(fmt)}};
    prov["rows"] = p.rows();
    prov["cols"] = p.cols();
    prov["content_hash"] = content_hash(p.matrix());
    return {std::move(p), std::move(prov)};
  }
  ProblemData p = matio::generate(parse_matrix_spec(in.gen, in.gen_seed));
  ordered_json prov = {{"source", "generated"}, {"spec", in.gen}, {"seed", in.gen_seed}};
  prov["rows"] = p.rows();
  prov["cols"] = p.cols();
  prov["content_hash"] = content_hash(p.matrix());
  return {std::move(p), std::move(prov)};
}

void write_json(const ordered_json& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::string command_echo(int argc, char** argv) {
  std::string out;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) out += ' ';
    out += argv[i];
  }
  return out;
}

/// Maps library errors onto the exit-code contract.
template <typename F>
int guarded(const char* command, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "proxpinv " << command << ": " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "proxpinv " << command << ": " << e.what() << '\n';
    return exit_error;
  }
}

struct PinvOptions {
  InputOptions input;
  SolverOptions solver;
  std::string phi0 = "zero";
  std::string output;
  std::string output_format;
  std::string report;
  bool oracle = false;
  double rank_tol = oracle::default_rank_tol;
};

ordered_json oracle_json(const ProblemData& p, const Iterate& phi0, const Iterate& final_iterate,
                         double mu0, double rank_tol) {
  const Iterate pinv = oracle::svd_pseudo_inverse(p, rank_tol);
  const Iterate limit = oracle::limit_oracle(p, phi0, rank_tol);
  const double pinv_norm = pinv.norm();
  const double limit_norm = limit.norm();
  const double abs_err = (final_iterate - pinv).norm();
  const double limit_err = (final_iterate - limit).norm();
  ordered_json out = {
      {"absolute_error", abs_err},
      {"relative_error", pinv_norm > 0.0 ? ordered_json(abs_err / pinv_norm) : ordered_json(nullptr)},
      {"limit_absolute_error", limit_err},
      {"limit_relative_error",
       limit_norm > 0.0 ? ordered_json(limit_err / limit_norm) : ordered_json(nullptr)}};
  try {
    const auto info = oracle::spectral_info(p, rank_tol);
    const auto rates = oracle::theoretical_rates(info, mu0);
    out["alpha1"] = info.alpha1;
    out["lambda_max"] = info.lambda_max;
    out["numerical_rank"] = info.numerical_rank;
    out["power_rate"] = rates.power_rate;
    out["linear_bound"] = rates.linear_bound;
  } catch (const SpectralError&) {
    out["alpha1"] = nullptr;
    out["lambda_max"] = nullptr;
    out["numerical_rank"] = 0;
    out["power_rate"] = nullptr;
    out["linear_bound"] = nullptr;
  }
  return out;
}

int run_pinv(const PinvOptions& o, const std::string& echo) {
  const ProxConfig cfg = make_config(o.solver);
  oracle::detail::require_rank_tol(o.rank_tol);
  const LoadedInput in = load_input(o.input);
  const ProblemData& p = in.problem;
  const Iterate phi0 = make_phi0(o.phi0, p);

  ordered_json doc;
  doc["manifest"] = {{"command", echo},
                     {"version", version},
                     {"config", config_json(cfg, p.cols())},
                     {"input", in.provenance},
                     {"phi0", o.phi0},
                     {"seed", o.input.gen_seed},
                     {"rank_tol", o.rank_tol}};
  seal_manifest(doc);

  const SolveReport report = solve(p, phi0, cfg);
  doc["termination"] = to_string(report.termination);
  doc["iterations"] = report.iterations;
  doc["message"] = report.message;
  doc["history"] = history_json(report);
  if (o.oracle) doc["oracle"] = oracle_json(p, phi0, report.final, mu_value(cfg, 0), o.rank_tol);

  if (!o.output.empty()) {
    matio::write_matrix(report.final, o.output, resolve_format(o.output_format, o.output));
  }
  if (!o.report.empty()) write_json(doc, o.report);

  std::cout << "termination " << to_string(report.termination) << "\niterations " << report.iterations
            << '\n';
  if (!report.history.empty()) {
    const auto& last = report.history.back();
    std::cout << "grad_norm " << last.grad_norm << "\ndelta_norm " << last.delta_norm << '\n';
  }
  if (o.oracle) std::cout << "relative_error " << doc["oracle"]["relative_error"].dump() << '\n';

  switch (report.termination) {
    case Termination::converged:
      return exit_ok;
    case Termination::max_outer_reached:
      return exit_not_met;
    case Termination::inner_failure:
      std::cerr << "proxpinv pinv: " << report.message << '\n';
      return exit_error;
  }
  return exit_error;
}

struct GenOptions {
  int hilbert = 0;
  std::string rank_deficient;
  std::string sv;
  std::string dims;
  std::uint64_t seed = 0;
  std::string output;
  std::string format;
};

matio::MatrixSpec gen_spec(const GenOptions& o) {
  const int chosen = (o.hilbert != 0) + !o.rank_deficient.empty() + !o.sv.empty();
  if (chosen != 1) throw ConfigError("exactly one of --hilbert, --rank-deficient or --sv is required");
  if (o.hilbert != 0) return matio::Hilbert{o.hilbert};
  if (!o.rank_deficient.empty()) return parse_matrix_spec("rank-deficient:" + o.rank_deficient, o.seed);
  if (o.dims.empty()) throw ConfigError("--sv requires --dims M,N");
  return parse_matrix_spec("sv:" + o.dims + ":" + o.sv, o.seed);
}

int run_gen(const GenOptions& o) {
  const ProblemData p = matio::generate(gen_spec(o));
  if (!o.output.empty()) matio::write_matrix(p, o.output, resolve_format(o.format, o.output));

  const Vector sigma = oracle::singular_values(p.matrix());
  const double cutoff = oracle::default_rank_tol * (sigma.size() > 0 ? sigma(0) : 0.0);
  int rank = 0;
  while (rank < sigma.size() && sigma(rank) > cutoff) ++rank;

  ordered_json out = {{"rows", p.rows()},
                      {"cols", p.cols()},
                      {"singular_values", std::vector<double>(sigma.data(), sigma.data() + sigma.size())},
                      {"numerical_rank", rank},
                      {"condition", rank > 0 ? ordered_json(sigma(0) / sigma(rank - 1)) : ordered_json(nullptr)},
                      {"content_hash", content_hash(p.matrix())}};
  std::cout << out.dump(2) << '\n';
  return exit_ok;
}

struct RatesOptions {
  InputOptions input;
  SolverOptions solver;
  std::uint64_t seed = 42;
  double rate_tol = 1e-4;
  double rank_tol = oracle::default_rank_tol;
  std::string report;
};

int run_rates(const RatesOptions& o, const std::string& echo) {
  ProxConfig cfg = make_config(o.solver);
  if (!is_constant(cfg.mu_schedule)) throw ConfigError("rates requires a constant --mu");
  if (!(o.rate_tol >= 0.0)) throw ConfigError("--rate-tol must be nonnegative");
  oracle::detail::require_rank_tol(o.rank_tol);
  const LoadedInput in = load_input(o.input);
  const ProblemData& p = in.problem;
  const double mu = std::get<ConstantMu>(cfg.mu_schedule).mu;
  const auto info = oracle::spectral_info(p, o.rank_tol);
  const auto theory = oracle::theoretical_rates(info, mu);

  matio::GaussianStream rng(o.seed);
  const Iterate phi0 = rng.matrix(p.cols(), p.rows());

  ordered_json doc;
  doc["manifest"] = {{"command", echo},
                     {"version", version},
                     {"config", config_json(cfg, p.cols())},
                     {"input", in.provenance},
                     {"phi0", "random:" + std::to_string(o.seed)},
                     {"seed", o.seed},
                     {"rate_tol", o.rate_tol},
                     {"rank_tol", o.rank_tol}};
  seal_manifest(doc);

  std::vector<std::optional<double>> distances;
  std::optional<double> initial_e1_fraction;
  const SolveReport report = solve(p, phi0, cfg, [&](int k, double, const Iterate& cur, const Iterate& next) {
    const Iterate step = next - cur;
    if (k == 0 && step.norm() > 0.0) {
      initial_e1_fraction = oracle::project_onto_e1(info, step).norm() / step.norm();
    }
    distances.push_back(step.norm() > 0.0 ? std::optional(oracle::direction_distance(info, step))
                                          : std::nullopt);
  });

  ordered_json history = ordered_json::array();
  std::optional<double> min_distance;
  for (std::size_t i = 0; i < report.history.size(); ++i) {
    const auto& r = report.history[i];
    history.push_back({{"k", r.k},
                       {"rate_ratio", optional_number(r.rate_ratio)},
                       {"delta_norm", r.delta_norm},
                       {"direction_distance", optional_number(distances[i])}});
    if (distances[i] && (!min_distance || *distances[i] < *min_distance)) min_distance = distances[i];
  }

  const auto estimate = estimate_rate(report);
  const bool pass = estimate && std::abs(estimate->rate - theory.power_rate) <= o.rate_tol;
  doc["termination"] = to_string(report.termination);
  doc["iterations"] = report.iterations;
  doc["alpha1"] = info.alpha1;
  doc["power_rate"] = theory.power_rate;
  doc["linear_bound"] = theory.linear_bound;
  doc["measured_rate"] = estimate ? ordered_json(estimate->rate) : ordered_json(nullptr);
  doc["measured_k"] = estimate ? ordered_json(report.history[estimate->index].k) : ordered_json(nullptr);
  doc["direction_distance"] = {
      {"at_estimate", estimate ? optional_number(distances[estimate->index]) : ordered_json(nullptr)},
      {"terminal", distances.empty() ? ordered_json(nullptr) : optional_number(distances.back())},
      {"minimum", optional_number(min_distance)}};
  // Near zero means the start is almost orthogonal to E_1 and the rate may settle late.
  doc["initial_e1_fraction"] = optional_number(initial_e1_fraction);
  doc["pass"] = pass;
  doc["history"] = std::move(history);

  if (o.report.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    write_json(doc, o.report);
    std::cout << (pass ? "pass" : "fail") << " measured " << doc["measured_rate"].dump() << " power_rate "
              << theory.power_rate << '\n';
  }
  return pass ? exit_ok : exit_not_met;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moore-Penrose pseudo-inverse by proximal point iteration"};
  app.set_version_flag("--version", std::string(proxpinv::version));
  app.require_subcommand(1);

  PinvOptions pinv_opts;
  auto* pinv = app.add_subcommand("pinv", "Compute the pseudo-inverse of a matrix");
  add_input_options(*pinv, pinv_opts.input, "--seed");
  add_solver_options(*pinv, pinv_opts.solver, false);
  pinv->add_option("--phi0", pinv_opts.phi0, "Start: zero, random:SEED or file:PATH")->capture_default_str();
  pinv->add_option("--output", pinv_opts.output, "Write the final iterate here");
  pinv->add_option("--output-format", pinv_opts.output_format, "mm or csv (default from extension)");
  pinv->add_option("--report", pinv_opts.report, "Write the JSON report here");
  pinv->add_flag("--oracle", pinv_opts.oracle, "Compare against the SVD pseudo-inverse");
  pinv->add_option("--rank-tol", pinv_opts.rank_tol, "Relative rank cut for the oracle")->capture_default_str();

  GenOptions gen_opts;
  auto* gen = app.add_subcommand("gen", "Generate a test matrix");
  gen->add_option("--hilbert", gen_opts.hilbert, "Hilbert matrix of order N");
  gen->add_option("--rank-deficient", gen_opts.rank_deficient, "M,N,R,COND");
  gen->add_option("--sv", gen_opts.sv, "Prescribed singular values S1,S2,...");
  gen->add_option("--dims", gen_opts.dims, "M,N for --sv");
  gen->add_option("--seed", gen_opts.seed, "Generator seed")->capture_default_str();
  gen->add_option("--output", gen_opts.output, "Write the matrix here");
  gen->add_option("--format", gen_opts.format, "mm or csv (default from extension)");

  RatesOptions rates_opts;
  auto* rates = app.add_subcommand("rates", "Measure the linear rate against theory");
  add_input_options(*rates, rates_opts.input, "--gen-seed");
  add_solver_options(*rates, rates_opts.solver, true);
  rates_opts.solver.max_iter = 200;
  rates->add_option("--seed", rates_opts.seed, "Seed of the random start")->capture_default_str();
  rates->add_option("--rate-tol", rates_opts.rate_tol, "Allowed |measured - power_rate|")->capture_default_str();
  rates->add_option("--rank-tol", rates_opts.rank_tol, "Relative eigenvalue cut for alpha_1")->capture_default_str();
  rates->add_option("--report", rates_opts.report, "Write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  const std::string echo = command_echo(argc, argv);
  if (pinv->parsed()) return guarded("pinv", [&] { return run_pinv(pinv_opts, echo); });
  if (gen->parsed()) return guarded("gen", [&] { return run_gen(gen_opts); });
  return guarded("rates", [&] { return run_rates(rates_opts, echo); });
}
