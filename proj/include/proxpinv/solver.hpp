#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "proxpinv/core.hpp"
#include "proxpinv/errors.hpp"
#include "proxpinv/problem.hpp"

namespace proxpinv {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ConstantMu {
  double mu = 1.0;
};

/// mu_k = mu0 * gamma^k. gamma < 1 gives large early steps and small late ones.
struct GeometricMu {
  double mu0 = 1.0;
  double gamma = 1.0;
};

/// mu_k is the k-th entry; running past the end is a configuration error.
struct CustomMu {
  std::vector<double> values;
};

using MuSchedule = std::variant<ConstantMu, GeometricMu, CustomMu>;

enum class InnerMode { exact, inexact, armijo };

inline std::string_view to_string(InnerMode mode) {
  switch (mode) {
    case InnerMode::exact: return "exact";
    case InnerMode::inexact: return "inexact";
    case InnerMode::armijo: return "armijo";
  }
  return "unknown";
}

inline InnerMode parse_inner_mode(std::string_view s) {
  if (s == "exact") return InnerMode::exact;
  if (s == "inexact") return InnerMode::inexact;
  if (s == "armijo") return InnerMode::armijo;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected exact, inexact or armijo)");
}

struct ProxConfig {
  MuSchedule mu_schedule = ConstantMu{1.0};
  double eps1 = 1e-8;  ///< tolerance on ||grad f(Phi_k)||_F
  double eps2 = 1e-8;  ///< tolerance on ||Phi_k - Phi_{k-1}||_F
  InnerMode mode = InnerMode::exact;
  double eps0 = 1e-2;  ///< inexact tolerances eps_k = eps0 * rho^k
  double rho = 0.5;
  double r = 2.0;
  double delta = 0.1;  ///< Armijo fraction
  int max_outer = 1000;
  std::optional<int> max_inner;  ///< defaults to 10 n

  int resolved_max_inner(Eigen::Index n) const {
    return max_inner ? *max_inner : static_cast<int>(10 * n);
  }
};

inline bool is_constant(const MuSchedule& s) { return std::holds_alternative<ConstantMu>(s); }

inline void validate(const ProxConfig& cfg) {
  auto finite_positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ConstantMu>) {
          if (!finite_positive(s.mu)) throw ConfigError("constant mu must be positive and finite");
        } else if constexpr (std::is_same_v<S, GeometricMu>) {
          if (!finite_positive(s.mu0) || !finite_positive(s.gamma)) {
            throw ConfigError("geometric schedule needs mu0 > 0 and gamma > 0");
          }
        } else {
          if (s.values.empty()) throw ConfigError("custom mu schedule is empty");
          for (double v : s.values) {
            if (!finite_positive(v)) throw ConfigError("custom mu values must be positive");
          }
        }
      },
      cfg.mu_schedule);
  if (!(cfg.eps1 >= 0.0) || !(cfg.eps2 >= 0.0)) {
    throw ConfigError("eps1 and eps2 must be nonnegative");
  }
  if (!finite_positive(cfg.eps0)) throw ConfigError("eps0 must be positive");
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) {
    throw ConfigError("rho must lie in (0, 1) so that the tolerances eps_k are summable");
  }
  if (!(cfg.r > 1.0) || !std::isfinite(cfg.r)) throw ConfigError("r must exceed 1");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (cfg.max_outer < 1) throw ConfigError("max_outer must be positive");
  if (cfg.max_inner && *cfg.max_inner < 1) throw ConfigError("max_inner must be positive");
}

/// mu_k for outer iteration k (0-based).
inline double mu_value(const ProxConfig& cfg, int k) {
  if (k < 0 || k >= cfg.max_outer) {
    throw ConfigError("mu requested for iteration " + std::to_string(k) + " beyond max_outer");
  }
  const double mu = std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ConstantMu>) {
          return s.mu;
        } else if constexpr (std::is_same_v<S, GeometricMu>) {
          return s.mu0 * std::pow(s.gamma, k);
        } else {
          if (static_cast<std::size_t>(k) >= s.values.size()) {
            throw ConfigError("custom mu schedule exhausted at iteration " + std::to_string(k));
          }
          return s.values[static_cast<std::size_t>(k)];
        }
      },
      cfg.mu_schedule);
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ConfigError("mu schedule produced a non-positive value at iteration " +
                      std::to_string(k));
  }
  return mu;
}

inline double eps_value(const ProxConfig& cfg, int k) { return cfg.eps0 * std::pow(cfg.rho, k); }

// ---------------------------------------------------------------------------
// State and telemetry
// ---------------------------------------------------------------------------

struct IterationState {
  int k = 0;
  Iterate phi;
  Iterate phi_prev;
  double delta_norm = 0.0;
  double grad_norm = 0.0;
};

/// Record k describes the step Phi_k -> Phi_{k+1}.
struct IterationRecord {
  int k = 0;
  double mu = 0.0;
  double f = 0.0;           ///< f(Phi_{k+1})
  double grad_norm = 0.0;   ///< ||grad f(Phi_{k+1})||_F
  double delta_norm = 0.0;  ///< ||Phi_{k+1} - Phi_k||_F
  std::optional<double> rate_ratio;  ///< ||Delta_{k+1}|| / ||Delta_k||
  int inner_iterations = 0;
};

enum class Termination { converged, max_outer_reached, inner_failure };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_outer_reached: return "max_outer_reached";
    case Termination::inner_failure: return "inner_failure";
  }
  return "unknown";
}

struct SolveReport {
  Termination termination = Termination::max_outer_reached;
  int iterations = 0;
  std::vector<IterationRecord> history;
  Iterate final;
  std::string message;  ///< set on inner_failure
};

/// Called once per outer step with (k, mu_k, Phi_k, Phi_{k+1}).
using SolveObserver =
    std::function<void(int, double, const Iterate&, const Iterate&)>;

/// Both outer criteria must hold: ||grad f(Phi_k)|| <= eps1 and ||Phi_k - Phi_{k-1}|| <= eps2.
inline bool outer_stop(const IterationState& state, const ProxConfig& cfg) {
  return state.grad_norm <= cfg.eps1 && state.delta_norm <= cfg.eps2;
}

/// f(Phi_{k+1}) - f(Phi_k) <= delta <grad f(Phi_{k+1}), Phi_{k+1} - Phi_k>_F, with the
/// objective change supplied directly.
inline bool armijo_accept_increment(double f_increment, const Iterate& grad_next,
                                    const Iterate& step, double delta_param) {
  return f_increment <= delta_param * frobenius_dot(grad_next, step);
}

inline bool armijo_accept(double f_next, double f_curr, const Iterate& grad_next,
                          const Iterate& step, double delta_param) {
  return armijo_accept_increment(f_next - f_curr, grad_next, step, delta_param);
}

/// Inner CG stopped at the first iterate (after at least one CG iteration) that
/// passes the Armijo-like test.
///
/// For the quadratic f the test is evaluated through the exact identities
///   f(Phi + D) - f(Phi) = <grad f(Phi), D> + 1/2 ||M D||^2,
///   grad f(Phi + D) = grad f(Phi) + M^T M D,
/// since subtracting two objective values near the optimum cancels catastrophically.
inline InnerSolve prox_step_armijo(const ProblemData& p, double mu, const Iterate& current,
                                   double delta_param, int inner_cap) {
  if (!(delta_param > 0.0 && delta_param < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  const Matrix& m = p.matrix();
  const Iterate grad_curr = gradient(p, current);
  return prox_inner_cg(p, mu, current, inner_cap,
                       [&](const Iterate&, const Matrix& d, double) {
                         const Matrix md = m * d;
                         const double increment =
                             frobenius_dot(grad_curr, d) + 0.5 * md.squaredNorm();
                         const Iterate grad_next = grad_curr + m.transpose() * md;
                         return armijo_accept_increment(increment, grad_next, d, delta_param);
                       });
}

// ---------------------------------------------------------------------------
// Outer loop
// ---------------------------------------------------------------------------

inline SolveReport solve(const ProblemData& p, const Iterate& phi0, const ProxConfig& cfg,
                         const SolveObserver& observer = {}) {
  validate(cfg);
  require_iterate_shape(p, phi0, "solve");
  if (!all_finite(phi0)) throw InputError("initial iterate contains non-finite entries");

  const int max_inner = cfg.resolved_max_inner(p.cols());

  SolveReport report;
  report.history.reserve(static_cast<std::size_t>(std::min(cfg.max_outer, 4096)));

  IterationState state;
  state.phi = phi0;
  state.phi_prev = phi0;
  state.grad_norm = gradient(p, phi0).norm();

  std::optional<ProxOperators> ops;
  double previous_delta = 0.0;

  for (int k = 0; k < cfg.max_outer; ++k) {
    const double mu = mu_value(cfg, k);
    Iterate next;
    int inner = 0;

    if (cfg.mode == InnerMode::exact) {
      // Rebuilt only when mu changes; a constant schedule factorizes once.
      if (!ops || ops->mu() != mu) ops.emplace(build_prox_operators(p, mu));
      next = prox_step_exact(*ops, p, state.phi);
    } else {
      try {
        InnerSolve step = cfg.mode == InnerMode::inexact
                              ? prox_step_inexact(p, mu, state.phi, eps_value(cfg, k), cfg.r,
                                                  max_inner)
                              : prox_step_armijo(p, mu, state.phi, cfg.delta, max_inner);
        next = std::move(step.next);
        inner = step.iterations;
      } catch (const NonConvergenceError& e) {
        report.termination = Termination::inner_failure;
        report.message = "outer iteration " + std::to_string(k) + ": " + e.what();
        report.iterations = static_cast<int>(report.history.size());
        report.final = state.phi;
        return report;
      }
    }

    if (observer) observer(k, mu, state.phi, next);

    IterationRecord rec;
    rec.k = k;
    rec.mu = mu;
    rec.f = objective(p, next);
    rec.delta_norm = (next - state.phi).norm();
    rec.grad_norm = gradient(p, next).norm();
    if (k > 0 && previous_delta > 0.0) rec.rate_ratio = rec.delta_norm / previous_delta;
    rec.inner_iterations = inner;
    report.history.push_back(rec);
    previous_delta = rec.delta_norm;

    state.phi_prev = std::move(state.phi);
    state.phi = std::move(next);
    state.k = k + 1;
    state.delta_norm = rec.delta_norm;
    state.grad_norm = rec.grad_norm;

    if (outer_stop(state, cfg)) {
      report.termination = Termination::converged;
      break;
    }
  }

  report.iterations = static_cast<int>(report.history.size());
  report.final = std::move(state.phi);
  return report;
}

/// Empirical rate: the first rate_ratio that agrees with its predecessor to
/// relative `stability`. Returns the record index and the ratio.
struct RateEstimate {
  std::size_t index = 0;
  double rate = 0.0;
};

inline std::optional<RateEstimate> estimate_rate(const SolveReport& report,
                                                 double stability = 1e-6) {
  for (std::size_t i = 1; i < report.history.size(); ++i) {
    const auto& prev = report.history[i - 1].rate_ratio;
    const auto& cur = report.history[i].rate_ratio;
    if (prev && cur && std::abs(*cur - *prev) <= stability * std::abs(*cur)) {
      return RateEstimate{i, *cur};
    }
  }
  return std::nullopt;
}

}  // namespace proxpinv
