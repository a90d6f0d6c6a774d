// Pseudo-inverse of an ill-conditioned Hilbert matrix by proximal iteration.
//
//   hilbert_demo [n] [mu]

#include <cstdio>
#include <cstdlib>

#include "proxpinv.hpp"

int main(int argc, char** argv) {
  using namespace proxpinv;

  const int n = argc > 1 ? std::atoi(argv[1]) : 5;
  const double mu = argc > 2 ? std::atof(argv[2]) : 1e11;

  try {
    const ProblemData p = matio::generate(matio::Hilbert{n});

    ProxConfig cfg;
    cfg.mu_schedule = ConstantMu{mu};
    cfg.eps1 = 1e-8;
    cfg.eps2 = 1e-6;

    // Phi_0 = 0 makes the limit the pseudo-inverse rather than another minimizer.
    const SolveReport report = solve(p, Iterate::Zero(n, n), cfg);

    std::printf("%4s %12s %12s %12s %10s\n", "k", "f", "grad_norm", "delta_norm", "ratio");
    for (const auto& r : report.history) {
      std::printf("%4d %12.4e %12.4e %12.4e %10.6f\n", r.k, r.f, r.grad_norm, r.delta_norm,
                  r.rate_ratio.value_or(0.0));
    }

    const Iterate pinv = oracle::svd_pseudo_inverse(p);
    // Hilbert alpha_1 drops below the default eigenvalue cut of 1e-10 lambda_max from n = 5 on.
    const auto info = oracle::spectral_info(p, 1e-14);
    const auto rates = oracle::theoretical_rates(info, mu);
    std::printf("\ntermination      %s after %d steps\n", std::string(to_string(report.termination)).c_str(),
                report.iterations);
    std::printf("relative error   %.3e against the SVD pseudo-inverse\n",
                (report.final - pinv).norm() / pinv.norm());
    std::printf("alpha_1          %.6e\n", info.alpha1);
    std::printf("power rate       %.6f\n", rates.power_rate);
    if (const auto est = estimate_rate(report)) std::printf("measured rate    %.6f\n", est->rate);
    return report.termination == Termination::converged ? 0 : 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "hilbert_demo: %s\n", e.what());
    return 1;
  }
}
