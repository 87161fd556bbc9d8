#pragma once

#include <cstddef>

namespace war {

/// Residual of the sampled-graph balance equation for the unknown full-graph
/// covered-edge count x of one metapath hop:
///
///   p * [N - x + x * (1 - p^(L-1))^(inst / (p^L * x))] - zero_obs
///
/// N is the full-graph count of edges of the hop's type, inst the number of
/// metapath instances observed on the sampled graph, zero_obs the number of
/// sampled edges of that type in no instance. Decreasing in x.
double correction_residual(double x, double p, std::size_t length, double full_type_count,
                           double sampled_instances, double zero_observed);

struct CorrectionResult {
  double covered = 0.0;  ///< estimated full-graph covered count
  bool fallback = false;  ///< no sign change in the bracket; covered = observed / p
  int iterations = 0;
};

struct CorrectionOptions {
  double residual_tolerance = 1e-9;
  int max_iterations = 200;
};

/// Brent root of correction_residual on [max(observed_covered, 1), N]. At p == 1
/// returns N - zero_obs exactly. Throws NumericError on non-finite evaluations.
CorrectionResult solve_correction(double p, std::size_t length, double full_type_count,
                                  double sampled_instances, double zero_observed,
                                  double observed_covered, const CorrectionOptions& options = {});

}  // namespace war
