#pragma once

// SEP-minimizing constellation design under the ML-G detector:
//   minimize P_e(X; S, Omega, m)  s.t.  (1/M) sum |x_i|^2 <= 1,
// by rand/1/bin differential evolution over the 2M real coordinates followed
// by a derivative-free coordinate refinement. The SEP objective is a Monte
// Carlo estimate on one frozen set of channel realizations, so every
// candidate is compared on common random numbers.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "imlab/constellation.hpp"
#include "imlab/detector.hpp"
#include "imlab/interference.hpp"
#include "imlab/monte_carlo.hpp"

namespace imlab {

struct OptimizerConfig {
  int population = 0;         // 0: 15 * 2M
  int generations = 300;
  double diff_weight = 0.7;   // F
  double crossover = 0.9;     // CR
  double delta_min = 0.0;     // 0: 0.1 / sqrt(M)
  std::uint64_t eval_trials = 20000;
  std::uint64_t seed = 0;
  int refine_iters = 200;
  double refine_step0 = 0.05;
  /// Weight of the squared minimum-distance violation.
  double penalty_weight = 10.0;
  /// Refinement step halves after this many consecutive rejections.
  int refine_patience = 25;
  /// Start the population from PSK/QAM/PAM of the same order in addition to
  /// random points.
  bool seed_reference = true;
  MlgOptions detector{1e-3, 4.0, {true, 0.0}};
  int threads = 0;
};

/// Uniformly rescales to mean energy exactly 1. Throws DomainError for an
/// all-zero set.
Eigen::VectorXcd project_energy(const Eigen::VectorXcd& points);

/// sum_{i<j} max(0, delta_min - |x_i - x_j|)^2.
double spacing_violation(const Eigen::VectorXcd& points, double delta_min);

/// Everything the objective holds fixed across candidates.
struct ObjectiveContext {
  ChannelParams channel;
  InterferenceParams interference;
  Detector detector;
  std::vector<ChannelDraw> crn;  // frozen realizations
  double delta_min;
  double penalty_weight;
};

ObjectiveContext make_objective_context(int order, const ChannelParams& ch,
                                        const InterferenceParams& intf,
                                        const OptimizerConfig& cfg);

struct ObjectiveValue {
  double sep;
  double violation;
  double penalized;
};

/// Projects energy, estimates ML-G SEP on the frozen realizations, and adds
/// penalty_weight * spacing_violation.
ObjectiveValue objective(const Eigen::VectorXcd& points, const ObjectiveContext& ctx);

struct OptimizeResult {
  Constellation constellation;
  ObjectiveValue best;
  /// Best objective after each generation (index 0 = initial population),
  /// then after each refinement iteration.
  std::vector<double> trace;
  int generations_run = 0;
};

/// Throws ConfigError for invalid or infeasible settings.
OptimizeResult optimize_constellation(int order, const ChannelParams& ch,
                                      const InterferenceParams& intf, const OptimizerConfig& cfg);

/// `generation,best_objective`
void write_trace_csv(const std::vector<double>& trace, std::ostream& out);

}  // namespace imlab
