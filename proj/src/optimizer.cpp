#include "imlab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

#include "imlab/csv.hpp"
#include "imlab/errors.hpp"
#include "imlab/parallel.hpp"

namespace imlab {

namespace {

// Stream id for the search's own randomness, disjoint from the CRN blocks.
constexpr std::uint64_t kSearchStream = 0x5EA2C40000000000ULL;

Eigen::VectorXcd to_points(const Eigen::Ref<const Eigen::VectorXd>& coords) {
  const Eigen::Index m = coords.size() / 2;
  Eigen::VectorXcd p(m);
  p.real() = coords.head(m);
  p.imag() = coords.tail(m);
  return p;
}

Eigen::VectorXd to_coords(const Eigen::VectorXcd& points) {
  const Eigen::Index m = points.size();
  Eigen::VectorXd c(2 * m);
  c.head(m) = points.real();
  c.tail(m) = points.imag();
  return c;
}

bool feasible(const ObjectiveValue& v) { return v.violation == 0.0; }

// Feasible beats infeasible; otherwise the penalized objective decides.
bool no_worse(const ObjectiveValue& a, const ObjectiveValue& b) {
  if (feasible(a) != feasible(b)) return feasible(a);
  return a.penalized <= b.penalized;
}

bool strictly_better(const ObjectiveValue& a, const ObjectiveValue& b) {
  if (feasible(a) != feasible(b)) return feasible(a);
  return a.penalized < b.penalized;
}

std::vector<Constellation> reference_constellations(int order) {
  std::vector<Constellation> refs{make_psk(order)};
  try {
    refs.push_back(make_qam(order));
  } catch (const DomainError&) {
  }
  refs.push_back(make_pam(order));
  return refs;
}

OptimizerConfig resolved(int order, OptimizerConfig cfg) {
  if (order < 2) throw ConfigError("optimize_constellation: order must be >= 2");
  if (cfg.population == 0) cfg.population = 15 * 2 * order;
  if (cfg.delta_min == 0.0) cfg.delta_min = 0.1 / std::sqrt(static_cast<double>(order));
  if (cfg.population < 4) throw ConfigError("population must be at least 4");
  if (cfg.generations < 1) throw ConfigError("generations must be positive");
  if (!(cfg.diff_weight > 0 && cfg.diff_weight < 2)) throw ConfigError("F must lie in (0, 2)");
  if (!(cfg.crossover > 0 && cfg.crossover < 1)) throw ConfigError("CR must lie in (0, 1)");
  if (cfg.eval_trials < 1) throw ConfigError("eval_trials must be positive");
  if (cfg.refine_iters < 0) throw ConfigError("refine_iters must be non-negative");
  if (!(cfg.refine_step0 > 0)) throw ConfigError("refine_step0 must be positive");
  if (cfg.refine_patience < 1) throw ConfigError("refine_patience must be positive");
  if (!(cfg.penalty_weight > 0)) throw ConfigError("penalty_weight must be positive");
  if (!(cfg.delta_min > 0 && cfg.delta_min < 2)) {
    throw ConfigError("delta_min must lie in (0, 2) at unit average energy");
  }
  double widest = 0.0;
  for (const auto& ref : reference_constellations(order)) {
    widest = std::max(widest, min_distance(ref.points));
  }
  if (cfg.delta_min >= widest) {
    std::ostringstream msg;
    msg << "delta_min " << cfg.delta_min << " is not attained by any reference "
        << order << "-point constellation (largest spacing " << widest << ")";
    throw ConfigError(msg.str());
  }
  return cfg;
}

}  // namespace

Eigen::VectorXcd project_energy(const Eigen::VectorXcd& points) {
  const double energy = points.size() > 0 ? mean_energy(points) : 0.0;
  if (!(energy > 0) || !std::isfinite(energy)) {
    throw DomainError("project_energy: point set has zero (or non-finite) energy");
  }
  return points / std::sqrt(energy);
}

double spacing_violation(const Eigen::VectorXcd& points, double delta_min) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    for (Eigen::Index j = i + 1; j < points.size(); ++j) {
      const double gap = delta_min - std::abs(points[i] - points[j]);
      if (gap > 0) total += gap * gap;
    }
  }
  return total;
}

ObjectiveContext make_objective_context(int order, const ChannelParams& ch,
                                        const InterferenceParams& intf,
                                        const OptimizerConfig& cfg) {
  MlgOptions mlg = cfg.detector;
  if (mlg.table.enabled && mlg.table.r_hi <= 0) {
    // Unit mean energy bounds every point by sqrt(M).
    mlg.table.r_hi = std::sqrt(ch.s_lin) * 2.0 * std::sqrt(static_cast<double>(order)) +
                     4.0 * std::sqrt(intf.omega()) + 8.0;
  }
  const InterferenceParams* source = ch.interference_enabled ? &intf : nullptr;
  return {ch,
          intf,
          Detector::mlg(intf, mlg),
          draw_channel_realizations(order, source, cfg.eval_trials, cfg.seed),
          cfg.delta_min > 0 ? cfg.delta_min : 0.1 / std::sqrt(static_cast<double>(order)),
          cfg.penalty_weight};
}

ObjectiveValue objective(const Eigen::VectorXcd& points, const ObjectiveContext& ctx) {
  const Eigen::VectorXcd projected = project_energy(points);
  const auto errors = count_errors(projected, ctx.channel, ctx.interference.omega(),
                                   std::span<const Detector>(&ctx.detector, 1), ctx.crn);
  const double sep = static_cast<double>(errors[0]) / static_cast<double>(ctx.crn.size());
  const double violation = spacing_violation(projected, ctx.delta_min);
  return {sep, violation, sep + ctx.penalty_weight * violation};
}

OptimizeResult optimize_constellation(int order, const ChannelParams& ch,
                                      const InterferenceParams& intf,
                                      const OptimizerConfig& config) {
  const OptimizerConfig cfg = resolved(order, config);
  const ObjectiveContext ctx = make_objective_context(order, ch, intf, cfg);
  const int np = cfg.population;
  const Eigen::Index dim = 2 * order;

  Rng rng = make_stream(cfg.seed, kSearchStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> spread(-std::sqrt(3.0), std::sqrt(3.0));
  std::uniform_int_distribution<int> pick_member(0, np - 1);
  std::uniform_int_distribution<Eigen::Index> pick_coord(0, dim - 1);

  Eigen::MatrixXd population(dim, np);
  int filled = 0;
  if (cfg.seed_reference) {
    for (const auto& ref : reference_constellations(order)) {
      if (filled < np) population.col(filled++) = to_coords(ref.points);
    }
  }
  for (; filled < np; ++filled) {
    Eigen::VectorXcd p(order);
    for (auto& z : p) z = {spread(rng), spread(rng)};
    population.col(filled) = to_coords(project_energy(p));
  }

  std::vector<ObjectiveValue> score(np);
  parallel_for(static_cast<std::size_t>(np), cfg.threads, [&](std::size_t i) {
    score[i] = objective(to_points(population.col(static_cast<Eigen::Index>(i))), ctx);
  });

  auto best_member = [&] {
    int b = 0;
    for (int i = 1; i < np; ++i) {
      if (strictly_better(score[i], score[b])) b = i;
    }
    return b;
  };

  OptimizeResult result;
  int best = best_member();
  if (!feasible(score[best])) {
    throw ConfigError("optimize_constellation: no initial member satisfies delta_min");
  }
  result.trace.push_back(score[best].penalized);

  Eigen::MatrixXd trials(dim, np);
  std::vector<ObjectiveValue> trial_score(np);
  for (int gen = 1; gen <= cfg.generations; ++gen) {
    // rand/1/bin mutation and crossover; drawn serially so the search is
    // reproducible regardless of how evaluations are scheduled.
    for (int i = 0; i < np; ++i) {
      int r1, r2, r3;
      do r1 = pick_member(rng); while (r1 == i);
      do r2 = pick_member(rng); while (r2 == i || r2 == r1);
      do r3 = pick_member(rng); while (r3 == i || r3 == r1 || r3 == r2);
      const Eigen::VectorXd mutant =
          population.col(r1) + cfg.diff_weight * (population.col(r2) - population.col(r3));
      const Eigen::Index forced = pick_coord(rng);
      Eigen::VectorXd trial = population.col(i);
      for (Eigen::Index j = 0; j < dim; ++j) {
        if (j == forced || unit(rng) < cfg.crossover) trial[j] = mutant[j];
      }
      const Eigen::VectorXcd pts = to_points(trial);
      trials.col(i) = mean_energy(pts) > 0 ? to_coords(project_energy(pts)) : population.col(i);
    }
    parallel_for(static_cast<std::size_t>(np), cfg.threads, [&](std::size_t i) {
      trial_score[i] = objective(to_points(trials.col(static_cast<Eigen::Index>(i))), ctx);
    });
    for (int i = 0; i < np; ++i) {
      if (no_worse(trial_score[i], score[i])) {
        population.col(i) = trials.col(i);
        score[i] = trial_score[i];
      }
    }
    best = best_member();
    result.trace.push_back(score[best].penalized);
    result.generations_run = gen;
  }

  // Coordinate-wise refinement of the incumbent.
  Eigen::VectorXd current = population.col(best);
  ObjectiveValue current_score = score[best];
  double step = cfg.refine_step0;
  int rejections = 0;
  for (int it = 0; it < cfg.refine_iters; ++it) {
    Eigen::VectorXd candidate = current;
    candidate[pick_coord(rng)] += step * (2.0 * unit(rng) - 1.0);
    const Eigen::VectorXcd pts = to_points(candidate);
    bool accepted = false;
    if (mean_energy(pts) > 0) {
      const Eigen::VectorXd projected = to_coords(project_energy(pts));
      const ObjectiveValue s = objective(to_points(projected), ctx);
      if (strictly_better(s, current_score)) {
        current = projected;
        current_score = s;
        accepted = true;
      }
    }
    if (accepted) {
      rejections = 0;
    } else if (++rejections >= cfg.refine_patience) {
      step /= 2;
      rejections = 0;
    }
    result.trace.push_back(current_score.penalized);
  }

  std::ostringstream label;
  label << "optimized M=" << order << " snr=" << ch.snr_db() << "dB inr=" << intf.inr_db()
        << "dB m=" << intf.m();
  result.constellation = {project_energy(to_points(current)), label.str()};
  result.best = current_score;
  return result;
}

void write_trace_csv(const std::vector<double>& trace, std::ostream& out) {
  out << "generation,best_objective\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << i << ',' << csv::format_double(trace[i]) << '\n';
  }
}

}  // namespace imlab
