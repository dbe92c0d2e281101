#include "imlab/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "imlab/csv.hpp"
#include "imlab/errors.hpp"
#include "imlab/parallel.hpp"

namespace imlab {

namespace {

std::uint64_t block_count(std::uint64_t trials) {
  return (trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
}

std::uint64_t block_size(std::uint64_t trials, std::uint64_t block) {
  return std::min(kTrialsPerBlock, trials - block * kTrialsPerBlock);
}

std::vector<DetectorTag> canonical_tags(std::span<const DetectorTag> tags) {
  std::vector<DetectorTag> out(tags.begin(), tags.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Detector build_detector(DetectorTag tag, const InterferenceParams& intf, MlgOptions mlg) {
  switch (tag) {
    case DetectorTag::Mlg:
      return Detector::mlg(intf, mlg);
    case DetectorTag::Cai:
      return Detector::cai_matched(intf);
    case DetectorTag::Euclidean:
      return Detector::euclidean();
  }
  return Detector::euclidean();
}

}  // namespace

SepEstimate SepEstimate::from_counts(std::uint64_t errors, std::uint64_t trials) {
  SepEstimate e;
  e.trials = trials;
  e.errors = errors;
  if (trials > 0) {
    e.sep = static_cast<double>(errors) / static_cast<double>(trials);
    e.ci95_half = 1.96 * std::sqrt(e.sep * (1.0 - e.sep) / static_cast<double>(trials));
  }
  return e;
}

std::vector<ChannelDraw> draw_channel_block(int order, const InterferenceParams* intf,
                                            std::uint64_t count, Rng& rng) {
  std::uniform_int_distribution<int> symbol(0, order - 1);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  std::vector<ChannelDraw> draws;
  draws.reserve(count);
  for (std::uint64_t t = 0; t < count; ++t) {
    ChannelDraw d{};
    d.symbol = symbol(rng);
    const double re = gauss(rng);
    const double im = gauss(rng);
    d.noise = {re, im};
    d.interference = intf ? sample_interference_unit(*intf, rng) : InterferenceDraw{0.0, 0.0};
    draws.push_back(d);
  }
  return draws;
}

std::vector<ChannelDraw> draw_channel_realizations(int order, const InterferenceParams* intf,
                                                   std::uint64_t trials, std::uint64_t seed) {
  std::vector<ChannelDraw> all;
  all.reserve(trials);
  for (std::uint64_t b = 0; b < block_count(trials); ++b) {
    Rng rng = make_stream(seed, b);
    auto block = draw_channel_block(order, intf, block_size(trials, b), rng);
    all.insert(all.end(), block.begin(), block.end());
  }
  return all;
}

std::vector<std::uint64_t> count_errors(const Eigen::VectorXcd& points, const ChannelParams& ch,
                                        double omega, std::span<const Detector> detectors,
                                        std::span<const ChannelDraw> draws) {
  const Eigen::VectorXcd scaled = std::sqrt(ch.s_lin) * points;
  std::vector<std::uint64_t> errors(detectors.size(), 0);
  for (const ChannelDraw& d : draws) {
    std::complex<double> y = scaled[d.symbol] + d.noise;
    if (ch.interference_enabled) y += d.interference.scaled(omega);
    for (std::size_t j = 0; j < detectors.size(); ++j) {
      if (detectors[j].decide(y, scaled) != d.symbol) ++errors[j];
    }
  }
  return errors;
}

std::vector<SepEstimate> simulate_sep(const Constellation& c, std::span<const Detector> detectors,
                                      const ChannelParams& ch, const InterferenceParams& intf,
                                      std::uint64_t trials, std::uint64_t seed, int threads) {
  if (trials == 0) throw DomainError("simulate_sep: trials must be >= 1");
  if (c.size() == 0) throw DomainError("simulate_sep: constellation is empty");
  const int order = static_cast<int>(c.size());
  const InterferenceParams* source = ch.interference_enabled ? &intf : nullptr;

  const std::uint64_t blocks = block_count(trials);
  std::vector<std::vector<std::uint64_t>> per_block(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    Rng rng = make_stream(seed, b);
    const auto draws = draw_channel_block(order, source, block_size(trials, b), rng);
    per_block[b] = count_errors(c.points, ch, intf.omega(), detectors, draws);
  });

  std::vector<SepEstimate> out;
  for (std::size_t j = 0; j < detectors.size(); ++j) {
    std::uint64_t errors = 0;
    for (const auto& counts : per_block) errors += counts[j];
    out.push_back(SepEstimate::from_counts(errors, trials));
  }
  return out;
}

SepEstimate simulate_sep(const Constellation& c, const Detector& detector, const ChannelParams& ch,
                         const InterferenceParams& intf, std::uint64_t trials, std::uint64_t seed,
                         int threads) {
  return simulate_sep(c, std::span<const Detector>(&detector, 1), ch, intf, trials, seed,
                      threads)[0];
}

double residual_radius_hint(const Eigen::VectorXcd& points, double s_lin, double omega) {
  const double radius = points.size() > 0 ? points.cwiseAbs().maxCoeff() : 0.0;
  return std::sqrt(s_lin) * 2.0 * radius + 4.0 * std::sqrt(omega) + 8.0;
}

SweepTable sep_sweep(const Constellation& c, std::span<const DetectorTag> detectors,
                     const ChannelParams& base, double m, std::span<const double> gamma_db,
                     std::uint64_t trials, std::uint64_t seed, const SweepOptions& options) {
  if (gamma_db.empty()) throw DomainError("sep_sweep: gamma grid is empty");
  if (detectors.empty()) throw DomainError("sep_sweep: no detectors requested");
  SweepTable table{canonical_tags(detectors), {}};
  for (const double g_db : gamma_db) {
    const double omega = base.s_lin / db_to_linear(g_db);
    const InterferenceParams intf(m, omega);
    MlgOptions mlg = options.mlg;
    if (mlg.table.enabled && mlg.table.r_hi <= 0) {
      mlg.table.r_hi = residual_radius_hint(c.points, base.s_lin, omega);
    }
    std::vector<Detector> dets;
    for (const DetectorTag tag : table.detectors) dets.push_back(build_detector(tag, intf, mlg));
    table.rows.push_back({g_db, simulate_sep(c, dets, base, intf, trials, seed, options.threads)});
  }
  return table;
}

void write_sweep_csv(const SweepTable& table, std::ostream& out) {
  out << "gamma_db";
  for (const DetectorTag tag : table.detectors) {
    out << ",ser_" << detector_name(tag) << ",ci_" << detector_name(tag);
  }
  out << '\n';
  for (const SweepRow& row : table.rows) {
    out << csv::format_double(row.gamma_db);
    for (const SepEstimate& e : row.estimates) {
      out << ',' << csv::format_double(e.sep) << ',' << csv::format_double(e.ci95_half);
    }
    out << '\n';
  }
}

std::vector<MaxDiffRow> max_sep_difference(const Constellation& c, double m,
                                           std::span<const double> snr_db,
                                           std::span<const double> gamma_db, std::uint64_t trials,
                                           std::uint64_t seed, const SweepOptions& options) {
  const DetectorTag tags[] = {DetectorTag::Mlg, DetectorTag::Cai};
  std::vector<MaxDiffRow> out;
  for (const double s_db : snr_db) {
    const SweepTable t =
        sep_sweep(c, tags, ChannelParams::from_snr_db(s_db), m, gamma_db, trials, seed, options);
    MaxDiffRow best{s_db, gamma_db.front(), -std::numeric_limits<double>::infinity()};
    for (const SweepRow& row : t.rows) {
      const double diff = row.estimates[1].sep - row.estimates[0].sep;
      if (diff > best.sep_diff) best = {s_db, row.gamma_db, diff};
    }
    out.push_back(best);
  }
  return out;
}

void write_maxdiff_csv(std::span<const MaxDiffRow> rows, std::ostream& out) {
  out << "snr_db,gamma_db,sep_diff\n";
  for (const MaxDiffRow& r : rows) {
    out << csv::format_double(r.snr_db) << ',' << csv::format_double(r.gamma_db) << ','
        << csv::format_double(r.sep_diff) << '\n';
  }
}

}  // namespace imlab
