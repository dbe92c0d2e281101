#pragma once

// Symbol-error-probability estimation for Y = sqrt(S) X + I + N with
// N ~ CN(0, 1). Trials are split into fixed-size blocks, each driven by its
// own RNG stream derived from (seed, block index), so results are
// bit-identical for any worker count.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "imlab/constellation.hpp"
#include "imlab/detector.hpp"
#include "imlab/interference.hpp"

namespace imlab {

struct ChannelParams {
  static constexpr double noise_power = 1.0;

  double s_lin = 1.0;
  /// When false the interference term is dropped from the observation.
  bool interference_enabled = true;

  static ChannelParams from_snr_db(double snr_db, bool interference_enabled = true) {
    return {db_to_linear(snr_db), interference_enabled};
  }
  double snr_db() const { return linear_to_db(s_lin); }
};

struct SepEstimate {
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;
  double sep = 0.0;
  /// 1.96 sqrt(sep (1 - sep) / trials).
  double ci95_half = 0.0;

  static SepEstimate from_counts(std::uint64_t errors, std::uint64_t trials);
  double lower() const { return sep - ci95_half; }
  double upper() const { return sep + ci95_half; }
};

/// Randomness of one channel use, independent of S and Omega.
struct ChannelDraw {
  int symbol;
  std::complex<double> noise;
  InterferenceDraw interference;
};

inline constexpr std::uint64_t kTrialsPerBlock = 8192;

/// `count` consecutive draws from `rng`: uniform symbol in [0, order), unit
/// complex Gaussian noise, and (when `intf` is non-null) one interference draw.
std::vector<ChannelDraw> draw_channel_block(int order, const InterferenceParams* intf,
                                            std::uint64_t count, Rng& rng);

/// A frozen realization set of `trials` channel uses, laid out exactly as the
/// simulator would draw them for the same seed.
std::vector<ChannelDraw> draw_channel_realizations(int order, const InterferenceParams* intf,
                                                   std::uint64_t trials, std::uint64_t seed);

/// Errors made by each detector over the given draws.
std::vector<std::uint64_t> count_errors(const Eigen::VectorXcd& points, const ChannelParams& ch,
                                        double omega, std::span<const Detector> detectors,
                                        std::span<const ChannelDraw> draws);

/// One estimate per detector, all evaluated on the same realizations.
std::vector<SepEstimate> simulate_sep(const Constellation& c, std::span<const Detector> detectors,
                                      const ChannelParams& ch, const InterferenceParams& intf,
                                      std::uint64_t trials, std::uint64_t seed, int threads = 0);

SepEstimate simulate_sep(const Constellation& c, const Detector& detector, const ChannelParams& ch,
                         const InterferenceParams& intf, std::uint64_t trials, std::uint64_t seed,
                         int threads = 0);

struct SweepOptions {
  MlgOptions mlg{};
  int threads = 0;
};

struct SweepRow {
  double gamma_db;
  std::vector<SepEstimate> estimates;  // aligned with SweepTable::detectors
};

struct SweepTable {
  std::vector<DetectorTag> detectors;  // canonical order: mlg, cai, eucl
  std::vector<SweepRow> rows;
};

/// SEP versus gamma = S / Omega at fixed S. Each point rebuilds the detectors
/// for Omega = S / gamma and reuses the same seed, so every detector and every
/// gamma sees common random numbers.
SweepTable sep_sweep(const Constellation& c, std::span<const DetectorTag> detectors,
                     const ChannelParams& base, double m, std::span<const double> gamma_db,
                     std::uint64_t trials, std::uint64_t seed, const SweepOptions& options = {});

/// `gamma_db,ser_<det>,ci_<det>,...`
void write_sweep_csv(const SweepTable& table, std::ostream& out);

struct MaxDiffRow {
  double snr_db;
  double gamma_db;  // where the difference peaks
  double sep_diff;  // SEP(CAI) - SEP(ML-G)
};

/// For each SNR, scans the gamma grid and keeps the largest CAI-over-ML-G gap.
std::vector<MaxDiffRow> max_sep_difference(const Constellation& c, double m,
                                           std::span<const double> snr_db,
                                           std::span<const double> gamma_db, std::uint64_t trials,
                                           std::uint64_t seed, const SweepOptions& options = {});

void write_maxdiff_csv(std::span<const MaxDiffRow> rows, std::ostream& out);

/// Radius that covers essentially every residual of a simulation with these
/// parameters: sqrt(S) times the constellation diameter plus interference and
/// noise margins.
double residual_radius_hint(const Eigen::VectorXcd& points, double s_lin, double omega);

}  // namespace imlab
