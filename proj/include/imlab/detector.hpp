#pragma once

// ML-G detection for Y = sqrt(S) X + I + N with Nakagami-m interference.
//
// With residual rho = y - sqrt(S) x = r e^{j phi}, the ML-G metric is
//   r^2 - ln S_K(r, phi),
//   S_K(r, phi) = I_{0,m}(r) + sum_{k=1..K} w_k(phi) I_{k,m}(r),
//   w_k(phi)    = (-1)^k 2 exp(-sigma^2 k^2 / 2) cos(k phi),
//   I_{k,m}(r)  = Gamma(m + k/2) / (2 beta^{m+k/2} k!) r^k 1F1(m + k/2; k+1; r^2/beta),
// with beta = 1 + m/Omega and K the smallest index whose certified tail bound
// over r in [0, R_max] is at most epsilon.

#include <complex>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "imlab/constellation.hpp"
#include "imlab/interference.hpp"

namespace imlab {

inline constexpr int kMaxTruncationIndex = 500;
/// S_K is clamped to this floor before any logarithm.
inline constexpr double kSeriesFloor = 1e-300;

/// q_K(r): certified bound on the ratio of consecutive tail terms.
double truncation_ratio_bound(const InterferenceParams& params, int K, double r);

/// Certified bound on sum_{k>K} |w_k| I_{k,m}(r); +inf when q_K(r) >= 1.
double truncation_tail_bound(const InterferenceParams& params, int K, double r);

/// Smallest K >= 1 with q_K(R_max) < 1 and tail bound <= epsilon.
/// Throws ConvergenceError past kMaxTruncationIndex.
int min_truncation_index(const InterferenceParams& params, double epsilon, double r_max);

/// ln I_{k,m}(r); -inf at r = 0 for k >= 1. Never overflows.
double log_i_km(int k, const InterferenceParams& params, double r);

/// I_{k,m}(r). Throws std::overflow_error when not representable.
double i_km(int k, const InterferenceParams& params, double r);

/// w_k(phi).
double harmonic_weight(int k, double phi, double sigma_theta_sq);

/// S_K(r, phi) summed term by term without any cached state.
double harmonic_partial_sum(double r, double phi, const InterferenceParams& params, int K);

/// Memoization of the radial coefficients on a uniform r grid with spacing
/// R_max / 4096 and cubic interpolation. Off by default.
struct RadialTableOptions {
  bool enabled = false;
  /// Upper end of the grid; values <= R_max mean R_max. Radii beyond it (or
  /// beyond 64 R_max) fall back to direct evaluation.
  double r_hi = 0.0;
};

struct MlgOptions {
  double epsilon = 1e-3;
  double r_max = 4.0;
  RadialTableOptions table{};
};

/// Everything needed to evaluate the ML-G metric. Immutable and shareable.
class MlgConfig {
 public:
  static constexpr int kTableSubdivisions = 4096;
  /// The grid never extends past kTableMaxSpan * R_max (2^18 knots).
  static constexpr double kTableMaxSpan = 64.0;

  /// Throws DomainError unless epsilon in (0, 1) and r_max > 0.
  explicit MlgConfig(const InterferenceParams& params, MlgOptions options = {});

  const InterferenceParams& params() const { return params_; }
  double epsilon() const { return options_.epsilon; }
  double r_max() const { return options_.r_max; }
  int k_trunc() const { return k_trunc_; }

  /// ln[Gamma(m + k/2) / (2 beta^{m+k/2} k!)], k = 0..K.
  std::span<const double> log_coefficients() const { return log_coeff_; }
  /// exp(-sigma^2 k^2 / 2), k = 0..K.
  std::span<const double> weight_envelope() const { return envelope_; }

  bool has_radial_table() const { return table_step_ > 0; }
  /// Largest radius served from the table (0 without one).
  double radial_table_limit() const { return table_limit_; }

  /// ln S_K(r, phi), given cos(phi). Floors S_K at kSeriesFloor.
  double log_series(double r, double cos_phi) const;
  /// Same, always bypassing the table.
  double log_series_direct(double r, double cos_phi) const;

 private:
  // g_k(r) = I_{k,m}(r) e^{-r^2/beta} / r^k is smooth and bounded on any
  // finite interval, so it interpolates well; S_K = e^{r^2/beta} sum_k c_k r^k g_k.
  double scaled_radial(int k, double r) const;
  double log_series_from(double r, double cos_phi, const double* g) const;

  InterferenceParams params_;
  MlgOptions options_;
  int k_trunc_;
  std::vector<double> log_coeff_;
  std::vector<double> envelope_;

  double table_step_ = 0.0;
  double table_limit_ = 0.0;
  int table_knots_ = 0;
  std::vector<double> table_;  // knot-major: table_[i * (K+1) + k]
};

/// S_K(r, phi) floored at kSeriesFloor.
double series_S(double r, double phi, const MlgConfig& cfg);

enum class DetectorTag { Mlg, Cai, Euclidean };

/// Short machine name: "mlg", "cai", "eucl".
std::string_view detector_name(DetectorTag tag);
/// Inverse of detector_name; throws DomainError on unknown names.
DetectorTag parse_detector_tag(std::string_view name);

struct DetectorKind {
  DetectorTag tag = DetectorTag::Euclidean;
  /// Assumed constant interference amplitude; CAI only.
  double cai_amplitude = 0.0;
};

/// A decision rule: metric kind plus, for ML-G, its configuration.
class Detector {
 public:
  static Detector euclidean();
  /// Constant-amplitude-interference metric r^2 - ln I_0(2 A r).
  static Detector cai(double amplitude);
  /// CAI with A = sqrt(Omega), the comparison convention used throughout.
  static Detector cai_matched(const InterferenceParams& params);
  static Detector mlg(std::shared_ptr<const MlgConfig> cfg);
  static Detector mlg(const InterferenceParams& params, MlgOptions options = {});

  const DetectorKind& kind() const { return kind_; }
  DetectorTag tag() const { return kind_.tag; }
  const MlgConfig* mlg_config() const { return cfg_.get(); }

  /// Metric of the residual rho = y - sqrt(S) x. Lower is better.
  double residual_metric(std::complex<double> rho) const;

  /// Index of the smallest metric over the already power-scaled points;
  /// ties go to the lowest index. ML-G at m = 1 uses the Euclidean rule.
  Eigen::Index decide(std::complex<double> y, const Eigen::VectorXcd& scaled_points) const;

 private:
  Detector(DetectorKind kind, std::shared_ptr<const MlgConfig> cfg);

  DetectorKind kind_;
  std::shared_ptr<const MlgConfig> cfg_;
  bool euclidean_rule_;
};

/// Metric of observation y against symbol x at transmit power s_lin.
double metric(std::complex<double> y, std::complex<double> x, double s_lin, const Detector& det);

/// Decision for y over the whole constellation.
Eigen::Index detect(std::complex<double> y, const Constellation& c, double s_lin,
                    const Detector& det);

}  // namespace imlab
