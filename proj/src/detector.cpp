#include "imlab/detector.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "imlab/errors.hpp"
#include "imlab/special_functions.hpp"

namespace imlab {

namespace {

const double kLogFloor = std::log(kSeriesFloor);

double log_q_bound(const InterferenceParams& p, int K, double r) {
  const double m = p.m();
  const double beta = p.beta();
  return std::log(r) - p.sigma_theta_sq() * (K + 0.5) - std::log(K + 1.0) - 0.5 * std::log(beta) +
         0.5 * std::log(m + 0.5 * K + 0.5) + r * r / beta;
}

double log_tail_bound(const InterferenceParams& p, int K, double r) {
  const double log_q = log_q_bound(p, K, r);
  if (!(log_q < 0)) return std::numeric_limits<double>::infinity();
  const double m = p.m();
  const double beta = p.beta();
  const double order = m + 0.5 * (K + 1);
  const double log_w = -0.5 * p.sigma_theta_sq() * (K + 1.0) * (K + 1.0) + (K + 1.0) * std::log(r) +
                       r * r / beta;
  return log_w + log_gamma(order) - std::log1p(-std::exp(log_q)) - order * std::log(beta) -
         log_gamma(K + 2.0);
}

double log_coefficient(int k, double m, double beta) {
  const double a = m + 0.5 * k;
  return log_gamma(a) - std::log(2.0) - a * std::log(beta) - log_gamma(k + 1.0);
}

}  // namespace

double truncation_ratio_bound(const InterferenceParams& params, int K, double r) {
  if (r <= 0) return 0.0;
  return std::exp(log_q_bound(params, K, r));
}

double truncation_tail_bound(const InterferenceParams& params, int K, double r) {
  if (r <= 0) return 0.0;
  return std::exp(log_tail_bound(params, K, r));
}

int min_truncation_index(const InterferenceParams& params, double epsilon, double r_max) {
  if (!(epsilon > 0 && epsilon < 1)) {
    throw DomainError("min_truncation_index: epsilon must lie in (0, 1)");
  }
  if (!(r_max > 0) || !std::isfinite(r_max)) {
    throw DomainError("min_truncation_index: R_max must be positive and finite");
  }
  const double log_eps = std::log(epsilon);
  for (int K = 1; K <= kMaxTruncationIndex; ++K) {
    if (log_tail_bound(params, K, r_max) <= log_eps) return K;
  }
  throw ConvergenceError("min_truncation_index: no K <= " + std::to_string(kMaxTruncationIndex) +
                         " meets the tail bound (m=" + std::to_string(params.m()) +
                         ", Omega=" + std::to_string(params.omega()) + ")");
}

double log_i_km(int k, const InterferenceParams& params, double r) {
  if (k < 0) throw DomainError("log_i_km: order must be non-negative");
  if (!(r >= 0) || !std::isfinite(r)) throw DomainError("log_i_km: r must be non-negative");
  const double m = params.m();
  const double beta = params.beta();
  const double lc = log_coefficient(k, m, beta);
  if (r == 0) return k == 0 ? lc : -std::numeric_limits<double>::infinity();
  return lc + k * std::log(r) + log_kummer_1f1(m + 0.5 * k, k + 1.0, r * r / beta);
}

double i_km(int k, const InterferenceParams& params, double r) {
  const double v = std::exp(log_i_km(k, params, r));
  if (!std::isfinite(v)) throw std::overflow_error("i_km: value exceeds double range");
  return v;
}

double harmonic_weight(int k, double phi, double sigma_theta_sq) {
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return sign * 2.0 * std::exp(-0.5 * sigma_theta_sq * k * k) * std::cos(k * phi);
}

double harmonic_partial_sum(double r, double phi, const InterferenceParams& params, int K) {
  double s = i_km(0, params, r);
  for (int k = 1; k <= K; ++k) {
    s += harmonic_weight(k, phi, params.sigma_theta_sq()) * i_km(k, params, r);
  }
  return s;
}

MlgConfig::MlgConfig(const InterferenceParams& params, MlgOptions options)
    : params_(params),
      options_(options),
      k_trunc_(min_truncation_index(params, options.epsilon, options.r_max)) {
  const double m = params_.m();
  const double beta = params_.beta();
  log_coeff_.resize(k_trunc_ + 1);
  envelope_.resize(k_trunc_ + 1);
  for (int k = 0; k <= k_trunc_; ++k) {
    log_coeff_[k] = log_coefficient(k, m, beta);
    envelope_[k] = std::exp(-0.5 * params_.sigma_theta_sq() * k * k);
  }

  if (options_.table.enabled) {
    table_step_ = options_.r_max / kTableSubdivisions;
    table_limit_ = std::min(std::max(options_.r_max, options_.table.r_hi),
                            options_.r_max * kTableMaxSpan);
    table_knots_ = static_cast<int>(std::ceil(table_limit_ / table_step_)) + 3;
    const int stride = k_trunc_ + 1;
    table_.resize(static_cast<std::size_t>(table_knots_) * stride);
    for (int i = 0; i < table_knots_; ++i) {
      for (int k = 0; k <= k_trunc_; ++k) {
        table_[static_cast<std::size_t>(i) * stride + k] = scaled_radial(k, i * table_step_);
      }
    }
  }
}

double MlgConfig::scaled_radial(int k, double r) const {
  const double z = r * r / params_.beta();
  const double a = params_.m() + 0.5 * k;
  return std::exp(log_coeff_[k] + log_kummer_1f1(a, k + 1.0, z) - z);
}

double MlgConfig::log_series_from(double r, double cos_phi, const double* g) const {
  double total = g[0];
  double r_pow = 1.0;
  double cheb_prev = 1.0;      // cos(0 phi)
  double cheb_cur = cos_phi;   // cos(1 phi)
  double sign = -1.0;
  for (int k = 1; k <= k_trunc_; ++k) {
    r_pow *= r;
    total += sign * 2.0 * envelope_[k] * cheb_cur * r_pow * g[k];
    sign = -sign;
    const double cheb_next = 2.0 * cos_phi * cheb_cur - cheb_prev;
    cheb_prev = cheb_cur;
    cheb_cur = cheb_next;
  }
  if (!(total > 0)) return kLogFloor;
  return std::max(r * r / params_.beta() + std::log(total), kLogFloor);
}

double MlgConfig::log_series_direct(double r, double cos_phi) const {
  std::array<double, kMaxTruncationIndex + 1> g{};
  for (int k = 0; k <= k_trunc_; ++k) g[k] = scaled_radial(k, r);
  return log_series_from(r, cos_phi, g.data());
}

double MlgConfig::log_series(double r, double cos_phi) const {
  if (!has_radial_table() || r > table_limit_) return log_series_direct(r, cos_phi);

  const int stride = k_trunc_ + 1;
  const double t = r / table_step_;
  const int i = std::clamp(static_cast<int>(t), 1, table_knots_ - 3);
  const double u = t - i;
  // Four-point Lagrange weights on nodes -1, 0, 1, 2.
  const double w0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
  const double w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
  const double w2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
  const double w3 = (u + 1.0) * u * (u - 1.0) / 6.0;
  const double* row = table_.data() + static_cast<std::size_t>(i - 1) * stride;

  std::array<double, kMaxTruncationIndex + 1> g;
  for (int k = 0; k < stride; ++k) {
    g[k] = w0 * row[k] + w1 * row[stride + k] + w2 * row[2 * stride + k] + w3 * row[3 * stride + k];
  }
  return log_series_from(r, cos_phi, g.data());
}

double series_S(double r, double phi, const MlgConfig& cfg) {
  const InterferenceParams& p = cfg.params();
  const double sigma_sq = p.sigma_theta_sq();
  // Normalize by I_{0,m} so the partial sum stays finite as long as I_{0,m} does.
  const double log_i0 = log_i_km(0, p, r);
  double ratio_sum = 1.0;
  for (int k = 1; k <= cfg.k_trunc(); ++k) {
    if (r == 0) break;
    ratio_sum += harmonic_weight(k, phi, sigma_sq) * std::exp(log_i_km(k, p, r) - log_i0);
  }
  if (!(ratio_sum > 0)) return kSeriesFloor;
  return std::max(std::exp(log_i0) * ratio_sum, kSeriesFloor);
}

std::string_view detector_name(DetectorTag tag) {
  switch (tag) {
    case DetectorTag::Mlg:
      return "mlg";
    case DetectorTag::Cai:
      return "cai";
    case DetectorTag::Euclidean:
      return "eucl";
  }
  return "unknown";
}

DetectorTag parse_detector_tag(std::string_view name) {
  if (name == "mlg" || name == "ml-g") return DetectorTag::Mlg;
  if (name == "cai") return DetectorTag::Cai;
  if (name == "eucl" || name == "euclidean") return DetectorTag::Euclidean;
  throw DomainError("unknown detector '" + std::string(name) + "' (expected mlg, cai or eucl)");
}

Detector::Detector(DetectorKind kind, std::shared_ptr<const MlgConfig> cfg)
    : kind_(kind),
      cfg_(std::move(cfg)),
      euclidean_rule_(kind.tag == DetectorTag::Euclidean ||
                      (kind.tag == DetectorTag::Mlg && cfg_ && cfg_->params().m() == 1.0)) {}

Detector Detector::euclidean() { return Detector({DetectorTag::Euclidean, 0.0}, nullptr); }

Detector Detector::cai(double amplitude) {
  if (!(amplitude >= 0) || !std::isfinite(amplitude)) {
    throw DomainError("Detector::cai: amplitude must be finite and non-negative");
  }
  return Detector({DetectorTag::Cai, amplitude}, nullptr);
}

Detector Detector::cai_matched(const InterferenceParams& params) {
  return cai(std::sqrt(params.omega()));
}

Detector Detector::mlg(std::shared_ptr<const MlgConfig> cfg) {
  if (!cfg) throw std::invalid_argument("Detector::mlg: configuration is required");
  return Detector({DetectorTag::Mlg, 0.0}, std::move(cfg));
}

Detector Detector::mlg(const InterferenceParams& params, MlgOptions options) {
  return mlg(std::make_shared<const MlgConfig>(params, options));
}

double Detector::residual_metric(std::complex<double> rho) const {
  const double r_sq = std::norm(rho);
  switch (kind_.tag) {
    case DetectorTag::Euclidean:
      return r_sq;
    case DetectorTag::Cai:
      return r_sq - log_bessel_i(0, 2.0 * kind_.cai_amplitude * std::sqrt(r_sq));
    case DetectorTag::Mlg: {
      const double r = std::sqrt(r_sq);
      const double cos_phi = r > 0 ? rho.real() / r : 1.0;
      return r_sq - cfg_->log_series(r, cos_phi);
    }
  }
  return r_sq;
}

Eigen::Index Detector::decide(std::complex<double> y, const Eigen::VectorXcd& scaled_points) const {
  Eigen::Index best = 0;
  double best_metric = std::numeric_limits<double>::infinity();
  if (euclidean_rule_) {
    for (Eigen::Index i = 0; i < scaled_points.size(); ++i) {
      const double d = std::norm(y - scaled_points[i]);
      if (d < best_metric) {
        best_metric = d;
        best = i;
      }
    }
    return best;
  }
  for (Eigen::Index i = 0; i < scaled_points.size(); ++i) {
    const double d = residual_metric(y - scaled_points[i]);
    if (d < best_metric) {
      best_metric = d;
      best = i;
    }
  }
  return best;
}

double metric(std::complex<double> y, std::complex<double> x, double s_lin, const Detector& det) {
  return det.residual_metric(y - std::sqrt(s_lin) * x);
}

Eigen::Index detect(std::complex<double> y, const Constellation& c, double s_lin,
                    const Detector& det) {
  if (c.size() == 0) throw DomainError("detect: constellation is empty");
  const Eigen::VectorXcd scaled = std::sqrt(s_lin) * c.points;
  return det.decide(y, scaled);
}

}  // namespace imlab
