#pragma once

// Nakagami-m interference I = A e^{j Theta}: envelope A is Nakagami(m, Omega),
// phase Theta has density |sin 2 theta|^{m-1} / (2 sqrt(pi) C(m)) on [0, 2 pi).
// Noise power is fixed at 1, so Omega is the INR in linear units.

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

namespace imlab {

using Rng = std::mt19937_64;

/// Independent, reproducible generator for the pair (seed, stream).
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// C(m) = Gamma(m/2) / Gamma((m+1)/2).
double c_norm(double m);

/// D(m) = int_0^pi t^2 sin^{m-1}(t) dt by adaptive quadrature (|err| <= 1e-10).
double d_integral(double m);

/// Variance of the moment-matched Gaussian phase,
/// pi^2/4 + D(m) / (4 sqrt(pi) C(m)).
double phase_variance(double m);

/// Nakagami-m phase density at theta (radians).
double phase_pdf(double theta, double m);

namespace detail {
struct PhaseInverseCdf;
}

/// Statistical identity of the interferer. Immutable once built.
class InterferenceParams {
 public:
  /// Throws DomainError unless m >= 1 and omega > 0 (both finite).
  InterferenceParams(double m, double omega);

  static InterferenceParams from_inr_db(double m, double inr_db) {
    return {m, db_to_linear(inr_db)};
  }

  double m() const { return m_; }
  double omega() const { return omega_; }
  /// beta = 1 + m / Omega.
  double beta() const { return beta_; }
  double sigma_theta_sq() const { return sigma_theta_sq_; }
  double inr_db() const { return linear_to_db(omega_); }

  /// Rejection sampling is used up to this shape; larger m switch to a
  /// tabulated inverse CDF.
  static constexpr double kRejectionMaxShape = 64.0;
  static constexpr int kInverseCdfKnots = 16384;

  const detail::PhaseInverseCdf* phase_table() const { return phase_table_.get(); }

 private:
  double m_;
  double omega_;
  double beta_;
  double sigma_theta_sq_;
  std::shared_ptr<const detail::PhaseInverseCdf> phase_table_;
};

/// One interference realization in normalized form: `power_unit` is
/// Gamma(m, 1/m) distributed (mean 1) and A = sqrt(Omega * power_unit).
/// Keeping Omega out of the draw lets sweeps over the INR reuse identical
/// randomness.
struct InterferenceDraw {
  double power_unit;
  double phase;

  std::complex<double> scaled(double omega) const {
    return std::polar(std::sqrt(omega * power_unit), phase);
  }
};

double sample_phase(const InterferenceParams& params, Rng& rng);
InterferenceDraw sample_interference_unit(const InterferenceParams& params, Rng& rng);

/// A e^{j Theta} with A Nakagami(m, Omega) and Theta from the phase density.
std::complex<double> sample_interference(const InterferenceParams& params, Rng& rng);

}  // namespace imlab
