#include "imlab/interference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "imlab/errors.hpp"
#include "imlab/quadrature.hpp"
#include "imlab/special_functions.hpp"

namespace imlab {

namespace {

constexpr double kPi = std::numbers::pi;

void require_shape(double m, const char* who) {
  if (!(m >= 1.0) || !std::isfinite(m)) {
    throw DomainError(std::string(who) + ": shape parameter m must be >= 1");
  }
}

}  // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x696d6c62u};
  return Rng(seq);
}

double c_norm(double m) {
  require_shape(m, "c_norm");
  return std::exp(log_gamma(m / 2) - log_gamma((m + 1) / 2));
}

double d_integral(double m) {
  require_shape(m, "d_integral");
  const double power = m - 1.0;
  auto integrand = [power](double t) { return t * t * std::pow(std::sin(t), power); };
  return integrate_adaptive(integrand, 0.0, kPi, 1e-12).value;
}

double phase_variance(double m) {
  return kPi * kPi / 4 + d_integral(m) / (4 * std::sqrt(kPi) * c_norm(m));
}

double phase_pdf(double theta, double m) {
  require_shape(m, "phase_pdf");
  return std::pow(std::abs(std::sin(2 * theta)), m - 1) / (2 * std::sqrt(kPi) * c_norm(m));
}

namespace detail {

// Inverse CDF of the phase restricted to one lobe [0, pi/2), where the
// density is proportional to sin^{m-1}(2 theta). The four lobes are equal, so
// a uniform lobe index completes the draw.
struct PhaseInverseCdf {
  std::vector<double> cdf;  // cdf[i] at theta_i = i * step, cdf.back() == 1
  double step;

  explicit PhaseInverseCdf(double m) {
    const int knots = InterferenceParams::kInverseCdfKnots;
    step = (kPi / 2) / (knots - 1);
    cdf.assign(knots, 0.0);
    // 3-point Gauss-Legendre per interval.
    constexpr std::array<double, 3> nodes = {-0.7745966692414834, 0.0, 0.7745966692414834};
    constexpr std::array<double, 3> weights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    for (int i = 1; i < knots; ++i) {
      const double mid = (i - 0.5) * step;
      double mass = 0.0;
      for (int q = 0; q < 3; ++q) {
        mass += weights[q] * std::pow(std::sin(2 * (mid + 0.5 * step * nodes[q])), m - 1);
      }
      cdf[i] = cdf[i - 1] + 0.5 * step * mass;
    }
    const double total = cdf.back();
    for (double& c : cdf) c /= total;
    cdf.back() = 1.0;
  }

  double lobe_sample(double u) const {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) return kPi / 2;
    const auto hi = static_cast<std::size_t>(it - cdf.begin());
    const std::size_t lo = hi - 1;
    const double width = cdf[hi] - cdf[lo];
    const double frac = width > 0 ? (u - cdf[lo]) / width : 0.5;
    return (static_cast<double>(lo) + frac) * step;
  }
};

}  // namespace detail

InterferenceParams::InterferenceParams(double m, double omega) : m_(m), omega_(omega) {
  require_shape(m, "InterferenceParams");
  if (!(omega > 0) || !std::isfinite(omega)) {
    throw DomainError("InterferenceParams: spread Omega must be positive and finite");
  }
  beta_ = 1.0 + m / omega;
  sigma_theta_sq_ = phase_variance(m);
  if (m > kRejectionMaxShape) {
    phase_table_ = std::make_shared<const detail::PhaseInverseCdf>(m);
  }
}

double sample_phase(const InterferenceParams& params, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (const auto* table = params.phase_table()) {
    std::uniform_int_distribution<int> lobe(0, 3);
    const double within = table->lobe_sample(unit(rng));
    return within + lobe(rng) * (kPi / 2);
  }
  const double power = params.m() - 1.0;
  std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
  for (;;) {
    const double theta = angle(rng);
    if (unit(rng) < std::pow(std::abs(std::sin(2 * theta)), power)) return theta;
  }
}

InterferenceDraw sample_interference_unit(const InterferenceParams& params, Rng& rng) {
  std::gamma_distribution<double> power(params.m(), 1.0 / params.m());
  const double g = power(rng);
  return {g, sample_phase(params, rng)};
}

std::complex<double> sample_interference(const InterferenceParams& params, Rng& rng) {
  return sample_interference_unit(params, rng).scaled(params.omega());
}

}  // namespace imlab
