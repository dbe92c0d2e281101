#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

namespace imlab {

/// Ordered signal alphabet. Generators normalize to unit average energy;
/// transmit power is applied at simulation time.
struct Constellation {
  Eigen::VectorXcd points;
  std::string label;

  Eigen::Index size() const { return points.size(); }
  std::complex<double> operator[](Eigen::Index i) const { return points[i]; }
};

/// (1/M) sum |x_i|^2.
double mean_energy(const Eigen::VectorXcd& points);
/// Smallest pairwise distance (infinity for fewer than two points).
double min_distance(const Eigen::VectorXcd& points);
/// True when no two points compare equal.
bool all_distinct(const Eigen::VectorXcd& points);

/// M-PSK: e^{j 2 pi i / M}, i = 0..M-1.
Constellation make_psk(int order);
/// Square QAM for M in {4, 16, 64, 256}; cross QAM for {8, 32, 128}.
Constellation make_qam(int order);
/// M-PAM on the real axis: +-1, +-3, ..., +-(M-1), scaled to unit energy.
Constellation make_pam(int order);

struct LoadedConstellation {
  Constellation constellation;
  double mean_energy;
  /// Set when the file is not unit-energy (|E - 1| > 1e-6).
  bool energy_warning;
};

/// Reads `index,re,im` CSV. Throws ParseError on malformed rows, missing or
/// out-of-order indices and duplicate points.
LoadedConstellation read_constellation(std::istream& in, std::string label = {});
LoadedConstellation load_constellation(const std::filesystem::path& path);

/// Writes `index,re,im` CSV with shortest round-trip decimal formatting.
void write_constellation(const Constellation& c, std::ostream& out);
void save_constellation(const Constellation& c, const std::filesystem::path& path);

}  // namespace imlab
