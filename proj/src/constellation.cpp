#include "imlab/constellation.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "imlab/csv.hpp"
#include "imlab/errors.hpp"

namespace imlab {

namespace {

Constellation normalized(std::vector<std::complex<double>> pts, std::string label) {
  Eigen::VectorXcd v = Eigen::Map<Eigen::VectorXcd>(pts.data(), static_cast<Eigen::Index>(pts.size()));
  v /= std::sqrt(mean_energy(v));
  return {std::move(v), std::move(label)};
}

// Odd-integer grid of `cols` x `rows` levels, minus `corner` x `corner`
// blocks at each of the four corners.
std::vector<std::complex<double>> grid_points(int cols, int rows, int corner) {
  std::vector<std::complex<double>> pts;
  auto in_corner = [corner](int i, int n) { return i < corner || i >= n - corner; };
  for (int i = 0; i < cols; ++i) {
    for (int j = 0; j < rows; ++j) {
      if (corner > 0 && in_corner(i, cols) && in_corner(j, rows)) continue;
      pts.emplace_back(2.0 * i - (cols - 1), 2.0 * j - (rows - 1));
    }
  }
  return pts;
}

}  // namespace

double mean_energy(const Eigen::VectorXcd& points) {
  return points.cwiseAbs2().mean();
}

double min_distance(const Eigen::VectorXcd& points) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    for (Eigen::Index j = i + 1; j < points.size(); ++j) {
      best = std::min(best, std::abs(points[i] - points[j]));
    }
  }
  return best;
}

bool all_distinct(const Eigen::VectorXcd& points) {
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    for (Eigen::Index j = i + 1; j < points.size(); ++j) {
      if (points[i] == points[j]) return false;
    }
  }
  return true;
}

Constellation make_psk(int order) {
  if (order < 2) throw DomainError("make_psk: order must be >= 2");
  Eigen::VectorXcd v(order);
  for (int i = 0; i < order; ++i) {
    v[i] = std::polar(1.0, 2.0 * std::numbers::pi * i / order);
  }
  return {std::move(v), std::to_string(order) + "-PSK"};
}

Constellation make_qam(int order) {
  std::vector<std::complex<double>> pts;
  switch (order) {
    case 4:
    case 16:
    case 64:
    case 256: {
      const int side = static_cast<int>(std::lround(std::sqrt(order)));
      pts = grid_points(side, side, 0);
      break;
    }
    case 8:
      // Smallest member of the cross family degenerates to a 4 x 2 rectangle.
      pts = grid_points(4, 2, 0);
      break;
    case 32:
      pts = grid_points(6, 6, 1);
      break;
    case 128:
      pts = grid_points(12, 12, 2);
      break;
    default:
      throw DomainError("make_qam: supported orders are 4, 8, 16, 32, 64, 128, 256");
  }
  return normalized(std::move(pts), std::to_string(order) + "-QAM");
}

Constellation make_pam(int order) {
  if (order < 2) throw DomainError("make_pam: order must be >= 2");
  const double scale = 1.0 / std::sqrt((static_cast<double>(order) * order - 1.0) / 3.0);
  Eigen::VectorXcd v(order);
  for (int i = 0; i < order; ++i) v[i] = (2.0 * i - (order - 1)) * scale;
  return {std::move(v), std::to_string(order) + "-PAM"};
}

LoadedConstellation read_constellation(std::istream& in, std::string label) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("constellation file is empty");
  const auto header = csv::split_fields(line);
  if (header.size() != 3 || header[0] != "index" || header[1] != "re" || header[2] != "im") {
    throw ParseError("constellation header must be 'index,re,im'");
  }
  std::vector<std::complex<double>> pts;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split_fields(line);
    if (fields.size() != 3) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 3 fields");
    }
    try {
      const long long index = csv::parse_integer(fields[0]);
      if (index != static_cast<long long>(pts.size())) {
        throw ParseError("index " + std::to_string(index) + " out of sequence");
      }
      const std::complex<double> p(csv::parse_double(fields[1]), csv::parse_double(fields[2]));
      if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) throw ParseError("non-finite point");
      pts.push_back(p);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (pts.empty()) throw ParseError("constellation file has no points");

  Eigen::VectorXcd v = Eigen::Map<Eigen::VectorXcd>(pts.data(), static_cast<Eigen::Index>(pts.size()));
  if (!all_distinct(v)) throw ParseError("constellation contains duplicate points");
  const double energy = mean_energy(v);
  return {{std::move(v), std::move(label)}, energy, std::abs(energy - 1.0) > 1e-6};
}

LoadedConstellation load_constellation(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_constellation(in, path.filename().string());
}

void write_constellation(const Constellation& c, std::ostream& out) {
  out << "index,re,im\n";
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    out << i << ',' << csv::format_double(c[i].real()) << ',' << csv::format_double(c[i].imag())
        << '\n';
  }
}

void save_constellation(const Constellation& c, const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  write_constellation(c, out);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace imlab
