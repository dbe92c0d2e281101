#include "imlab/raster.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "imlab/csv.hpp"
#include "imlab/errors.hpp"
#include "imlab/parallel.hpp"

namespace imlab {

std::complex<double> RegionRaster::point(int row, int col) const {
  const double denom = resolution - 1;
  const double re = window.re_min + (window.re_max - window.re_min) * col / denom;
  const double im = window.im_max - (window.im_max - window.im_min) * row / denom;
  return {re, im};
}

RegionRaster rasterize_regions(const Constellation& c, double s_lin, const Detector& det,
                               const RasterWindow& window, int resolution, int threads) {
  if (resolution < 2) throw DomainError("rasterize_regions: resolution must be >= 2");
  if (!(window.re_max > window.re_min) || !(window.im_max > window.im_min)) {
    throw DomainError("rasterize_regions: window is degenerate");
  }
  if (c.size() == 0) throw DomainError("rasterize_regions: constellation is empty");

  RegionRaster raster{window, resolution, LabelGrid(resolution, resolution)};
  const Eigen::VectorXcd scaled = std::sqrt(s_lin) * c.points;
  parallel_for(static_cast<std::size_t>(resolution), threads, [&](std::size_t row) {
    const int r = static_cast<int>(row);
    for (int col = 0; col < resolution; ++col) {
      raster.labels(r, col) = static_cast<int>(det.decide(raster.point(r, col), scaled));
    }
  });
  return raster;
}

double label_disagreement(const RegionRaster& a, const RegionRaster& b) {
  if (a.resolution != b.resolution) {
    throw std::invalid_argument("label_disagreement: rasters differ in size");
  }
  const auto differing = (a.labels.array() != b.labels.array()).count();
  return static_cast<double>(differing) / static_cast<double>(a.labels.size());
}

void write_raster_csv(const RegionRaster& raster, std::ostream& out) {
  out << "re,im,label\n";
  for (int row = 0; row < raster.resolution; ++row) {
    for (int col = 0; col < raster.resolution; ++col) {
      const auto p = raster.point(row, col);
      out << csv::format_double(p.real()) << ',' << csv::format_double(p.imag()) << ','
          << raster.labels(row, col) << '\n';
    }
  }
}

void write_raster_pgm(const RegionRaster& raster, std::ostream& out) {
  const int maxval = std::max(1, raster.labels.maxCoeff());
  out << "P2\n" << raster.resolution << ' ' << raster.resolution << '\n' << maxval << '\n';
  for (int row = 0; row < raster.resolution; ++row) {
    for (int col = 0; col < raster.resolution; ++col) {
      out << raster.labels(row, col) << (col + 1 == raster.resolution ? '\n' : ' ');
    }
  }
}

}  // namespace imlab
