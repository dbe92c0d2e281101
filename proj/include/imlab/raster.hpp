#pragma once

#include <complex>
#include <iosfwd>

#include <Eigen/Dense>

#include "imlab/constellation.hpp"
#include "imlab/detector.hpp"

namespace imlab {

/// Axis-aligned window of the complex plane.
struct RasterWindow {
  double re_min = -4.0;
  double re_max = 4.0;
  double im_min = -4.0;
  double im_max = 4.0;
};

using LabelGrid = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Decision labels on a resolution x resolution grid. Row 0 is the top edge
/// (im_max), column 0 the left edge (re_min); both edges are sampled.
struct RegionRaster {
  RasterWindow window;
  int resolution = 0;
  LabelGrid labels;

  std::complex<double> point(int row, int col) const;
};

/// Runs `det` at every grid point. Rows are processed in parallel; the output
/// does not depend on the worker count.
RegionRaster rasterize_regions(const Constellation& c, double s_lin, const Detector& det,
                               const RasterWindow& window, int resolution, int threads = 0);

/// Fraction of cells whose labels differ. Rasters must share window and size.
double label_disagreement(const RegionRaster& a, const RegionRaster& b);

/// `re,im,label` rows in row-major order.
void write_raster_csv(const RegionRaster& raster, std::ostream& out);
/// Plain (ASCII) PGM with labels as gray levels.
void write_raster_pgm(const RegionRaster& raster, std::ostream& out);

}  // namespace imlab
