#include <doctest.h>

#include <limits>
#include <sstream>
#include <string>

#include "imlab/constellation.hpp"
#include "imlab/detector.hpp"
#include "imlab/errors.hpp"
#include "imlab/raster.hpp"

using namespace imlab;

TEST_CASE("grid geometry") {
  const RegionRaster r =
      rasterize_regions(make_psk(4), 1.0, Detector::euclidean(), {-2, 2, -1, 1}, 5);
  CHECK(r.labels.rows() == 5);
  CHECK(r.labels.cols() == 5);
  CHECK(r.point(0, 0) == std::complex<double>(-2, 1));
  CHECK(r.point(4, 4) == std::complex<double>(2, -1));
  CHECK(r.point(2, 2) == std::complex<double>(0, 0));
}

TEST_CASE("Euclidean raster is the nearest-neighbour partition") {
  const Constellation c = make_qam(16);
  const double s = 3.0;
  const RegionRaster r = rasterize_regions(c, s, Detector::euclidean(), {}, 97);
  for (int i = 0; i < r.resolution; ++i) {
    for (int j = 0; j < r.resolution; ++j) {
      const auto y = r.point(i, j);
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int k = 0; k < c.size(); ++k) {
        const double d = std::norm(y - std::sqrt(s) * c[k]);
        if (d < best_d) best_d = d, best = k;
      }
      REQUIRE(r.labels(i, j) == best);
    }
  }
}

TEST_CASE("every cell carries a valid label") {
  const auto p = InterferenceParams::from_inr_db(2.0, 15.0);
  const RegionRaster r =
      rasterize_regions(make_psk(8), db_to_linear(10.0), Detector::mlg(p), {}, 128);
  CHECK(r.labels.minCoeff() >= 0);
  CHECK(r.labels.maxCoeff() < 8);
}

TEST_CASE("worker count does not change the raster") {
  const auto p = InterferenceParams::from_inr_db(3.0, 10.0);
  const Detector d = Detector::mlg(p);
  const RegionRaster a = rasterize_regions(make_psk(8), 10.0, d, {}, 64, 1);
  const RegionRaster b = rasterize_regions(make_psk(8), 10.0, d, {}, 64, 4);
  CHECK(a.labels == b.labels);
  CHECK(label_disagreement(a, b) == 0.0);
}

TEST_CASE("low INR regions collapse onto the Euclidean ones") {
  const double s = db_to_linear(10.0);
  const auto p = InterferenceParams::from_inr_db(2.0, -30.0);
  const RegionRaster mlg = rasterize_regions(make_psk(8), s, Detector::mlg(p), {}, 256);
  const RegionRaster eu = rasterize_regions(make_psk(8), s, Detector::euclidean(), {}, 256);
  CHECK(label_disagreement(mlg, eu) <= 0.01);
}

TEST_CASE("strong interference warps the boundaries") {
  const double s = db_to_linear(10.0);
  const auto p = InterferenceParams::from_inr_db(2.0, 15.0);
  const RegionRaster mlg = rasterize_regions(make_psk(8), s, Detector::mlg(p), {}, 128);
  const RegionRaster eu = rasterize_regions(make_psk(8), s, Detector::euclidean(), {}, 128);
  CHECK(label_disagreement(mlg, eu) > 0.05);
}

TEST_CASE("raster errors") {
  const Constellation c = make_psk(4);
  CHECK_THROWS_AS(rasterize_regions(c, 1.0, Detector::euclidean(), {}, 1), DomainError);
  CHECK_THROWS_AS(rasterize_regions(c, 1.0, Detector::euclidean(), {1, 1, -1, 1}, 8), DomainError);
  const RegionRaster a = rasterize_regions(c, 1.0, Detector::euclidean(), {}, 8);
  const RegionRaster b = rasterize_regions(c, 1.0, Detector::euclidean(), {}, 9);
  CHECK_THROWS_AS(label_disagreement(a, b), std::invalid_argument);
}

TEST_CASE("raster writers") {
  const RegionRaster r = rasterize_regions(make_psk(4), 1.0, Detector::euclidean(), {-1, 1, -1, 1}, 3);
  std::ostringstream csv;
  write_raster_csv(r, csv);
  const std::string text = csv.str();
  CHECK(text.rfind("re,im,label\n-1,1,", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 10);

  std::ostringstream pgm;
  write_raster_pgm(r, pgm);
  CHECK(pgm.str().rfind("P2\n3 3\n", 0) == 0);
}
