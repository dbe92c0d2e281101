#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "imlab/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = imlab::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "imlab_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("trunc-table writes the truncation grid and a manifest") {
  const fs::path out = scratch("k.csv");
  const Result r = run({"trunc-table", "--m", "2,3,5,10,50", "--inr-db", "-20,-10,0,10,20,30",
                        "--eps", "1e-3", "--rmax", "4", "-o", out.string()});
  REQUIRE(r.code == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("m,-20,-10,0,10,20,30\n2,1,1,2,4,5,5\n", 0) == 0);

  const auto manifest = nlohmann::json::parse(slurp(out.string() + ".manifest.json"));
  CHECK(manifest["subcommand"] == "trunc-table");
  CHECK(manifest["params"]["eps"] == 1e-3);
  CHECK(manifest["outputs"][0] == out.string());
  CHECK(manifest.contains("version"));
  CHECK(manifest["wall_clock_seconds"].get<double>() >= 0.0);
}

TEST_CASE("grid ranges expand inclusively") {
  const fs::path out = scratch("k_range.csv");
  REQUIRE(run({"trunc-table", "--m", "2", "--inr-db", "-20:10:30", "-o", out.string()}).code == 0);
  CHECK(slurp(out).rfind("m,-20,-10,0,10,20,30\n", 0) == 0);
}

TEST_CASE("phase-stats") {
  const fs::path out = scratch("phase.csv");
  REQUIRE(run({"phase-stats", "--m", "1,2", "-o", out.string()}).code == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("m,c_norm,d_integral,phase_variance\n1,", 0) == 0);
}

TEST_CASE("sep-sweep without interference") {
  const fs::path out = scratch("awgn.csv");
  const Result r = run({"sep-sweep", "--const", "qam", "--order", "4", "--snr-db", "10",
                        "--no-interference", "--detectors", "eucl", "--trials", "200000",
                        "--seed", "7", "-o", out.string()});
  REQUIRE(r.code == 0);
  std::istringstream in(slurp(out));
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "gamma_db,ser_eucl,ci_eucl");
  CHECK(row.rfind("inf,", 0) == 0);
  const double sep = std::stod(row.substr(4));
  CHECK(sep > 1.1e-3);
  CHECK(sep < 2.1e-3);
}

TEST_CASE("missing seed is announced") {
  const fs::path out = scratch("noseed.csv");
  const Result r = run({"sep-sweep", "--order", "4", "--snr-db", "10", "--gamma-db", "0",
                        "--detectors", "eucl", "--trials", "100", "-o", out.string()});
  CHECK(r.code == 0);
  CHECK(r.err.find("seed 0") != std::string::npos);
}

TEST_CASE("regions raster") {
  const fs::path out = scratch("regions.csv");
  const fs::path pgm = scratch("regions.pgm");
  const Result r = run({"regions", "--const", "psk", "--order", "8", "--snr-db", "10", "--inr-db",
                        "15", "--m", "2", "--detector", "mlg", "--window", "-4,4,-4,4", "--res",
                        "64", "-o", out.string(), "--pgm", pgm.string()});
  REQUIRE(r.code == 0);
  std::istringstream in(slurp(out));
  std::string line;
  std::getline(in, line);
  CHECK(line == "re,im,label");
  int rows = 0;
  while (std::getline(in, line)) {
    const int label = std::stoi(line.substr(line.rfind(',') + 1));
    CHECK(label >= 0);
    CHECK(label < 8);
    ++rows;
  }
  CHECK(rows == 64 * 64);
  CHECK(slurp(pgm).rfind("P2\n64 64\n", 0) == 0);
}

TEST_CASE("optimize writes the constellation and its trace") {
  const fs::path out = scratch("opt.csv");
  const fs::path trace = scratch("opt_trace.csv");
  const Result r = run({"optimize", "--order", "4", "--snr-db", "10", "--inr-db", "5", "--m", "2",
                        "--population", "8", "--generations", "3", "--eval-trials", "2000",
                        "--refine-iters", "5", "--seed", "1", "-o", out.string(), "--trace",
                        trace.string()});
  REQUIRE(r.code == 0);
  CHECK(slurp(out).rfind("index,re,im\n0,", 0) == 0);
  CHECK(slurp(trace).rfind("generation,best_objective\n", 0) == 0);
  const auto manifest = nlohmann::json::parse(slurp(out.string() + ".manifest.json"));
  CHECK(manifest["seed"] == 1);
  CHECK(manifest["outputs"].size() == 2);
}

TEST_CASE("identical invocations give identical outputs") {
  const std::vector<std::vector<std::string>> commands = {
      {"trunc-table", "--m", "2,50", "--inr-db", "0,20"},
      {"phase-stats", "--m", "2,5"},
      {"sep-sweep", "--const", "psk", "--order", "8", "--snr-db", "15", "--gamma-db", "0,10",
       "--m", "3", "--trials", "5000", "--seed", "3"},
      {"regions", "--const", "qam", "--order", "16", "--snr-db", "12", "--inr-db", "8",
       "--detector", "cai", "--res", "40"},
      {"optimize", "--order", "4", "--snr-db", "10", "--gamma-db", "3", "--population", "8",
       "--generations", "2", "--eval-trials", "1000", "--refine-iters", "3", "--seed", "5"},
  };
  int n = 0;
  for (auto args : commands) {
    const fs::path a = scratch("det_a" + std::to_string(n) + ".csv");
    const fs::path b = scratch("det_b" + std::to_string(n) + ".csv");
    ++n;
    auto args_a = args, args_b = args;
    args_a.insert(args_a.end(), {"-o", a.string()});
    args_b.insert(args_b.end(), {"-o", b.string()});
    if (args[0] == "optimize") {
      args_a.insert(args_a.end(), {"--trace", a.string() + ".trace"});
      args_b.insert(args_b.end(), {"--trace", b.string() + ".trace"});
    }
    CAPTURE(args[0]);
    REQUIRE(run(args_a).code == 0);
    REQUIRE(run(args_b).code == 0);
    CHECK(slurp(a) == slurp(b));
    if (args[0] == "optimize") CHECK(slurp(a.string() + ".trace") == slurp(b.string() + ".trace"));
  }
}

TEST_CASE("help exits cleanly for every subcommand") {
  CHECK(run({"--help"}).code == 0);
  for (const char* sub : {"trunc-table", "phase-stats", "sep-sweep", "regions", "optimize"}) {
    const Result r = run({sub, "--help"});
    CAPTURE(sub);
    CHECK(r.code == 0);
    CHECK(r.out.find("--") != std::string::npos);
  }
}

TEST_CASE("argument and domain errors exit with 2") {
  const std::string out = scratch("err.csv").string();
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"trunc-table", "--m", "2", "--inr-db", "0", "--bogus", "-o", out}).code == 2);
  CHECK(run({"trunc-table", "--m", "0.5", "--inr-db", "0", "-o", out}).code == 2);
  CHECK(run({"trunc-table", "--m", "2", "--inr-db", "0", "--eps", "1.5", "-o", out}).code == 2);
  CHECK(run({"trunc-table", "--m", "2", "--inr-db", "x", "-o", out}).code == 2);
  CHECK(run({"trunc-table", "--m", "2", "--inr-db", "0", "-o", "/nonexistent/dir/k.csv"}).code == 2);
  CHECK(run({"sep-sweep", "--const", "hex", "--gamma-db", "0", "-o", out}).code == 2);
  CHECK(run({"sep-sweep", "--order", "12", "--gamma-db", "0", "--seed", "1", "-o", out}).code == 2);
  CHECK(run({"sep-sweep", "--no-interference", "--detectors", "mlg", "--seed", "1", "-o", out})
            .code == 2);
  CHECK(run({"regions", "--detector", "mlg", "-o", out}).code == 2);
  CHECK(run({"optimize", "--order", "4", "--snr-db", "10", "--seed", "1", "-o", out}).code == 2);
  const Result r = run({"optimize", "--order", "4", "--inr-db", "0", "--delta-min", "3", "--seed",
                        "1", "-o", out});
  CHECK(r.code == 2);
  CHECK(r.err.find("delta_min") != std::string::npos);
}
