#include "imlab/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "imlab/constellation.hpp"
#include "imlab/csv.hpp"
#include "imlab/detector.hpp"
#include "imlab/errors.hpp"
#include "imlab/interference.hpp"
#include "imlab/monte_carlo.hpp"
#include "imlab/optimizer.hpp"
#include "imlab/raster.hpp"

#ifndef IMLAB_VERSION
#define IMLAB_VERSION "dev"
#endif

namespace imlab::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// "a,b,c" where each item is a number or an inclusive range "start:step:stop".
std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> values;
  try {
    for (const auto item : csv::split_fields(text)) {
      const auto c1 = item.find(':');
      if (c1 == std::string_view::npos) {
        values.push_back(csv::parse_double(item));
        continue;
      }
      const auto c2 = item.find(':', c1 + 1);
      if (c2 == std::string_view::npos) throw ParseError("range needs start:step:stop");
      const double start = csv::parse_double(item.substr(0, c1));
      const double step = csv::parse_double(item.substr(c1 + 1, c2 - c1 - 1));
      const double stop = csv::parse_double(item.substr(c2 + 1));
      if (!(step > 0) || stop < start) throw ParseError("range step must be positive");
      const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
      for (long i = 0; i <= n; ++i) values.push_back(start + static_cast<double>(i) * step);
    }
  } catch (const ParseError& e) {
    throw ConfigError(std::string(what) + ": cannot parse '" + text + "' (" + e.what() + ")");
  }
  if (values.empty()) throw ConfigError(std::string(what) + ": empty list");
  return values;
}

std::vector<DetectorTag> parse_detectors(const std::string& text) {
  std::vector<DetectorTag> tags;
  for (const auto item : csv::split_fields(text)) tags.push_back(parse_detector_tag(item));
  if (tags.empty()) throw ConfigError("--detectors: empty list");
  return tags;
}

struct ConstellationArgs {
  std::string family = "qam";
  int order = 4;
  std::string file;

  void add(CLI::App* app) {
    app->add_option("--const", family, "Reference family")
        ->check(CLI::IsMember({"psk", "qam", "pam"}))
        ->capture_default_str();
    app->add_option("--order", order, "Constellation size M")->capture_default_str();
    app->add_option("--const-file", file, "index,re,im CSV (overrides --const/--order)");
  }

  Constellation build(std::ostream& err) const {
    if (!file.empty()) {
      LoadedConstellation loaded = load_constellation(file);
      if (loaded.energy_warning) {
        err << "warning: " << file << " has mean energy " << loaded.mean_energy
            << ", not 1; using it as given\n";
      }
      return std::move(loaded.constellation);
    }
    if (family == "psk") return make_psk(order);
    if (family == "pam") return make_pam(order);
    return make_qam(order);
  }

  json to_json() const {
    if (!file.empty()) return {{"file", file}};
    return {{"family", family}, {"order", order}};
  }
};

struct Manifest {
  std::string subcommand;
  json params = json::object();
  std::optional<std::uint64_t> seed;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write(const fs::path& primary) const {
    json j;
    j["subcommand"] = subcommand;
    j["params"] = params;
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["version"] = IMLAB_VERSION;
    j["outputs"] = outputs;
    j["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fs::path path = primary;
    path += ".manifest.json";
    auto out = csv::open_output(path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing '" + path.string() + "'");
  }
};

void finish(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, std::ostream& err) {
  if (seed) return *seed;
  err << "note: no --seed given; using seed 0\n";
  return 0;
}

MlgOptions mlg_options(double eps, double rmax, bool table) {
  if (!(eps > 0 && eps < 1)) throw DomainError("--eps must lie in (0, 1)");
  if (!(rmax > 0)) throw DomainError("--rmax must be positive");
  return {eps, rmax, {table, 0.0}};
}

// ---- trunc-table -----------------------------------------------------------

struct TruncTable {
  std::string m_list, inr_list;
  double eps = 1e-3, rmax = 4.0;
  std::string output;

  void add(CLI::App* app) {
    app->add_option("--m", m_list, "Nakagami shapes, e.g. 2,3,5")->required();
    app->add_option("--inr-db", inr_list, "INR grid in dB")->required();
    app->add_option("--eps", eps, "Tail tolerance")->capture_default_str();
    app->add_option("--rmax", rmax, "Largest residual radius")->capture_default_str();
    app->add_option("-o,--output", output, "Output CSV")->required();
  }

  void run(std::ostream&, std::ostream&) const {
    Manifest man{"trunc-table"};
    const auto ms = parse_list(m_list, "--m");
    const auto inrs = parse_list(inr_list, "--inr-db");
    const MlgOptions opt = mlg_options(eps, rmax, false);

    auto out = csv::open_output(output);
    out << "m";
    for (double g : inrs) out << ',' << csv::format_double(g);
    out << '\n';
    for (double m : ms) {
      out << csv::format_double(m);
      for (double g : inrs) {
        out << ',' << min_truncation_index(InterferenceParams::from_inr_db(m, g), opt.epsilon,
                                           opt.r_max);
      }
      out << '\n';
    }
    finish(out, output);
    man.params = {{"m", ms}, {"inr_db", inrs}, {"eps", eps}, {"rmax", rmax}};
    man.outputs = {output};
    man.write(output);
  }
};

// ---- phase-stats -----------------------------------------------------------

struct PhaseStats {
  std::string m_list;
  std::string output;

  void add(CLI::App* app) {
    app->add_option("--m", m_list, "Nakagami shapes")->required();
    app->add_option("-o,--output", output, "Output CSV")->required();
  }

  void run(std::ostream&, std::ostream&) const {
    Manifest man{"phase-stats"};
    const auto ms = parse_list(m_list, "--m");
    auto out = csv::open_output(output);
    out << "m,c_norm,d_integral,phase_variance\n";
    for (double m : ms) {
      out << csv::format_double(m) << ',' << csv::format_double(c_norm(m)) << ','
          << csv::format_double(d_integral(m)) << ',' << csv::format_double(phase_variance(m))
          << '\n';
    }
    finish(out, output);
    man.params = {{"m", ms}};
    man.outputs = {output};
    man.write(output);
  }
};

// ---- sep-sweep -------------------------------------------------------------

struct SepSweep {
  ConstellationArgs constellation;
  std::string snr_list = "30";
  std::string gamma_list, inr_list;
  double m = 2.0;
  bool no_interference = false;
  std::string detector_list = "mlg,cai,eucl";
  std::uint64_t trials = 100000;
  std::optional<std::uint64_t> seed;
  double eps = 1e-3, rmax = 4.0;
  bool radial_table = false;
  bool maxdiff = false;
  int threads = 0;
  std::string output;

  void add(CLI::App* app) {
    constellation.add(app);
    app->add_option("--snr-db", snr_list, "SNR in dB (a list with --maxdiff)")
        ->capture_default_str();
    auto* g = app->add_option("--gamma-db", gamma_list, "SIR grid gamma = SNR - INR in dB");
    app->add_option("--inr-db", inr_list, "INR grid in dB (alternative to --gamma-db)")
        ->excludes(g);
    app->add_option("--m", m, "Nakagami shape")->capture_default_str();
    app->add_flag("--no-interference", no_interference, "Drop the interference term");
    app->add_option("--detectors", detector_list, "Subset of mlg,cai,eucl")
        ->capture_default_str();
    app->add_option("--trials", trials, "Trials per grid point")->capture_default_str();
    app->add_option("--seed", seed, "RNG seed");
    app->add_option("--eps", eps, "ML-G tail tolerance")->capture_default_str();
    app->add_option("--rmax", rmax, "ML-G truncation radius")->capture_default_str();
    app->add_flag("--radial-table", radial_table, "Interpolate ML-G radial coefficients");
    app->add_flag("--maxdiff", maxdiff, "Per SNR, the largest SEP(CAI) - SEP(ML-G) over gamma");
    app->add_option("--threads", threads, "Worker cap (default: IMLAB_THREADS or all cores)");
    app->add_option("-o,--output", output, "Output CSV")->required();
  }

  std::vector<double> gamma_grid(double snr_db) const {
    if (!gamma_list.empty()) return parse_list(gamma_list, "--gamma-db");
    std::vector<double> g = parse_list(inr_list, "--inr-db");
    for (double& v : g) v = snr_db - v;
    return g;
  }

  void run(std::ostream& out_msg, std::ostream& err) const {
    Manifest man{maxdiff ? "sep-sweep --maxdiff" : "sep-sweep"};
    if (trials < 1) throw ConfigError("--trials must be positive");
    const std::uint64_t s = resolve_seed(seed, err);
    man.seed = s;
    const Constellation c = constellation.build(err);
    const auto snrs = parse_list(snr_list, "--snr-db");
    const auto tags = parse_detectors(detector_list);
    const SweepOptions opts{mlg_options(eps, rmax, radial_table), threads};
    const bool has_grid = !gamma_list.empty() || !inr_list.empty();
    if (m < 1) throw DomainError("--m must be >= 1");

    man.params = {{"constellation", constellation.to_json()},
                  {"snr_db", snrs},
                  {"m", m},
                  {"detectors", detector_list},
                  {"trials", trials},
                  {"eps", eps},
                  {"rmax", rmax},
                  {"radial_table", radial_table},
                  {"interference", !no_interference}};

    auto out = csv::open_output(output);
    if (maxdiff) {
      if (no_interference) throw ConfigError("--maxdiff needs interference");
      if (gamma_list.empty()) throw ConfigError("--maxdiff needs --gamma-db");
      const auto grid = parse_list(gamma_list, "--gamma-db");
      man.params["gamma_db"] = grid;
      write_maxdiff_csv(max_sep_difference(c, m, snrs, grid, trials, s, opts), out);
    } else {
      if (snrs.size() != 1) throw ConfigError("--snr-db takes one value without --maxdiff");
      const auto ch = ChannelParams::from_snr_db(snrs[0], !no_interference);
      if (no_interference && !has_grid) {
        // Without interference the SIR axis is degenerate: one row at gamma = inf.
        for (DetectorTag t : tags) {
          if (t != DetectorTag::Euclidean) {
            throw ConfigError("--no-interference without a gamma grid supports only eucl");
          }
        }
        const SepEstimate e = simulate_sep(c, Detector::euclidean(), ch, InterferenceParams(1.0, 1.0),
                                           trials, s, threads);
        SweepTable t{{DetectorTag::Euclidean}, {{std::numeric_limits<double>::infinity(), {e}}}};
        write_sweep_csv(t, out);
      } else {
        if (!has_grid) throw ConfigError("sep-sweep needs --gamma-db or --inr-db");
        const auto grid = gamma_grid(snrs[0]);
        man.params["gamma_db"] = grid;
        write_sweep_csv(sep_sweep(c, tags, ch, m, grid, trials, s, opts), out);
      }
    }
    finish(out, output);
    man.outputs = {output};
    man.write(output);
    out_msg << "wrote " << output << '\n';
  }
};

// ---- regions ---------------------------------------------------------------

struct Regions {
  ConstellationArgs constellation;
  double snr_db = 10.0;
  std::optional<double> inr_db;
  double m = 2.0;
  std::string detector = "mlg";
  std::string window = "-4,4,-4,4";
  int res = 256;
  double eps = 1e-3, rmax = 4.0;
  int threads = 0;
  std::string output, pgm;

  void add(CLI::App* app) {
    constellation.add(app);
    app->add_option("--snr-db", snr_db, "SNR in dB")->capture_default_str();
    app->add_option("--inr-db", inr_db, "INR in dB (required for mlg and cai)");
    app->add_option("--m", m, "Nakagami shape")->capture_default_str();
    app->add_option("--detector", detector, "mlg, cai or eucl")->capture_default_str();
    app->add_option("--window", window, "re_min,re_max,im_min,im_max")->capture_default_str();
    app->add_option("--res", res, "Grid points per axis")->capture_default_str();
    app->add_option("--eps", eps, "ML-G tail tolerance")->capture_default_str();
    app->add_option("--rmax", rmax, "ML-G truncation radius")->capture_default_str();
    app->add_option("--threads", threads, "Worker cap");
    app->add_option("-o,--output", output, "Output CSV (re,im,label)")->required();
    app->add_option("--pgm", pgm, "Also write a plain PGM image");
  }

  void run(std::ostream& out_msg, std::ostream& err) const {
    Manifest man{"regions"};
    const Constellation c = constellation.build(err);
    const auto w = parse_list(window, "--window");
    if (w.size() != 4) throw ConfigError("--window needs four values");
    const DetectorTag tag = parse_detector_tag(detector);
    const double s_lin = db_to_linear(snr_db);

    std::optional<Detector> det;
    if (tag == DetectorTag::Euclidean) {
      det = Detector::euclidean();
    } else {
      if (!inr_db) throw ConfigError("--inr-db is required for detector " + detector);
      const auto intf = InterferenceParams::from_inr_db(m, *inr_db);
      det = tag == DetectorTag::Cai ? Detector::cai_matched(intf)
                                    : Detector::mlg(intf, mlg_options(eps, rmax, false));
    }
    const RegionRaster raster =
        rasterize_regions(c, s_lin, *det, {w[0], w[1], w[2], w[3]}, res, threads);

    auto out = csv::open_output(output);
    write_raster_csv(raster, out);
    finish(out, output);
    man.outputs = {output};
    if (!pgm.empty()) {
      auto img = csv::open_output(pgm);
      write_raster_pgm(raster, img);
      finish(img, pgm);
      man.outputs.push_back(pgm);
    }
    man.params = {{"constellation", constellation.to_json()},
                  {"snr_db", snr_db},
                  {"inr_db", inr_db ? json(*inr_db) : json(nullptr)},
                  {"m", m},
                  {"detector", detector_name(tag)},
                  {"window", w},
                  {"res", res},
                  {"eps", eps},
                  {"rmax", rmax}};
    man.write(output);
    out_msg << "wrote " << output << '\n';
  }
};

// ---- optimize --------------------------------------------------------------

struct Optimize {
  int order = 16;
  double snr_db = 20.0;
  std::optional<double> inr_db, gamma_db;
  double m = 2.0;
  OptimizerConfig cfg;
  std::optional<std::uint64_t> seed;
  bool direct = false;
  std::string output, trace;

  void add(CLI::App* app) {
    app->add_option("--order", order, "Constellation size M")->capture_default_str();
    app->add_option("--snr-db", snr_db, "SNR in dB")->capture_default_str();
    auto* i = app->add_option("--inr-db", inr_db, "INR in dB");
    app->add_option("--gamma-db", gamma_db, "SIR in dB (alternative to --inr-db)")->excludes(i);
    app->add_option("--m", m, "Nakagami shape")->capture_default_str();
    app->add_option("--population", cfg.population, "Population size (default 30M)");
    app->add_option("--generations", cfg.generations)->capture_default_str();
    app->add_option("--F", cfg.diff_weight, "Differential weight")->capture_default_str();
    app->add_option("--CR", cfg.crossover, "Crossover rate")->capture_default_str();
    app->add_option("--delta-min", cfg.delta_min, "Minimum spacing (default 0.1/sqrt(M))");
    app->add_option("--eval-trials", cfg.eval_trials, "Trials per objective evaluation")
        ->capture_default_str();
    app->add_option("--refine-iters", cfg.refine_iters)->capture_default_str();
    app->add_option("--refine-step", cfg.refine_step0)->capture_default_str();
    app->add_option("--eps", cfg.detector.epsilon, "ML-G tail tolerance")->capture_default_str();
    app->add_option("--rmax", cfg.detector.r_max, "ML-G truncation radius")->capture_default_str();
    app->add_flag("--direct-series", direct, "Evaluate ML-G without the radial table");
    app->add_option("--seed", seed, "RNG seed");
    app->add_option("--threads", cfg.threads, "Worker cap");
    app->add_option("-o,--output", output, "Optimized constellation CSV")->required();
    app->add_option("--trace", trace, "Trace CSV (default: trace.csv next to the output)");
  }

  void run(std::ostream& out_msg, std::ostream& err) {
    Manifest man{"optimize"};
    cfg.seed = resolve_seed(seed, err);
    man.seed = cfg.seed;
    if (!inr_db && !gamma_db) throw ConfigError("optimize needs --inr-db or --gamma-db");
    const double inr = inr_db ? *inr_db : snr_db - *gamma_db;
    mlg_options(cfg.detector.epsilon, cfg.detector.r_max, false);
    cfg.detector.table.enabled = !direct;

    const auto ch = ChannelParams::from_snr_db(snr_db);
    const auto intf = InterferenceParams::from_inr_db(m, inr);
    const fs::path trace_path =
        trace.empty() ? fs::path(output).parent_path() / "trace.csv" : fs::path(trace);

    const OptimizeResult res = optimize_constellation(order, ch, intf, cfg);
    save_constellation(res.constellation, output);
    auto tr = csv::open_output(trace_path);
    write_trace_csv(res.trace, tr);
    finish(tr, trace_path);

    man.params = {{"order", order},
                  {"snr_db", snr_db},
                  {"inr_db", inr},
                  {"m", m},
                  {"population", cfg.population == 0 ? 30 * order : cfg.population},
                  {"generations", cfg.generations},
                  {"F", cfg.diff_weight},
                  {"CR", cfg.crossover},
                  {"delta_min", cfg.delta_min == 0 ? 0.1 / std::sqrt(order) : cfg.delta_min},
                  {"eval_trials", cfg.eval_trials},
                  {"refine_iters", cfg.refine_iters},
                  {"refine_step", cfg.refine_step0},
                  {"eps", cfg.detector.epsilon},
                  {"rmax", cfg.detector.r_max},
                  {"radial_table", !direct}};
    man.outputs = {output, trace_path.string()};
    man.write(output);
    out_msg << "best objective " << res.best.penalized << " (SEP " << res.best.sep
            << ") after " << res.generations_run << " generations; wrote " << output << " and "
            << trace_path.string() << '\n';
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Detection and constellation design under Nakagami-m interference", "imlab"};
  app.set_version_flag("--version", IMLAB_VERSION);
  app.require_subcommand(1);

  TruncTable trunc;
  PhaseStats phase;
  SepSweep sweep;
  Regions regions;
  Optimize optimize;
  auto* trunc_cmd = app.add_subcommand("trunc-table", "Truncation index K over (m, INR)");
  trunc.add(trunc_cmd);
  auto* phase_cmd = app.add_subcommand("phase-stats", "Phase normalizers and variance per m");
  phase.add(phase_cmd);
  auto* sweep_cmd = app.add_subcommand("sep-sweep", "Monte Carlo SEP versus gamma");
  sweep.add(sweep_cmd);
  auto* regions_cmd = app.add_subcommand("regions", "Rasterized decision regions");
  regions.add(regions_cmd);
  auto* opt_cmd = app.add_subcommand("optimize", "SEP-minimizing constellation search");
  optimize.add(opt_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*trunc_cmd) trunc.run(out, err);
    else if (*phase_cmd) phase.run(out, err);
    else if (*sweep_cmd) sweep.run(out, err);
    else if (*regions_cmd) regions.run(out, err);
    else if (*opt_cmd) optimize.run(out, err);
    return 0;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace imlab::cli
