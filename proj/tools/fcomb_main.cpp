// fcomb: command-line front end for the combined amplitude/phase toolkit.
// Subcommands cover the full pipeline (smooth -> align -> fcpca / fccca),
// dataset simulation and the reconstruction-error benchmark. Every run
// writes a run.json manifest; failures keep the manifest, print a
// machine-readable error object to stderr and exit nonzero. All artifact
// writes happen at the end of the run from the single orchestrating thread.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <fcomb/align.hpp>
#include <fcomb/baselines.hpp>
#include <fcomb/csv.hpp>
#include <fcomb/fccca.hpp>
#include <fcomb/fcpca.hpp>
#include <fcomb/parallel.hpp>
#include <fcomb/simulate.hpp>
#include <fcomb/smooth.hpp>
#include <fcomb/svg.hpp>
#include <fcomb/version.hpp>

namespace stdfs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Options {
  std::string command;
  std::string input;
  std::string out;
  int grid_k = 101;
  std::optional<int> m;
  std::optional<double> lambda;
  std::uint64_t seed = 0;
  std::string model;
  std::optional<int> n;
  int reps = 1;
  std::optional<double> noise_sd;
  std::string format = "csv";
};

struct Artifact {
  std::string name;
  std::string content;
};

class Timer {
 public:
  long long ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ =
      std::chrono::steady_clock::now();
};

// Tabular artifacts honor --format: CSV by default, a columns/rows JSON
// mirror of the same values otherwise.
void emit_table(std::vector<Artifact>& artifacts, const std::string& base,
                const fcomb::CsvTable& table, const std::string& format) {
  if (format == "json") {
    json j;
    j["columns"] = table.columns;
    json rows = json::array();
    for (const std::vector<fcomb::CsvCell>& row : table.rows) {
      json r = json::array();
      for (const fcomb::CsvCell& cell : row) {
        if (cell.is_number)
          r.push_back(cell.number);
        else
          r.push_back(cell.text);
      }
      rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    artifacts.push_back({base + ".json", j.dump(2) + "\n"});
  } else {
    artifacts.push_back({base + ".csv", table.rendered()});
  }
}

void emit_json(std::vector<Artifact>& artifacts, const std::string& name,
               const json& j) {
  artifacts.push_back({name, j.dump(2) + "\n"});
}

struct PipelineData {
  fcomb::TimeGrid grid;
  std::vector<std::string> ids;
  std::vector<fcomb::SampledCurve> smoothed;
};

// Ingest the input file and smooth every record onto the uniform working
// grid. Records keep their own observation times, so missing cells and
// irregular sampling flow through the same path.
PipelineData load_and_smooth(const Options& opt,
                             std::vector<std::string>& warnings,
                             json& timings) {
  Timer t_ingest;
  fcomb::IngestResult ing = fcomb::ingest_csv(opt.input);
  timings["ingest_ms"] = t_ingest.ms();
  for (const std::string& w : ing.warnings) {
    warnings.push_back(w);
    std::cerr << "warning: " << w << "\n";
  }

  Timer t_smooth;
  PipelineData pd;
  pd.grid = fcomb::TimeGrid::uniform(opt.grid_k);
  pd.ids = ing.ids;
  const int n = static_cast<int>(ing.records.size());
  pd.smoothed.assign(static_cast<std::size_t>(n),
                     fcomb::SampledCurve{pd.grid, fcomb::Vec()});
  fcomb::parallel_for(n, [&](int i) {
    const fcomb::RawRecord& rec = ing.records[static_cast<std::size_t>(i)];
    try {
      pd.smoothed[static_cast<std::size_t>(i)] =
          fcomb::eval_curve(fcomb::fit_smooth(rec), pd.grid);
    } catch (const fcomb::invalid_input& e) {
      throw fcomb::invalid_input("record '" + rec.id + "': " + e.what(),
                                 e.index());
    } catch (const fcomb::numeric_failure& e) {
      throw fcomb::numeric_failure("record '" + rec.id + "': " + e.what(),
                                   e.residual());
    }
  });
  timings["smooth_ms"] = t_smooth.ms();
  return pd;
}

fcomb::AlignmentResult run_align(const std::vector<fcomb::SampledCurve>& fs,
                                 json& timings) {
  Timer t;
  fcomb::AlignmentResult ar = fcomb::align_set(fs);
  timings["align_ms"] = t.ms();
  return ar;
}

std::vector<std::string> artifact_names(const std::vector<Artifact>& a) {
  std::vector<std::string> names;
  names.reserve(a.size());
  for (const Artifact& art : a) names.push_back(art.name);
  return names;
}

double column_sd(const fcomb::Mat& m, int col) {
  const int n = static_cast<int>(m.rows());
  if (n < 2) return 0.0;
  const double mean = m.col(col).mean();
  const double var =
      (m.col(col).array() - mean).square().sum() / (n - 1);
  return std::sqrt(std::max(var, 0.0));
}

void cmd_smooth(const Options& opt, std::vector<Artifact>& artifacts,
                std::vector<std::string>& warnings, json& timings) {
  PipelineData pd = load_and_smooth(opt, warnings, timings);
  std::vector<fcomb::Vec> vals;
  vals.reserve(pd.smoothed.size());
  for (const fcomb::SampledCurve& c : pd.smoothed) vals.push_back(c.v);
  emit_table(artifacts, "smoothed", fcomb::curves_table(pd.ids, pd.grid, vals),
             opt.format);
}

void cmd_align(const Options& opt, std::vector<Artifact>& artifacts,
               std::vector<std::string>& warnings, json& timings,
               json& result) {
  PipelineData pd = load_and_smooth(opt, warnings, timings);
  fcomb::AlignmentResult ar = run_align(pd.smoothed, timings);
  std::vector<fcomb::Vec> aligned, warps, phases;
  for (std::size_t i = 0; i < pd.smoothed.size(); ++i) {
    aligned.push_back(ar.aligned[i].v);
    warps.push_back(ar.warps[i].v);
    phases.push_back(ar.phases[i].x);
  }
  emit_table(artifacts, "aligned",
             fcomb::curves_table(pd.ids, pd.grid, aligned), opt.format);
  emit_table(artifacts, "warps", fcomb::curves_table(pd.ids, pd.grid, warps),
             opt.format);
  emit_table(artifacts, "phases",
             fcomb::curves_table(pd.ids, pd.grid, phases), opt.format);
  result["iterations"] = ar.iterations;
  result["converged"] = ar.converged;
}

void cmd_fcpca(const Options& opt, std::vector<Artifact>& artifacts,
               std::vector<std::string>& warnings, json& timings,
               json& result) {
  const int m = opt.m.value_or(2);
  if (m < 1) throw fcomb::invalid_input("m must be at least 1");
  PipelineData pd = load_and_smooth(opt, warnings, timings);
  fcomb::AlignmentResult ar = run_align(pd.smoothed, timings);

  Timer t_scale;
  const fcomb::ScaleEstimate ce =
      fcomb::estimate_C(ar.aligned, ar.phases, pd.smoothed, m);
  timings["scale_ms"] = t_scale.ms();

  Timer t_fit;
  const fcomb::CombinedEigenModel model =
      fcomb::fit_eigen(ar.aligned, ar.phases, ce.C);
  timings["fit_ms"] = t_fit.ms();

  const int k = pd.grid.k();
  const int r = static_cast<int>(model.eigenvalues.size());

  fcomb::CsvTable evals;
  evals.columns = {"component", "eigenvalue"};
  for (int i = 0; i < r; ++i)
    evals.rows.push_back({fcomb::CsvCell(i + 1),
                          fcomb::CsvCell(model.eigenvalues(i))});
  emit_table(artifacts, "eigenvalues", evals, opt.format);

  // Long format on the glued domain; component 0 is the mean. Phase-block
  // values carry the glue scale C exactly as the model stores them, so
  // mean + scores * eigenfunctions reproduces the fitted expansion.
  fcomb::CsvTable efuns;
  efuns.columns = {"component", "block", "t", "value"};
  auto push_glued = [&](int comp, const fcomb::Vec& glued) {
    for (int j = 0; j < k; ++j)
      efuns.rows.push_back({fcomb::CsvCell(comp), fcomb::CsvCell("amplitude"),
                            fcomb::CsvCell(pd.grid.t(j)),
                            fcomb::CsvCell(glued(j))});
    for (int j = 0; j < k; ++j)
      efuns.rows.push_back({fcomb::CsvCell(comp), fcomb::CsvCell("phase"),
                            fcomb::CsvCell(pd.grid.t(j)),
                            fcomb::CsvCell(glued(k + j))});
  };
  push_glued(0, model.mean);
  for (int i = 0; i < r; ++i) push_glued(i + 1, model.eigenfunctions.col(i));
  emit_table(artifacts, "eigenfunctions", efuns, opt.format);

  fcomb::CsvTable scores;
  scores.columns = {"id"};
  for (int i = 0; i < r; ++i)
    scores.columns.push_back("pc" + std::to_string(i + 1));
  for (std::size_t s = 0; s < pd.ids.size(); ++s) {
    std::vector<fcomb::CsvCell> row;
    row.emplace_back(pd.ids[s]);
    for (int i = 0; i < r; ++i)
      row.emplace_back(model.scores(static_cast<int>(s), i));
    scores.rows.push_back(std::move(row));
  }
  emit_table(artifacts, "scores", scores, opt.format);

  json cjson;
  cjson["C"] = ce.C;
  cjson["degenerate"] = ce.degenerate;
  cjson["m"] = m;
  emit_json(artifacts, "C.json", cjson);

  for (int i = 0; i < std::min(m, r); ++i) {
    std::vector<fcomb::SvgSeries> series;
    for (double z : {-1.0, 0.0, 1.0}) {
      try {
        const fcomb::SampledCurve mode =
            fcomb::mode_of_variation(model, i, z);
        fcomb::SvgSeries s;
        s.x.assign(pd.grid.t.data(), pd.grid.t.data() + k);
        s.y.assign(mode.v.data(), mode.v.data() + k);
        s.label = z == 0.0 ? std::string("mean")
                           : (z < 0 ? "z = -1" : "z = +1");
        series.push_back(std::move(s));
      } catch (const fcomb::domain_exit& e) {
        std::ostringstream os;
        os << "mode pc" << i + 1 << " at z=" << z
           << " omitted: " << e.what();
        warnings.push_back(os.str());
        std::cerr << "warning: " << os.str() << "\n";
      }
    }
    const std::string title =
        "Combined mode of variation, component " + std::to_string(i + 1);
    artifacts.push_back({"modes_pc" + std::to_string(i + 1) + ".svg",
                         fcomb::render_line_plot(title, "t", "f(t)", series)});
  }

  result["C"] = ce.C;
  result["degenerate"] = ce.degenerate;
  result["components"] = r;
  result["align_iterations"] = ar.iterations;
  result["align_converged"] = ar.converged;
}

void cmd_fccca(const Options& opt, std::vector<Artifact>& artifacts,
               std::vector<std::string>& warnings, json& timings,
               json& result) {
  const int pairs = opt.m.value_or(1);
  if (pairs < 1) throw fcomb::invalid_input("m must be at least 1");
  PipelineData pd = load_and_smooth(opt, warnings, timings);
  fcomb::AlignmentResult ar = run_align(pd.smoothed, timings);

  Timer t_fit;
  const fcomb::CcaModel model =
      fcomb::fit_cca(ar.aligned, ar.phases, opt.lambda, pairs);
  timings["fit_ms"] = t_fit.ms();

  const int k = pd.grid.k();
  const int r = static_cast<int>(model.correlations.size());

  fcomb::CsvTable weights;
  weights.columns = {"component", "block", "t", "value"};
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < k; ++j)
      weights.rows.push_back(
          {fcomb::CsvCell(i + 1), fcomb::CsvCell("amplitude"),
           fcomb::CsvCell(pd.grid.t(j)),
           fcomb::CsvCell(model.amp_weights(j, i))});
    for (int j = 0; j < k; ++j)
      weights.rows.push_back(
          {fcomb::CsvCell(i + 1), fcomb::CsvCell("phase"),
           fcomb::CsvCell(pd.grid.t(j)),
           fcomb::CsvCell(model.phase_weights(j, i))});
  }
  emit_table(artifacts, "cca_weights", weights, opt.format);

  json report;
  report["lambda"] = model.lambda;
  report["lambda_source"] = opt.lambda ? "given" : "cv";
  report["pairs"] = r;
  report["truncated"] = model.truncated;
  report["correlations"] = std::vector<double>(
      model.correlations.data(), model.correlations.data() + r);
  report["slopes"] =
      std::vector<double>(model.slopes.data(), model.slopes.data() + r);
  if (model.validated_first_correlation)
    report["validated_first_correlation"] = *model.validated_first_correlation;
  else
    report["validated_first_correlation"] = nullptr;
  report["n"] = pd.ids.size();
  emit_json(artifacts, "cca_report.json", report);

  // One-standard-deviation amplitude movement with the slope-matched time
  // distortion. The distortion is capped in tangent norm so the plotted
  // curve stays inside the admissible warp set.
  constexpr double kPlotPhaseCap = 0.4;
  for (int i = 0; i < r; ++i) {
    const double sd = column_sd(model.amp_scores, i);
    const double wnorm = fcomb::l2norm(pd.grid, model.phase_weights.col(i));
    std::vector<fcomb::SvgSeries> series;
    bool capped = false;
    for (double z : {-1.0, 0.0, 1.0}) {
      const double a = z * sd;
      double b = a / model.slopes(i);
      if (!std::isfinite(b)) b = 0.0;
      if (std::abs(b) * wnorm > kPlotPhaseCap) {
        b *= kPlotPhaseCap / (std::abs(b) * wnorm);
        capped = true;
      }
      try {
        const fcomb::SampledCurve mode =
            fcomb::canonical_mode(model, i, a, b);
        fcomb::SvgSeries s;
        s.x.assign(pd.grid.t.data(), pd.grid.t.data() + k);
        s.y.assign(mode.v.data(), mode.v.data() + k);
        s.label = z == 0.0 ? std::string("mean")
                           : (z < 0 ? "z = -1" : "z = +1");
        series.push_back(std::move(s));
      } catch (const fcomb::domain_exit& e) {
        std::ostringstream os;
        os << "canonical mode " << i + 1 << " at z=" << z
           << " omitted: " << e.what();
        warnings.push_back(os.str());
        std::cerr << "warning: " << os.str() << "\n";
      }
    }
    if (capped) {
      std::ostringstream os;
      os << "canonical mode " << i + 1
         << ": time distortion capped for plotting";
      warnings.push_back(os.str());
      std::cerr << "warning: " << os.str() << "\n";
    }
    const std::string title = "Canonical pair " + std::to_string(i + 1);
    artifacts.push_back({"cca_mode" + std::to_string(i + 1) + ".svg",
                         fcomb::render_line_plot(title, "t", "f(t)", series)});
  }

  result["lambda"] = model.lambda;
  result["pairs"] = r;
  if (r > 0) result["first_correlation"] = model.correlations(0);
  result["align_iterations"] = ar.iterations;
  result["align_converged"] = ar.converged;
}

std::vector<std::string> make_sim_ids(int n) {
  int width = 1;
  for (int v = n; v >= 10; v /= 10) ++width;
  width = std::clamp(width, 3, 9);
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "sim_%0*d", width, i);
    ids.emplace_back(buf);
  }
  return ids;
}

fcomb::SimConfig sim_config(const Options& opt, int default_n) {
  fcomb::SimConfig cfg;
  cfg.n = opt.n.value_or(default_n);
  cfg.k = opt.grid_k;
  cfg.seed = opt.seed;
  if (opt.noise_sd) {
    if (!(*opt.noise_sd >= 0.0))
      throw fcomb::invalid_input("noise-sd must be nonnegative");
    cfg.noise_sd = *opt.noise_sd;
  }
  cfg.model = fcomb::sim_model_from_string(opt.model);
  return cfg;
}

void cmd_simulate(const Options& opt, std::vector<Artifact>& artifacts,
                  json& timings, json& result) {
  const fcomb::SimConfig cfg = sim_config(opt, 50);
  Timer t;
  const fcomb::SimDataset ds = fcomb::gen_dataset(cfg);
  timings["simulate_ms"] = t.ms();

  const std::vector<std::string> ids = make_sim_ids(cfg.n);
  std::vector<fcomb::Vec> vals;
  vals.reserve(ds.fs.size());
  for (const fcomb::SampledCurve& c : ds.fs) vals.push_back(c.v);
  emit_table(artifacts, "dataset", fcomb::curves_table(ids, ds.grid, vals),
             opt.format);

  json truth;
  truth["model"] = fcomb::to_string(cfg.model);
  truth["n"] = cfg.n;
  truth["k"] = cfg.k;
  truth["seed"] = cfg.seed;
  truth["noise_sd"] = cfg.noise_sd;
  truth["resampled"] = ds.resampled;
  json scores = json::array();
  for (int i = 0; i < ds.scores_true.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < ds.scores_true.cols(); ++j)
      row.push_back(ds.scores_true(i, j));
    scores.push_back(std::move(row));
  }
  truth["scores_true"] = std::move(scores);
  emit_json(artifacts, "truth.json", truth);

  result["resampled"] = ds.resampled;
}

void cmd_benchmark(const Options& opt, std::vector<Artifact>& artifacts,
                   json& timings, json& result) {
  const int m_max = opt.m.value_or(2);
  if (m_max < 1) throw fcomb::invalid_input("m must be at least 1");
  if (opt.reps < 1) throw fcomb::invalid_input("reps must be at least 1");

  Timer t;
  std::array<std::vector<double>, 3> acc;
  for (auto& a : acc) a.assign(static_cast<std::size_t>(m_max), 0.0);
  std::array<fcomb::BaselineMethod, 3> methods{};
  std::vector<int> m_values;
  for (int rep = 0; rep < opt.reps; ++rep) {
    Options rep_opt = opt;
    rep_opt.seed = opt.seed + static_cast<std::uint64_t>(rep);
    const fcomb::SimConfig cfg = sim_config(rep_opt, 100);
    const fcomb::SimDataset ds = fcomb::gen_dataset(cfg);
    const std::array<fcomb::MseCurve, 3> curves =
        fcomb::mse_comparison(ds.fs, m_max);
    for (std::size_t c = 0; c < 3; ++c) {
      methods[c] = curves[c].method;
      if (rep == 0 && c == 0) m_values = curves[c].m_values;
      for (std::size_t mi = 0; mi < curves[c].mse.size(); ++mi)
        acc[c][mi] += curves[c].mse[mi] / opt.reps;
    }
  }
  timings["benchmark_ms"] = t.ms();

  fcomb::CsvTable table;
  table.columns = {"method", "m", "mse"};
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t mi = 0; mi < acc[c].size(); ++mi)
      table.rows.push_back({fcomb::CsvCell(fcomb::to_string(methods[c])),
                            fcomb::CsvCell(m_values[mi]),
                            fcomb::CsvCell(acc[c][mi])});
  emit_table(artifacts, "mse_comparison", table, opt.format);

  std::vector<fcomb::SvgSeries> series;
  for (std::size_t c = 0; c < 3; ++c) {
    fcomb::SvgSeries s;
    for (std::size_t mi = 0; mi < acc[c].size(); ++mi) {
      s.x.push_back(m_values[mi]);
      s.y.push_back(acc[c][mi]);
    }
    s.label = fcomb::to_string(methods[c]);
    series.push_back(std::move(s));
  }
  artifacts.push_back(
      {"mse_plot.svg",
       fcomb::render_line_plot("Reconstruction error by retained components",
                               "components (m)", "mean squared error",
                               series)});

  result["reps"] = opt.reps;
  result["model"] = opt.model;
}

// Fill per-command defaults so the manifest records the effective config.
void resolve_defaults(Options& opt) {
  if (!opt.m) {
    if (opt.command == "fcpca" || opt.command == "benchmark") opt.m = 2;
    if (opt.command == "fccca") opt.m = 1;
  }
  if (opt.command == "simulate" || opt.command == "benchmark") {
    if (opt.model.empty())
      opt.model = opt.command == "simulate" ? "pca" : "toy_linear";
    if (!opt.n) opt.n = opt.command == "simulate" ? 50 : 100;
    if (!opt.noise_sd) opt.noise_sd = fcomb::SimConfig{}.noise_sd;
  }
}

json config_json(const Options& opt) {
  const bool sim = opt.command == "simulate" || opt.command == "benchmark";
  json cfg;
  cfg["input"] = sim ? json(nullptr) : json(opt.input);
  cfg["out"] = opt.out;
  cfg["grid_k"] = opt.grid_k;
  if (opt.m)
    cfg["m"] = *opt.m;
  else
    cfg["m"] = nullptr;
  if (opt.lambda)
    cfg["lambda"] = *opt.lambda;
  else
    cfg["lambda"] = nullptr;
  cfg["seed"] = sim ? json(opt.seed) : json(nullptr);
  cfg["model"] = sim ? json(opt.model) : json(nullptr);
  if (sim && opt.n)
    cfg["n"] = *opt.n;
  else
    cfg["n"] = nullptr;
  cfg["reps"] = opt.command == "benchmark" ? json(opt.reps) : json(nullptr);
  if (opt.noise_sd)
    cfg["noise_sd"] = *opt.noise_sd;
  else
    cfg["noise_sd"] = nullptr;
  cfg["format"] = opt.format;
  return cfg;
}

json versions_json() {
  json v;
  v["fcomb"] = fcomb::kFcombVersion;
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%d.%d.%d", EIGEN_WORLD_VERSION,
                  EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
    v["eigen"] = buf;
  }
  v["cli11"] = CLI11_VERSION;
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%d.%d.%d", NLOHMANN_JSON_VERSION_MAJOR,
                  NLOHMANN_JSON_VERSION_MINOR, NLOHMANN_JSON_VERSION_PATCH);
    v["nlohmann_json"] = buf;
  }
  return v;
}

void write_file(const stdfs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw fcomb::invalid_input("cannot write file: " + path.string());
  out << content;
  out.flush();
  if (!out) throw fcomb::invalid_input("cannot write file: " + path.string());
}

int run(Options opt) {
  resolve_defaults(opt);
  Timer t_total;
  std::vector<Artifact> artifacts;
  std::vector<std::string> warnings;
  json timings;
  json result;
  json error;
  int status = 0;
  bool outdir_ok = false;
  const stdfs::path outdir(opt.out);

  auto capture = [&](const char* type, const std::exception& e, json extra) {
    error = json{{"type", type}, {"message", e.what()}};
    for (auto& [key, val] : extra.items()) error[key] = val;
    status = 1;
  };

  try {
    std::error_code ec;
    stdfs::create_directories(outdir, ec);
    if (ec)
      throw fcomb::invalid_input("cannot create output directory '" +
                                 opt.out + "': " + ec.message());
    outdir_ok = true;
    if (opt.grid_k < 11)
      throw fcomb::invalid_input("grid-k must be at least 11");

    if (opt.command == "smooth") {
      cmd_smooth(opt, artifacts, warnings, timings);
    } else if (opt.command == "align") {
      cmd_align(opt, artifacts, warnings, timings, result);
    } else if (opt.command == "fcpca") {
      cmd_fcpca(opt, artifacts, warnings, timings, result);
    } else if (opt.command == "fccca") {
      cmd_fccca(opt, artifacts, warnings, timings, result);
    } else if (opt.command == "simulate") {
      cmd_simulate(opt, artifacts, timings, result);
    } else if (opt.command == "benchmark") {
      cmd_benchmark(opt, artifacts, timings, result);
    } else {
      throw fcomb::invalid_input("unknown command: " + opt.command);
    }

    Timer t_write;
    for (const Artifact& art : artifacts)
      write_file(outdir / art.name, art.content);
    timings["write_ms"] = t_write.ms();
  } catch (const fcomb::invalid_input& e) {
    json extra;
    if (e.index() != fcomb::invalid_input::npos) extra["index"] = e.index();
    capture("invalid_input", e, extra);
  } catch (const fcomb::domain_exit& e) {
    json extra;
    if (std::isfinite(e.min_value())) extra["min_value"] = e.min_value();
    capture("domain_exit", e, extra);
  } catch (const fcomb::numeric_failure& e) {
    json extra;
    if (std::isfinite(e.residual())) extra["residual"] = e.residual();
    capture("numeric_failure", e, extra);
  } catch (const std::exception& e) {
    capture("internal", e, json::object());
  }

  timings["total_ms"] = t_total.ms();

  json manifest;
  manifest["command"] = opt.command;
  manifest["config"] = config_json(opt);
  manifest["versions"] = versions_json();
  manifest["seed"] =
      (opt.command == "simulate" || opt.command == "benchmark")
          ? json(opt.seed)
          : json(nullptr);
  manifest["threads"] = fcomb::thread_count();
  manifest["timings_ms"] = timings;
  manifest["warnings"] = warnings;
  manifest["artifacts"] =
      status == 0 ? artifact_names(artifacts) : std::vector<std::string>{};
  if (!result.empty()) manifest["result"] = result;
  manifest["status"] = status == 0 ? "ok" : "error";
  if (status != 0) manifest["error"] = error;

  if (outdir_ok) {
    try {
      write_file(outdir / "run.json", manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      status = 1;
    }
  }
  if (status != 0) {
    json err_out;
    err_out["status"] = "error";
    err_out["error"] =
        error.empty() ? json{{"type", "internal"},
                             {"message", "manifest write failed"}}
                      : error;
    std::cerr << err_out.dump() << "\n";
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Combined amplitude/phase analysis of functional data"};
  app.require_subcommand(1);
  Options opt;

  auto add_io = [&](CLI::App* sub, bool with_input) {
    if (with_input)
      sub->add_option("--input", opt.input, "input CSV (id,t1,...,tk header)")
          ->required();
    sub->add_option("--out", opt.out, "output directory")->required();
    sub->add_option("--grid-k", opt.grid_k,
                    "working grid size (at least 11)")
        ->capture_default_str();
    sub->add_option("--format", opt.format, "tabular artifact format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  };
  auto add_sim = [&](CLI::App* sub, const char* model_default) {
    sub->add_option("--model", opt.model,
                    std::string("generator: pca, cca, toy_linear, "
                                "toy_quadratic (default ") +
                        model_default + ")");
    sub->add_option("--n", opt.n, "sample count");
    sub->add_option("--seed", opt.seed, "RNG seed")->capture_default_str();
    sub->add_option("--noise-sd", opt.noise_sd,
                    "observation noise standard deviation");
  };

  CLI::App* c_smooth = app.add_subcommand(
      "smooth", "penalized-spline smoothing onto a uniform grid");
  add_io(c_smooth, true);

  CLI::App* c_align = app.add_subcommand(
      "align", "amplitude/phase separation of smoothed curves");
  add_io(c_align, true);

  CLI::App* c_fcpca = app.add_subcommand(
      "fcpca", "combined amplitude/phase principal component analysis");
  add_io(c_fcpca, true);
  c_fcpca->add_option("--m", opt.m,
                      "components for scale selection and modes (default 2)");

  CLI::App* c_fccca = app.add_subcommand(
      "fccca", "combined amplitude/phase canonical correlation analysis");
  add_io(c_fccca, true);
  c_fccca->add_option("--m", opt.m, "canonical pairs (default 1)");
  c_fccca->add_option("--lambda", opt.lambda,
                      "roughness penalty weight (default: cross-validated)");

  CLI::App* c_sim =
      app.add_subcommand("simulate", "generate a synthetic dataset");
  add_io(c_sim, false);
  add_sim(c_sim, "pca");

  CLI::App* c_bench = app.add_subcommand(
      "benchmark", "reconstruction-error comparison of fcpca baselines");
  add_io(c_bench, false);
  add_sim(c_bench, "toy_linear");
  c_bench->add_option("--m", opt.m, "largest component count (default 2)");
  c_bench->add_option("--reps", opt.reps, "replicates to average")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  opt.command = app.get_subcommands().front()->get_name();
  return run(opt);
}
