#pragma once

// End-to-end run: simulate -> split -> fPCA -> train one network per target
// -> metrics -> permutation importance -> rankings -> figures -> report ->
// manifest. Every stage reads and writes the documented file formats, so the
// same functions back both the `run` command and the individual stage
// commands.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdxai/error.hpp"
#include "fdxai/explain.hpp"
#include "fdxai/fpca.hpp"
#include "fdxai/io.hpp"
#include "fdxai/metrics.hpp"
#include "fdxai/mlp.hpp"
#include "fdxai/plot.hpp"
#include "fdxai/random.hpp"
#include "fdxai/sim.hpp"
#include "fdxai/viz.hpp"

#ifndef FDXAI_VERSION
#define FDXAI_VERSION "0.1.0"
#endif

namespace fdxai {

inline constexpr std::array<const char*, 3> kTargets{"y1", "y2", "y3"};
inline constexpr std::array<const char*, 3> kSplits{"train", "test", "validation"};

inline int target_number(const std::string& name) {
  for (int k = 0; k < 3; ++k)
    if (name == kTargets[static_cast<std::size_t>(k)]) return k + 1;
  throw InvalidArgument("unknown target '" + name + "' (expected y1, y2 or y3)");
}

/// Thrown when a pipeline stage fails; carries the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error("stage '" + stage + "' failed: " + message), stage_(std::move(stage)) {}
  [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

// ---------------------------------------------------------------------------
// Split

struct SplitIndices {
  std::vector<std::size_t> train, test, validation;

  [[nodiscard]] const std::vector<std::size_t>& get(const std::string& name) const {
    if (name == "train") return train;
    if (name == "test") return test;
    if (name == "validation") return validation;
    throw InvalidArgument("unknown split '" + name + "'");
  }
};

inline void validate_ratios(const std::array<double, 3>& ratios) {
  for (double r : ratios) detail::require(r > 0.0, "split ratios must be positive");
  detail::require(std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) <= 1e-12, "split ratios must sum to 1");
}

/// Sizes round(r_train n), round(r_test n) and the remainder; membership by a
/// seeded shuffle. Each index list is returned in ascending order.
inline SplitIndices split(std::size_t n, const std::array<double, 3>& ratios, std::uint64_t seed) {
  validate_ratios(ratios);
  detail::require(n >= 3, "split: need at least 3 observations");
  const auto n_train = static_cast<std::size_t>(std::llround(ratios[0] * static_cast<double>(n)));
  const auto n_test = static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(n)));
  if (n_train == 0 || n_test == 0 || n_train + n_test >= n)
    throw InvalidArgument("split: ratios leave an empty split for n = " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RandomStream rng(seed);
  rng.shuffle(std::span(order));
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                order.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
  s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_test), order.end());
  for (auto* v : {&s.train, &s.test, &s.validation}) std::sort(v->begin(), v->end());
  return s;
}

inline Json to_json(const SplitIndices& s) {
  return Json{{"train", s.train}, {"test", s.test}, {"validation", s.validation}};
}

inline SplitIndices split_from_json(const Json& j) {
  SplitIndices s;
  s.train = j.at("train").get<std::vector<std::size_t>>();
  s.test = j.at("test").get<std::vector<std::size_t>>();
  s.validation = j.at("validation").get<std::vector<std::size_t>>();
  return s;
}

// ---------------------------------------------------------------------------
// Configuration

struct PfiSettings {
  std::size_t replications = 10;
  std::string split = "test";
};

struct FigureSettings {
  std::size_t components = 4;  // fPCs interpreted with the three figure recipes
  std::size_t extreme_count = 50;
  double pm_multiplier = 2.0;
  std::size_t heatmap_stride = 25;
};

struct RunConfig {
  int schema_version = 1;
  std::uint64_t master_seed = 42;
  std::size_t n = 2000;
  double grid_start = -4.0;
  double grid_stop = 0.0;
  std::size_t grid_points = 1000;
  SimParams sim;
  std::array<double, 3> split_ratios{0.7225, 0.15, 0.1275};
  std::array<MlpConfig, 3> models{};
  PfiSettings pfi;
  FigureSettings figures;
  std::size_t threads = 1;

  RunConfig() {
    models[0].task = Task::BinaryClassification;
    models[1].task = Task::BinaryClassification;
    models[2].task = Task::Regression;
  }

  [[nodiscard]] TimeGrid grid() const { return TimeGrid::uniform(grid_start, grid_stop, grid_points); }

  void validate() const {
    detail::require(schema_version == 1, "unsupported config schema_version");
    detail::require(n >= 3, "n must be >= 3");
    validate_ratios(split_ratios);
    sim.validate();
    for (const auto& m : models) m.validate();
    detail::require(models[0].task == Task::BinaryClassification && models[1].task == Task::BinaryClassification &&
                        models[2].task == Task::Regression,
                    "y1/y2 models must be classifiers and the y3 model a regressor");
    detail::require(pfi.replications >= 1, "pfi replications must be >= 1");
    detail::require(pfi.split == "train" || pfi.split == "test" || pfi.split == "validation",
                    "pfi split must be train, test or validation");
    detail::require(figures.pm_multiplier > 0.0, "figure multiplier must be > 0");
    detail::require(figures.heatmap_stride >= 1, "heatmap stride must be >= 1");
  }
};

inline Json to_json(const RunConfig& c) {
  Json j;
  j["schema_version"] = c.schema_version;
  j["master_seed"] = c.master_seed;
  j["n"] = c.n;
  j["grid"] = {{"start", c.grid_start}, {"stop", c.grid_stop}, {"count", c.grid_points}};
  j["sim"] = to_json(c.sim);
  j["split_ratios"] = c.split_ratios;
  Json models;
  for (std::size_t k = 0; k < 3; ++k) {
    Json m = to_json(c.models[k]);
    m.erase("seed");  // derived from master_seed
    models[kTargets[k]] = m;
  }
  j["models"] = models;
  j["pfi"] = {{"replications", c.pfi.replications},
              {"split", c.pfi.split},
              {"loss", {{"y1", "zero-one"}, {"y2", "zero-one"}, {"y3", "squared-error"}}}};
  j["figures"] = {{"components", c.figures.components},
                  {"extreme_count", c.figures.extreme_count},
                  {"pm_multiplier", c.figures.pm_multiplier},
                  {"heatmap_stride", c.figures.heatmap_stride}};
  j["threads"] = c.threads;
  return j;
}

/// Keys absent from `j` keep their defaults.
inline RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  auto get = [](const Json& obj, const char* key, auto& field) {
    if (obj.contains(key)) field = obj.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get(j, "schema_version", c.schema_version);
  get(j, "master_seed", c.master_seed);
  get(j, "n", c.n);
  if (j.contains("grid")) {
    get(j.at("grid"), "start", c.grid_start);
    get(j.at("grid"), "stop", c.grid_stop);
    get(j.at("grid"), "count", c.grid_points);
  }
  if (j.contains("sim")) c.sim = sim_params_from_json(j.at("sim"));
  get(j, "split_ratios", c.split_ratios);
  if (j.contains("models"))
    for (std::size_t k = 0; k < 3; ++k)
      if (j.at("models").contains(kTargets[k])) c.models[k] = mlp_config_from_json(j.at("models").at(kTargets[k]), c.models[k]);
  if (j.contains("pfi")) {
    get(j.at("pfi"), "replications", c.pfi.replications);
    get(j.at("pfi"), "split", c.pfi.split);
  }
  if (j.contains("figures")) {
    const auto& f = j.at("figures");
    get(f, "components", c.figures.components);
    get(f, "extreme_count", c.figures.extreme_count);
    get(f, "pm_multiplier", c.figures.pm_multiplier);
    get(f, "heatmap_stride", c.figures.heatmap_stride);
  }
  get(j, "threads", c.threads);
  c.validate();
  return c;
}

inline std::uint64_t config_digest(const RunConfig& c) { return fnv1a(to_json(c).dump()); }

/// Per-stage seeds, all derived from the master seed by stage name.
inline std::map<std::string, std::uint64_t> stage_seeds(std::uint64_t master) {
  std::map<std::string, std::uint64_t> seeds;
  for (const char* stage : {"simulate", "split"}) seeds[stage] = stage_seed(master, stage);
  for (const char* t : kTargets) {
    seeds[std::string("train.") + t] = stage_seed(master, std::string("train.") + t);
    seeds[std::string("pfi.") + t] = stage_seed(master, std::string("pfi.") + t);
  }
  return seeds;
}

inline LossKind loss_for_target(int target) { return target == 3 ? LossKind::SquaredError : LossKind::ZeroOne; }

// ---------------------------------------------------------------------------
// Stage building blocks

/// <dir>/<split>.csv for each split, with sidecars, plus <dir>/split.json.
inline void write_split(const Dataset& data, const SplitIndices& s, const std::filesystem::path& dir) {
  write_json(dir / "split.json", to_json(s));
  for (const char* name : kSplits) save_dataset(data.subset(s.get(name)), dir / (std::string(name) + ".csv"));
}

/// Metrics for one network on one split.
inline std::vector<MetricSummary> evaluate_model(const Mlp& net, const ScoreMatrix& scores, const Eigen::VectorXd& y,
                                                 const std::string& target, const std::string& split_name) {
  std::vector<MetricSummary> out;
  const Eigen::VectorXd prediction = predict(net, scores);
  if (net.config.task == Task::BinaryClassification) {
    const Eigen::VectorXd labels = hard_labels(prediction);
    out.push_back({target, split_name, "accuracy", accuracy(labels, y)});
    out.push_back({target, split_name, "f1", f1(labels, y).value});
  } else {
    out.push_back({target, split_name, "mse", mse(prediction, y)});
    out.push_back({target, split_name, "r2", r2(prediction, y)});
  }
  return out;
}

inline void save_metrics(const std::vector<MetricSummary>& metrics, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "target,split,metric,value\n";
  for (const auto& m : metrics) out << m.target << ',' << m.split << ',' << m.metric << ',' << format_double(m.value) << '\n';
  write_text(path, out.str());
}

inline std::vector<MetricSummary> load_metrics(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  std::vector<MetricSummary> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 4) throw IoError(path.string() + ": malformed metrics row");
    out.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2]), parse_double(f[3])});
  }
  return out;
}

inline double find_metric(const std::vector<MetricSummary>& metrics, const std::string& target,
                          const std::string& split_name, const std::string& metric) {
  for (const auto& m : metrics)
    if (m.target == target && m.split == split_name && m.metric == metric) return m.value;
  throw InvalidArgument("metric " + target + "/" + split_name + "/" + metric + " not found");
}

/// Qualitative ranking targets for the run report.
struct RankingCheck {
  std::string description;
  bool satisfied = false;
};

inline std::vector<RankingCheck> ranking_checks(const std::array<PfiReport, 3>& reports) {
  auto top = [&](int t, std::size_t k) {
    std::set<std::size_t> s;
    const auto& r = reports[static_cast<std::size_t>(t - 1)];
    for (const auto& f : rank_features(r, std::min(k, r.features()))) s.insert(f.feature);
    return s;
  };
  std::vector<RankingCheck> checks;
  checks.push_back({"y1: top-2 features are fPCs {1, 2}", top(1, 2) == std::set<std::size_t>{1, 2}});
  checks.push_back({"y2: fPC 1 in top-2", top(2, 2).count(1) == 1});
  checks.push_back({"y2: fPC 3 in top-3", top(2, 3).count(3) == 1});
  checks.push_back({"y3: fPC 2 is the top feature", top(3, 1) == std::set<std::size_t>{2}});
  for (int t = 1; t <= 3; ++t) {
    const auto& r = reports[static_cast<std::size_t>(t - 1)];
    const double max_mean = r.mean.maxCoeff();
    bool negligible = true;
    for (Eigen::Index j = 10; j < r.mean.size(); ++j)
      if (!(r.mean(j) < 0.05 * max_mean)) negligible = false;
    checks.push_back({std::string(kTargets[static_cast<std::size_t>(t - 1)]) +
                          ": every fPC > 10 has mean importance < 5% of the maximum",
                      negligible});
  }
  return checks;
}

// ---------------------------------------------------------------------------
// Run directory layout

struct RunLayout {
  std::filesystem::path root;
  [[nodiscard]] std::filesystem::path data() const { return root / "data"; }
  [[nodiscard]] std::filesystem::path dataset() const { return root / "data" / "dataset.csv"; }
  [[nodiscard]] std::filesystem::path split_csv(const std::string& s) const { return root / "data" / (s + ".csv"); }
  [[nodiscard]] std::filesystem::path fpca() const { return root / "fpca"; }
  [[nodiscard]] std::filesystem::path scores(const std::string& s) const { return root / "scores" / (s + ".csv"); }
  [[nodiscard]] std::filesystem::path model(const std::string& t) const { return root / "models" / t; }
  [[nodiscard]] std::filesystem::path metrics() const { return root / "metrics.csv"; }
  [[nodiscard]] std::filesystem::path pfi(const std::string& t) const { return root / "pfi" / t; }
  [[nodiscard]] std::filesystem::path rankings() const { return root / "pfi" / "rankings.csv"; }
  [[nodiscard]] std::filesystem::path figures() const { return root / "figures"; }
  [[nodiscard]] std::filesystem::path report() const { return root / "report.md"; }
  [[nodiscard]] std::filesystem::path config() const { return root / "config.json"; }
  [[nodiscard]] std::filesystem::path manifest() const { return root / "manifest.json"; }
};

inline void require_file(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) throw IoError("missing upstream artifact: " + p.string());
}

inline std::array<PfiReport, 3> load_pfi_reports(const RunLayout& run) {
  std::array<PfiReport, 3> reports;
  for (std::size_t k = 0; k < 3; ++k) {
    require_file(std::filesystem::path(run.pfi(kTargets[k])) += ".json");
    reports[k] = load_pfi(run.pfi(kTargets[k]));
  }
  return reports;
}

inline void save_rankings(const std::array<PfiReport, 3>& reports, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "target,rank,feature,mean_importance,sd\n";
  for (std::size_t k = 0; k < 3; ++k) {
    const auto ranked = rank_features(reports[k]);
    for (std::size_t r = 0; r < ranked.size(); ++r)
      out << kTargets[k] << ',' << r + 1 << ',' << ranked[r].feature << ',' << format_double(ranked[r].mean_importance)
          << ',' << format_double(reports[k].sd(static_cast<Eigen::Index>(ranked[r].feature - 1))) << '\n';
  }
  write_text(path, out.str());
}

/// Emits every figure from the persisted run artifacts; returns the written
/// paths in emission order.
inline std::vector<std::filesystem::path> emit_figures(const RunLayout& run, const FigureSettings& settings) {
  for (const auto& p : {run.split_csv("train"), run.fpca() / "model.json", run.scores("train")}) require_file(p);
  const Dataset train = load_dataset(run.split_csv("train"));
  const FpcaModel model = load_fpca(run.fpca());
  const ScoreMatrix scores = load_scores(run.scores("train"));
  const auto reports = load_pfi_reports(run);
  const auto dir = run.figures();
  std::vector<std::filesystem::path> written;
  auto emit = [&](const PlotSpec& spec, const std::string& name) {
    auto [svg, csv] = write_plot(spec, dir, name);
    written.push_back(svg);
    written.push_back(csv);
  };

  emit(correlation_heatmap(train, settings.heatmap_stride).plot, "correlation_heatmap");
  emit(group_means_plot(train, Grouping::ByY1), "group_means_y1");
  emit(group_means_plot(train, Grouping::ByY2), "group_means_y2");
  emit(group_means_plot(train, Grouping::ByY3Quartile), "group_means_y3");

  const auto ve = variance_explained(model);
  emit(component_summary_plot(100.0 * ve.fraction, 10, "Percent of variance explained", "percent variance"),
       "variance_explained");
  for (std::size_t k = 0; k < 3; ++k)
    emit(component_summary_plot(reports[k].mean, 10, std::string("Mean permutation importance for ") + kTargets[k],
                                "mean importance"),
         std::string("pfi_") + kTargets[k]);

  for (std::size_t k = 0; k < 3; ++k) {
    const auto ranked = rank_features(reports[k], std::min<std::size_t>(2, reports[k].features()));
    const Eigen::VectorXd y = train.target(static_cast<int>(k) + 1);
    if (k < 2 && ranked.size() == 2) {
      const auto a = std::min(ranked[0].feature, ranked[1].feature);
      const auto b = std::max(ranked[0].feature, ranked[1].feature);
      emit(score_scatter(scores, y, a, b, kTargets[k]), std::string("scatter_") + kTargets[k]);
    } else {
      emit(score_target_scatter(scores, y, ranked[0].feature, kTargets[k]), std::string("scatter_") + kTargets[k]);
    }
  }

  const std::size_t components = std::min(settings.components, model.components());
  for (std::size_t j = 1; j <= components; ++j) {
    const std::string suffix = "fpc" + std::to_string(j);
    emit(eigenfunction_plot(model, j), "eigenfunction_" + suffix);
    if (model.eigenvalues(static_cast<Eigen::Index>(j - 1)) > 0.0)
      emit(mean_pm_eigenfunction(model, j, settings.pm_multiplier), "mean_pm_" + suffix);
    if (2 * settings.extreme_count <= train.size())
      emit(extreme_score_bundles(model, train, j, settings.extreme_count).plot, "extremes_" + suffix);
  }
  return written;
}

/// Markdown run report built from persisted artifacts.
inline std::string build_report(const RunLayout& run) {
  for (const auto& p : {run.fpca() / "model.json", run.metrics()}) require_file(p);
  const FpcaModel model = load_fpca(run.fpca());
  const auto metrics = load_metrics(run.metrics());
  const auto reports = load_pfi_reports(run);
  const auto ve = variance_explained(model);
  std::ostringstream md;
  md << "# Run report\n\n";
  md << "Training signatures: " << model.n_train << ", grid points: " << model.grid.count()
     << ", realized fPC score width: " << model.components() << "\n\n";

  md << "## Variance explained (first 10 fPCs)\n\n| fPC | percent | cumulative |\n|---|---|---|\n";
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(10, ve.fraction.size()); ++j)
    md << "| " << j + 1 << " | " << detail::fixed(100.0 * ve.fraction(j), 2) << " | "
       << detail::fixed(100.0 * ve.cumulative(j), 2) << " |\n";

  md << "\n## Performance metrics\n\n| target | metric | train | test | validation |\n|---|---|---|---|---|\n";
  for (std::size_t k = 0; k < 3; ++k) {
    const std::vector<std::string> names = k < 2 ? std::vector<std::string>{"accuracy", "f1"}
                                                 : std::vector<std::string>{"mse", "r2"};
    for (const auto& metric : names) {
      md << "| " << kTargets[k] << " | " << metric;
      for (const char* s : kSplits) md << " | " << detail::fixed(find_metric(metrics, kTargets[k], s, metric), 4);
      md << " |\n";
    }
  }

  md << "\n## Mean permutation importance (first 10 fPCs)\n\n| fPC | y1 | y2 | y3 |\n|---|---|---|---|\n";
  const auto width = static_cast<Eigen::Index>(reports[0].features());
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(10, width); ++j) {
    md << "| " << j + 1;
    for (const auto& r : reports) md << " | " << detail::fixed(r.mean(j), 4) << " +/- " << detail::fixed(r.sd(j), 4);
    md << " |\n";
  }
  md << "\nImportance is the mean per-observation loss increase (zero-one loss for y1 and y2, squared error for y3) over "
     << reports[0].replications << " replications on " << reports[0].observations << " observations.\n";

  md << "\n## Top features\n\n";
  for (std::size_t k = 0; k < 3; ++k) {
    md << "- " << kTargets[k] << ":";
    for (const auto& f : rank_features(reports[k], std::min<std::size_t>(5, reports[k].features())))
      md << " fPC " << f.feature << " (" << detail::fixed(f.mean_importance, 4) << ")";
    md << "\n";
  }

  md << "\n## Ranking targets\n\n";
  bool all = true;
  for (const auto& c : ranking_checks(reports)) {
    md << "- [" << (c.satisfied ? "ok" : "DEVIATION") << "] " << c.description << "\n";
    all = all && c.satisfied;
  }
  md << "\n" << (all ? "All ranking targets reproduced." : "WARNING: at least one ranking target deviates.") << "\n";
  return md.str();
}

// ---------------------------------------------------------------------------
// Manifest

struct ArtifactRecord {
  std::string path;  // relative to the run root
  std::string fnv1a;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string tool_version = FDXAI_VERSION;
  std::string config_digest;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<ArtifactRecord> artifacts;
  std::vector<std::pair<std::string, double>> timings;  // seconds per stage
  std::string status = "running";
  std::string failed_stage;
  std::string error;
  std::size_t score_width = 0;
};

inline ArtifactRecord record_artifact(const std::filesystem::path& root, const std::filesystem::path& file) {
  const std::string bytes = read_text(file);
  return {std::filesystem::relative(file, root).generic_string(), hex64(fnv1a(bytes)), bytes.size()};
}

inline Json to_json(const RunManifest& m) {
  Json j;
  j["tool_version"] = m.tool_version;
  j["config_digest"] = m.config_digest;
  j["status"] = m.status;
  if (!m.failed_stage.empty()) {
    j["failed_stage"] = m.failed_stage;
    j["error"] = m.error;
    j["partial_outputs"] = true;
  }
  j["score_width"] = m.score_width;
  Json seeds = Json::object();
  for (const auto& [k, v] : m.seeds) seeds[k] = v;
  j["seeds"] = seeds;
  Json artifacts = Json::array();
  for (const auto& a : m.artifacts) artifacts.push_back({{"path", a.path}, {"fnv1a", a.fnv1a}, {"bytes", a.bytes}});
  j["artifacts"] = artifacts;
  Json timings = Json::object();
  for (const auto& [k, v] : m.timings) timings[k] = v;
  j["timings"] = timings;
  return j;
}

/// Runs every stage into `out_dir`. On failure the manifest is written with
/// status "failed" and the failing stage, then a StageError is thrown.
inline RunManifest run_pipeline(const RunConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  const RunLayout run{out_dir};
  std::filesystem::create_directories(out_dir);
  RunManifest manifest;
  manifest.config_digest = hex64(config_digest(config));
  manifest.seeds = stage_seeds(config.master_seed);
  std::vector<std::filesystem::path> files;

  auto stage = [&](const std::string& name, auto&& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const std::exception& e) {
      manifest.status = "failed";
      manifest.failed_stage = name;
      manifest.error = e.what();
      for (const auto& f : files)
        if (std::filesystem::exists(f)) manifest.artifacts.push_back(record_artifact(out_dir, f));
      write_json(run.manifest(), to_json(manifest));
      throw StageError(name, e.what());
    }
    manifest.timings.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  };

  write_json(run.config(), to_json(config));
  files.push_back(run.config());

  Dataset data;
  stage("simulate", [&] {
    data = generate_dataset(config.n, config.sim, manifest.seeds.at("simulate"), config.grid(), config.threads);
    save_dataset(data, run.dataset());
    files.push_back(run.dataset());
    files.push_back(sidecar_path(run.dataset()));
  });

  std::map<std::string, Dataset> parts;
  stage("split", [&] {
    const auto s = split(data.size(), config.split_ratios, manifest.seeds.at("split"));
    write_split(data, s, run.data());
    files.push_back(run.data() / "split.json");
    for (const char* name : kSplits) {
      parts[name] = data.subset(s.get(name));
      files.push_back(run.split_csv(name));
      files.push_back(sidecar_path(run.split_csv(name)));
    }
  });

  FpcaModel model;
  std::map<std::string, ScoreMatrix> scores;
  stage("fpca", [&] {
    model = fit_fpca(parts.at("train"));
    save_fpca(model, run.fpca());
    for (const char* f : {"model.json", "mean.csv", "eigenfunctions.csv"}) files.push_back(run.fpca() / f);
    for (const char* name : kSplits) {
      scores[name] = transform(model, parts.at(name));
      save_scores(scores[name], run.scores(name));
      files.push_back(run.scores(name));
    }
    manifest.score_width = model.components();
  });

  std::array<Mlp, 3> nets;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::string target = kTargets[k];
    stage("train." + target, [&] {
      MlpConfig mc = config.models[k];
      mc.seed = manifest.seeds.at("train." + target);
      nets[k] = train(scores.at("train"), parts.at("train").target(static_cast<int>(k) + 1), mc);
      save_mlp(nets[k], run.model(target));
      files.push_back(run.model(target) / "model.json");
      for (std::size_t l = 0; l < nets[k].layers.size(); ++l)
        files.push_back(run.model(target) / ("layer_" + std::to_string(l + 1) + ".csv"));
    });
  }

  stage("metrics", [&] {
    std::vector<MetricSummary> metrics;
    for (std::size_t k = 0; k < 3; ++k)
      for (const char* s : kSplits) {
        auto m = evaluate_model(nets[k], scores.at(s), parts.at(s).target(static_cast<int>(k) + 1), kTargets[k], s);
        metrics.insert(metrics.end(), m.begin(), m.end());
      }
    save_metrics(metrics, run.metrics());
    files.push_back(run.metrics());
  });

  std::array<PfiReport, 3> reports;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::string target = kTargets[k];
    stage("pfi." + target, [&] {
      const auto& net = nets[k];
      const Predictor predictor = [&net](const Eigen::MatrixXd& x) { return predict(net, x); };
      reports[k] = permutation_importance(predictor, scores.at(config.pfi.split),
                                          parts.at(config.pfi.split).target(static_cast<int>(k) + 1),
                                          loss_for_target(static_cast<int>(k) + 1), config.pfi.replications,
                                          manifest.seeds.at("pfi." + target), config.threads);
      save_pfi(reports[k], run.pfi(target));
      files.push_back(std::filesystem::path(run.pfi(target)) += ".csv");
      files.push_back(std::filesystem::path(run.pfi(target)) += ".json");
    });
  }

  stage("rank", [&] {
    save_rankings(reports, run.rankings());
    files.push_back(run.rankings());
  });

  stage("figures", [&] {
    for (auto& f : emit_figures(run, config.figures)) files.push_back(f);
  });

  stage("report", [&] {
    write_text(run.report(), build_report(run));
    files.push_back(run.report());
  });

  manifest.status = "complete";
  for (const auto& f : files) manifest.artifacts.push_back(record_artifact(out_dir, f));
  write_json(run.manifest(), to_json(manifest));
  return manifest;
}

}  // namespace fdxai
