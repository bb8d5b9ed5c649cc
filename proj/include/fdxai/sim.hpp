#pragma once

// Synthetic spectral-temporal signatures: intensity curves on a uniform
// log-time grid whose shape responds to two binary device characteristics
// (y1, y2) and one continuous characteristic (y3).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdxai/error.hpp"
#include "fdxai/io.hpp"
#include "fdxai/parallel.hpp"
#include "fdxai/random.hpp"

namespace fdxai {

/// Uniformly spaced, strictly increasing log-time points.
class TimeGrid {
 public:
  TimeGrid() = default;

  /// `count` points from `start` to `stop` inclusive.
  static TimeGrid uniform(double start, double stop, std::size_t count) {
    detail::require(count >= 2, "time grid needs at least 2 points");
    detail::require(std::isfinite(start) && std::isfinite(stop) && stop > start,
                    "time grid bounds must be finite with stop > start");
    Eigen::VectorXd points(static_cast<Eigen::Index>(count));
    const double step = (stop - start) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i)
      points(static_cast<Eigen::Index>(i)) = start + step * static_cast<double>(i);
    points(points.size() - 1) = stop;
    return TimeGrid(std::move(points));
  }

  /// Validates an explicit point vector.
  explicit TimeGrid(Eigen::VectorXd points) : points_(std::move(points)) {
    detail::require(points_.size() >= 2, "time grid needs at least 2 points");
    const double step = (points_(points_.size() - 1) - points_(0)) / static_cast<double>(points_.size() - 1);
    detail::require(step > 0.0, "time grid must be strictly increasing");
    for (Eigen::Index i = 1; i < points_.size(); ++i) {
      const double gap = points_(i) - points_(i - 1);
      detail::require(gap > 0.0, "time grid must be strictly increasing");
      detail::require(std::abs(gap - step) <= 1e-12 * step,
                      "time grid must be uniformly spaced");
    }
    spacing_ = step;
  }

  [[nodiscard]] const Eigen::VectorXd& points() const noexcept { return points_; }
  [[nodiscard]] std::size_t count() const noexcept { return static_cast<std::size_t>(points_.size()); }
  [[nodiscard]] double spacing() const noexcept { return spacing_; }
  [[nodiscard]] double start() const { return points_(0); }
  [[nodiscard]] double stop() const { return points_(points_.size() - 1); }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.points_.size() == b.points_.size() && a.points_ == b.points_;
  }

 private:
  Eigen::VectorXd points_;
  double spacing_ = 0.0;
};

/// Default grid: 1000 points on log-time [-4, 0].
inline TimeGrid default_grid(std::size_t count = 1000) { return TimeGrid::uniform(-4.0, 0.0, count); }

struct Labels {
  int y1 = 0;       // {0, 1}
  int y2 = 0;       // {0, 1}
  double y3 = 0.0;  // [0, 1]

  friend bool operator==(const Labels&, const Labels&) = default;
};

struct Signature {
  Eigen::VectorXd values;
  Labels labels;
};

/// Generator parameters. Peak k has center, width and amplitude; peak 4 is
/// only present when y1 = 1.
struct SimParams {
  std::array<double, 4> peak_centers{-3.7, -2.4, -1.3, -0.35};
  std::array<double, 4> peak_widths{0.12, 0.22, 0.30, 0.18};
  std::array<double, 4> peak_amplitudes{3.0, 2.0, 1.6, 1.2};
  double time_origin = -4.0;  // baseline and early boost decay from here
  double baseline_intensity = 2.5;
  double baseline_decay = 1.1;
  double y1_early_gain = 3.95;
  double y1_early_decay = 1.29;
  double y1_first_peak_shift = -0.105;
  double y2_gain = 1.74;
  double y3_gain = 0.207;
  double y3_shift_span = 0.212;  // centers move by span * (y3 - 0.5)
  double amplitude_jitter_sd = 0.05;  // lognormal
  double center_jitter_sd = 0.02;
  double width_jitter_sd = 0.05;  // lognormal
  double noise_sd = 0.02;
  double positivity_floor = 1e-6;
  double y1_probability = 0.5;
  double y2_probability = 0.5;

  void validate() const {
    for (int k = 0; k < 4; ++k) {
      detail::require(peak_widths[k] > 0.0, "peak widths must be > 0");
      detail::require(peak_amplitudes[k] > 0.0, "peak amplitudes must be > 0");
      detail::require(std::isfinite(peak_centers[k]), "peak centers must be finite");
    }
    detail::require(amplitude_jitter_sd >= 0.0 && center_jitter_sd >= 0.0 && width_jitter_sd >= 0.0 &&
                        noise_sd >= 0.0,
                    "noise standard deviations must be >= 0");
    detail::require(positivity_floor > 0.0, "positivity floor must be > 0");
    detail::require(y1_probability >= 0.0 && y1_probability <= 1.0 && y2_probability >= 0.0 &&
                        y2_probability <= 1.0,
                    "label probabilities must lie in [0, 1]");
  }

  /// Same parameters with every jitter and noise term switched off.
  [[nodiscard]] SimParams noiseless() const {
    SimParams p = *this;
    p.amplitude_jitter_sd = p.center_jitter_sd = p.width_jitter_sd = p.noise_sd = 0.0;
    return p;
  }
};

inline Json to_json(const SimParams& p) {
  Json j;
  j["peak_centers"] = p.peak_centers;
  j["peak_widths"] = p.peak_widths;
  j["peak_amplitudes"] = p.peak_amplitudes;
  j["time_origin"] = p.time_origin;
  j["baseline_intensity"] = p.baseline_intensity;
  j["baseline_decay"] = p.baseline_decay;
  j["y1_early_gain"] = p.y1_early_gain;
  j["y1_early_decay"] = p.y1_early_decay;
  j["y1_first_peak_shift"] = p.y1_first_peak_shift;
  j["y2_gain"] = p.y2_gain;
  j["y3_gain"] = p.y3_gain;
  j["y3_shift_span"] = p.y3_shift_span;
  j["amplitude_jitter_sd"] = p.amplitude_jitter_sd;
  j["center_jitter_sd"] = p.center_jitter_sd;
  j["width_jitter_sd"] = p.width_jitter_sd;
  j["noise_sd"] = p.noise_sd;
  j["positivity_floor"] = p.positivity_floor;
  j["y1_probability"] = p.y1_probability;
  j["y2_probability"] = p.y2_probability;
  return j;
}

/// Missing keys keep their defaults.
inline SimParams sim_params_from_json(const Json& j) {
  SimParams p;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("peak_centers", p.peak_centers);
  get("peak_widths", p.peak_widths);
  get("peak_amplitudes", p.peak_amplitudes);
  get("time_origin", p.time_origin);
  get("baseline_intensity", p.baseline_intensity);
  get("baseline_decay", p.baseline_decay);
  get("y1_early_gain", p.y1_early_gain);
  get("y1_early_decay", p.y1_early_decay);
  get("y1_first_peak_shift", p.y1_first_peak_shift);
  get("y2_gain", p.y2_gain);
  get("y3_gain", p.y3_gain);
  get("y3_shift_span", p.y3_shift_span);
  get("amplitude_jitter_sd", p.amplitude_jitter_sd);
  get("center_jitter_sd", p.center_jitter_sd);
  get("width_jitter_sd", p.width_jitter_sd);
  get("noise_sd", p.noise_sd);
  get("positivity_floor", p.positivity_floor);
  get("y1_probability", p.y1_probability);
  get("y2_probability", p.y2_probability);
  p.validate();
  return p;
}

inline std::uint64_t params_digest(const SimParams& p) { return fnv1a(to_json(p).dump()); }

/// y1, y2 ~ Bernoulli(p) and y3 ~ Uniform(0, 1), independent; drawn in the
/// order (y1, y2, y3) per observation from one stream, so a shorter run is a
/// prefix of a longer one.
inline std::vector<Labels> sample_labels(std::size_t n, std::uint64_t seed, double y1_probability = 0.5,
                                         double y2_probability = 0.5) {
  detail::require(n >= 1, "sample_labels: n must be >= 1");
  RandomStream rng(seed);
  std::vector<Labels> labels(n);
  for (auto& l : labels) {
    l.y1 = rng.bernoulli(y1_probability) ? 1 : 0;
    l.y2 = rng.bernoulli(y2_probability) ? 1 : 0;
    l.y3 = rng.uniform();
  }
  return labels;
}

/// Number of Gaussian peaks a signature carries.
constexpr int peak_count(const Labels& labels) noexcept { return labels.y1 == 1 ? 4 : 3; }

/// Noise-free peak center k for the given labels (before center jitter).
inline double peak_center(const SimParams& p, const Labels& labels, int k) {
  double center = p.peak_centers[static_cast<std::size_t>(k)] + p.y3_shift_span * (labels.y3 - 0.5);
  if (k == 0 && labels.y1 == 1) center += p.y1_first_peak_shift;
  return center;
}

/// Overall multiplicative gain G(labels) = (1 + g2*y2)(1 + g3*y3).
inline double intensity_gain(const SimParams& p, const Labels& labels) {
  return (1.0 + p.y2_gain * labels.y2) * (1.0 + p.y3_gain * labels.y3);
}

/// value(t) = G * [baseline(t) + sum_k A_k exp(-(t - mu_k)^2 / (2 s_k^2))] + noise,
/// floored at the positivity floor. The stream is always advanced by the same
/// number of draws (3 per potential peak slot, then one per grid point), so
/// jitter settings never shift later draws.
inline Signature generate_signature(const Labels& labels, const SimParams& params, const TimeGrid& grid,
                                    RandomStream& rng) {
  const auto& t = grid.points();
  const Eigen::Index m = t.size();
  const int peaks = peak_count(labels);

  std::array<double, 4> center{}, width{}, amplitude{};
  for (int k = 0; k < 4; ++k) {
    const double zc = rng.normal();
    const double za = rng.normal();
    const double zw = rng.normal();
    const auto ks = static_cast<std::size_t>(k);
    center[ks] = peak_center(params, labels, k) + params.center_jitter_sd * zc;
    amplitude[ks] = params.peak_amplitudes[ks] * std::exp(params.amplitude_jitter_sd * za);
    width[ks] = params.peak_widths[ks] * std::exp(params.width_jitter_sd * zw);
  }

  const double gain = intensity_gain(params, labels);
  Signature signature;
  signature.labels = labels;
  signature.values.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double elapsed = t(i) - params.time_origin;
    double clean = params.baseline_intensity * std::exp(-params.baseline_decay * elapsed);
    if (labels.y1 == 1) clean += params.y1_early_gain * std::exp(-params.y1_early_decay * elapsed);
    for (int k = 0; k < peaks; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const double z = (t(i) - center[ks]) / width[ks];
      clean += amplitude[ks] * std::exp(-0.5 * z * z);
    }
    const double value = gain * clean + params.noise_sd * rng.normal();
    if (!std::isfinite(value))
      throw NumericalError("generate_signature: non-finite intensity at grid index " + std::to_string(i));
    signature.values(i) = std::max(value, params.positivity_floor);
  }
  return signature;
}

/// Signatures as rows of one matrix plus their labels and generation settings.
struct Dataset {
  TimeGrid grid;
  Eigen::MatrixXd values;  // n x m
  std::vector<Labels> labels;
  std::uint64_t seed = 0;
  SimParams params;

  [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }

  [[nodiscard]] Signature signature(std::size_t i) const {
    return {values.row(static_cast<Eigen::Index>(i)).transpose(), labels.at(i)};
  }

  [[nodiscard]] Dataset subset(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.grid = grid;
    out.seed = seed;
    out.params = params;
    out.values.resize(static_cast<Eigen::Index>(indices.size()), values.cols());
    out.labels.reserve(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
      detail::require(indices[r] < size(), "subset index out of range");
      out.values.row(static_cast<Eigen::Index>(r)) = values.row(static_cast<Eigen::Index>(indices[r]));
      out.labels.push_back(labels[indices[r]]);
    }
    return out;
  }

  [[nodiscard]] Eigen::VectorXd target(int which) const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) {
      const auto& l = labels[i];
      y(static_cast<Eigen::Index>(i)) = which == 1 ? l.y1 : which == 2 ? l.y2 : l.y3;
    }
    return y;
  }
};

/// Stream for signature `index` of a dataset generated with `seed`.
inline std::uint64_t signature_seed(std::uint64_t seed, std::size_t index) {
  return derive_seed(seed, 1, index);
}

inline std::uint64_t labels_seed(std::uint64_t seed) { return derive_seed(seed, 0); }

/// n signatures. Signature i only depends on (seed, i, params, grid), so the
/// result is independent of `threads` and any prefix of a larger run matches.
inline Dataset generate_dataset(std::size_t n, const SimParams& params, std::uint64_t seed,
                                const TimeGrid& grid = default_grid(), std::size_t threads = 1) {
  detail::require(n >= 1, "generate_dataset: n must be >= 1");
  params.validate();
  Dataset data;
  data.grid = grid;
  data.seed = seed;
  data.params = params;
  data.labels = sample_labels(n, labels_seed(seed), params.y1_probability, params.y2_probability);
  data.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.count()));
  parallel_for(n, threads, [&](std::size_t i) {
    RandomStream rng(signature_seed(seed, i));
    data.values.row(static_cast<Eigen::Index>(i)) =
        generate_signature(data.labels[i], params, grid, rng).values.transpose();
  });
  return data;
}

enum class Grouping { ByY1, ByY2, ByY3Quartile };

struct GroupCurves {
  std::string name;
  std::size_t size = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;  // sample sd (n - 1); 0 for single-member groups
};

/// Empirical quantile with linear interpolation between order statistics.
inline double empirical_quantile(std::vector<double> values, double q) {
  detail::require(!values.empty(), "quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

/// Group index (0-based) of every observation under `grouping`.
inline std::vector<int> group_assignment(const Dataset& data, Grouping grouping) {
  std::vector<int> group(data.size());
  if (grouping == Grouping::ByY3Quartile) {
    std::vector<double> y3;
    for (const auto& l : data.labels) y3.push_back(l.y3);
    const double q1 = empirical_quantile(y3, 0.25);
    const double q2 = empirical_quantile(y3, 0.50);
    const double q3 = empirical_quantile(y3, 0.75);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double v = data.labels[i].y3;
      group[i] = v <= q1 ? 0 : v <= q2 ? 1 : v <= q3 ? 2 : 3;
    }
  } else {
    for (std::size_t i = 0; i < data.size(); ++i)
      group[i] = grouping == Grouping::ByY1 ? data.labels[i].y1 : data.labels[i].y2;
  }
  return group;
}

inline std::vector<std::string> group_names(Grouping grouping) {
  switch (grouping) {
    case Grouping::ByY1: return {"y1=0", "y1=1"};
    case Grouping::ByY2: return {"y2=0", "y2=1"};
    case Grouping::ByY3Quartile: return {"y3 Q1", "y3 Q2", "y3 Q3", "y3 Q4"};
  }
  return {};
}

/// Point-wise mean and sd curves per group. For y1 / y2 only the classes
/// present in `data` are returned.
inline std::vector<GroupCurves> class_conditional_means(const Dataset& data, Grouping grouping) {
  const auto names = group_names(grouping);
  const auto group = group_assignment(data, grouping);
  detail::require(data.size() >= 1, "class_conditional_means: empty dataset");
  const Eigen::Index m = data.values.cols();
  std::vector<GroupCurves> out;
  for (std::size_t g = 0; g < names.size(); ++g) {
    GroupCurves curves;
    curves.name = names[g];
    curves.mean = Eigen::VectorXd::Zero(m);
    for (std::size_t i = 0; i < data.size(); ++i)
      if (group[i] == static_cast<int>(g)) {
        curves.mean += data.values.row(static_cast<Eigen::Index>(i)).transpose();
        ++curves.size;
      }
    if (curves.size == 0) {
      // a label class absent from the data is simply not a group; quartile bins must all be filled
      if (grouping != Grouping::ByY3Quartile) continue;
      throw InvalidArgument("class_conditional_means: group '" + names[g] + "' is empty");
    }
    curves.mean /= static_cast<double>(curves.size);
    curves.sd = Eigen::VectorXd::Zero(m);
    for (std::size_t i = 0; i < data.size(); ++i)
      if (group[i] == static_cast<int>(g))
        curves.sd += (data.values.row(static_cast<Eigen::Index>(i)).transpose() - curves.mean).cwiseAbs2();
    if (curves.size > 1) curves.sd = (curves.sd / static_cast<double>(curves.size - 1)).cwiseSqrt();
    else curves.sd.setZero();
    out.push_back(std::move(curves));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence: `<stem>.csv` with header t_0..t_{m-1},y1,y2,y3 and a
// `<stem>.meta.json` sidecar holding the grid, seed and SimParams.

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".meta.json");
  return p;
}

inline void save_dataset(const Dataset& data, const std::filesystem::path& csv) {
  const auto m = static_cast<Eigen::Index>(data.grid.count());
  std::vector<std::string> header;
  header.reserve(static_cast<std::size_t>(m) + 3);
  for (Eigen::Index j = 0; j < m; ++j) header.push_back("t_" + std::to_string(j));
  header.insert(header.end(), {"y1", "y2", "y3"});
  Eigen::MatrixXd table(data.values.rows(), m + 3);
  table.leftCols(m) = data.values;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    table(r, m) = data.labels[i].y1;
    table(r, m + 1) = data.labels[i].y2;
    table(r, m + 2) = data.labels[i].y3;
  }
  write_table(csv, header, table);

  Json meta;
  meta["format_version"] = 1;
  meta["grid"] = {{"start", data.grid.start()}, {"stop", data.grid.stop()}, {"count", data.grid.count()}};
  meta["seed"] = data.seed;
  meta["params"] = to_json(data.params);
  meta["params_digest"] = hex64(params_digest(data.params));
  write_json(sidecar_path(csv), meta);
}

inline Dataset load_dataset(const std::filesystem::path& csv) {
  const Table table = read_table(csv);
  const Json meta = read_json(sidecar_path(csv));
  Dataset data;
  const auto& g = meta.at("grid");
  data.grid = TimeGrid::uniform(g.at("start").get<double>(), g.at("stop").get<double>(),
                                g.at("count").get<std::size_t>());
  data.seed = meta.at("seed").get<std::uint64_t>();
  data.params = sim_params_from_json(meta.at("params"));
  const auto m = static_cast<Eigen::Index>(data.grid.count());
  if (table.values.cols() != m + 3)
    throw IoError(csv.string() + ": expected " + std::to_string(m + 3) + " columns");
  data.values = table.values.leftCols(m);
  data.labels.resize(static_cast<std::size_t>(table.values.rows()));
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    auto& l = data.labels[static_cast<std::size_t>(i)];
    l.y1 = static_cast<int>(table.values(i, m));
    l.y2 = static_cast<int>(table.values(i, m + 1));
    l.y3 = table.values(i, m + 2);
  }
  return data;
}

}  // namespace fdxai
