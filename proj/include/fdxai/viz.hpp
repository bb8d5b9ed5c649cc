#pragma once

// Interpretation figures for fitted fPCA models and the data behind them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdxai/error.hpp"
#include "fdxai/fpca.hpp"
#include "fdxai/plot.hpp"
#include "fdxai/sim.hpp"

namespace fdxai {

inline const std::vector<std::string>& palette() {
  static const std::vector<std::string> colors{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                               "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  return colors;
}

namespace detail {

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline void require_component(const FpcaModel& model, std::size_t j) {
  require(j >= 1 && j <= model.components(), "component " + std::to_string(j) + " out of range 1.." +
                                                  std::to_string(model.components()));
}

}  // namespace detail

/// xi_j over the grid with a zero reference line; sign changes mark a contrast
/// between time intervals.
inline PlotSpec eigenfunction_plot(const FpcaModel& model, std::size_t j) {
  detail::require_component(model, j);
  PlotSpec spec;
  spec.kind = PlotKind::Eigenfunction;
  spec.title = "Eigenfunction of fPC " + std::to_string(j);
  spec.x_label = "log time";
  spec.y_label = "weight";
  spec.zero_line = true;
  spec.x = detail::to_std(model.grid.points());
  spec.series.push_back({"xi_" + std::to_string(j), detail::to_std(model.eigenfunctions.col(static_cast<Eigen::Index>(j - 1))),
                         SeriesStyle::Line, palette()[0], true});
  return spec;
}

/// Curves mean, mean + c sqrt(lambda_j) xi_j and mean - c sqrt(lambda_j) xi_j,
/// in that series order.
inline PlotSpec mean_pm_eigenfunction(const FpcaModel& model, std::size_t j, double multiplier = 2.0) {
  detail::require_component(model, j);
  detail::require(multiplier > 0.0, "mean_pm_eigenfunction: multiplier must be > 0");
  const double lambda = model.eigenvalues(static_cast<Eigen::Index>(j - 1));
  detail::require(lambda > 0.0, "mean_pm_eigenfunction: fPC " + std::to_string(j) + " has zero variance");
  const Eigen::VectorXd offset = multiplier * std::sqrt(lambda) * model.eigenfunctions.col(static_cast<Eigen::Index>(j - 1));
  PlotSpec spec;
  spec.kind = PlotKind::MeanPmEigenfunction;
  spec.title = "Mean +/- " + format_double(multiplier) + " sd of fPC " + std::to_string(j);
  spec.x_label = "log time";
  spec.y_label = "intensity";
  spec.x = detail::to_std(model.grid.points());
  spec.series.push_back({"mean", detail::to_std(model.mean), SeriesStyle::Line, "#000000", true});
  spec.series.push_back({"mean + " + format_double(multiplier) + " sd", detail::to_std(model.mean + offset),
                         SeriesStyle::Dashed, palette()[1], true});
  spec.series.push_back({"mean - " + format_double(multiplier) + " sd", detail::to_std(model.mean - offset),
                         SeriesStyle::Dashed, palette()[0], true});
  return spec;
}

struct ExtremeBundles {
  std::vector<std::size_t> top;     // highest scores first
  std::vector<std::size_t> bottom;  // lowest scores first
  PlotSpec plot;
};

/// Indices of the `count` highest and lowest values of `scores` under one
/// strict order (score descending, index ascending): top is its head, bottom
/// its tail. The two sets are disjoint whenever 2 * count <= size.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> extreme_indices(const Eigen::VectorXd& scores,
                                                                                     std::size_t count) {
  const auto n = static_cast<std::size_t>(scores.size());
  detail::require(count >= 1 && 2 * count <= n, "extreme bundles: need at least 2 * m signatures (m = " +
                                                    std::to_string(count) + ", n = " + std::to_string(n) + ")");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  std::vector<std::size_t> top(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  std::vector<std::size_t> bottom(order.rbegin(), order.rbegin() + static_cast<std::ptrdiff_t>(count));
  return {top, bottom};
}

/// Raw signatures with the m highest and m lowest fPC j scores, plus the mean.
inline ExtremeBundles extreme_score_bundles(const FpcaModel& model, const Dataset& data, std::size_t j,
                                            std::size_t count = 50) {
  detail::require_component(model, j);
  const ScoreMatrix scores = transform(model, data);
  auto [top, bottom] = extreme_indices(scores.col(static_cast<Eigen::Index>(j - 1)), count);
  ExtremeBundles out{top, bottom, {}};
  auto& spec = out.plot;
  spec.kind = PlotKind::ExtremeBundles;
  spec.title = "Signatures with the " + std::to_string(count) + " highest and lowest fPC " + std::to_string(j) + " scores";
  spec.x_label = "log time";
  spec.y_label = "intensity";
  spec.x = detail::to_std(model.grid.points());
  for (std::size_t k = 0; k < top.size(); ++k)
    spec.series.push_back({k == 0 ? "highest " + std::to_string(count) : "high_" + std::to_string(top[k]),
                           detail::to_std(data.values.row(static_cast<Eigen::Index>(top[k])).transpose()),
                           SeriesStyle::Thin, palette()[1], k == 0});
  for (std::size_t k = 0; k < bottom.size(); ++k)
    spec.series.push_back({k == 0 ? "lowest " + std::to_string(count) : "low_" + std::to_string(bottom[k]),
                           detail::to_std(data.values.row(static_cast<Eigen::Index>(bottom[k])).transpose()),
                           SeriesStyle::Thin, palette()[0], k == 0});
  spec.series.push_back({"mean", detail::to_std(model.mean), SeriesStyle::Line, "#000000", true});
  return out;
}

/// fPC `second` against fPC `first` (1-based), one point series per class of
/// the categorical `classes` vector (values 0, 1, ...).
inline PlotSpec score_scatter(const ScoreMatrix& scores, const Eigen::VectorXd& classes, std::size_t first,
                              std::size_t second, const std::string& class_name) {
  detail::require(scores.rows() > 0, "score_scatter: empty selection");
  detail::require(classes.size() == scores.rows(), "score_scatter: class vector length mismatch");
  const auto r = static_cast<std::size_t>(scores.cols());
  detail::require(first >= 1 && first <= r && second >= 1 && second <= r, "score_scatter: component out of range");
  const int class_count = static_cast<int>(classes.maxCoeff()) + 1;
  PlotSpec spec;
  spec.kind = PlotKind::ScoreScatter;
  spec.title = "fPC " + std::to_string(second) + " vs fPC " + std::to_string(first) + " by " + class_name;
  spec.x_label = "fPC " + std::to_string(first);
  spec.y_label = "fPC " + std::to_string(second);
  spec.x = detail::to_std(scores.col(static_cast<Eigen::Index>(first - 1)));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int c = 0; c < class_count; ++c) {
    Series s{class_name + "=" + std::to_string(c), std::vector<double>(spec.x.size(), nan), SeriesStyle::Points,
             palette()[static_cast<std::size_t>(c) % palette().size()], true};
    for (Eigen::Index i = 0; i < scores.rows(); ++i)
      if (static_cast<int>(classes(i)) == c) s.y[static_cast<std::size_t>(i)] = scores(i, static_cast<Eigen::Index>(second - 1));
    spec.series.push_back(std::move(s));
  }
  return spec;
}

/// Continuous target against fPC `component`.
inline PlotSpec score_target_scatter(const ScoreMatrix& scores, const Eigen::VectorXd& target, std::size_t component,
                                     const std::string& target_name) {
  detail::require(scores.rows() > 0, "score_scatter: empty selection");
  detail::require(target.size() == scores.rows(), "score_scatter: target length mismatch");
  detail::require(component >= 1 && component <= static_cast<std::size_t>(scores.cols()),
                  "score_scatter: component out of range");
  PlotSpec spec;
  spec.kind = PlotKind::ScoreScatter;
  spec.title = target_name + " vs fPC " + std::to_string(component);
  spec.x_label = "fPC " + std::to_string(component);
  spec.y_label = target_name;
  spec.x = detail::to_std(scores.col(static_cast<Eigen::Index>(component - 1)));
  spec.series.push_back({target_name, detail::to_std(target), SeriesStyle::Points, palette()[0], true});
  return spec;
}

struct CorrelationMatrix {
  std::vector<std::size_t> columns;  // sampled grid indices
  Eigen::MatrixXd values;            // NaN where undefined (zero-variance column)
  PlotSpec plot;
};

/// Pearson correlation between intensity columns at every `stride`-th grid
/// point. The diagonal is exactly 1; pairs involving a constant column are
/// undefined (NaN) rather than propagated.
inline CorrelationMatrix correlation_heatmap(const Dataset& data, std::size_t stride = 25) {
  detail::require(stride >= 1, "correlation_heatmap: stride must be >= 1");
  detail::require(data.size() >= 2, "correlation_heatmap: need at least 2 signatures");
  CorrelationMatrix out;
  for (std::size_t c = 0; c < data.grid.count(); c += stride) out.columns.push_back(c);
  const auto k = static_cast<Eigen::Index>(out.columns.size());
  Eigen::MatrixXd centered(data.values.rows(), k);
  Eigen::VectorXd norm(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto col = data.values.col(static_cast<Eigen::Index>(out.columns[static_cast<std::size_t>(c)]));
    centered.col(c) = col.array() - col.mean();
    norm(c) = centered.col(c).norm();
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.values.resize(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) {
      if (a == b) out.values(a, b) = 1.0;
      else if (norm(a) == 0.0 || norm(b) == 0.0) out.values(a, b) = nan;
      else out.values(a, b) = std::clamp(centered.col(a).dot(centered.col(b)) / (norm(a) * norm(b)), -1.0, 1.0);
    }
  auto& spec = out.plot;
  spec.kind = PlotKind::CorrelationHeatmap;
  spec.title = "Pearson correlation of intensities every " + std::to_string(stride) + " time points";
  spec.x_label = "log time";
  spec.y_label = "log time";
  for (auto c : out.columns) spec.x.push_back(data.grid.points()(static_cast<Eigen::Index>(c)));
  for (Eigen::Index a = 0; a < k; ++a)
    spec.series.push_back({"t=" + format_double(spec.x[static_cast<std::size_t>(a)]),
                           detail::to_std(out.values.row(a).transpose()), SeriesStyle::Line, "#000000", false});
  return out;
}

/// Point-wise mean (solid) and mean +/- 1 sd (dashed) per group.
inline PlotSpec group_means_plot(const Dataset& data, Grouping grouping) {
  const auto groups = class_conditional_means(data, grouping);
  PlotSpec spec;
  spec.kind = PlotKind::GroupMeans;
  spec.title = grouping == Grouping::ByY1   ? "Point-wise mean +/- 1 sd by y1"
               : grouping == Grouping::ByY2 ? "Point-wise mean +/- 1 sd by y2"
                                            : "Point-wise mean +/- 1 sd by y3 quartile";
  spec.x_label = "log time";
  spec.y_label = "intensity";
  spec.x = detail::to_std(data.grid.points());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& color = palette()[g % palette().size()];
    spec.series.push_back({groups[g].name + " mean", detail::to_std(groups[g].mean), SeriesStyle::Line, color, true});
    spec.series.push_back({groups[g].name + " +1sd", detail::to_std(groups[g].mean + groups[g].sd),
                           SeriesStyle::Dashed, color, false});
    spec.series.push_back({groups[g].name + " -1sd", detail::to_std(groups[g].mean - groups[g].sd),
                           SeriesStyle::Dashed, color, false});
  }
  return spec;
}

/// Horizontal bar-style summary (variance explained or mean PFI) for the
/// first `count` components, drawn as a point series over component index.
inline PlotSpec component_summary_plot(const Eigen::VectorXd& values, std::size_t count, const std::string& title,
                                       const std::string& y_label) {
  const auto k = std::min<Eigen::Index>(static_cast<Eigen::Index>(count), values.size());
  detail::require(k > 0, "component summary: no components");
  PlotSpec spec;
  spec.kind = PlotKind::ScoreScatter;
  spec.title = title;
  spec.x_label = "fPC";
  spec.y_label = y_label;
  spec.zero_line = true;
  for (Eigen::Index j = 0; j < k; ++j) spec.x.push_back(static_cast<double>(j + 1));
  spec.series.push_back({y_label, detail::to_std(values.head(k)), SeriesStyle::Line, palette()[0], false});
  spec.series.push_back({y_label + " points", detail::to_std(values.head(k)), SeriesStyle::Points, palette()[0], false});
  return spec;
}

}  // namespace fdxai
