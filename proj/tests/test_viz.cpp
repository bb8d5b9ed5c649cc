#include <gtest/gtest.h>

#include <filesystem>
#include <limits>
#include <set>

#include "fdxai/viz.hpp"
#include "oracles.hpp"

using namespace fdxai;

namespace {

struct Toy {
  Eigen::VectorXd mu, g;
  FpcaModel model;
  Dataset data;
};

Toy two_point_toy() {
  Toy t;
  const auto grid = default_grid(6);
  t.mu.resize(6);
  t.g.resize(6);
  t.mu << 3, 4, 5, 5, 4, 3;
  t.g << 0.5, 1.0, -0.5, 0.25, -1.0, 0.75;
  t.data.grid = grid;
  t.data.values.resize(2, 6);
  t.data.values.row(0) = (t.mu + t.g).transpose();
  t.data.values.row(1) = (t.mu - t.g).transpose();
  t.data.labels = {{0, 0, 0.2}, {1, 1, 0.7}};
  t.model = fit_fpca(t.data);
  return t;
}

Dataset sample(std::size_t n, std::size_t m, std::uint64_t seed) {
  return generate_dataset(n, SimParams{}, seed, default_grid(m));
}

int sign_changes(const std::vector<double>& y) {
  int changes = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    if ((y[i] > 0) != (y[i - 1] > 0)) ++changes;
  return changes;
}

}  // namespace

TEST(EigenfunctionPlot, ToyCurveIsProportionalToG) {
  const auto t = two_point_toy();
  const auto spec = eigenfunction_plot(t.model, 1);
  ASSERT_EQ(spec.series.size(), 1u);
  EXPECT_TRUE(spec.zero_line);
  const double ratio = spec.series[0].y[0] / t.g(0);
  for (Eigen::Index i = 0; i < 6; ++i) EXPECT_NEAR(spec.series[0].y[static_cast<std::size_t>(i)], ratio * t.g(i), 1e-12);
  EXPECT_THROW(eigenfunction_plot(t.model, 2), InvalidArgument);
  EXPECT_THROW(eigenfunction_plot(t.model, 0), InvalidArgument);
}

TEST(EigenfunctionPlot, PositiveWeightsHaveNoZeroCrossing) {
  FpcaModel m;
  m.grid = default_grid(5);
  m.mean = Eigen::VectorXd::Zero(5);
  m.eigenfunctions = Eigen::MatrixXd::Constant(5, 1, 1.0);
  m.eigenvalues = Eigen::VectorXd::Constant(1, 2.0);
  m.quadrature_weight = 1.0;
  EXPECT_EQ(sign_changes(eigenfunction_plot(m, 1).series[0].y), 0);
}

TEST(MeanPmEigenfunction, ToyClosedForm) {
  const auto t = two_point_toy();
  const auto spec = mean_pm_eigenfunction(t.model, 1, 1.0);
  ASSERT_EQ(spec.series.size(), 3u);
  const double g_norm = std::sqrt(t.g.squaredNorm() * t.model.quadrature_weight);
  const double lambda = t.model.eigenvalues(0);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    EXPECT_NEAR(spec.series[0].y[i], t.mu(ii), 1e-12);
    EXPECT_NEAR(spec.series[1].y[i], t.mu(ii) + t.g(ii) * std::sqrt(lambda) / g_norm, 1e-12);
  }
}

TEST(MeanPmEigenfunction, MirrorImagesAndSmallMultiplierLimit) {
  const auto data = sample(40, 50, 2);
  const auto model = fit_fpca(data);
  for (std::size_t j = 1; j <= 3; ++j) {
    const auto spec = mean_pm_eigenfunction(model, j);
    const auto &mean = spec.series[0].y, &plus = spec.series[1].y, &minus = spec.series[2].y;
    double scale = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i)
      scale = std::max({scale, std::abs(mean[i]), std::abs(plus[i]), std::abs(minus[i])});
    for (std::size_t i = 0; i < mean.size(); ++i)
      EXPECT_LE(std::abs((plus[i] - mean[i]) - (mean[i] - minus[i])),
                4.0 * std::numeric_limits<double>::epsilon() * scale);
  }
  double previous = std::numeric_limits<double>::infinity();
  for (double c : {1.0, 0.1, 0.01, 0.001}) {
    const auto spec = mean_pm_eigenfunction(model, 1, c);
    double dev = 0.0;
    for (std::size_t i = 0; i < spec.x.size(); ++i) dev = std::max(dev, std::abs(spec.series[1].y[i] - spec.series[0].y[i]));
    EXPECT_LT(dev, previous);
    const double slope = std::sqrt(model.eigenvalues(0)) * model.eigenfunctions.col(0).cwiseAbs().maxCoeff();
    EXPECT_NEAR(dev / c, slope, 1e-6 * slope);
    previous = dev;
  }
}

TEST(MeanPmEigenfunction, Errors) {
  auto t = two_point_toy();
  EXPECT_THROW(mean_pm_eigenfunction(t.model, 1, 0.0), InvalidArgument);
  t.model.eigenvalues(0) = 0.0;
  EXPECT_THROW(mean_pm_eigenfunction(t.model, 1), InvalidArgument);
}

TEST(ExtremeBundles, SinglePairIsDistinct) {
  const auto t = two_point_toy();
  const auto b = extreme_score_bundles(t.model, t.data, 1, 1);
  ASSERT_EQ(b.top.size(), 1u);
  ASSERT_EQ(b.bottom.size(), 1u);
  EXPECT_NE(b.top[0], b.bottom[0]);
  EXPECT_THROW(extreme_score_bundles(t.model, t.data, 1, 2), InvalidArgument);
}

TEST(ExtremeBundles, DisjointUnderTies) {
  Eigen::VectorXd s(8);
  s << 1, 1, 1, 1, 1, 1, 2, 0;
  const auto [top, bottom] = extreme_indices(s, 4);
  EXPECT_EQ(top, (std::vector<std::size_t>{6, 0, 1, 2}));
  EXPECT_EQ(bottom, (std::vector<std::size_t>{7, 5, 4, 3}));
  std::set<std::size_t> all(top.begin(), top.end());
  all.insert(bottom.begin(), bottom.end());
  EXPECT_EQ(all.size(), 8u);
}

TEST(ExtremeBundles, TopScoresExceedBottomScores) {
  const auto data = sample(120, 60, 3);
  const auto model = fit_fpca(data);
  const auto scores = transform(model, data);
  const auto b = extreme_score_bundles(model, data, 2, 10);
  for (auto i : b.top)
    for (auto k : b.bottom) EXPECT_GT(scores(static_cast<Eigen::Index>(i), 1), scores(static_cast<Eigen::Index>(k), 1));
  EXPECT_EQ(b.plot.series.size(), 21u);
}

TEST(ScoreScatter, IdentityLineAndCentroids) {
  Eigen::MatrixXd s(4, 2);
  s << 0, 0, 1, 1, 2, 2, 3, 3;
  const auto same = score_scatter(s, Eigen::VectorXd::Zero(4), 1, 2, "y");
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(same.series[0].y[i], same.x[i]);

  Eigen::MatrixXd two(6, 2);
  two << -2, -1, -3, -2, -2.5, -1.5, 2, 1, 3, 2, 2.5, 1.5;
  Eigen::VectorXd cls(6);
  cls << 0, 0, 0, 1, 1, 1;
  const auto spec = score_scatter(two, cls, 1, 2, "y1");
  ASSERT_EQ(spec.series.size(), 2u);
  auto centroid = [&](std::size_t c) {
    double sx = 0, sy = 0, k = 0;
    for (std::size_t i = 0; i < spec.x.size(); ++i)
      if (!std::isnan(spec.series[c].y[i])) {
        sx += spec.x[i];
        sy += spec.series[c].y[i];
        ++k;
      }
    return std::pair{sx / k, sy / k};
  };
  EXPECT_DOUBLE_EQ(centroid(0).first, -2.5);
  EXPECT_DOUBLE_EQ(centroid(1).second, 1.5);
  EXPECT_THROW(score_scatter(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0), 1, 2, "y"), InvalidArgument);
  EXPECT_THROW(score_scatter(two, cls, 1, 3, "y"), InvalidArgument);
  EXPECT_THROW(score_target_scatter(two, cls, 3, "y3"), InvalidArgument);
}

TEST(CorrelationHeatmap, HandComputedCase) {
  Dataset d;
  d.grid = default_grid(3);
  d.values.resize(3, 3);
  d.values << 1, 1, 3, 2, 3, 2, 3, 2, 1;
  d.labels.resize(3);
  const auto c = correlation_heatmap(d, 1);
  EXPECT_EQ(c.values(0, 0), 1.0);
  EXPECT_NEAR(c.values(0, 1), 0.5, 1e-15);
  EXPECT_NEAR(c.values(0, 2), -1.0, 1e-15);
  EXPECT_NEAR(c.values(1, 2), -0.5, 1e-15);
  EXPECT_EQ(c.values, c.values.transpose());
}

TEST(CorrelationHeatmap, DegenerateColumns) {
  Dataset d;
  d.grid = default_grid(4);
  d.values = Eigen::MatrixXd::Ones(5, 4);
  d.labels.resize(5);
  auto c = correlation_heatmap(d, 1);
  for (Eigen::Index a = 0; a < 4; ++a)
    for (Eigen::Index b = 0; b < 4; ++b) {
      if (a == b) EXPECT_EQ(c.values(a, b), 1.0);
      else EXPECT_TRUE(std::isnan(c.values(a, b)));
    }
  EXPECT_TRUE(oracle::well_formed_svg(render_svg(c.plot)));

  d.values = Eigen::MatrixXd::Random(5, 4);
  d.values.col(3) = d.values.col(1);
  c = correlation_heatmap(d, 1);
  EXPECT_NEAR(c.values(1, 3), 1.0, 1e-15);
  EXPECT_THROW(correlation_heatmap(d, 0), InvalidArgument);
}

TEST(CorrelationHeatmap, StrideSamplesColumns) {
  const auto c = correlation_heatmap(sample(30, 100, 5), 25);
  EXPECT_EQ(c.columns, (std::vector<std::size_t>{0, 25, 50, 75}));
}

TEST(GroupMeansPlot, Bands) {
  Dataset d;
  d.grid = default_grid(4);
  d.values.resize(4, 4);
  d.values << 1, 1, 1, 1, 1, 1, 1, 1, 3, 3, 3, 3, 3, 3, 3, 3;
  d.labels = {{0, 0, 0.1}, {0, 0, 0.2}, {1, 0, 0.3}, {1, 0, 0.4}};
  const auto by_y1 = group_means_plot(d, Grouping::ByY1);
  ASSERT_EQ(by_y1.series.size(), 6u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(by_y1.series[3].y[i] - by_y1.series[0].y[i], 2.0);
    EXPECT_EQ(by_y1.series[1].y[i], by_y1.series[2].y[i]);  // zero width
  }
  const auto single = group_means_plot(d, Grouping::ByY2);
  EXPECT_EQ(single.series.size(), 3u);
  EXPECT_EQ(group_means_plot(d, Grouping::ByY3Quartile).series.size(), 12u);
}

TEST(Svg, WellFormedDeterministicAndReproducibleFromCsv) {
  const auto data = sample(60, 80, 6);
  const auto model = fit_fpca(data);
  const auto scores = transform(model, data);
  std::vector<PlotSpec> specs{eigenfunction_plot(model, 2),
                              mean_pm_eigenfunction(model, 1),
                              extreme_score_bundles(model, data, 1, 5).plot,
                              score_scatter(scores, data.target(1), 1, 2, "y1"),
                              score_target_scatter(scores, data.target(3), 2, "y3"),
                              correlation_heatmap(data, 10).plot,
                              group_means_plot(data, Grouping::ByY3Quartile),
                              component_summary_plot(model.eigenvalues, 10, "Eigenvalues", "lambda")};
  for (const auto& spec : specs) {
    const auto svg = render_svg(spec);
    EXPECT_TRUE(oracle::well_formed_svg(svg)) << spec.title;
    EXPECT_EQ(svg, render_svg(spec)) << spec.title;
    EXPECT_EQ(render_svg(plot_from_csv(plot_to_csv(spec))), svg) << spec.title;
    EXPECT_EQ(svg.find("href"), std::string::npos) << spec.title;
  }
}

TEST(Svg, EscapesMarkupInText) {
  PlotSpec spec;
  spec.title = "a < b & \"c\"";
  spec.x = {0.0, 1.0};
  spec.series.push_back({"s<1>", {1.0, 2.0}});
  EXPECT_TRUE(oracle::well_formed_svg(render_svg(spec)));
}

TEST(PlotSpec, ValidationRejectsBadInput) {
  PlotSpec spec;
  spec.title = "t";
  spec.x = {0.0, 1.0};
  EXPECT_THROW(render_svg(spec), InvalidArgument);
  spec.series.push_back({"s", {1.0}});
  EXPECT_THROW(render_svg(spec), InvalidArgument);
  spec.series[0].y = {1.0, std::numeric_limits<double>::infinity()};
  EXPECT_THROW(render_svg(spec), InvalidArgument);
  spec.series[0].y = {1.0, 2.0};
  spec.title = "a,b";
  EXPECT_THROW(plot_to_csv(spec), InvalidArgument);
}

TEST(WritePlot, WritesSvgAndCsv) {
  const auto dir = std::filesystem::temp_directory_path() / "fdxai_test_viz";
  std::filesystem::remove_all(dir);
  const auto t = two_point_toy();
  const auto [svg, csv] = write_plot(eigenfunction_plot(t.model, 1), dir, "eig");
  EXPECT_EQ(read_text(svg), render_svg(plot_from_csv(read_text(csv))));
  std::filesystem::remove_all(dir);
}
