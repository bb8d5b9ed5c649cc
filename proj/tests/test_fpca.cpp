#include <gtest/gtest.h>

#include <filesystem>

#include "fdxai/fpca.hpp"
#include "oracles.hpp"

using namespace fdxai;

namespace {

Eigen::MatrixXd random_curves(std::size_t n, std::size_t m, std::uint64_t seed) {
  RandomStream rng(seed);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal() + 0.3 * static_cast<double>(j);
  return x;
}

oracle::Matrix rows_of(const Eigen::MatrixXd& x) {
  oracle::Matrix out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) out[static_cast<std::size_t>(i)].push_back(x(i, j));
  return out;
}

double total_weighted_variance(const Eigen::MatrixXd& x, double dt) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  return (x.rowwise() - mean).squaredNorm() / static_cast<double>(x.rows() - 1) * dt;
}

}  // namespace

TEST(Fpca, IdenticalSignaturesHaveNoVariance) {
  Eigen::MatrixXd x(2, 5);
  x.row(0) << 1, 2, 3, 2, 1;
  x.row(1) = x.row(0);
  const auto model = fit_fpca(x, default_grid(5));
  EXPECT_EQ(model.mean, Eigen::VectorXd(x.row(0).transpose()));
  EXPECT_TRUE(model.eigenvalues.isZero(0.0));
  EXPECT_THROW(variance_explained(model), InvalidArgument);
}

TEST(Fpca, TwoPointDatasetClosedForm) {
  const auto grid = default_grid(6);
  const double dt = grid.spacing();
  Eigen::VectorXd mu(6), g(6);
  mu << 1, 2, 3, 4, 5, 6;
  g << 0.5, -1, 0.25, 2, 0, -0.75;
  Eigen::MatrixXd x(2, 6);
  x.row(0) = (mu + g).transpose();
  x.row(1) = (mu - g).transpose();
  const auto model = fit_fpca(x, grid);
  ASSERT_EQ(model.components(), 1u);
  const double g_norm2 = g.squaredNorm() * dt;
  // two residuals +/- g: sum of squared norms 2 ||g||^2 over n - 1 = 1
  EXPECT_NEAR(model.eigenvalues(0), 2.0 * g_norm2, 1e-12 * g_norm2);
  const Eigen::VectorXd expected = g / std::sqrt(g_norm2);  // sign convention: <x0 - mean, xi> = <g, xi> >= 0
  EXPECT_LT((model.eigenfunctions.col(0) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fpca, MatchesJacobiOracle) {
  const auto grid = default_grid(8);
  const auto x = random_curves(6, 8, 17);
  const auto model = fit_fpca(x, grid);
  const auto eig = oracle::jacobi_eigen(oracle::weighted_covariance(rows_of(x), grid.spacing()));
  ASSERT_EQ(model.components(), 5u);
  for (std::size_t j = 0; j < model.components(); ++j)
    EXPECT_NEAR(model.eigenvalues(static_cast<Eigen::Index>(j)), eig.values[j], 1e-9 * eig.values[0]);
  for (std::size_t j = 5; j < eig.values.size(); ++j) EXPECT_NEAR(eig.values[j], 0.0, 1e-12 * eig.values[0]);
}

TEST(Fpca, OracleEquivalenceOnRandomSmallInstances) {
  RandomStream rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng.below(11);
    const std::size_t m = 2 + rng.below(11);
    const auto grid = TimeGrid::uniform(-1.0, 1.0 + static_cast<double>(trial), m);
    const double dt = grid.spacing();
    const auto x = random_curves(n, m, 100 + static_cast<std::uint64_t>(trial));
    const auto model = fit_fpca(x, grid);
    const auto eig = oracle::jacobi_eigen(oracle::weighted_covariance(rows_of(x), dt));
    const std::size_t r = model.components();
    ASSERT_LE(r, std::min(n - 1, m));

    // oracle eigenvectors are unit in the Euclidean norm; rescale to unit quadrature norm and orient
    Eigen::MatrixXd oracle_xi(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(r));
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t k = 0; k < m; ++k)
        oracle_xi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = eig.vectors[j][k] / std::sqrt(dt);
    const Eigen::VectorXd residual = x.row(0).transpose() - model.mean;
    apply_sign_convention(oracle_xi, residual, dt);

    for (std::size_t j = 0; j < r; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      EXPECT_NEAR(model.eigenvalues(jj), eig.values[j], 1e-9 * eig.values[0]) << "trial " << trial << " j " << j;
      // eigenvectors are only determined when the eigenvalue is separated
      const double gap = std::min(j > 0 ? eig.values[j - 1] - eig.values[j] : eig.values[0],
                                  j + 1 < eig.values.size() ? eig.values[j] - eig.values[j + 1] : eig.values[0]);
      if (gap > 1e-3 * eig.values[0])
        EXPECT_LT((model.eigenfunctions.col(jj) - oracle_xi.col(jj)).cwiseAbs().maxCoeff() * std::sqrt(dt),
                  1e-6)
            << "trial " << trial << " j " << j;
    }
    for (std::size_t j = r; j < eig.values.size(); ++j) EXPECT_LT(eig.values[j], 1e-10 * eig.values[0]);

    const Eigen::MatrixXd gram = model.eigenfunctions.transpose() * model.eigenfunctions * dt;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-8);

    const double total = total_weighted_variance(x, dt);
    EXPECT_NEAR(model.eigenvalues.sum(), total, 1e-8 * total);

    const auto back = inverse_transform(model, transform(model, x), r);
    EXPECT_LT((back - x).norm() / x.norm(), 1e-6);
  }
}

TEST(Fpca, ScoresMatchExtendedPrecisionSums) {
  const auto grid = default_grid(8);
  const auto x = random_curves(5, 8, 5);
  const auto model = fit_fpca(x, grid);
  const auto scores = transform(model, x);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      long double sum = 0.0L;
      for (Eigen::Index t = 0; t < x.cols(); ++t)
        sum += (static_cast<long double>(x(i, t)) - model.mean(t)) * model.eigenfunctions(t, j) *
               static_cast<long double>(model.quadrature_weight);
      EXPECT_NEAR(scores(i, j), static_cast<double>(sum), 1e-12);
    }
}

TEST(Fpca, TrainingScoreProperties) {
  const auto grid = default_grid(40);
  const auto x = random_curves(30, 40, 8);
  const auto model = fit_fpca(x, grid);
  const auto s = transform(model, x);
  const double n1 = static_cast<double>(x.rows() - 1);
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    EXPECT_NEAR(s.col(j).mean(), 0.0, 1e-8);
    EXPECT_NEAR(s.col(j).squaredNorm() / n1, model.eigenvalues(j), 1e-8 * model.eigenvalues(j));
    for (Eigen::Index k = 0; k < j; ++k) {
      const double corr = s.col(j).dot(s.col(k)) / (s.col(j).norm() * s.col(k).norm());
      EXPECT_LT(std::abs(corr), 1e-6);
    }
  }
  for (Eigen::Index j = 1; j < model.eigenvalues.size(); ++j)
    EXPECT_LE(model.eigenvalues(j), model.eigenvalues(j - 1));
}

TEST(Fpca, MeanCurveProjectsToZero) {
  const auto grid = default_grid(12);
  const auto model = fit_fpca(random_curves(9, 12, 1), grid);
  const auto s = transform(model, Eigen::MatrixXd(model.mean.transpose()));
  EXPECT_LT(s.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fpca, InverseTransformBehaviour) {
  const auto grid = default_grid(10);
  const auto x = random_curves(8, 10, 44);
  const auto model = fit_fpca(x, grid);
  const auto s = transform(model, x);
  const auto zero = inverse_transform(model, s, 0);
  for (Eigen::Index i = 0; i < zero.rows(); ++i) EXPECT_EQ(Eigen::VectorXd(zero.row(i).transpose()), model.mean);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= model.components(); ++k) {
      const double err = (inverse_transform(model, s.row(i), k).row(0) - x.row(i)).norm();
      EXPECT_LE(err, previous + 1e-12);
      previous = err;
    }
  }
  EXPECT_THROW(inverse_transform(model, s, model.components() + 1), InvalidArgument);
}

TEST(Fpca, PreconditionErrors) {
  EXPECT_THROW(fit_fpca(Eigen::MatrixXd::Ones(1, 4), default_grid(4)), InvalidArgument);
  EXPECT_THROW(fit_fpca(Eigen::MatrixXd::Ones(3, 4), default_grid(5)), InvalidArgument);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(3, 4);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(fit_fpca(bad, default_grid(4)), NumericalError);
  const auto model = fit_fpca(random_curves(4, 6, 2), default_grid(6));
  EXPECT_THROW(transform(model, Eigen::MatrixXd::Ones(2, 7)), InvalidArgument);
}

TEST(Fpca, RankIsCappedByTrainingSize) {
  const auto model = fit_fpca(random_curves(5, 50, 3), default_grid(50));
  EXPECT_EQ(model.components(), 4u);
}

TEST(Fpca, SignConventionTieBreak) {
  // first residual orthogonal to every component: orientation falls back to the first non-zero entry
  Eigen::MatrixXd xi(3, 1);
  xi << 0.0, -2.0, 1.0;
  Eigen::VectorXd residual(3);
  residual << 5.0, 1.0, 2.0;
  apply_sign_convention(xi, residual, 1.0);
  EXPECT_EQ(xi(1, 0), 2.0);
  xi << 0.0, -2.0, 1.0;
  residual << 0.0, -1.0, 0.0;
  apply_sign_convention(xi, residual, 1.0);
  EXPECT_EQ(xi(1, 0), -2.0);
}

TEST(VarianceExplained, Arithmetic) {
  FpcaModel m;
  m.eigenvalues.resize(2);
  m.eigenvalues << 3.0, 1.0;
  const auto v = variance_explained(m);
  EXPECT_DOUBLE_EQ(v.fraction(0), 0.75);
  EXPECT_DOUBLE_EQ(v.fraction(1), 0.25);
  EXPECT_DOUBLE_EQ(v.cumulative(1), 1.0);
}

TEST(Fpca, PersistenceRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "fdxai_test_fpca";
  std::filesystem::remove_all(dir);
  const auto grid = default_grid(20);
  const auto x = random_curves(15, 20, 6);
  const auto model = fit_fpca(x, grid);
  save_fpca(model, dir);
  const auto back = load_fpca(dir);
  EXPECT_EQ(back.grid, model.grid);
  EXPECT_EQ(back.n_train, model.n_train);
  EXPECT_LE((transform(back, x) - transform(model, x)).cwiseAbs().maxCoeff(), 1e-12);

  save_scores(transform(model, x), dir / "scores.csv");
  EXPECT_EQ(load_scores(dir / "scores.csv"), transform(model, x));

  // refitting and saving again writes identical files
  const auto dir2 = dir / "again";
  save_fpca(fit_fpca(x, grid), dir2);
  for (const char* f : {"model.json", "mean.csv", "eigenfunctions.csv"})
    EXPECT_EQ(read_text(dir / f), read_text(dir2 / f)) << f;
  std::filesystem::remove_all(dir);
}
