#pragma once

// Functional principal component analysis on a uniform grid.
//
// With quadrature weight dt the covariance operator discretizes to
// C = X_c^T X_c dt / (n - 1), where X_c is the centered n x m data matrix.
// Its eigenproblem C xi = lambda xi with normalization sum_i xi(t_i)^2 dt = 1
// is solved through the SVD of X_c sqrt(dt) = U S V^T:
//   lambda_j = s_j^2 / (n - 1),   xi_j = v_j / sqrt(dt).
// Scores are quadrature inner products <x - mean, xi_j>.

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "fdxai/error.hpp"
#include "fdxai/io.hpp"
#include "fdxai/sim.hpp"

namespace fdxai {

/// n x r matrix of fPC scores; column j-1 holds fPC j.
using ScoreMatrix = Eigen::MatrixXd;

inline constexpr const char* kSignConvention = "first-training-residual-nonnegative";
inline constexpr double kRankTruncation = 1e-12;

struct FpcaModel {
  TimeGrid grid;
  Eigen::VectorXd mean;            // length m
  Eigen::MatrixXd eigenfunctions;  // m x r, column j-1 is xi_j
  Eigen::VectorXd eigenvalues;     // length r, non-increasing
  double quadrature_weight = 0.0;
  std::size_t n_train = 0;

  [[nodiscard]] std::size_t components() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
};

namespace detail {

/// Orients xi so that <residual, xi>_dt >= 0; near-zero projections fall back
/// to making the first non-zero entry of xi positive.
inline void orient(Eigen::Ref<Eigen::VectorXd> xi, const Eigen::VectorXd& residual, double dt) {
  const double projection = residual.dot(xi) * dt;
  bool flip = false;
  if (std::abs(projection) >= 1e-12) {
    flip = projection < 0.0;
  } else {
    for (Eigen::Index i = 0; i < xi.size(); ++i)
      if (xi(i) != 0.0) {
        flip = xi(i) < 0.0;
        break;
      }
  }
  if (flip) xi = -xi;
}

}  // namespace detail

/// Applies the sign convention to every column of `eigenfunctions` using the
/// first training residual. Exposed so independent solvers can be compared
/// after identical orientation.
inline void apply_sign_convention(Eigen::MatrixXd& eigenfunctions, const Eigen::VectorXd& first_residual,
                                  double dt) {
  for (Eigen::Index j = 0; j < eigenfunctions.cols(); ++j)
    detail::orient(eigenfunctions.col(j), first_residual, dt);
}

/// Fits the model to the rows of `curves` (n x m) sampled on `grid`.
inline FpcaModel fit_fpca(const Eigen::MatrixXd& curves, const TimeGrid& grid) {
  const Eigen::Index n = curves.rows();
  const Eigen::Index m = curves.cols();
  detail::require(n >= 2, "fpca fit: need at least 2 training signatures");
  detail::require(static_cast<std::size_t>(m) == grid.count(), "fpca fit: signature length does not match grid");
  if (!curves.allFinite()) throw NumericalError("fpca fit: non-finite training values");

  FpcaModel model;
  model.grid = grid;
  model.quadrature_weight = grid.spacing();
  model.n_train = static_cast<std::size_t>(n);
  model.mean = curves.colwise().mean().transpose();

  const double dt = model.quadrature_weight;
  const Eigen::MatrixXd centered = curves.rowwise() - model.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered * std::sqrt(dt), Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw NumericalError("fpca fit: SVD did not converge (n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                         ", info=" + std::to_string(static_cast<int>(svd.info())) + ")");

  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::Index max_rank = std::min<Eigen::Index>(n - 1, m);
  const double lambda1 = s.size() ? s(0) * s(0) / static_cast<double>(n - 1) : 0.0;
  Eigen::Index rank = 0;
  while (rank < max_rank) {
    const double lambda = s(rank) * s(rank) / static_cast<double>(n - 1);
    if (lambda1 > 0.0 && lambda < kRankTruncation * lambda1) break;
    ++rank;
  }
  model.eigenvalues.resize(rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    const double lambda = s(j) * s(j) / static_cast<double>(n - 1);
    model.eigenvalues(j) = lambda < 0.0 ? 0.0 : lambda;
  }
  model.eigenfunctions = svd.matrixV().leftCols(rank) / std::sqrt(dt);
  apply_sign_convention(model.eigenfunctions, centered.row(0).transpose(), dt);
  return model;
}

inline FpcaModel fit_fpca(const Dataset& train) { return fit_fpca(train.values, train.grid); }

/// score_ij = sum_t (x_i(t) - mean(t)) xi_j(t) dt
inline ScoreMatrix transform(const FpcaModel& model, const Eigen::MatrixXd& curves) {
  detail::require(curves.cols() == model.mean.size(), "fpca transform: signature length " +
                                                          std::to_string(curves.cols()) + " does not match grid " +
                                                          std::to_string(model.mean.size()));
  return ((curves.rowwise() - model.mean.transpose()) * model.eigenfunctions) * model.quadrature_weight;
}

inline ScoreMatrix transform(const FpcaModel& model, const Dataset& data) {
  detail::require(data.grid.count() == model.grid.count(), "fpca transform: grid mismatch");
  return transform(model, data.values);
}

/// x_hat_i(t) = mean(t) + sum_{j <= k} score_ij xi_j(t)
inline Eigen::MatrixXd inverse_transform(const FpcaModel& model, const ScoreMatrix& scores, std::size_t k) {
  detail::require(k <= model.components(), "inverse_transform: k = " + std::to_string(k) + " exceeds r = " +
                                               std::to_string(model.components()));
  detail::require(k == 0 || scores.cols() >= static_cast<Eigen::Index>(k),
                  "inverse_transform: score matrix has fewer than k columns");
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(scores.rows(), model.mean.size());
  if (kk > 0) out = scores.leftCols(kk) * model.eigenfunctions.leftCols(kk).transpose();
  out.rowwise() += model.mean.transpose();
  return out;
}

struct VarianceExplained {
  Eigen::VectorXd fraction;
  Eigen::VectorXd cumulative;
};

inline VarianceExplained variance_explained(const FpcaModel& model) {
  const double total = model.eigenvalues.sum();
  if (!(total > 0.0)) throw InvalidArgument("variance_explained: model has no positive eigenvalue");
  VarianceExplained v;
  v.fraction = model.eigenvalues / total;
  v.cumulative.resize(v.fraction.size());
  double running = 0.0;
  for (Eigen::Index j = 0; j < v.fraction.size(); ++j) {
    running += v.fraction(j);
    v.cumulative(j) = running;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Persistence: model.json manifest, mean.csv (t, mean), eigenfunctions.csv
// (t, xi_1..xi_r), all with round-trip decimals.

inline std::vector<std::string> score_header(std::size_t r) {
  std::vector<std::string> header;
  for (std::size_t j = 1; j <= r; ++j) header.push_back("fpc_" + std::to_string(j));
  return header;
}

inline void save_scores(const ScoreMatrix& scores, const std::filesystem::path& path) {
  write_table(path, score_header(static_cast<std::size_t>(scores.cols())), scores);
}

inline ScoreMatrix load_scores(const std::filesystem::path& path) { return read_table(path).values; }

inline void save_fpca(const FpcaModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Json manifest;
  manifest["format_version"] = 1;
  manifest["grid"] = {{"start", model.grid.start()}, {"stop", model.grid.stop()}, {"count", model.grid.count()}};
  manifest["quadrature_weight"] = model.quadrature_weight;
  manifest["n_train"] = model.n_train;
  manifest["components"] = model.components();
  manifest["sign_convention"] = kSignConvention;
  manifest["eigenvalues"] = to_json(model.eigenvalues);
  write_json(dir / "model.json", manifest);

  const auto m = model.mean.size();
  Eigen::MatrixXd mean_table(m, 2);
  mean_table << model.grid.points(), model.mean;
  write_table(dir / "mean.csv", {"t", "mean"}, mean_table);

  Eigen::MatrixXd eig_table(m, model.eigenfunctions.cols() + 1);
  eig_table << model.grid.points(), model.eigenfunctions;
  auto header = score_header(model.components());
  for (auto& h : header) h.replace(0, 3, "xi");
  header.insert(header.begin(), "t");
  write_table(dir / "eigenfunctions.csv", header, eig_table);
}

inline FpcaModel load_fpca(const std::filesystem::path& dir) {
  const Json manifest = read_json(dir / "model.json");
  if (manifest.at("format_version").get<int>() != 1) throw IoError("unsupported fpca model format");
  FpcaModel model;
  const auto& g = manifest.at("grid");
  model.grid = TimeGrid::uniform(g.at("start").get<double>(), g.at("stop").get<double>(),
                                 g.at("count").get<std::size_t>());
  model.quadrature_weight = manifest.at("quadrature_weight").get<double>();
  model.n_train = manifest.at("n_train").get<std::size_t>();
  model.eigenvalues = vector_from_json(manifest.at("eigenvalues"));
  const Table mean = read_table(dir / "mean.csv");
  model.mean = mean.values.col(1);
  const Table eig = read_table(dir / "eigenfunctions.csv");
  model.eigenfunctions = eig.values.rightCols(eig.values.cols() - 1);
  if (model.mean.size() != static_cast<Eigen::Index>(model.grid.count()) ||
      model.eigenfunctions.rows() != model.mean.size() || model.eigenfunctions.cols() != model.eigenvalues.size())
    throw IoError(dir.string() + ": inconsistent fpca model dimensions");
  return model;
}

}  // namespace fdxai
