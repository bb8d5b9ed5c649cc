#pragma once

// Permutation feature importance for any predictor over a feature matrix.
//
// importance(j, r) = mean_i loss(f(X with column j permuted by pi_jr)_i, y_i)
//                  - mean_i loss(f(X)_i, y_i)
//
// Each permutation pi_jr is drawn from its own stream derived from
// (seed, j, r), so reports do not depend on the thread schedule. Negative
// importances are kept as they are.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdxai/error.hpp"
#include "fdxai/io.hpp"
#include "fdxai/parallel.hpp"
#include "fdxai/random.hpp"

namespace fdxai {

enum class LossKind { ZeroOne, SquaredError };

inline const char* to_string(LossKind k) { return k == LossKind::ZeroOne ? "zero-one" : "squared-error"; }

inline LossKind loss_kind_from_string(const std::string& s) {
  if (s == "zero-one") return LossKind::ZeroOne;
  if (s == "squared-error") return LossKind::SquaredError;
  throw InvalidArgument("unknown loss kind '" + s + "'");
}

/// Maps an n x d feature matrix to n predictions. For zero-one loss the
/// predictions are class-1 probabilities (or hard labels); >= 0.5 counts as 1.
using Predictor = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

struct PfiReport {
  Eigen::MatrixXd importances;  // features x replications
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;  // sample sd over replications, 0 when R = 1
  double baseline_loss = 0.0;
  LossKind loss = LossKind::ZeroOne;
  std::size_t replications = 0;
  std::size_t observations = 0;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t features() const { return static_cast<std::size_t>(importances.rows()); }
};

/// Mean per-observation loss.
inline double mean_loss(LossKind kind, const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth) {
  detail::require(predicted.size() == truth.size(), "loss: prediction length does not match targets");
  double total = 0.0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    if (kind == LossKind::ZeroOne) {
      const double label = predicted(i) >= 0.5 ? 1.0 : 0.0;
      total += label != truth(i) ? 1.0 : 0.0;
    } else {
      const double e = predicted(i) - truth(i);
      total += e * e;
    }
  }
  return total / static_cast<double>(truth.size());
}

/// Row order that column (feature, replication) is permuted with.
inline std::vector<std::size_t> pfi_permutation(std::size_t n, std::uint64_t seed, std::size_t feature,
                                                std::size_t replication) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  RandomStream rng(derive_seed(seed, feature, replication));
  rng.shuffle(std::span(perm));
  return perm;
}

inline PfiReport permutation_importance(const Predictor& predictor, const Eigen::MatrixXd& features,
                                        const Eigen::VectorXd& targets, LossKind loss, std::size_t replications = 10,
                                        std::uint64_t seed = 0, std::size_t threads = 1) {
  detail::require(replications >= 1, "permutation_importance: replications must be >= 1");
  detail::require(features.rows() == targets.size(), "permutation_importance: " + std::to_string(features.rows()) +
                                                         " feature rows but " + std::to_string(targets.size()) +
                                                         " targets");
  detail::require(features.rows() >= 1, "permutation_importance: no observations");

  const auto n = static_cast<std::size_t>(features.rows());
  const auto d = static_cast<std::size_t>(features.cols());
  PfiReport report;
  report.loss = loss;
  report.replications = replications;
  report.observations = n;
  report.seed = seed;
  report.baseline_loss = mean_loss(loss, predictor(features), targets);
  report.importances.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(replications));

  parallel_for_with_state(
      d, threads, [&] { return Eigen::MatrixXd(features); },
      [&](Eigen::MatrixXd& scratch, std::size_t j) {
        const auto col = static_cast<Eigen::Index>(j);
        for (std::size_t r = 0; r < replications; ++r) {
          const auto perm = pfi_permutation(n, seed, j, r);
          for (std::size_t i = 0; i < n; ++i)
            scratch(static_cast<Eigen::Index>(i), col) = features(static_cast<Eigen::Index>(perm[i]), col);
          report.importances(col, static_cast<Eigen::Index>(r)) =
              mean_loss(loss, predictor(scratch), targets) - report.baseline_loss;
        }
        scratch.col(col) = features.col(col);
      });

  report.mean = report.importances.rowwise().mean();
  report.sd = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  if (replications > 1)
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d); ++j)
      report.sd(j) = std::sqrt((report.importances.row(j).array() - report.mean(j)).square().sum() /
                               static_cast<double>(replications - 1));
  return report;
}

struct RankedFeature {
  std::size_t feature = 0;  // 1-based
  double mean_importance = 0.0;
};

/// Features by descending mean importance, ties by ascending index. top_k = 0
/// returns every feature.
inline std::vector<RankedFeature> rank_features(const PfiReport& report, std::size_t top_k = 0) {
  const std::size_t d = report.features();
  detail::require(top_k <= d, "rank_features: top_k exceeds feature count");
  std::vector<RankedFeature> ranked(d);
  for (std::size_t j = 0; j < d; ++j) ranked[j] = {j + 1, report.mean(static_cast<Eigen::Index>(j))};
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedFeature& a, const RankedFeature& b) { return a.mean_importance > b.mean_importance; });
  if (top_k > 0) ranked.resize(top_k);
  return ranked;
}

// ---------------------------------------------------------------------------
// Persistence: <prefix>.csv (feature, replication, importance; 1-based) and
// <prefix>.json summary.

inline void save_pfi(const PfiReport& report, const std::filesystem::path& prefix) {
  auto csv = prefix;
  csv += ".csv";
  auto json = prefix;
  json += ".json";
  const auto d = static_cast<Eigen::Index>(report.features());
  const auto R = static_cast<Eigen::Index>(report.replications);
  Eigen::MatrixXd table(d * R, 3);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index r = 0; r < R; ++r) table.row(j * R + r) << j + 1, r + 1, report.importances(j, r);
  write_table(csv, {"feature", "replication", "importance"}, table);

  Json summary;
  summary["format_version"] = 1;
  summary["loss_kind"] = to_string(report.loss);
  summary["baseline_loss"] = report.baseline_loss;
  summary["replications"] = report.replications;
  summary["observations"] = report.observations;
  summary["seed"] = report.seed;
  summary["mean"] = to_json(report.mean);
  summary["sd"] = to_json(report.sd);
  write_json(json, summary);
}

inline PfiReport load_pfi(const std::filesystem::path& prefix) {
  auto csv = prefix;
  csv += ".csv";
  auto json = prefix;
  json += ".json";
  const Json summary = read_json(json);
  PfiReport report;
  report.loss = loss_kind_from_string(summary.at("loss_kind").get<std::string>());
  report.baseline_loss = summary.at("baseline_loss").get<double>();
  report.replications = summary.at("replications").get<std::size_t>();
  report.observations = summary.at("observations").get<std::size_t>();
  report.seed = summary.at("seed").get<std::uint64_t>();
  report.mean = vector_from_json(summary.at("mean"));
  report.sd = vector_from_json(summary.at("sd"));
  const Table table = read_table(csv);
  const auto R = static_cast<Eigen::Index>(report.replications);
  report.importances.resize(report.mean.size(), R);
  for (Eigen::Index row = 0; row < table.values.rows(); ++row)
    report.importances(static_cast<Eigen::Index>(table.values(row, 0)) - 1,
                       static_cast<Eigen::Index>(table.values(row, 1)) - 1) = table.values(row, 2);
  return report;
}

}  // namespace fdxai
