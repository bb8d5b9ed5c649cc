#pragma once

#include <string>

#include <Eigen/Dense>

#include "fdxai/error.hpp"

namespace fdxai {

namespace detail {
inline void require_pair(const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth, const char* what) {
  require(predicted.size() == truth.size(), std::string(what) + ": length mismatch");
  require(truth.size() > 0, std::string(what) + ": empty input");
}
}  // namespace detail

/// Fraction of exact matches.
inline double accuracy(const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth) {
  detail::require_pair(predicted, truth, "accuracy");
  return static_cast<double>((predicted.array() == truth.array()).count()) / static_cast<double>(truth.size());
}

struct F1Score {
  double value = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  bool degenerate = false;  // precision + recall == 0, or nothing positive at all
};

/// Harmonic mean of precision and recall for `positive`. Degenerate cases
/// (no true positives) report 0 with the flag set.
inline F1Score f1(const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth, double positive = 1.0) {
  detail::require_pair(predicted, truth, "f1");
  const auto pred_pos = (predicted.array() == positive);
  const auto true_pos = (truth.array() == positive);
  const double tp = static_cast<double>((pred_pos && true_pos).count());
  const double predicted_positives = static_cast<double>(pred_pos.count());
  const double actual_positives = static_cast<double>(true_pos.count());
  F1Score score;
  score.precision = predicted_positives > 0 ? tp / predicted_positives : 0.0;
  score.recall = actual_positives > 0 ? tp / actual_positives : 0.0;
  if (tp == 0.0) {
    score.degenerate = true;
    return score;
  }
  score.value = 2.0 * score.precision * score.recall / (score.precision + score.recall);
  return score;
}

inline double mse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth) {
  detail::require_pair(predicted, truth, "mse");
  return (predicted - truth).squaredNorm() / static_cast<double>(truth.size());
}

/// 1 - SS_res / SS_tot. May be negative; undefined for constant truth.
inline double r2(const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth) {
  detail::require_pair(predicted, truth, "r2");
  const double mean = truth.mean();
  const double ss_tot = (truth.array() - mean).square().sum();
  if (!(ss_tot > 0.0)) throw InvalidArgument("r2: truth has zero variance");
  const double ss_res = (predicted - truth).squaredNorm();
  return 1.0 - ss_res / ss_tot;
}

struct MetricSummary {
  std::string target;
  std::string split;   // train | test | validation
  std::string metric;  // accuracy | f1 | mse | r2
  double value = 0.0;
};

}  // namespace fdxai
