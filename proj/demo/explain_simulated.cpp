// Small in-memory walk through the procedure: simulate, fPCA, train a y1
// classifier on the scores, and print which fPCs it relies on.

#include <cstdio>

#include "fdxai.hpp"

int main() {
  using namespace fdxai;
  const Dataset data = generate_dataset(600, SimParams{}, 7, default_grid(200));
  const auto parts = split(data.size(), {0.7225, 0.15, 0.1275}, 1);
  const Dataset train_set = data.subset(parts.train);
  const Dataset test_set = data.subset(parts.test);

  const FpcaModel model = fit_fpca(train_set);
  const auto ve = variance_explained(model);
  std::printf("fPC1 explains %.1f%%, first three %.1f%%\n", 100 * ve.fraction(0), 100 * ve.cumulative(2));

  MlpConfig config;
  config.max_epochs = 200;
  const Mlp net = train(transform(model, train_set), train_set.target(1), config);
  const ScoreMatrix test_scores = transform(model, test_set);
  std::printf("y1 test accuracy %.3f\n", accuracy(predict_labels(net, test_scores), test_set.target(1)));

  const auto report = permutation_importance([&](const Eigen::MatrixXd& x) { return predict(net, x); }, test_scores,
                                             test_set.target(1), LossKind::ZeroOne, 10, 3);
  for (const auto& f : rank_features(report, 5)) std::printf("fPC %zu: %.4f\n", f.feature, f.mean_importance);
}
