#pragma once

// Feed-forward networks with rectified-linear hidden layers and a single
// output unit: logistic head for binary classification, linear head for
// regression. Trained by mini-batch Adam with early stopping on an internal
// validation split. Training is single-threaded and fully determined by the
// config seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdxai/error.hpp"
#include "fdxai/io.hpp"
#include "fdxai/random.hpp"

namespace fdxai {

enum class Task { BinaryClassification, Regression };

/// How raw features are mapped to network inputs.
///   None      : x
///   PerColumn : (x - mean_j) / sd_j
///   Global    : (x - mean_j) / max_j sd_j   (keeps relative column scales)
enum class InputScaling { None, PerColumn, Global };

inline const char* to_string(Task t) { return t == Task::Regression ? "regression" : "binary-classification"; }
inline const char* to_string(InputScaling s) {
  switch (s) {
    case InputScaling::None: return "none";
    case InputScaling::PerColumn: return "per-column";
    case InputScaling::Global: return "global";
  }
  return "?";
}

inline Task task_from_string(const std::string& s) {
  if (s == "regression") return Task::Regression;
  if (s == "binary-classification") return Task::BinaryClassification;
  throw InvalidArgument("unknown task '" + s + "'");
}

inline InputScaling scaling_from_string(const std::string& s) {
  if (s == "none") return InputScaling::None;
  if (s == "per-column") return InputScaling::PerColumn;
  if (s == "global") return InputScaling::Global;
  throw InvalidArgument("unknown input scaling '" + s + "'");
}

struct MlpConfig {
  std::vector<std::size_t> hidden{50, 40, 30};
  Task task = Task::BinaryClassification;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double l2 = 1e-4;  // penalty 0.5 * l2 * sum(W^2) / batch_size
  std::size_t batch_size = 64;
  std::size_t max_epochs = 500;
  std::size_t patience = 20;
  double min_improvement = 1e-5;
  double validation_fraction = 0.1;
  InputScaling scaling = InputScaling::Global;
  std::uint64_t seed = 0;

  void validate() const {
    for (auto h : hidden) detail::require(h > 0, "hidden layer sizes must be positive");
    detail::require(learning_rate > 0.0, "learning rate must be > 0");
    detail::require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "moment decay rates must be in [0, 1)");
    detail::require(epsilon > 0.0, "epsilon must be > 0");
    detail::require(l2 >= 0.0, "l2 must be >= 0");
    detail::require(batch_size >= 1, "batch size must be >= 1");
    detail::require(max_epochs >= 1, "max epochs must be >= 1");
    detail::require(validation_fraction >= 0.0 && validation_fraction < 1.0, "validation fraction must be in [0, 1)");
  }
};

inline Json to_json(const MlpConfig& c) {
  Json j;
  j["hidden"] = c.hidden;
  j["activation"] = "relu";
  j["task"] = to_string(c.task);
  j["learning_rate"] = c.learning_rate;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["epsilon"] = c.epsilon;
  j["l2"] = c.l2;
  j["batch_size"] = c.batch_size;
  j["max_epochs"] = c.max_epochs;
  j["patience"] = c.patience;
  j["min_improvement"] = c.min_improvement;
  j["validation_fraction"] = c.validation_fraction;
  j["input_scaling"] = to_string(c.scaling);
  j["seed"] = c.seed;
  return j;
}

inline MlpConfig mlp_config_from_json(const Json& j, MlpConfig c = {}) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("hidden", c.hidden);
  if (j.contains("activation") && j.at("activation").get<std::string>() != "relu")
    throw InvalidArgument("only the relu activation is supported");
  if (j.contains("task")) c.task = task_from_string(j.at("task").get<std::string>());
  get("learning_rate", c.learning_rate);
  get("beta1", c.beta1);
  get("beta2", c.beta2);
  get("epsilon", c.epsilon);
  get("l2", c.l2);
  get("batch_size", c.batch_size);
  get("max_epochs", c.max_epochs);
  get("patience", c.patience);
  get("min_improvement", c.min_improvement);
  get("validation_fraction", c.validation_fraction);
  if (j.contains("input_scaling")) c.scaling = scaling_from_string(j.at("input_scaling").get<std::string>());
  get("seed", c.seed);
  c.validate();
  return c;
}

/// Dense layer computing  z = W a + b  with W of shape out x in.
struct Layer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

struct TrainingLog {
  double initial_train_loss = 0.0;
  std::vector<double> train_loss;       // data loss on the fitting rows, per epoch
  std::vector<double> validation_loss;  // empty when there is no internal split
  std::size_t best_epoch = 0;           // 1-based; weights restored from here
  bool early_stopped = false;
};

struct Mlp {
  MlpConfig config;
  std::vector<Layer> layers;
  Eigen::VectorXd input_shift;
  Eigen::VectorXd input_scale;
  std::vector<std::size_t> unscaled_features;  // sd < 1e-12, passed through unscaled
  TrainingLog log;

  [[nodiscard]] std::size_t input_width() const { return static_cast<std::size_t>(input_shift.size()); }
};

inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace detail {

inline Eigen::MatrixXd scale_inputs(const Mlp& net, const Eigen::MatrixXd& x) {
  require(x.cols() == net.input_shift.size(), "mlp: feature width " + std::to_string(x.cols()) +
                                                  " does not match trained width " +
                                                  std::to_string(net.input_shift.size()));
  return (x.rowwise() - net.input_shift.transpose()).array().rowwise() / net.input_scale.transpose().array();
}

/// Pre-activations and activations of every layer for a batch (rows).
struct ForwardPass {
  std::vector<Eigen::MatrixXd> activations;  // [0] = input, [l+1] = output of layer l
  std::vector<Eigen::MatrixXd> pre;          // pre-activation of layer l
};

inline ForwardPass forward(const std::vector<Layer>& layers, const Eigen::MatrixXd& input) {
  ForwardPass pass;
  pass.activations.reserve(layers.size() + 1);
  pass.pre.reserve(layers.size());
  pass.activations.push_back(input);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z = pass.activations.back() * layers[l].weights.transpose();
    z.rowwise() += layers[l].bias.transpose();
    pass.pre.push_back(z);
    if (l + 1 < layers.size()) pass.activations.push_back(z.cwiseMax(0.0));
    else pass.activations.push_back(z);
  }
  return pass;
}

/// Mean per-row data loss from output logits / values.
inline double data_loss(Task task, const Eigen::VectorXd& output, const Eigen::VectorXd& y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double z = output(i);
    if (task == Task::Regression) {
      total += (z - y(i)) * (z - y(i));
    } else {
      // log(1 + e^z) - y z, evaluated without overflow
      total += std::max(z, 0.0) - y(i) * z + std::log1p(std::exp(-std::abs(z)));
    }
  }
  return total / static_cast<double>(y.size());
}

inline double penalty(const std::vector<Layer>& layers, double l2, std::size_t batch) {
  if (l2 == 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& layer : layers) sum += layer.weights.squaredNorm();
  return 0.5 * l2 * sum / static_cast<double>(batch);
}

}  // namespace detail

struct LossGradient {
  double loss = 0.0;  // data loss + penalty
  std::vector<Layer> gradient;
};

/// Objective on the (already scaled) input batch and its exact gradient with
/// respect to every weight and bias.
inline LossGradient loss_and_gradient(const std::vector<Layer>& layers, Task task, const Eigen::MatrixXd& input,
                                      const Eigen::VectorXd& y, double l2) {
  const auto pass = detail::forward(layers, input);
  const Eigen::VectorXd output = pass.activations.back().col(0);
  const auto batch = static_cast<double>(y.size());

  LossGradient result;
  result.loss = detail::data_loss(task, output, y) + detail::penalty(layers, l2, static_cast<std::size_t>(y.size()));

  Eigen::MatrixXd delta(y.size(), 1);
  for (Eigen::Index i = 0; i < y.size(); ++i)
    delta(i, 0) = task == Task::Regression ? 2.0 * (output(i) - y(i)) / batch : (logistic(output(i)) - y(i)) / batch;

  result.gradient.resize(layers.size());
  for (std::size_t l = layers.size(); l-- > 0;) {
    auto& g = result.gradient[l];
    g.weights = delta.transpose() * pass.activations[l];
    if (l2 != 0.0) g.weights += (l2 / batch) * layers[l].weights;
    g.bias = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd back = delta * layers[l].weights;
      delta = back.array() * (pass.pre[l - 1].array() > 0.0).cast<double>();
    }
  }
  return result;
}

/// Objective of `net` on raw features x (scaling applied).
inline double objective(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return loss_and_gradient(net.layers, net.config.task, detail::scale_inputs(net, x), y, net.config.l2).loss;
}

/// Output-unit values before the head: logits or regression values.
inline Eigen::VectorXd predict_raw(const Mlp& net, const Eigen::MatrixXd& x) {
  return detail::forward(net.layers, detail::scale_inputs(net, x)).activations.back().col(0);
}

/// Class-1 probabilities for classification, real values for regression.
inline Eigen::VectorXd predict(const Mlp& net, const Eigen::MatrixXd& x) {
  Eigen::VectorXd out = predict_raw(net, x);
  if (net.config.task == Task::BinaryClassification) out = out.unaryExpr([](double z) { return logistic(z); });
  return out;
}

/// Probability >= 0.5 maps to label 1.
inline Eigen::VectorXd hard_labels(const Eigen::VectorXd& probabilities) {
  return (probabilities.array() >= 0.5).cast<double>();
}

inline Eigen::VectorXd predict_labels(const Mlp& net, const Eigen::MatrixXd& x) {
  detail::require(net.config.task == Task::BinaryClassification, "predict_labels: network is a regressor");
  return hard_labels(predict(net, x));
}

/// Fits the input scaling of `config` on x.
inline void fit_input_scaling(Mlp& net, const Eigen::MatrixXd& x) {
  const Eigen::Index d = x.cols();
  net.input_shift = Eigen::VectorXd::Zero(d);
  net.input_scale = Eigen::VectorXd::Ones(d);
  net.unscaled_features.clear();
  if (net.config.scaling == InputScaling::None || x.rows() == 0) return;
  net.input_shift = x.colwise().mean().transpose();
  Eigen::VectorXd sd(d);
  const double denom = x.rows() > 1 ? static_cast<double>(x.rows() - 1) : 1.0;
  for (Eigen::Index j = 0; j < d; ++j)
    sd(j) = std::sqrt((x.col(j).array() - net.input_shift(j)).square().sum() / denom);
  if (net.config.scaling == InputScaling::PerColumn) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (sd(j) < 1e-12) net.unscaled_features.push_back(static_cast<std::size_t>(j));
      else net.input_scale(j) = sd(j);
    }
  } else {
    const double shared = d > 0 ? sd.maxCoeff() : 1.0;
    if (shared < 1e-12) {
      for (Eigen::Index j = 0; j < d; ++j) net.unscaled_features.push_back(static_cast<std::size_t>(j));
    } else {
      net.input_scale.setConstant(shared);
    }
  }
}

/// He-normal weights N(0, 2 / fan_in) for hidden layers, N(0, 1 / fan_in) for
/// the output unit; zero biases.
inline std::vector<Layer> initialize_layers(const MlpConfig& config, std::size_t input_width) {
  RandomStream rng(derive_seed(config.seed, 0));
  std::vector<Layer> layers;
  std::size_t fan_in = input_width;
  std::vector<std::size_t> widths = config.hidden;
  widths.push_back(1);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    const bool output = l + 1 == widths.size();
    const double sd = std::sqrt((output ? 1.0 : 2.0) / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    Layer layer;
    layer.weights.resize(static_cast<Eigen::Index>(widths[l]), static_cast<Eigen::Index>(fan_in));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = sd * rng.normal();
    layer.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(widths[l]));
    layers.push_back(std::move(layer));
    fan_in = widths[l];
  }
  return layers;
}

/// Untrained network: scaling fitted on x, weights from the seeded initializer.
inline Mlp initialize(const MlpConfig& config, const Eigen::MatrixXd& x) {
  config.validate();
  Mlp net;
  net.config = config;
  fit_input_scaling(net, x);
  net.layers = initialize_layers(config, static_cast<std::size_t>(x.cols()));
  return net;
}

namespace detail {

inline void check_targets(const MlpConfig& config, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  require(x.rows() == y.size(), "train: " + std::to_string(x.rows()) + " feature rows but " +
                                    std::to_string(y.size()) + " targets");
  require(x.rows() >= 1, "train: no training rows");
  if (!x.allFinite()) throw InvalidArgument("train: non-finite features");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (config.task == Task::BinaryClassification)
      require(y(i) == 0.0 || y(i) == 1.0, "train: classification targets must be 0 or 1");
    else
      require(std::isfinite(y(i)), "train: regression targets must be finite");
  }
}

/// Adam state for one layer.
struct Moments {
  Eigen::MatrixXd mw, vw;
  Eigen::VectorXd mb, vb;
};

inline Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows, std::size_t begin,
                                   std::size_t end) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(end - begin), x.cols());
  for (std::size_t r = begin; r < end; ++r) out.row(static_cast<Eigen::Index>(r - begin)) = x.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

inline Eigen::VectorXd gather(const Eigen::VectorXd& y, const std::vector<std::size_t>& rows, std::size_t begin,
                              std::size_t end) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(end - begin));
  for (std::size_t r = begin; r < end; ++r) out(static_cast<Eigen::Index>(r - begin)) = y(static_cast<Eigen::Index>(rows[r]));
  return out;
}

}  // namespace detail

/// Trains a network on features x (n x d) and targets y.
inline Mlp train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const MlpConfig& config) {
  config.validate();
  detail::check_targets(config, x, y);
  Mlp net = initialize(config, x);
  const Eigen::MatrixXd inputs = detail::scale_inputs(net, x);
  const auto n = static_cast<std::size_t>(x.rows());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RandomStream split_rng(derive_seed(config.seed, 1));
  split_rng.shuffle(std::span(order));
  auto n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(n)));
  if (n_val >= n) n_val = n - 1;
  std::vector<std::size_t> fit_rows(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::vector<std::size_t> val_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::sort(fit_rows.begin(), fit_rows.end());
  std::sort(val_rows.begin(), val_rows.end());

  const Eigen::MatrixXd fit_x = detail::gather_rows(inputs, fit_rows, 0, fit_rows.size());
  const Eigen::VectorXd fit_y = detail::gather(y, fit_rows, 0, fit_rows.size());
  const Eigen::MatrixXd val_x = detail::gather_rows(inputs, val_rows, 0, val_rows.size());
  const Eigen::VectorXd val_y = detail::gather(y, val_rows, 0, val_rows.size());

  auto evaluate = [&](const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    return detail::data_loss(config.task, detail::forward(net.layers, a).activations.back().col(0), b);
  };
  net.log.initial_train_loss = evaluate(fit_x, fit_y);

  std::vector<detail::Moments> moments(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    moments[l].mw = Eigen::MatrixXd::Zero(net.layers[l].weights.rows(), net.layers[l].weights.cols());
    moments[l].vw = moments[l].mw;
    moments[l].mb = Eigen::VectorXd::Zero(net.layers[l].bias.size());
    moments[l].vb = moments[l].mb;
  }

  RandomStream batch_rng(derive_seed(config.seed, 2));
  std::vector<std::size_t> batch_order(fit_rows.size());
  std::iota(batch_order.begin(), batch_order.end(), std::size_t{0});
  std::vector<Layer> best_layers = net.layers;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::uint64_t step = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    batch_rng.shuffle(std::span(batch_order));
    for (std::size_t begin = 0; begin < batch_order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(begin + config.batch_size, batch_order.size());
      const auto bx = detail::gather_rows(fit_x, batch_order, begin, end);
      const auto by = detail::gather(fit_y, batch_order, begin, end);
      const auto lg = loss_and_gradient(net.layers, config.task, bx, by, config.l2);
      if (!std::isfinite(lg.loss))
        throw NumericalError("train: non-finite loss in epoch " + std::to_string(epoch) + " (step " +
                             std::to_string(step + 1) + ")");
      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      const double rate = config.learning_rate * std::sqrt(c2) / c1;
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto& mo = moments[l];
        const auto& g = lg.gradient[l];
        mo.mw = config.beta1 * mo.mw + (1.0 - config.beta1) * g.weights;
        mo.vw = config.beta2 * mo.vw + (1.0 - config.beta2) * g.weights.cwiseAbs2();
        mo.mb = config.beta1 * mo.mb + (1.0 - config.beta1) * g.bias;
        mo.vb = config.beta2 * mo.vb + (1.0 - config.beta2) * g.bias.cwiseAbs2();
        net.layers[l].weights.array() -= rate * mo.mw.array() / (mo.vw.array().sqrt() + config.epsilon);
        net.layers[l].bias.array() -= rate * mo.mb.array() / (mo.vb.array().sqrt() + config.epsilon);
      }
    }

    const double train_loss = evaluate(fit_x, fit_y);
    if (!std::isfinite(train_loss))
      throw NumericalError("train: non-finite training loss after epoch " + std::to_string(epoch));
    net.log.train_loss.push_back(train_loss);
    double monitored = train_loss;
    if (!val_rows.empty()) {
      monitored = evaluate(val_x, val_y);
      net.log.validation_loss.push_back(monitored);
    }
    if (monitored < best_loss - config.min_improvement) {
      best_loss = monitored;
      best_layers = net.layers;
      net.log.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience && config.patience > 0) {
      net.log.early_stopped = true;
      break;
    }
  }
  if (net.log.best_epoch > 0) net.layers = std::move(best_layers);
  return net;
}

/// Compares the analytic gradient of the objective at the seeded
/// initialization with central finite differences of step `perturbation`.
/// Returns max_p |a_p - n_p| / max(|a_p|, |n_p|, 1e-8).
inline double gradient_check(const MlpConfig& config, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             double perturbation) {
  detail::require(x.rows() <= 20 && x.cols() <= 5, "gradient_check: instance must be small (<= 20 rows, <= 5 features)");
  detail::require(perturbation > 0.0, "gradient_check: perturbation must be > 0");
  detail::check_targets(config, x, y);
  Mlp net = initialize(config, x);
  const Eigen::MatrixXd inputs = detail::scale_inputs(net, x);
  const auto analytic = loss_and_gradient(net.layers, config.task, inputs, y, config.l2).gradient;

  auto loss_at = [&](std::vector<Layer>& layers) {
    return loss_and_gradient(layers, config.task, inputs, y, config.l2).loss;
  };
  // Central differences carry roundoff of about eps * |loss| / perturbation, so
  // gradients below 1e4 times that are compared against it instead of themselves.
  const double loss0 = loss_at(net.layers);
  const double floor = std::max(1e-8, 1e4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(loss0)) /
                                          perturbation);
  auto compare = [&](double& parameter, double a) {
    const double saved = parameter;
    parameter = saved + perturbation;
    const double up = loss_at(net.layers);
    parameter = saved - perturbation;
    const double down = loss_at(net.layers);
    parameter = saved;
    const double numeric = (up - down) / (2.0 * perturbation);
    return std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
  };

  double worst = 0.0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
        worst = std::max(worst, compare(layer.weights(r, c), analytic[l].weights(r, c)));
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r)
      worst = std::max(worst, compare(layer.bias(r), analytic[l].bias(r)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Persistence: model.json + layer_<k>.csv (columns bias, w_1..w_in; one row
// per unit).

inline void save_mlp(const Mlp& net, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Json manifest;
  manifest["format_version"] = 1;
  manifest["config"] = to_json(net.config);
  manifest["input_width"] = net.input_width();
  manifest["input_shift"] = to_json(net.input_shift);
  manifest["input_scale"] = to_json(net.input_scale);
  manifest["unscaled_features"] = net.unscaled_features;
  Json log;
  log["initial_train_loss"] = net.log.initial_train_loss;
  log["epochs_run"] = net.log.train_loss.size();
  log["best_epoch"] = net.log.best_epoch;
  log["early_stopped"] = net.log.early_stopped;
  log["final_train_loss"] = net.log.train_loss.empty() ? net.log.initial_train_loss : net.log.train_loss.back();
  log["train_loss"] = net.log.train_loss;
  log["validation_loss"] = net.log.validation_loss;
  manifest["training_log"] = log;
  manifest["layers"] = net.layers.size();
  write_json(dir / "model.json", manifest);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    Eigen::MatrixXd table(layer.weights.rows(), layer.weights.cols() + 1);
    table << layer.bias, layer.weights;
    std::vector<std::string> header{"bias"};
    for (Eigen::Index c = 1; c <= layer.weights.cols(); ++c) header.push_back("w_" + std::to_string(c));
    write_table(dir / ("layer_" + std::to_string(l + 1) + ".csv"), header, table);
  }
}

inline Mlp load_mlp(const std::filesystem::path& dir) {
  const Json manifest = read_json(dir / "model.json");
  if (manifest.at("format_version").get<int>() != 1) throw IoError("unsupported mlp model format");
  Mlp net;
  net.config = mlp_config_from_json(manifest.at("config"));
  net.input_shift = vector_from_json(manifest.at("input_shift"));
  net.input_scale = vector_from_json(manifest.at("input_scale"));
  net.unscaled_features = manifest.at("unscaled_features").get<std::vector<std::size_t>>();
  const auto& log = manifest.at("training_log");
  net.log.initial_train_loss = log.at("initial_train_loss").get<double>();
  net.log.best_epoch = log.at("best_epoch").get<std::size_t>();
  net.log.early_stopped = log.at("early_stopped").get<bool>();
  net.log.train_loss = log.at("train_loss").get<std::vector<double>>();
  net.log.validation_loss = log.at("validation_loss").get<std::vector<double>>();
  const auto count = manifest.at("layers").get<std::size_t>();
  for (std::size_t l = 0; l < count; ++l) {
    const Table table = read_table(dir / ("layer_" + std::to_string(l + 1) + ".csv"));
    Layer layer;
    layer.bias = table.values.col(0);
    layer.weights = table.values.rightCols(table.values.cols() - 1);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

}  // namespace fdxai
