#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "latentconn/rng.hpp"
#include "latentconn/types.hpp"

namespace latentconn::nnet {

enum class Activation { rectifier, sigmoid, identity };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

/// Numerically stable logistic function.
double sigmoid(double x);

/// out = act(weights * in + biases). Inputs are column-major batches: one
/// sample per column.
struct DenseLayer {
  Matrix weights;  // out x in
  Vector biases;   // out
  Activation activation = Activation::identity;

  Index in_dim() const { return weights.cols(); }
  Index out_dim() const { return weights.rows(); }
};

struct LayerOutput {
  Matrix pre_activation;
  Matrix output;
};

LayerOutput dense_forward(const DenseLayer& layer, const Matrix& input);

/// Fixed-topology multilayer perceptron.
struct Network {
  std::vector<DenseLayer> layers;

  Index in_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
  Index out_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }
  Index parameter_count() const;
};

/// Activations saved by forward() for a later backward() on the same batch.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre_activations;
  std::vector<Matrix> outputs;

  bool empty() const { return outputs.empty(); }
  const Matrix& output() const { return outputs.back(); }
};

ForwardCache forward(const Network& net, const Matrix& input);
/// Forward pass without keeping intermediates.
Matrix predict(const Network& net, const Matrix& input);

struct LayerGradient {
  Matrix weights;
  Vector biases;
};

struct GradientSet {
  std::vector<LayerGradient> layers;

  static GradientSet zeros_like(const Network& net);
  GradientSet& operator+=(const GradientSet& other);
  bool all_zero() const;
};

/// What the upstream gradient passed to backward() is taken with respect to.
enum class UpstreamKind {
  output,          // dLoss / d(final activation output)
  pre_activation,  // dLoss / d(final pre-activation); skips the last act'
};

/// Reverse-mode gradients of a scalar loss with respect to every weight and
/// bias, summed over the batch columns. When input_gradient is non-null it
/// receives dLoss / d(input). Throws UsageError on an empty cache and
/// ShapeError when the upstream shape does not match the cached output.
GradientSet backward(const Network& net, const ForwardCache& cache, const Matrix& upstream,
                     Matrix* input_gradient = nullptr,
                     UpstreamKind kind = UpstreamKind::output);

struct LayerSpec {
  Index in = 0;
  Index out = 0;
  Activation activation = Activation::identity;
};

double glorot_limit(Index fan_in, Index fan_out);

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
/// Weights are drawn row-major, layer by layer, from the given stream.
Network init_params(std::span<const LayerSpec> specs, Rng& rng);
Network init_params(std::span<const LayerSpec> specs, std::uint64_t seed);

/// Flat views over parameters (weights then biases, layer by layer) in the
/// same order as gradient_spans(), for optimizers and gradient checks.
std::vector<std::span<double>> parameter_spans(Network& net);
std::vector<std::span<const double>> gradient_spans(const GradientSet& grads);

struct AdadeltaConfig {
  double rho = 0.95;
  double epsilon = 1e-8;
  double learning_rate = 1.0;
};

/// Running averages of squared gradients and squared updates, one slot per
/// parameter.
class AdadeltaState {
public:
  explicit AdadeltaState(AdadeltaConfig config = {});

  const AdadeltaConfig& config() const { return config_; }
  std::span<const std::vector<double>> squared_gradients() const { return sq_grad_; }
  std::span<const std::vector<double>> squared_updates() const { return sq_update_; }
  std::uint64_t steps() const { return steps_; }

  /// E[g^2] <- rho E[g^2] + (1 - rho) g^2
  /// delta  =  -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
  /// E[dx^2] <- rho E[dx^2] + (1 - rho) delta^2
  /// param  += lr * delta
  void step(std::span<const std::span<double>> params,
            std::span<const std::span<const double>> grads);

private:
  AdadeltaConfig config_;
  std::vector<std::vector<double>> sq_grad_;
  std::vector<std::vector<double>> sq_update_;
  std::uint64_t steps_ = 0;
};

inline void adadelta_step(AdadeltaState& state, std::span<const std::span<double>> params,
                          std::span<const std::span<const double>> grads) {
  state.step(params, grads);
}

/// Max over parameters of |analytic - central difference| / max(1, |central
/// difference|). The objective is re-evaluated at p +- h for every scalar
/// parameter; parameters are restored afterwards. Throws ValidationError for
/// h <= 0 or mismatched spans, NumericError on a non-finite objective.
double max_relative_error(std::span<const std::span<double>> params,
                          std::span<const std::span<const double>> analytic,
                          const std::function<double()>& objective, double h);

/// Scalar loss of a network output and its gradient with respect to that
/// output.
using LossFn = std::function<std::pair<double, Matrix>(const Matrix& output)>;

/// Finite-difference check of backward() for loss(net(input)).
double grad_check(Network& net, const LossFn& loss, const Matrix& input, double h = 1e-5);

}  // namespace latentconn::nnet
