#include "latentconn/nnet.hpp"

#include <cmath>
#include <string>

#include "latentconn/errors.hpp"

namespace latentconn::nnet {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::rectifier: return "rectifier";
    case Activation::sigmoid: return "sigmoid";
    case Activation::identity: return "identity";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "rectifier" || name == "relu") return Activation::rectifier;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "identity" || name == "linear") return Activation::identity;
  throw ValidationError("unknown activation '" + std::string(name) + "'");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

void apply_activation(Activation a, const Matrix& pre, Matrix& out) {
  switch (a) {
    case Activation::rectifier: out = pre.cwiseMax(0.0); break;
    case Activation::sigmoid: out = pre.unaryExpr([](double v) { return sigmoid(v); }); break;
    case Activation::identity: out = pre; break;
  }
}

// upstream (wrt output) -> gradient wrt pre-activation, in place.
void activation_backward(Activation a, const Matrix& pre, const Matrix& out, Matrix& grad) {
  switch (a) {
    case Activation::rectifier:
      grad = (pre.array() > 0.0).select(grad, 0.0);
      break;
    case Activation::sigmoid:
      grad.array() *= out.array() * (1.0 - out.array());
      break;
    case Activation::identity: break;
  }
}

void check_input(const DenseLayer& layer, const Matrix& input) {
  if (input.rows() != layer.in_dim()) {
    throw ShapeError("dense layer expects " + std::to_string(layer.in_dim()) + " inputs, got " +
                     std::to_string(input.rows()));
  }
}

}  // namespace

LayerOutput dense_forward(const DenseLayer& layer, const Matrix& input) {
  check_input(layer, input);
  LayerOutput r;
  r.pre_activation.noalias() = layer.weights * input;
  r.pre_activation.colwise() += layer.biases;
  apply_activation(layer.activation, r.pre_activation, r.output);
  return r;
}

Index Network::parameter_count() const {
  Index n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.biases.size();
  return n;
}

ForwardCache forward(const Network& net, const Matrix& input) {
  if (net.layers.empty()) throw UsageError("forward: network has no layers");
  ForwardCache cache;
  cache.input = input;
  cache.pre_activations.reserve(net.layers.size());
  cache.outputs.reserve(net.layers.size());
  const Matrix* x = &cache.input;
  for (const auto& layer : net.layers) {
    auto r = dense_forward(layer, *x);
    cache.pre_activations.push_back(std::move(r.pre_activation));
    cache.outputs.push_back(std::move(r.output));
    x = &cache.outputs.back();
  }
  return cache;
}

Matrix predict(const Network& net, const Matrix& input) {
  if (net.layers.empty()) throw UsageError("predict: network has no layers");
  Matrix x = input;
  for (const auto& layer : net.layers) x = dense_forward(layer, x).output;
  return x;
}

GradientSet GradientSet::zeros_like(const Network& net) {
  GradientSet g;
  g.layers.reserve(net.layers.size());
  for (const auto& l : net.layers) {
    g.layers.push_back({Matrix::Zero(l.weights.rows(), l.weights.cols()), Vector::Zero(l.biases.size())});
  }
  return g;
}

GradientSet& GradientSet::operator+=(const GradientSet& other) {
  if (other.layers.size() != layers.size()) throw ShapeError("GradientSet: layer count mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weights += other.layers[i].weights;
    layers[i].biases += other.layers[i].biases;
  }
  return *this;
}

bool GradientSet::all_zero() const {
  for (const auto& l : layers)
    if (!l.weights.isZero(0.0) || !l.biases.isZero(0.0)) return false;
  return true;
}

GradientSet backward(const Network& net, const ForwardCache& cache, const Matrix& upstream,
                     Matrix* input_gradient, UpstreamKind kind) {
  if (cache.empty() || cache.outputs.size() != net.layers.size()) {
    throw UsageError("backward: no forward cache for this network");
  }
  if (upstream.rows() != cache.output().rows() || upstream.cols() != cache.output().cols()) {
    throw ShapeError("backward: upstream gradient shape does not match network output");
  }
  GradientSet grads;
  grads.layers.resize(net.layers.size());

  Matrix delta = upstream;
  for (std::size_t k = net.layers.size(); k-- > 0;) {
    const auto& layer = net.layers[k];
    if (k + 1 < net.layers.size() || kind == UpstreamKind::output) {
      activation_backward(layer.activation, cache.pre_activations[k], cache.outputs[k], delta);
    }
    const Matrix& layer_input = k == 0 ? cache.input : cache.outputs[k - 1];
    grads.layers[k].weights.noalias() = delta * layer_input.transpose();
    grads.layers[k].biases = delta.rowwise().sum();
    if (k > 0) {
      Matrix prev;
      prev.noalias() = layer.weights.transpose() * delta;
      delta = std::move(prev);
    } else if (input_gradient != nullptr) {
      input_gradient->noalias() = layer.weights.transpose() * delta;
    }
  }
  return grads;
}

double glorot_limit(Index fan_in, Index fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Network init_params(std::span<const LayerSpec> specs, Rng& rng) {
  if (specs.empty()) throw ValidationError("init_params: no layers");
  Network net;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto& s = specs[k];
    if (s.in <= 0 || s.out <= 0) throw ValidationError("init_params: zero layer dimension");
    if (k > 0 && specs[k - 1].out != s.in) throw ShapeError("init_params: consecutive layer dims disagree");
    DenseLayer layer;
    layer.activation = s.activation;
    layer.weights.resize(s.out, s.in);
    const double limit = glorot_limit(s.in, s.out);
    for (Index r = 0; r < s.out; ++r)
      for (Index c = 0; c < s.in; ++c) layer.weights(r, c) = rng.uniform(-limit, limit);
    layer.biases = Vector::Zero(s.out);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Network init_params(std::span<const LayerSpec> specs, std::uint64_t seed) {
  Rng rng(seed);
  return init_params(specs, rng);
}

std::vector<std::span<double>> parameter_spans(Network& net) {
  std::vector<std::span<double>> spans;
  for (auto& l : net.layers) {
    spans.emplace_back(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
    spans.emplace_back(l.biases.data(), static_cast<std::size_t>(l.biases.size()));
  }
  return spans;
}

std::vector<std::span<const double>> gradient_spans(const GradientSet& grads) {
  std::vector<std::span<const double>> spans;
  for (const auto& l : grads.layers) {
    spans.emplace_back(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
    spans.emplace_back(l.biases.data(), static_cast<std::size_t>(l.biases.size()));
  }
  return spans;
}

AdadeltaState::AdadeltaState(AdadeltaConfig config) : config_(config) {
  if (!(config_.rho > 0.0 && config_.rho < 1.0)) throw ValidationError("adadelta: rho must be in (0,1)");
  if (!(config_.epsilon > 0.0)) throw ValidationError("adadelta: epsilon must be positive");
  if (!(config_.learning_rate > 0.0)) throw ValidationError("adadelta: learning rate must be positive");
}

void AdadeltaState::step(std::span<const std::span<double>> params,
                         std::span<const std::span<const double>> grads) {
  if (params.size() != grads.size()) throw ShapeError("adadelta: parameter/gradient count mismatch");
  if (sq_grad_.empty()) {
    for (const auto& p : params) {
      sq_grad_.emplace_back(p.size(), 0.0);
      sq_update_.emplace_back(p.size(), 0.0);
    }
  }
  if (sq_grad_.size() != params.size()) throw ShapeError("adadelta: state built for a different model");

  const double rho = config_.rho;
  const double eps = config_.epsilon;
  const double lr = config_.learning_rate;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t];
    auto g = grads[t];
    auto& eg = sq_grad_[t];
    auto& ed = sq_update_[t];
    if (p.size() != g.size() || p.size() != eg.size()) throw ShapeError("adadelta: tensor size mismatch");
    for (std::size_t k = 0; k < p.size(); ++k) {
      eg[k] = rho * eg[k] + (1.0 - rho) * g[k] * g[k];
      const double delta = -std::sqrt(ed[k] + eps) / std::sqrt(eg[k] + eps) * g[k];
      ed[k] = rho * ed[k] + (1.0 - rho) * delta * delta;
      p[k] += lr * delta;
    }
  }
  ++steps_;
}

double max_relative_error(std::span<const std::span<double>> params,
                          std::span<const std::span<const double>> analytic,
                          const std::function<double()>& objective, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("gradient check step must be positive");
  if (params.size() != analytic.size()) throw ShapeError("gradient check: span count mismatch");
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t];
    if (p.size() != analytic[t].size()) throw ShapeError("gradient check: tensor size mismatch");
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double saved = p[k];
      p[k] = saved + h;
      const double up = objective();
      p[k] = saved - h;
      const double down = objective();
      p[k] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericError("gradient check: non-finite objective");
      }
      const double numeric = (up - down) / (2.0 * h);
      const double err = std::abs(analytic[t][k] - numeric) / std::max(1.0, std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

double grad_check(Network& net, const LossFn& loss, const Matrix& input, double h) {
  if (!(h > 0.0)) throw ValidationError("gradient check step must be positive");
  const auto cache = forward(net, input);
  auto [value, upstream] = loss(cache.output());
  if (!std::isfinite(value)) throw NumericError("gradient check: non-finite loss");
  const GradientSet grads = backward(net, cache, upstream);
  const auto params = parameter_spans(net);
  const auto analytic = gradient_spans(grads);
  return max_relative_error(params, analytic, [&] { return loss(predict(net, input)).first; }, h);
}

}  // namespace latentconn::nnet
