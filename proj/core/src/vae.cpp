#include "latentconn/vae.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>

#include "latentconn/errors.hpp"

namespace latentconn::vae {

using nnet::Activation;
using nnet::LayerSpec;

std::string_view to_string(Likelihood l) {
  return l == Likelihood::bernoulli ? "bernoulli" : "gaussian";
}

Likelihood parse_likelihood(std::string_view name) {
  if (name == "bernoulli") return Likelihood::bernoulli;
  if (name == "gaussian") return Likelihood::gaussian;
  throw ValidationError("unknown likelihood '" + std::string(name) + "'");
}

void Architecture::validate() const {
  if (edges < 1) throw ValidationError("architecture: edge count must be positive");
  if (latent < 1) throw ValidationError("architecture: latent dimension must be positive");
  if (hidden.empty()) throw ValidationError("architecture: at least one hidden layer required");
  for (auto h : hidden)
    if (h < 1) throw ValidationError("architecture: hidden layer sizes must be positive");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ValidationError("validation fraction must be in (0,1)");
  }
  if (noise_samples < 1) throw ValidationError("noise samples must be >= 1");
  nnet::AdadeltaState probe(optimizer);  // validates rho / epsilon / rate
  architecture.validate();
}

VaeModel make_model(const Architecture& arch, Rng& rng) {
  arch.validate();
  VaeModel m;
  m.architecture = arch;

  std::vector<LayerSpec> enc;
  Index prev = arch.input_dim();
  for (auto h : arch.hidden) {
    enc.push_back({prev, h, arch.hidden_activation});
    prev = h;
  }
  const Index trunk = prev;
  const LayerSpec mean_spec{trunk, arch.latent, Activation::identity};
  const LayerSpec logvar_spec{trunk, arch.latent, Activation::identity};

  std::vector<LayerSpec> dec;
  prev = arch.latent + 1;
  for (auto h : arch.hidden) {
    dec.push_back({prev, h, arch.hidden_activation});
    prev = h;
  }
  dec.push_back({prev, arch.edges, arch.output_activation});

  m.encoder = nnet::init_params(enc, rng);
  m.mean_head = nnet::init_params(std::span(&mean_spec, 1), rng);
  m.logvar_head = nnet::init_params(std::span(&logvar_spec, 1), rng);
  m.decoder = nnet::init_params(dec, rng);
  return m;
}

VaeModel make_model(const Architecture& arch, std::uint64_t seed) {
  Rng rng(seed);
  return make_model(arch, rng);
}

LatentCode encode(const VaeModel& model, const Vector& input) {
  if (input.size() != model.input_dim()) {
    throw ShapeError("encode: expected input of length " + std::to_string(model.input_dim()) +
                     ", got " + std::to_string(input.size()));
  }
  if (!input.allFinite()) throw ValidationError("encode: non-finite input");
  const Matrix h = nnet::predict(model.encoder, input);
  LatentCode code;
  code.mean = nnet::predict(model.mean_head, h).col(0);
  code.log_variance = nnet::predict(model.logvar_head, h).col(0);
  code.sample = code.mean;
  return code;
}

Vector reparameterize(const LatentCode& code, const Vector& noise) {
  if (noise.size() != code.mean.size() || code.log_variance.size() != code.mean.size()) {
    throw ShapeError("reparameterize: dimension mismatch");
  }
  return code.mean.array() + (0.5 * code.log_variance.array()).exp() * noise.array();
}

Vector decode(const VaeModel& model, const Vector& z, double age_years) {
  if (z.size() != model.latent_dim()) {
    throw ShapeError("decode: expected latent of length " + std::to_string(model.latent_dim()));
  }
  if (!z.allFinite()) throw ValidationError("decode: non-finite latent");
  Vector in(z.size() + 1);
  in.head(z.size()) = z;
  in(z.size()) = normalize_age(age_years);
  Vector out = nnet::predict(model.decoder, in).col(0);
  if (model.decoder.layers.back().activation == Activation::sigmoid) {
    // Saturated logits round to exactly 0 or 1 in double; keep the open interval.
    const double top = std::nextafter(1.0, 0.0);
    out = out.cwiseMax(DBL_MIN).cwiseMin(top);
  }
  return out;
}

double kl_divergence(const Vector& mean, const Vector& log_variance) {
  if (mean.size() != log_variance.size()) throw ShapeError("kl: dimension mismatch");
  return 0.5 * (mean.array().square() + log_variance.array().exp() - 1.0 - log_variance.array()).sum();
}

LossTerms elbo_loss(const Vector& x, const Vector& reconstruction, const LatentCode& code,
                    Likelihood likelihood) {
  if (x.size() != reconstruction.size()) throw ShapeError("elbo_loss: reconstruction length mismatch");
  if (!x.allFinite() || (x.array() < 0.0).any() || (x.array() > 1.0).any()) {
    throw ValidationError("elbo_loss: target outside [0,1]");
  }
  LossTerms t;
  if (likelihood == Likelihood::bernoulli) {
    for (Index k = 0; k < x.size(); ++k) {
      const double p = reconstruction(k);
      if (!(p > 0.0 && p < 1.0)) throw NumericError("elbo_loss: reconstruction outside (0,1)");
      t.reconstruction -= x(k) * std::log(p) + (1.0 - x(k)) * std::log1p(-p);
    }
  } else {
    t.reconstruction = 0.5 * (x - reconstruction).squaredNorm();
  }
  t.kl = kl_divergence(code.mean, code.log_variance);
  t.total = t.reconstruction + t.kl;
  return t;
}

std::vector<std::span<double>> parameter_spans(VaeModel& model) {
  std::vector<std::span<double>> all;
  for (auto* net : {&model.encoder, &model.mean_head, &model.logvar_head, &model.decoder}) {
    auto s = nnet::parameter_spans(*net);
    all.insert(all.end(), s.begin(), s.end());
  }
  return all;
}

std::vector<std::span<const double>> gradient_spans(const VaeGradients& grads) {
  std::vector<std::span<const double>> all;
  for (const auto* g : {&grads.encoder, &grads.mean_head, &grads.logvar_head, &grads.decoder}) {
    auto s = nnet::gradient_spans(*g);
    all.insert(all.end(), s.begin(), s.end());
  }
  return all;
}

namespace {

double softplus(double a) { return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a))); }

}  // namespace

BatchEvaluation evaluate_batch(const VaeModel& model, const Matrix& inputs, const Matrix& noise,
                               Likelihood likelihood, bool with_gradients) {
  const Index edges = model.edge_count();
  const Index latent = model.latent_dim();
  const Index batch = inputs.cols();
  if (inputs.rows() != model.input_dim()) throw ShapeError("evaluate_batch: input width mismatch");
  if (noise.rows() != latent || noise.cols() != batch) throw ShapeError("evaluate_batch: noise shape mismatch");
  if (batch == 0) throw ValidationError("evaluate_batch: empty batch");
  const double inv_b = 1.0 / static_cast<double>(batch);

  const auto enc = nnet::forward(model.encoder, inputs);
  const auto mean_cache = nnet::forward(model.mean_head, enc.output());
  const auto logvar_cache = nnet::forward(model.logvar_head, enc.output());
  const Matrix& mu = mean_cache.output();
  const Matrix& logvar = logvar_cache.output();
  const Matrix sd = (0.5 * logvar.array()).exp().matrix();

  Matrix dec_in(latent + 1, batch);
  dec_in.topRows(latent) = mu.array() + sd.array() * noise.array();
  dec_in.row(latent) = inputs.row(edges);
  const auto dec = nnet::forward(model.decoder, dec_in);
  const Matrix& xhat = dec.output();
  const auto x = inputs.topRows(edges);

  BatchEvaluation eval;
  Matrix upstream;
  auto kind = nnet::UpstreamKind::output;
  const bool logit_path = likelihood == Likelihood::bernoulli &&
                          model.decoder.layers.back().activation == Activation::sigmoid;
  double recon = 0.0;
  if (logit_path) {
    const Matrix& logits = dec.pre_activations.back();
    recon = (logits.unaryExpr([](double a) { return softplus(a); }).array() - x.array() * logits.array()).sum();
    if (with_gradients) {
      upstream = (xhat - x) * inv_b;
      kind = nnet::UpstreamKind::pre_activation;
    }
  } else if (likelihood == Likelihood::bernoulli) {
    if ((xhat.array() <= 0.0).any() || (xhat.array() >= 1.0).any()) {
      throw NumericError("evaluate_batch: reconstruction outside (0,1)");
    }
    recon = -(x.array() * xhat.array().log() + (1.0 - x.array()) * (1.0 - xhat.array()).log()).sum();
    if (with_gradients) {
      upstream = ((xhat - x).array() / (xhat.array() * (1.0 - xhat.array()))).matrix() * inv_b;
    }
  } else {
    recon = 0.5 * (x - xhat).squaredNorm();
    if (with_gradients) upstream = (xhat - x) * inv_b;
  }
  const double kl = 0.5 * (mu.array().square() + logvar.array().exp() - 1.0 - logvar.array()).sum();

  eval.mean.reconstruction = recon * inv_b;
  eval.mean.kl = kl * inv_b;
  eval.mean.total = eval.mean.reconstruction + eval.mean.kl;
  if (!std::isfinite(eval.mean.total)) throw NumericError("non-finite loss");
  if (!with_gradients) return eval;

  VaeGradients g;
  Matrix d_dec_in;
  g.decoder = nnet::backward(model.decoder, dec, upstream, &d_dec_in, kind);
  const Matrix dz = d_dec_in.topRows(latent);
  const Matrix d_mu = dz + mu * inv_b;
  const Matrix d_logvar =
      (dz.array() * noise.array() * 0.5 * sd.array() + 0.5 * (logvar.array().exp() - 1.0) * inv_b).matrix();
  Matrix d_h_mean, d_h_logvar;
  g.mean_head = nnet::backward(model.mean_head, mean_cache, d_mu, &d_h_mean);
  g.logvar_head = nnet::backward(model.logvar_head, logvar_cache, d_logvar, &d_h_logvar);
  g.encoder = nnet::backward(model.encoder, enc, d_h_mean + d_h_logvar);
  eval.gradients = std::move(g);
  return eval;
}

Matrix make_inputs(std::span<const SubjectRecord> subjects, std::span<const std::size_t> indices) {
  if (indices.empty()) return {};
  const Index edges = subjects[indices.front()].edges.size();
  Matrix m(edges + 1, static_cast<Index>(indices.size()));
  for (std::size_t c = 0; c < indices.size(); ++c) {
    const auto& s = subjects[indices[c]];
    if (s.edges.size() != edges) throw ShapeError("make_inputs: inconsistent edge counts");
    m.col(static_cast<Index>(c)).head(edges) = s.edges;
    m(edges, static_cast<Index>(c)) = normalize_age(s.age);
  }
  return m;
}

Split split_dataset(std::span<const Group> labels, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("split: fraction must be in (0,1)");
  Rng rng(seed);
  Split split;
  bool seen[2] = {false, false};
  for (Group g : {Group::asd, Group::nc}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == g) members.push_back(i);
    seen[g == Group::asd ? 0 : 1] = !members.empty();
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.below(i)]);
    }
    const auto n_val = static_cast<std::size_t>(std::lround(static_cast<double>(members.size()) * fraction));
    split.validation.insert(split.validation.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
    split.training.insert(split.training.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
  }
  if (!seen[0] || !seen[1]) throw ValidationError("split: both ASD and NC subjects are required");
  if (split.validation.empty() || split.training.empty()) {
    throw ValidationError("split: fraction leaves an empty partition");
  }
  std::sort(split.training.begin(), split.training.end());
  std::sort(split.validation.begin(), split.validation.end());
  return split;
}

namespace {

enum Stream : std::uint64_t { kInit = 0, kSplit = 1, kShuffle = 2, kValidationNoise = 3 };

Matrix draw_noise(Rng& rng, Index latent, Index cols) {
  Matrix n(latent, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < latent; ++r) n(r, c) = rng.normal();
  return n;
}

// Repeats each column `times` times, keeping subjects adjacent.
Matrix tile_columns(const Matrix& m, int times) {
  if (times == 1) return m;
  Matrix out(m.rows(), m.cols() * times);
  for (Index c = 0; c < m.cols(); ++c)
    for (int k = 0; k < times; ++k) out.col(c * times + k) = m.col(c);
  return out;
}

}  // namespace

void compute_cohort_stats(VaeModel& model, std::span<const SubjectRecord> subjects) {
  if (subjects.size() < 2) throw InsufficientDataError("cohort stats need at least 2 subjects");
  const auto table = extract_features(model, subjects);
  CohortStats c;
  const auto n = static_cast<double>(table.values.rows());
  c.mean = table.values.colwise().mean().transpose();
  c.sd.resize(c.mean.size());
  for (Index j = 0; j < c.mean.size(); ++j) {
    c.sd(j) = std::sqrt((table.values.col(j).array() - c.mean(j)).square().sum() / (n - 1.0));
  }
  double age = 0.0;
  for (const auto& s : subjects) age += s.age;
  c.mean_age = age / n;
  c.subjects = table.values.rows();
  model.cohort = std::move(c);
}

TrainResult train(std::span<const SubjectRecord> subjects, const TrainConfig& config) {
  config.validate();
  if (subjects.empty()) throw InsufficientDataError("train: no subjects");
  Architecture arch = config.architecture;
  arch.edges = subjects.front().edges.size();

  const auto labels = groups_of(subjects);
  const Split split = split_dataset(labels, config.validation_fraction, Rng::derive(config.seed, kSplit));
  if (split.training.size() < 2 || split.validation.size() < 2) {
    throw InsufficientDataError("train: each partition needs at least 2 subjects");
  }

  VaeModel model = make_model(arch, Rng::derive(config.seed, kInit));
  model.config = config;
  model.config.architecture = arch;

  nnet::AdadeltaState optimizer(config.optimizer);
  Rng shuffle_rng(Rng::derive(config.seed, kShuffle));
  const Matrix val_inputs = tile_columns(make_inputs(subjects, split.validation), config.noise_samples);

  std::vector<std::size_t> order = split.training;
  std::vector<LossRecord> history;
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    LossRecord rec;
    rec.epoch = epoch;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix inputs = tile_columns(make_inputs(subjects, idx), config.noise_samples);
      const Matrix noise = draw_noise(shuffle_rng, arch.latent, inputs.cols());
      BatchEvaluation eval;
      try {
        eval = evaluate_batch(model, inputs, noise, config.likelihood, true);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + " batch " +
                           std::to_string(batch_no));
      }
      const double w = static_cast<double>(idx.size());
      rec.train_total += eval.mean.total * w;
      rec.train_reconstruction += eval.mean.reconstruction * w;
      rec.train_kl += eval.mean.kl * w;
      optimizer.step(parameter_spans(model), gradient_spans(*eval.gradients));
    }
    const double n = static_cast<double>(order.size());
    rec.train_total /= n;
    rec.train_reconstruction /= n;
    rec.train_kl /= n;

    // Same validation draws every epoch so the curve is comparable.
    Rng val_rng(Rng::derive(config.seed, kValidationNoise));
    const Matrix val_noise = draw_noise(val_rng, arch.latent, val_inputs.cols());
    BatchEvaluation val;
    try {
      val = evaluate_batch(model, val_inputs, val_noise, config.likelihood, false);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " in validation at epoch " + std::to_string(epoch));
    }
    rec.validation_total = val.mean.total;
    rec.validation_reconstruction = val.mean.reconstruction;
    rec.validation_kl = val.mean.kl;
    history.push_back(rec);
  }

  compute_cohort_stats(model, subjects);
  model.history = history;
  return {std::move(model), std::move(history)};
}

FeatureTable extract_features(const VaeModel& model, std::span<const SubjectRecord> subjects) {
  FeatureTable table;
  table.values.resize(static_cast<Index>(subjects.size()), model.latent_dim());
  constexpr std::size_t kChunk = 256;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < subjects.size(); start += kChunk) {
    const std::size_t end = std::min(subjects.size(), start + kChunk);
    idx.clear();
    for (std::size_t i = start; i < end; ++i) idx.push_back(i);
    const Matrix inputs = make_inputs(subjects, idx);
    if (inputs.rows() != model.input_dim()) throw ShapeError("extract_features: edge count does not match model");
    const Matrix mu = nnet::predict(model.mean_head, nnet::predict(model.encoder, inputs));
    table.values.middleRows(static_cast<Index>(start), static_cast<Index>(end - start)) = mu.transpose();
  }
  for (const auto& s : subjects) table.subject_ids.push_back(s.subject_id);
  return table;
}

}  // namespace latentconn::vae
