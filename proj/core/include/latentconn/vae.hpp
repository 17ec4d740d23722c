#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latentconn/connectome.hpp"
#include "latentconn/dataset.hpp"
#include "latentconn/nnet.hpp"
#include "latentconn/rng.hpp"
#include "latentconn/types.hpp"

namespace latentconn::vae {

/// Reconstruction term of the objective.
enum class Likelihood {
  bernoulli,  // cross-entropy against sigmoid outputs
  gaussian,   // 0.5 * squared error (unit variance)
};

std::string_view to_string(Likelihood l);
Likelihood parse_likelihood(std::string_view name);

struct Architecture {
  Index edges = kEdgeCount;
  Index latent = 2;
  std::vector<Index> hidden = {128, 128};
  nnet::Activation hidden_activation = nnet::Activation::rectifier;
  nnet::Activation output_activation = nnet::Activation::sigmoid;

  /// Encoder input width: edges plus normalized age.
  Index input_dim() const { return edges + 1; }
  void validate() const;
};

struct TrainConfig {
  int epochs = 50;
  int batch_size = 64;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;
  nnet::AdadeltaConfig optimizer;
  Likelihood likelihood = Likelihood::bernoulli;
  /// Reparameterization draws per subject per epoch.
  int noise_samples = 1;
  /// Hidden sizes and activations; the edge count is taken from the data.
  Architecture architecture;

  void validate() const;
};

/// Per-epoch losses, each a mean per subject.
struct LossRecord {
  int epoch = 0;
  double train_total = 0.0;
  double train_reconstruction = 0.0;
  double train_kl = 0.0;
  double validation_total = 0.0;
  double validation_reconstruction = 0.0;
  double validation_kl = 0.0;
};

/// Latent statistics of the whole cohort, from noise-free encodings.
struct CohortStats {
  Vector mean;
  Vector sd;  // sample SD (n - 1)
  double mean_age = 0.0;
  Index subjects = 0;
};

/// Encoder trunk, two identity heads (mean, log-variance) and a decoder
/// conditioned on [z, normalized age].
struct VaeModel {
  Architecture architecture;
  nnet::Network encoder;
  nnet::Network mean_head;
  nnet::Network logvar_head;
  nnet::Network decoder;
  std::optional<CohortStats> cohort;
  TrainConfig config;
  std::vector<LossRecord> history;

  Index edge_count() const { return architecture.edges; }
  Index latent_dim() const { return architecture.latent; }
  Index input_dim() const { return architecture.input_dim(); }
};

VaeModel make_model(const Architecture& arch, Rng& rng);
VaeModel make_model(const Architecture& arch, std::uint64_t seed);

struct LatentCode {
  Vector mean;
  Vector log_variance;
  Vector sample;
};

/// Noise-free encoding: sample == mean. Input is edges followed by
/// normalized age (see assemble_input).
LatentCode encode(const VaeModel& model, const Vector& input);

/// z = mean + exp(log_variance / 2) * noise
Vector reparameterize(const LatentCode& code, const Vector& noise);

/// Decoder output for latent z at the given age in years. With a sigmoid
/// output layer every entry lies strictly inside (0, 1).
Vector decode(const VaeModel& model, const Vector& z, double age_years);

struct LossTerms {
  double reconstruction = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

/// KL( N(mean, exp(log_variance)) || N(0, I) ).
double kl_divergence(const Vector& mean, const Vector& log_variance);

/// Objective for a single subject. Throws ValidationError when x leaves
/// [0, 1] and NumericError when a Bernoulli reconstruction leaves (0, 1).
LossTerms elbo_loss(const Vector& x, const Vector& reconstruction, const LatentCode& code,
                    Likelihood likelihood = Likelihood::bernoulli);

struct VaeGradients {
  nnet::GradientSet encoder;
  nnet::GradientSet mean_head;
  nnet::GradientSet logvar_head;
  nnet::GradientSet decoder;
};

/// Parameter views in a fixed order: encoder, mean head, log-variance head,
/// decoder. gradient_spans() follows the same order.
std::vector<std::span<double>> parameter_spans(VaeModel& model);
std::vector<std::span<const double>> gradient_spans(const VaeGradients& grads);

struct BatchEvaluation {
  LossTerms mean;  // per-subject mean over the batch columns
  std::optional<VaeGradients> gradients;
};

/// Objective over a batch. inputs: input_dim x B (edges, then normalized
/// age); noise: latent x B standard-normal draws. Gradients are of the
/// batch-mean total loss.
BatchEvaluation evaluate_batch(const VaeModel& model, const Matrix& inputs, const Matrix& noise,
                               Likelihood likelihood, bool with_gradients);

/// Stacks assemble_input() columns for the chosen subjects.
Matrix make_inputs(std::span<const SubjectRecord> subjects, std::span<const std::size_t> indices);

struct Split {
  std::vector<std::size_t> training;
  std::vector<std::size_t> validation;
};

/// Stratified random split: in each group, round(n_group * fraction)
/// subjects (half away from zero) go to validation. Both index lists are
/// returned in ascending order.
Split split_dataset(std::span<const Group> labels, double fraction, std::uint64_t seed);

struct TrainResult {
  VaeModel model;
  std::vector<LossRecord> history;
};

/// Mini-batch Adadelta on the batch-mean objective. Diagnosis labels are
/// used only for the stratified split. The returned model carries the
/// cohort statistics of all subjects, the config and the loss history.
TrainResult train(std::span<const SubjectRecord> subjects, const TrainConfig& config);

/// Fills model.cohort from noise-free encodings of every subject.
void compute_cohort_stats(VaeModel& model, std::span<const SubjectRecord> subjects);

struct FeatureTable {
  std::vector<std::string> subject_ids;
  Matrix values;  // subjects x latent, encoder means
};

FeatureTable extract_features(const VaeModel& model, std::span<const SubjectRecord> subjects);

void save_checkpoint(const VaeModel& model, const std::filesystem::path& path);
VaeModel load_checkpoint(const std::filesystem::path& path);
/// Serialized checkpoint text (what save_checkpoint writes).
std::string checkpoint_to_string(const VaeModel& model);
VaeModel checkpoint_from_string(const std::string& text, const std::string& origin = "<memory>");

}  // namespace latentconn::vae
