#include <json.hpp>

#include "latentconn/csv.hpp"
#include "latentconn/errors.hpp"
#include "latentconn/vae.hpp"

namespace latentconn::vae {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "latentconn-vae-checkpoint";
constexpr int kSchemaVersion = 1;

json layer_to_json(const nnet::DenseLayer& l) {
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(l.weights.size()));
  for (Index r = 0; r < l.weights.rows(); ++r)
    for (Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
  return {{"in", l.in_dim()},
          {"out", l.out_dim()},
          {"activation", nnet::to_string(l.activation)},
          {"weights", std::move(w)},
          {"biases", std::vector<double>(l.biases.data(), l.biases.data() + l.biases.size())}};
}

nnet::DenseLayer layer_from_json(const json& j) {
  nnet::DenseLayer l;
  const auto in = j.at("in").get<Index>();
  const auto out = j.at("out").get<Index>();
  if (in < 1 || out < 1) throw ParseError("layer dimensions must be positive");
  l.activation = nnet::parse_activation(j.at("activation").get<std::string>());
  const auto& w = j.at("weights");
  const auto& b = j.at("biases");
  if (!w.is_array() || static_cast<Index>(w.size()) != in * out) throw ParseError("layer weight count mismatch");
  if (!b.is_array() || static_cast<Index>(b.size()) != out) throw ParseError("layer bias count mismatch");
  l.weights.resize(out, in);
  std::size_t k = 0;
  for (Index r = 0; r < out; ++r)
    for (Index c = 0; c < in; ++c) l.weights(r, c) = w[k++].get<double>();
  l.biases.resize(out);
  for (Index r = 0; r < out; ++r) l.biases(r) = b[static_cast<std::size_t>(r)].get<double>();
  return l;
}

json network_to_json(const nnet::Network& n) {
  json arr = json::array();
  for (const auto& l : n.layers) arr.push_back(layer_to_json(l));
  return arr;
}

nnet::Network network_from_json(const json& j, const char* name) {
  nnet::Network n;
  if (!j.is_array() || j.empty()) throw ParseError(std::string("network '") + name + "' has no layers");
  for (const auto& l : j) n.layers.push_back(layer_from_json(l));
  for (std::size_t k = 1; k < n.layers.size(); ++k) {
    if (n.layers[k].in_dim() != n.layers[k - 1].out_dim()) {
      throw ParseError(std::string("network '") + name + "' has inconsistent layer dimensions");
    }
  }
  return n;
}

json config_to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"validation_fraction", c.validation_fraction},
          {"seed", c.seed},
          {"likelihood", to_string(c.likelihood)},
          {"noise_samples", c.noise_samples},
          {"optimizer",
           {{"name", "adadelta"},
            {"rho", c.optimizer.rho},
            {"epsilon", c.optimizer.epsilon},
            {"learning_rate", c.optimizer.learning_rate}}}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.validation_fraction = j.at("validation_fraction").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.likelihood = parse_likelihood(j.at("likelihood").get<std::string>());
  c.noise_samples = j.at("noise_samples").get<int>();
  const auto& o = j.at("optimizer");
  c.optimizer.rho = o.at("rho").get<double>();
  c.optimizer.epsilon = o.at("epsilon").get<double>();
  c.optimizer.learning_rate = o.at("learning_rate").get<double>();
  return c;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

}  // namespace

std::string checkpoint_to_string(const VaeModel& m) {
  const auto& a = m.architecture;
  json j;
  j["format"] = kFormat;
  j["schema_version"] = kSchemaVersion;
  j["architecture"] = {{"edges", a.edges},
                       {"latent", a.latent},
                       {"hidden", a.hidden},
                       {"hidden_activation", nnet::to_string(a.hidden_activation)},
                       {"output_activation", nnet::to_string(a.output_activation)}};
  j["networks"] = {{"encoder", network_to_json(m.encoder)},
                   {"mean_head", network_to_json(m.mean_head)},
                   {"logvar_head", network_to_json(m.logvar_head)},
                   {"decoder", network_to_json(m.decoder)}};
  j["train_config"] = config_to_json(m.config);
  j["seed"] = m.config.seed;
  if (m.cohort) {
    j["cohort"] = {{"mean", vector_json(m.cohort->mean)},
                   {"sd", vector_json(m.cohort->sd)},
                   {"mean_age", m.cohort->mean_age},
                   {"subjects", m.cohort->subjects}};
  } else {
    j["cohort"] = nullptr;
  }
  json hist = json::array();
  for (const auto& r : m.history) {
    hist.push_back({{"epoch", r.epoch},
                    {"train_total", r.train_total},
                    {"train_reconstruction", r.train_reconstruction},
                    {"train_kl", r.train_kl},
                    {"validation_total", r.validation_total},
                    {"validation_reconstruction", r.validation_reconstruction},
                    {"validation_kl", r.validation_kl}});
  }
  j["history"] = std::move(hist);
  return j.dump() + "\n";
}

VaeModel checkpoint_from_string(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) throw ParseError(origin + ": not a latentconn checkpoint");
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
      throw ParseError(origin + ": unsupported schema_version");
    }
    VaeModel m;
    const auto& a = j.at("architecture");
    m.architecture.edges = a.at("edges").get<Index>();
    m.architecture.latent = a.at("latent").get<Index>();
    m.architecture.hidden = a.at("hidden").get<std::vector<Index>>();
    m.architecture.hidden_activation = nnet::parse_activation(a.at("hidden_activation").get<std::string>());
    m.architecture.output_activation = nnet::parse_activation(a.at("output_activation").get<std::string>());
    m.architecture.validate();

    const auto& n = j.at("networks");
    m.encoder = network_from_json(n.at("encoder"), "encoder");
    m.mean_head = network_from_json(n.at("mean_head"), "mean_head");
    m.logvar_head = network_from_json(n.at("logvar_head"), "logvar_head");
    m.decoder = network_from_json(n.at("decoder"), "decoder");
    if (m.encoder.in_dim() != m.architecture.input_dim() ||
        m.mean_head.in_dim() != m.encoder.out_dim() || m.logvar_head.in_dim() != m.encoder.out_dim() ||
        m.mean_head.out_dim() != m.architecture.latent || m.logvar_head.out_dim() != m.architecture.latent ||
        m.decoder.in_dim() != m.architecture.latent + 1 || m.decoder.out_dim() != m.architecture.edges) {
      throw ParseError(origin + ": network dimensions disagree with architecture");
    }

    m.config = config_from_json(j.at("train_config"));
    m.config.architecture = m.architecture;
    const auto& c = j.at("cohort");
    if (!c.is_null()) {
      CohortStats s;
      s.mean = vector_from_json(c.at("mean"));
      s.sd = vector_from_json(c.at("sd"));
      s.mean_age = c.at("mean_age").get<double>();
      s.subjects = c.at("subjects").get<Index>();
      if (s.mean.size() != m.architecture.latent || s.sd.size() != m.architecture.latent) {
        throw ParseError(origin + ": cohort statistics have the wrong dimension");
      }
      m.cohort = std::move(s);
    }
    for (const auto& r : j.at("history")) {
      m.history.push_back({r.at("epoch").get<int>(), r.at("train_total").get<double>(),
                           r.at("train_reconstruction").get<double>(), r.at("train_kl").get<double>(),
                           r.at("validation_total").get<double>(),
                           r.at("validation_reconstruction").get<double>(),
                           r.at("validation_kl").get<double>()});
    }
    return m;
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ParseError(origin + ": " + e.what());
  } catch (const json::exception& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

void save_checkpoint(const VaeModel& model, const std::filesystem::path& path) {
  csv::write_file(path, checkpoint_to_string(model));
}

VaeModel load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_string(csv::read_file(path), path.string());
}

}  // namespace latentconn::vae
