#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "latentconn/cli/commands.hpp"
#include "latentconn/cli/synth.hpp"
#include "latentconn/csv.hpp"
#include "latentconn/errors.hpp"

namespace {

using namespace latentconn;
using nlohmann::ordered_json;

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

void fail_line(const char* kind, const std::string& message) {
  std::string flat = message;
  for (auto& c : flat)
    if (c == '\n') c = ' ';
  std::cerr << "latentconn: error kind=" << kind << " message=" << flat << "\n";
}

std::string config_value(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return csv::format_number(v.get<double>(), 17);
  throw ValidationError("config: unsupported value " + v.dump());
}

// Turns --config JSON into flag tokens placed ahead of the user's own flags;
// with TakeLast policies the command line wins.
std::vector<std::string> expand_config(CLI::App& app, const std::vector<std::string>& args) {
  std::size_t sub_pos = args.size();
  CLI::App* sub = nullptr;
  for (std::size_t k = 1; k < args.size(); ++k) {
    for (auto* s : app.get_subcommands({})) {
      if (s->get_name() == args[k]) {
        sub = s;
        sub_pos = k;
        break;
      }
    }
    if (sub) break;
  }
  std::string config_path;
  for (std::size_t k = 1; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) config_path = args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) config_path = args[k].substr(9);
  }
  if (config_path.empty() || sub == nullptr) return args;

  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(csv::read_file(config_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(config_path + ": " + e.what());
  }
  if (!cfg.is_object()) throw ParseError(config_path + ": config must be a JSON object");

  std::vector<std::string> injected;
  for (const auto& [raw_key, value] : cfg.items()) {
    std::string key = raw_key;
    for (auto& c : key)
      if (c == '_') c = '-';
    const auto* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config" || key == "help") {
      throw ValidationError("config: unknown key '" + raw_key + "' for subcommand " + sub->get_name());
    }
    const bool on_command_line = std::any_of(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, args.end(),
                                             [&](const std::string& a) {
                                               return a == "--" + key || a.rfind("--" + key + "=", 0) == 0;
                                             });
    if (on_command_line) continue;
    if (opt->get_expected_max() == 0) {
      if (!value.is_boolean()) throw ValidationError("config: '" + raw_key + "' expects true/false");
      if (value.get<bool>()) injected.push_back("--" + key);
      continue;
    }
    injected.push_back("--" + key);
    if (value.is_array()) {
      for (const auto& v : value) injected.push_back(config_value(v));
    } else {
      injected.push_back(config_value(value));
    }
  }
  std::vector<std::string> out(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1);
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, args.end());
  return out;
}

ordered_json typed(const std::string& s) {
  double d = 0.0;
  if (csv::parse_double(s, d)) {
    if (s.find_first_of(".eE") == std::string::npos && s.size() < 19) return std::stoll(s);
    return d;
  }
  if (s == "true") return true;
  if (s == "false") return false;
  return s;
}

// Every option of the subcommand with its final value, minus the output
// location, so reruns into different directories stay byte-identical.
ordered_json resolved_config(const CLI::App& sub) {
  ordered_json j;
  j["subcommand"] = sub.get_name();
  for (const auto* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config" || name == "out") continue;
    if (opt->get_expected_max() == 0) {
      j[name] = opt->count() > 0;
      continue;
    }
    std::vector<std::string> values = opt->count() > 0 ? opt->results() : std::vector<std::string>{};
    if (values.empty()) {
      const std::string def = opt->get_default_str();
      if (def.empty()) {
        j[name] = nullptr;
        continue;
      }
      if (def.front() == '[' && def.back() == ']') {
        ordered_json arr = ordered_json::array();
        std::string body = def.substr(1, def.size() - 2);
        for (auto& f : csv::split_line(body))
          if (!f.empty()) arr.push_back(typed(f));
        j[name] = arr;
        continue;
      }
      values = {def};
    }
    if (opt->get_expected_max() > 1 || values.size() > 1) {
      ordered_json arr = ordered_json::array();
      for (const auto& v : values) arr.push_back(typed(v));
      j[name] = arr;
    } else {
      j[name] = typed(values.front());
    }
  }
  return j;
}

void echo_config(const CLI::App& sub, const std::string& out_dir) {
  const std::string text = resolved_config(sub).dump(2) + "\n";
  std::cout << text;
  csv::write_file(std::filesystem::path(out_dir) / "run_config.json", text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Connectome feature learning with a conditional variational autoencoder", "latentconn"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

  std::string config_path;
  auto add_config = [&](CLI::App* s) {
    s->add_option("--config", config_path, "JSON file with option values; flags on the command line override it");
  };

  // synth
  cli::SyntheticSpec spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic cohort with a planted group factor");
  add_config(synth);
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", spec.seed, "Random seed");
  synth->add_option("--subjects", spec.subjects, "Number of subjects");
  synth->add_option("--asd-fraction", spec.asd_fraction, "Fraction of ASD subjects");
  synth->add_option("--group-shift", spec.group_shift, "Factor mean offset: +shift ASD, -shift NC");
  synth->add_option("--factor-sd", spec.factor_sd, "Within-group factor SD");
  synth->add_option("--loading", spec.loading, "Edge change per unit factor on planted edges");
  synth->add_option("--noise-sd", spec.noise_sd, "Per-edge subject noise SD");
  synth->add_option("--base-lo", spec.base_lo, "Lower bound of base edge weights");
  synth->add_option("--base-hi", spec.base_hi, "Upper bound of base edge weights");
  synth->add_option("--age-mean", spec.age_mean, "Mean age (years)");
  synth->add_option("--age-sd", spec.age_sd, "Age SD (years)");
  synth->add_option("--iq-mean", spec.iq_mean, "Mean full-scale IQ");
  synth->add_option("--iq-noise-sd", spec.iq_noise_sd, "IQ noise SD");
  synth->add_option("--iq-coupling", spec.iq_coupling, "IQ points per unit factor");
  synth->add_option("--iq-missing-fraction", spec.iq_missing_fraction, "Fraction of subjects without IQ");
  synth->add_option("--planted-a", spec.planted_regions_a, "Region labels on one side of the planted edges");
  synth->add_option("--planted-b", spec.planted_regions_b, "Region labels on the other side");

  // connectome
  std::string ts_dir, conn_out;
  auto* connectome = app.add_subcommand("connectome", "Build connectivity matrices from ROI time series");
  add_config(connectome);
  connectome->add_option("--timeseries", ts_dir, "Directory of <subject>.csv time series (T x 90)")->required();
  connectome->add_option("--out", conn_out, "Output directory")->required();

  // train
  vae::TrainConfig tc;
  std::string train_manifest, train_edges, train_out, likelihood = "bernoulli";
  std::string hidden_act = "rectifier", output_act = "sigmoid";
  std::vector<Index> hidden = {128, 128};
  auto* train = app.add_subcommand("train", "Train the variational autoencoder");
  add_config(train);
  train->add_option("--manifest", train_manifest, "Manifest CSV")->required();
  train->add_option("--edges", train_edges, "Connectivity directory")->required();
  train->add_option("--out", train_out, "Output directory")->required();
  train->add_option("--seed", tc.seed, "Random seed");
  train->add_option("--epochs", tc.epochs, "Training epochs");
  train->add_option("--batch-size", tc.batch_size, "Mini-batch size");
  train->add_option("--validation-fraction", tc.validation_fraction, "Held-out fraction (stratified)");
  train->add_option("--rho", tc.optimizer.rho, "Adadelta decay");
  train->add_option("--epsilon", tc.optimizer.epsilon, "Adadelta stabilizer");
  train->add_option("--learning-rate", tc.optimizer.learning_rate, "Adadelta base rate");
  train->add_option("--likelihood", likelihood, "bernoulli or gaussian");
  train->add_option("--noise-samples", tc.noise_samples, "Reparameterization draws per subject per epoch");
  train->add_option("--hidden", hidden, "Hidden layer sizes");
  train->add_option("--hidden-activation", hidden_act, "rectifier, sigmoid or identity");
  train->add_option("--output-activation", output_act, "rectifier, sigmoid or identity");

  // analyze
  std::string an_ckpt, an_manifest, an_edges, an_out;
  bool welch = false;
  cli::AnalyzeOptions an_opts;
  auto* analyze = app.add_subcommand("analyze", "Extract features and run group statistics");
  add_config(analyze);
  analyze->add_option("--checkpoint", an_ckpt, "Checkpoint JSON")->required();
  analyze->add_option("--manifest", an_manifest, "Manifest CSV")->required();
  analyze->add_option("--edges", an_edges, "Connectivity directory")->required();
  analyze->add_option("--out", an_out, "Output directory")->required();
  analyze->add_flag("--welch", welch, "Use Welch's unequal-variance t test");
  analyze->add_option("--alpha", an_opts.alpha, "Significance threshold for feature selection");

  // generate
  std::string gen_ckpt, gen_out;
  int feature = 1;
  double direction = 1.0, threshold = generator::kDefaultFcsThreshold;
  std::optional<double> gen_age;
  auto* generate = app.add_subcommand("generate", "Decode a feature shift into delta connectivity");
  add_config(generate);
  generate->add_option("--checkpoint", gen_ckpt, "Checkpoint JSON")->required();
  generate->add_option("--out", gen_out, "Output directory")->required();
  generate->add_option("--feature", feature, "Feature number (1-based, as in features.csv)");
  generate->add_option("--direction", direction, "Shift in cohort SD units (+1, -1, 0, ...)");
  generate->add_option("--age", gen_age, "Age in years (default: cohort mean age)");
  generate->add_option("--threshold", threshold, "|delta FCS| annotation threshold");

  // manifold
  std::string man_ckpt, man_out;
  std::size_t steps = 5;
  std::vector<double> range = {-2.0, 2.0};
  std::optional<double> man_age;
  auto* manifold = app.add_subcommand("manifold", "Decode a lattice over the latent plane");
  add_config(manifold);
  manifold->add_option("--checkpoint", man_ckpt, "Checkpoint JSON")->required();
  manifold->add_option("--out", man_out, "Output directory")->required();
  manifold->add_option("--steps", steps, "Lattice points per axis");
  manifold->add_option("--range", range, "Latent range: lo hi")->expected(2);
  manifold->add_option("--age", man_age, "Age in years (default: cohort mean age)");

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(app, args);
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);

    if (synth->parsed()) {
      echo_config(*synth, synth_out);
      const auto cohort = cli::cmd_synth(spec, synth_out);
      std::cout << "wrote " << cohort.manifest.size() << " subjects, " << cohort.planted.size()
                << " planted edges to " << synth_out << "\n";
    } else if (connectome->parsed()) {
      echo_config(*connectome, conn_out);
      const auto summary = cli::cmd_connectome(ts_dir, conn_out);
      std::cout << summary.accepted.size() << " subjects processed, " << summary.rejected.size() << " rejected\n";
      for (const auto& r : summary.rejected) std::cout << "  rejected " << r.subject_id << ": " << r.reason << "\n";
    } else if (train->parsed()) {
      tc.likelihood = vae::parse_likelihood(likelihood);
      tc.architecture.hidden = hidden;
      tc.architecture.hidden_activation = nnet::parse_activation(hidden_act);
      tc.architecture.output_activation = nnet::parse_activation(output_act);
      tc.validate();
      echo_config(*train, train_out);
      const auto result = cli::cmd_train(train_manifest, train_edges, tc, train_out);
      const auto& last = result.history.back();
      std::cout << "trained " << result.history.size() << " epochs; final train loss "
                << csv::format_number(last.train_total, 8) << ", validation loss "
                << csv::format_number(last.validation_total, 8) << "\n";
    } else if (analyze->parsed()) {
      an_opts.variance = welch ? analysis::VarianceModel::welch : analysis::VarianceModel::pooled;
      echo_config(*analyze, an_out);
      const auto report = cli::cmd_analyze(an_ckpt, an_manifest, an_edges, an_out, an_opts);
      std::cout << analysis::report_text(report);
    } else if (generate->parsed()) {
      echo_config(*generate, gen_out);
      cli::GenerateOptions opts;
      opts.feature = feature - 1;
      opts.direction = direction;
      opts.age = gen_age;
      opts.threshold = threshold;
      const auto r = cli::cmd_generate(gen_ckpt, opts, gen_out);
      std::cout << r.fcs.annotated.size() << " regions with |delta FCS| > " << csv::format_number(threshold, 6)
                << "\n";
    } else if (manifold->parsed()) {
      if (range.size() != 2) throw ValidationError("--range takes two values");
      echo_config(*manifold, man_out);
      const auto grid = cli::cmd_manifold(man_ckpt, {steps, range[0], range[1], man_age}, man_out);
      std::cout << grid.cells.size() << " manifold cells written to " << man_out << "\n";
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail_line("validation", e.what());
    return kExitValidation;
  } catch (const NumericError& e) {
    fail_line(e.kind(), e.what());
    return kExitNumeric;
  } catch (const ValidationError& e) {
    fail_line(e.kind(), e.what());
    return kExitValidation;
  } catch (const UsageError& e) {
    fail_line(e.kind(), e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    fail_line("internal", e.what());
    return 1;
  }
  return 0;
}
