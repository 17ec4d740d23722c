// Acceptance gate. `latentconn_acceptance [C1..C9]` prints one line per
// criterion; exit 0 when all selected criteria pass, 1 otherwise, 77 when
// every selected criterion was skipped.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "latentconn/analysis.hpp"
#include "latentconn/cli/commands.hpp"
#include "latentconn/cli/synth.hpp"
#include "latentconn/connectome.hpp"
#include "latentconn/csv.hpp"
#include "latentconn/dataset.hpp"
#include "latentconn/generator.hpp"
#include "latentconn/nnet.hpp"
#include "latentconn/rng.hpp"
#include "latentconn/vae.hpp"
#include "reference_tables.hpp"

using namespace latentconn;
namespace fs = std::filesystem;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome judged(bool ok, const std::string& detail) { return {ok ? Verdict::pass : Verdict::fail, detail}; }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().filename() != "run_config.json")
      files[fs::relative(e.path(), root).string()] = csv::read_file(e.path());
  return files;
}

vae::VaeModel tiny_model(std::uint64_t seed) {
  vae::Architecture a;
  a.edges = 10;
  a.hidden = {4, 4};
  vae::VaeModel m = vae::make_model(a, seed);
  Rng rng(seed + 7);
  for (auto* net : {&m.encoder, &m.mean_head, &m.logvar_head, &m.decoder})
    for (auto& l : net->layers)
      for (Index k = 0; k < l.biases.size(); ++k) l.biases(k) = rng.uniform(-0.2, 0.2);
  return m;
}

Outcome c1_dimensions() {
  const Index edges = edge_count_for(kRegionCount);
  const vae::VaeModel model = vae::make_model(vae::Architecture{}, 0);
  const Vector input = assemble_input(Vector::Constant(edges, 0.5), 20.0);
  std::vector<Group> labels(465, Group::asd);
  labels.resize(972, Group::nc);
  const auto split = vae::split_dataset(labels, 0.1, 0);
  const bool ok = edges == 4005 && model.input_dim() == 4006 && input.size() == 4006 && model.encoder.in_dim() == 4006 &&
                  model.decoder.out_dim() == 4005 && split.training.size() == 874 && split.validation.size() == 98;
  return judged(ok, "edges=" + std::to_string(edges) + " input=" + std::to_string(model.input_dim()) +
                        " split=" + std::to_string(split.training.size()) + "/" +
                        std::to_string(split.validation.size()));
}

Outcome c2_gradients() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    vae::VaeModel m = tiny_model(seed);
    Rng rng(seed + 500);
    Matrix in(11, 3), noise(2, 3);
    for (Index c = 0; c < 3; ++c) {
      for (Index e = 0; e < 10; ++e) in(e, c) = rng.uniform();
      in(10, c) = rng.uniform(0.06, 0.6);
      noise(0, c) = rng.normal();
      noise(1, c) = rng.normal();
    }
    const auto eval = vae::evaluate_batch(m, in, noise, vae::Likelihood::bernoulli, true);
    const double err = nnet::max_relative_error(
        vae::parameter_spans(m), vae::gradient_spans(*eval.gradients),
        [&] { return vae::evaluate_batch(m, in, noise, vae::Likelihood::bernoulli, false).mean.total; }, 1e-5);
    worst = std::max(worst, err);
  }
  return judged(worst < 1e-5, "max relative error over 100 seeds=" + fmt(worst) + " (< 1e-5)");
}

Outcome c3_kl() {
  Rng pick(33);
  Rng draws(34);
  double worst = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    Vector mu(2), lv(2);
    mu << pick.normal(0.0, 1.0), pick.normal(0.0, 1.0);
    lv << pick.uniform(-1.5, 1.5), pick.uniform(-1.5, 1.5);
    const vae::LatentCode code{mu, lv, mu};
    const Vector sd = (0.5 * lv.array()).exp();
    double acc = 0.0;
    constexpr int kDraws = 1'000'000;
    Vector eps(2);
    for (int d = 0; d < kDraws; ++d) {
      eps << draws.normal(), draws.normal();
      const Vector z = vae::reparameterize(code, eps);
      acc += (-0.5 * eps.squaredNorm() - sd.array().log().sum()) - (-0.5 * z.squaredNorm());
    }
    const double mc = acc / kDraws;
    const double closed = vae::kl_divergence(mu, lv);
    worst = std::max(worst, std::abs(mc - closed) / closed);
  }
  const double at_prior = vae::kl_divergence(Vector::Zero(2), Vector::Zero(2));
  return judged(worst < 0.01 && at_prior == 0.0,
                "max relative gap over 20 pairs=" + fmt(worst) + " (< 0.01); KL(0,0)=" + fmt(at_prior));
}

Outcome c4_adadelta() {
  nnet::AdadeltaConfig cfg;
  cfg.rho = 0.95;
  cfg.epsilon = 1e-6;
  nnet::AdadeltaState state(cfg);
  std::vector<double> param{0.0};
  const std::vector<double> grad{1.0};
  const std::vector<std::span<double>> params{param};
  const std::vector<std::span<const double>> grads{grad};
  state.step(params, grads);
  const double expected = -0.0044721353;
  const double gap = std::abs(param[0] - expected);
  return judged(gap <= 1e-12, "delta=" + fmt(param[0]) + " target=" + fmt(expected) + " gap=" + fmt(gap) +
                                  " (<= 1e-12)");
}

Outcome c5_statistics() {
  constexpr double kTol = 1e-9;
  double worst = 0.0;
  int cases = 0;
  auto track = [&](double got, double want) {
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  };
  for (const auto& c : oracle::kTailCases) {
    track(analysis::student_t_two_sided(c.t, c.df), c.p);
    ++cases;
  }
  for (const auto& c : oracle::kSampleCases) {
    const auto pooled = analysis::ttest_ind(c.a, c.b);
    const auto welch = analysis::ttest_ind(c.a, c.b, analysis::VarianceModel::welch);
    track(pooled.t, c.t_pooled);
    track(pooled.p, c.p_pooled);
    track(welch.t, c.t_welch);
    track(welch.df, c.df_welch);
    track(welch.p, c.p_welch);
    if (c.a.size() == c.b.size()) {
      const auto r = analysis::pearson_with_p(c.a, c.b);
      track(r.r, c.r);
      track(r.p, c.p_r);
    }
    ++cases;
  }
  // worked examples
  const std::vector<double> wa{2.1, 2.0, 1.9, 2.0}, wb{1.0, 1.1, 0.9, 1.0}, same{1, 2, 3};
  const auto worked = analysis::ttest_ind(wa, wb);
  track(worked.t, 10.0 * std::sqrt(3.0));
  track(worked.df, 6.0);
  track(worked.p < 1e-5 ? 0.0 : 1.0, 0.0);
  track(analysis::ttest_ind(wb, wa).t, -worked.t);
  track(analysis::ttest_ind(wb, wa).p, worked.p);
  track(analysis::ttest_ind(same, same).t, 0.0);
  track(analysis::ttest_ind(same, same).p, 1.0);
  cases += 3;
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial, ++cases) {
    const std::size_t n = 6 + rng.below(40);
    std::vector<double> scores(n);
    std::vector<Group> labels(n);
    std::vector<bool> positive(n);
    for (std::size_t k = 0; k < n; ++k) {
      labels[k] = k % 2 == 0 ? Group::asd : Group::nc;
      positive[k] = labels[k] == Group::asd;
      scores[k] = std::round(rng.normal(positive[k] ? 0.5 : 0.0, 1.0) * 3.0);
    }
    track(analysis::roc_auc(scores, labels), oracle::auc_pairs(scores, positive));
  }
  {
    const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
    const std::vector<Group> l{Group::nc, Group::nc, Group::asd, Group::asd};
    track(analysis::roc_auc(s, l), 0.75);
  }
  return judged(worst <= kTol, std::to_string(cases) + " cases, max deviation=" + fmt(worst) + " (<= 1e-9)");
}

Outcome c6_recovery() {
  const auto start = std::chrono::steady_clock::now();
  fixture::TempDir dir("acceptance_c6");
  const cli::SyntheticSpec spec;
  const auto cohort = cli::cmd_synth(spec, dir / "syn");
  vae::TrainConfig train;
  train.epochs = 50;
  cli::cmd_train(dir / "syn/manifest.csv", dir / "syn/connectivity", train, dir / "run");
  const auto report =
      cli::cmd_analyze(dir / "run/checkpoint.json", dir / "syn/manifest.csv", dir / "syn/connectivity", dir / "an");
  if (!report.selected) return judged(false, "no feature reached significance");
  const auto& chosen = report.features[static_cast<std::size_t>(*report.selected)];
  cli::GenerateOptions gen;
  gen.feature = *report.selected;
  const auto generated = cli::cmd_generate(dir / "run/checkpoint.json", gen, dir / "gen");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const Vector delta = vectorize_upper(generated.delta.values).cwiseAbs();
  std::vector<Index> order(static_cast<std::size_t>(delta.size()));
  std::iota(order.begin(), order.end(), Index{0});
  const std::size_t top = cohort.planted.size();
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                    [&](Index a, Index b) { return delta(a) > delta(b) || (delta(a) == delta(b) && a < b); });
  std::set<Index> planted;
  for (const auto& p : cohort.planted) planted.insert(p.edge);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < top; ++k) hits += planted.count(order[k]);
  const double overlap = static_cast<double>(hits) / static_cast<double>(top);

  const double planted_iq_sign = spec.iq_coupling < 0 ? -1.0 : 1.0;
  const bool iq_ok = report.iq.present && report.iq.r_oriented * planted_iq_sign > 0.0;
  const double auc = report.auc ? report.auc->oriented : 0.0;
  const bool ok = chosen.test.p < 0.01 && auc > 0.8 && iq_ok && overlap > 0.8 && seconds < 300.0;
  return judged(ok, "feature=" + std::to_string(*report.selected + 1) + " p=" + fmt(chosen.test.p) +
                        " auc=" + fmt(auc) + " iq_r=" + fmt(report.iq.r_oriented) + " overlap=" + fmt(overlap) +
                        " seconds=" + fmt(seconds) + " (p<0.01, auc>0.8, iq sign, overlap>0.8, <300s)");
}

Outcome c7_generator() {
  vae::VaeModel model = vae::make_model(vae::Architecture{}, 12);
  Rng rng(13);
  for (auto& l : model.decoder.layers)
    for (Index k = 0; k < l.biases.size(); ++k) l.biases(k) = rng.uniform(-0.3, 0.3);
  vae::CohortStats cohort;
  cohort.mean = Vector(2);
  cohort.mean << 0.2, -0.4;
  cohort.sd = Vector(2);
  cohort.sd << 0.8, 1.3;
  cohort.mean_age = 17.0;
  cohort.subjects = 100;
  model.cohort = cohort;

  bool ok = true;
  std::string why;
  const auto zero = generator::feature_delta(model, 0, 0.0);
  if (zero.values.cwiseAbs().maxCoeff() != 0.0) ok = false, why += " zero-shift";
  const auto grid = generator::manifold_grid(model, -2.0, 2.0, 5);
  if (grid.at(2, 2).delta.cwiseAbs().maxCoeff() != 0.0) ok = false, why += " center";
  for (int trial = 0; trial < 20; ++trial) {
    Vector z(2);
    z << rng.normal(0, 2), rng.normal(0, 2);
    const Matrix g = generator::generate_matrix(model, z, rng.uniform(7.0, 50.0));
    bool valid = (g - g.transpose()).cwiseAbs().maxCoeff() == 0.0 && g.diagonal().cwiseAbs().maxCoeff() == 0.0;
    for (Index i = 0; i < g.rows(); ++i)
      for (Index j = 0; j < g.cols(); ++j)
        if (i != j && !(g(i, j) > 0.0 && g(i, j) < 1.0)) valid = false;
    if (!valid) ok = false, why += " matrix";
  }
  double worst = 0.0;
  for (Index f = 0; f < 2; ++f)
    for (double shift : {-1.0, 1.0, 2.5}) {
      const auto d = generator::feature_delta(model, f, shift);
      const auto fd = generator::fcs_delta(model, f, shift);
      worst = std::max(worst, std::abs(fd.delta.sum() - 2.0 * vectorize_upper(d.values).sum()));
    }
  if (worst > 1e-12) ok = false, why += " fcs";
  return judged(ok, "zero shift, manifold center, 20 generated matrices, fcs sum gap=" + fmt(worst) +
                        (why.empty() ? "" : " failed:" + why));
}

Outcome c8_determinism() {
  std::vector<std::string> differing;
  fixture::TempDir a("acceptance_c8a"), b("acceptance_c8b");
  for (const auto* d : {&a, &b}) {
    const fs::path root = d->path();
    cli::cmd_synth(cli::SyntheticSpec{}, root / "syn");
    Rng rng(77);
    for (int s = 0; s < 3; ++s) {
      Matrix ts(60, kRegionCount);
      for (Index k = 0; k < ts.size(); ++k) ts(k) = rng.normal();
      csv::write_matrix(root / "ts" / ("s" + std::to_string(s) + ".csv"), ts, 17);
    }
    cli::cmd_connectome(root / "ts", root / "conn");
    vae::TrainConfig train;
    train.epochs = 50;
    cli::cmd_train(root / "syn/manifest.csv", root / "syn/connectivity", train, root / "run");
    cli::cmd_analyze(root / "run/checkpoint.json", root / "syn/manifest.csv", root / "syn/connectivity", root / "an");
    cli::cmd_generate(root / "run/checkpoint.json", {}, root / "gen");
    cli::cmd_manifold(root / "run/checkpoint.json", {}, root / "man");
  }
  for (const char* sub : {"syn", "conn", "run", "an", "gen", "man"})
    if (snapshot(a / sub) != snapshot(b / sub)) differing.emplace_back(sub);
  const std::string history = csv::read_file(a / "run/loss_history.csv");
  const auto rows = std::count(history.begin(), history.end(), '\n') - 1;
  std::string detail = "synth, connectome, train, analyze, generate, manifold compared; history rows=" +
                       std::to_string(rows);
  for (const auto& d : differing) detail += " differs:" + d;
  return judged(differing.empty() && rows == 50, detail);
}

Outcome c9_real_data() {
  const char* env = std::getenv("LATENTCONN_ABIDE_DIR");
  if (env == nullptr || *env == '\0') return {Verdict::skip, "LATENTCONN_ABIDE_DIR not set"};
  const fs::path data(env);
  fixture::TempDir dir("acceptance_c9");
  fs::path edges = data / "connectivity";
  if (!fs::exists(edges) && fs::exists(data / "timeseries")) {
    cli::cmd_connectome(data / "timeseries", dir / "conn");
    edges = dir / "conn";
  }
  vae::TrainConfig train;
  train.epochs = 50;
  cli::cmd_train(data / "manifest.csv", edges, train, dir / "run");
  const auto report = cli::cmd_analyze(dir / "run/checkpoint.json", data / "manifest.csv", edges, dir / "an");
  if (!report.selected || !report.auc) return judged(false, "no feature reached significance");
  const double auc = report.auc->oriented;
  return judged(std::abs(auc - 0.60) <= 0.10, "auc=" + fmt(auc) + " (0.60 +/- 0.10)");
}

const std::vector<std::pair<std::string, std::pair<std::string, std::function<Outcome()>>>> kCriteria = {
    {"C1", {"dimensional fidelity", c1_dimensions}},
    {"C2", {"gradient correctness", c2_gradients}},
    {"C3", {"KL oracle", c3_kl}},
    {"C4", {"Adadelta single step", c4_adadelta}},
    {"C5", {"statistics oracles", c5_statistics}},
    {"C6", {"synthetic recovery", c6_recovery}},
    {"C7", {"generator structure", c7_generator}},
    {"C8", {"determinism", c8_determinism}},
    {"C9", {"real data", c9_real_data}},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> wanted(argv + 1, argv + argc);
  int passed = 0, failed = 0, skipped = 0;
  for (const auto& [id, entry] : kCriteria) {
    if (!wanted.empty() && !wanted.count(id)) continue;
    Outcome out;
    try {
      out = entry.second();
    } catch (const std::exception& e) {
      out = {Verdict::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = out.verdict == Verdict::pass ? "PASS" : out.verdict == Verdict::fail ? "FAIL" : "SKIP";
    std::cout << id << " " << tag << " " << entry.first << ": " << out.detail << std::endl;
    (out.verdict == Verdict::pass ? passed : out.verdict == Verdict::fail ? failed : skipped) += 1;
  }
  if (failed > 0) return 1;
  if (passed == 0 && skipped > 0) return 77;
  return 0;
}
