#include <benchmark/benchmark.h>

#include <vector>

#include "latentconn/connectome.hpp"
#include "latentconn/dataset.hpp"
#include "latentconn/generator.hpp"
#include "latentconn/nnet.hpp"
#include "latentconn/rng.hpp"
#include "latentconn/vae.hpp"

using namespace latentconn;

namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Index k = 0; k < m.size(); ++k) m(k) = rng.uniform();
  return m;
}

std::vector<SubjectRecord> cohort(std::size_t subjects) {
  Rng rng(9);
  std::vector<SubjectRecord> out;
  for (std::size_t s = 0; s < subjects; ++s) {
    SubjectRecord r;
    r.subject_id = "s" + std::to_string(s);
    r.group = s % 2 == 0 ? Group::asd : Group::nc;
    r.age = rng.uniform(8.0, 40.0);
    r.edges = Vector(edge_count_for(kRegionCount));
    for (Index k = 0; k < r.edges.size(); ++k) r.edges(k) = rng.uniform(0.1, 0.9);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

static void BM_Connectivity(benchmark::State& state) {
  const Matrix ts = random_matrix(state.range(0), kRegionCount, 1);
  for (auto _ : state) benchmark::DoNotOptimize(build_connectivity(ts));
}
BENCHMARK(BM_Connectivity)->Arg(120)->Arg(300);

static void BM_EncoderForwardBackward(benchmark::State& state) {
  const std::vector<nnet::LayerSpec> specs = {{4006, 128, nnet::Activation::rectifier},
                                              {128, 128, nnet::Activation::rectifier}};
  const nnet::Network net = nnet::init_params(specs, 3);
  const Matrix x = random_matrix(4006, state.range(0), 4);
  const Matrix upstream = random_matrix(128, state.range(0), 5);
  for (auto _ : state) {
    const auto cache = nnet::forward(net, x);
    benchmark::DoNotOptimize(nnet::backward(net, cache, upstream));
  }
}
BENCHMARK(BM_EncoderForwardBackward)->Arg(1)->Arg(64);

static void BM_VaeBatch(benchmark::State& state) {
  const vae::VaeModel model = vae::make_model(vae::Architecture{}, 6);
  const Matrix x = random_matrix(4006, 64, 7);
  const Matrix noise = random_matrix(2, 64, 8);
  for (auto _ : state)
    benchmark::DoNotOptimize(vae::evaluate_batch(model, x, noise, vae::Likelihood::bernoulli, true));
}
BENCHMARK(BM_VaeBatch);

static void BM_TrainEpoch(benchmark::State& state) {
  const auto subjects = cohort(256);
  vae::TrainConfig config;
  config.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(vae::train(subjects, config));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

static void BM_Manifold(benchmark::State& state) {
  vae::VaeModel model = vae::make_model(vae::Architecture{}, 10);
  model.cohort = vae::CohortStats{Vector::Zero(2), Vector::Ones(2), 17.0, 100};
  for (auto _ : state) benchmark::DoNotOptimize(generator::manifold_grid(model, -2.0, 2.0, 5));
}
BENCHMARK(BM_Manifold)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
