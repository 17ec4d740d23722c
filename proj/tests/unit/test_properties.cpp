#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "latentconn/analysis.hpp"
#include "latentconn/connectome.hpp"
#include "latentconn/generator.hpp"
#include "latentconn/nnet.hpp"
#include "latentconn/rng.hpp"
#include "latentconn/vae.hpp"

using namespace latentconn;
using namespace latentconn::analysis;

namespace {

constexpr int kTrials = 25;

Matrix random_series(Rng& rng, Index samples, Index nodes) {
  Matrix ts(samples, nodes);
  const Vector shared = [&] {
    Vector s(samples);
    for (Index t = 0; t < samples; ++t) s(t) = rng.normal();
    return s;
  }();
  for (Index j = 0; j < nodes; ++j) {
    const double w = rng.uniform(-1.5, 1.5);
    for (Index t = 0; t < samples; ++t) ts(t, j) = w * shared(t) + rng.normal();
  }
  return ts;
}

std::vector<Group> random_labels(Rng& rng, std::size_t n) {
  std::vector<Group> labels(n);
  for (auto& g : labels) g = rng.uniform() < 0.5 ? Group::asd : Group::nc;
  labels[0] = Group::asd;
  labels[1] = Group::nc;
  return labels;
}

}  // namespace

TEST(Property, ConnectivityIsSymmetricBoundedZeroDiagonal) {
  Rng rng(101);
  for (int trial = 0; trial < kTrials; ++trial) {
    const Index nodes = 3 + static_cast<Index>(rng.below(30));
    const Index samples = 5 + static_cast<Index>(rng.below(60));
    const Matrix c = build_connectivity(random_series(rng, samples, nodes));
    EXPECT_EQ((c - c.transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(c.diagonal().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GE(c.minCoeff(), 0.0);
    EXPECT_LE(c.maxCoeff(), 1.0);
    EXPECT_NO_THROW(validate_connectivity(c));
  }
}

TEST(Property, VectorizeDevectorizeAreInverse) {
  Rng rng(102);
  for (int trial = 0; trial < kTrials; ++trial) {
    const Index nodes = 2 + static_cast<Index>(rng.below(90));
    Vector v(edge_count_for(nodes));
    for (Index k = 0; k < v.size(); ++k) v(k) = rng.uniform();
    EXPECT_EQ((vectorize_upper(devectorize(v)) - v).cwiseAbs().maxCoeff(), 0.0);
    const Matrix m = devectorize(v);
    EXPECT_EQ((devectorize(vectorize_upper(m)) - m).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(node_count_for(v.size()), nodes);
  }
}

TEST(Property, FcsIsPermutationEquivariant) {
  Rng rng(103);
  for (int trial = 0; trial < kTrials; ++trial) {
    const Index nodes = 3 + static_cast<Index>(rng.below(40));
    const Matrix c = build_connectivity(random_series(rng, 40, nodes));
    std::vector<Index> perm(static_cast<std::size_t>(nodes));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (std::size_t k = perm.size() - 1; k > 0; --k) std::swap(perm[k], perm[rng.below(k + 1)]);
    Matrix p(nodes, nodes);
    for (Index i = 0; i < nodes; ++i)
      for (Index j = 0; j < nodes; ++j) p(i, j) = c(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    const Vector s = fcs(c), sp = fcs(p);
    for (Index i = 0; i < nodes; ++i) EXPECT_NEAR(sp(i), s(perm[static_cast<std::size_t>(i)]), 1e-12);
  }
}

TEST(Property, PearsonAffineSignInvariance) {
  Rng rng(104);
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t n = 3 + rng.below(100);
    std::vector<double> x(n), y(n), ax(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = rng.normal();
      y[k] = 0.5 * x[k] + rng.normal();
    }
    double a = rng.uniform(-20.0, 20.0);
    if (std::abs(a) < 0.1) a = 3.0;
    const double b = rng.uniform(-100.0, 100.0);
    for (std::size_t k = 0; k < n; ++k) ax[k] = a * x[k] + b;
    EXPECT_NEAR(pearson_corr(ax, y), (a > 0 ? 1.0 : -1.0) * pearson_corr(x, y), 1e-12);
  }
}

TEST(Property, GradientCheckOnRandomSmallNetworks) {
  Rng rng(105);
  const nnet::Activation acts[] = {nnet::Activation::identity, nnet::Activation::rectifier, nnet::Activation::sigmoid};
  for (int trial = 0; trial < kTrials; ++trial) {
    const Index in = 1 + static_cast<Index>(rng.below(10));
    const Index hidden = 1 + static_cast<Index>(rng.below(10));
    const Index out = 1 + static_cast<Index>(rng.below(10));
    const std::vector<nnet::LayerSpec> specs = {{in, hidden, acts[rng.below(3)]}, {hidden, out, acts[rng.below(3)]}};
    nnet::Network net = nnet::init_params(specs, rng.next());
    for (auto& l : net.layers)
      for (Index k = 0; k < l.biases.size(); ++k) l.biases(k) = rng.uniform(-0.5, 0.5);
    Matrix x(in, 3), target(out, 3);
    for (Index k = 0; k < x.size(); ++k) x(k) = rng.normal();
    for (Index k = 0; k < target.size(); ++k) target(k) = rng.normal();
    const auto loss = [&](const Matrix& y) {
      const Matrix r = y - target;
      return std::pair<double, Matrix>{0.5 * r.squaredNorm(), r};
    };
    EXPECT_LT(nnet::grad_check(net, loss, x), 1e-5) << "trial " << trial;
  }
}

TEST(Property, AdadeltaIsBitDeterministic) {
  Rng rng(106);
  for (int trial = 0; trial < 5; ++trial) {
    const std::uint64_t seed = rng.next();
    const std::vector<nnet::LayerSpec> specs = {{4, 6, nnet::Activation::rectifier}, {6, 2, nnet::Activation::sigmoid}};
    auto run = [&] {
      nnet::Network net = nnet::init_params(specs, seed);
      nnet::AdadeltaState opt;
      Rng data(seed ^ 0x5a5a);
      for (int step = 0; step < 30; ++step) {
        Matrix x(4, 2);
        for (Index k = 0; k < x.size(); ++k) x(k) = data.normal();
        const auto cache = nnet::forward(net, x);
        const Matrix r = cache.output() - Matrix::Constant(2, 2, 0.25);
        const auto grads = nnet::backward(net, cache, r);
        opt.step(nnet::parameter_spans(net), nnet::gradient_spans(grads));
      }
      return net;
    };
    const auto a = run(), b = run();
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
      EXPECT_EQ((a.layers[l].weights - b.layers[l].weights).cwiseAbs().maxCoeff(), 0.0);
      EXPECT_EQ((a.layers[l].biases - b.layers[l].biases).cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(Property, KlNonnegativeAndZeroOnlyAtPrior) {
  Rng rng(107);
  for (int trial = 0; trial < 200; ++trial) {
    Vector mu(2), lv(2);
    mu << rng.normal(0, 2), rng.normal(0, 2);
    lv << rng.normal(0, 2), rng.normal(0, 2);
    EXPECT_GT(vae::kl_divergence(mu, lv), 0.0);
  }
  EXPECT_EQ(vae::kl_divergence(Vector::Zero(2), Vector::Zero(2)), 0.0);
}

TEST(Property, LossTotalsAndGradientOnDownsizedVae) {
  Rng rng(108);
  for (int trial = 0; trial < 10; ++trial) {
    vae::Architecture arch;
    arch.edges = 10;
    arch.hidden = {4, 4};
    auto model = vae::make_model(arch, rng.next());
    for (auto span : vae::parameter_spans(model))
      for (double& v : span) v += rng.uniform(-0.2, 0.2);  // keep pre-activations off the rectifier kink
    Matrix x(arch.input_dim(), 3), noise(2, 3);
    for (Index k = 0; k < x.size(); ++k) x(k) = rng.uniform(0.05, 0.95);
    for (Index k = 0; k < noise.size(); ++k) noise(k) = rng.normal();
    const auto eval = vae::evaluate_batch(model, x, noise, vae::Likelihood::bernoulli, true);
    EXPECT_NEAR(eval.mean.total, eval.mean.reconstruction + eval.mean.kl, 1e-9 * std::abs(eval.mean.total));
    const auto grads = vae::gradient_spans(*eval.gradients);
    auto params = vae::parameter_spans(model);
    double worst = 0.0;
    for (std::size_t s = 0; s < params.size(); ++s) {
      for (std::size_t k = 0; k < params[s].size(); k += 3) {
        const double keep = params[s][k];
        const double h = 1e-5;
        params[s][k] = keep + h;
        const double up = vae::evaluate_batch(model, x, noise, vae::Likelihood::bernoulli, false).mean.total;
        params[s][k] = keep - h;
        const double down = vae::evaluate_batch(model, x, noise, vae::Likelihood::bernoulli, false).mean.total;
        params[s][k] = keep;
        const double numeric = (up - down) / (2 * h);
        const double analytic = grads[s][k];
        worst = std::max(worst, std::abs(numeric - analytic) / std::max(1e-8, std::abs(numeric) + std::abs(analytic)));
      }
    }
    EXPECT_LT(worst, 1e-5) << "trial " << trial;
  }
}

TEST(Property, AucInvariantUnderIncreasingTransforms) {
  Rng rng(109);
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t n = 4 + rng.below(80);
    const auto labels = random_labels(rng, n);
    std::vector<double> s(n), e(n), c(n);
    for (std::size_t k = 0; k < n; ++k) {
      s[k] = std::round(rng.normal() * 4.0) / 4.0;  // coarse grid forces ties
      e[k] = std::exp(s[k]);
      c[k] = s[k] * s[k] * s[k] + 7.0;
    }
    const double auc = roc_auc(s, labels);
    EXPECT_EQ(roc_auc(e, labels), auc);
    EXPECT_EQ(roc_auc(c, labels), auc);
    EXPECT_NEAR(trapezoid_auc(roc_curve(s, labels)), auc, 1e-12);
    std::vector<bool> positive(n);
    for (std::size_t k = 0; k < n; ++k) positive[k] = labels[k] == Group::asd;
    EXPECT_NEAR(oracle::auc_pairs(s, positive), auc, 1e-12);
    EXPECT_GE(auc, 0.0);
    EXPECT_LE(auc, 1.0);
  }
}

TEST(Property, TTestAndSelectionScaleInvariance) {
  Rng rng(110);
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t n = 10 + rng.below(60);
    const auto labels = random_labels(rng, n);
    Matrix f(static_cast<Index>(n), 3);
    for (std::size_t k = 0; k < n; ++k) {
      const double g = labels[k] == Group::asd ? 1.0 : 0.0;
      f(static_cast<Index>(k), 0) = rng.normal();
      f(static_cast<Index>(k), 1) = rng.normal() + 0.8 * g;
      f(static_cast<Index>(k), 2) = rng.normal() + 0.4 * g;
    }
    std::vector<double> a, b;
    for (std::size_t k = 0; k < n; ++k) (labels[k] == Group::asd ? a : b).push_back(f(static_cast<Index>(k), 1));
    const double c = rng.uniform(0.01, 100.0);
    std::vector<double> ca(a), cb(b);
    for (auto& v : ca) v *= c;
    for (auto& v : cb) v *= c;
    const auto t = ttest_ind(a, b), tc = ttest_ind(ca, cb);
    EXPECT_NEAR(tc.t, t.t, 1e-9 * std::max(1.0, std::abs(t.t)));
    EXPECT_NEAR(tc.p, t.p, 1e-12);
    EXPECT_GE(t.p, 0.0);
    EXPECT_LE(t.p, 1.0);

    const auto sel = select_asd_feature(f, labels);
    Matrix g = f;
    for (Index j = 0; j < 3; ++j) g.col(j) = g.col(j) * rng.uniform(-50.0, 50.0) + Vector::Constant(g.rows(), rng.normal(0, 10));
    const auto sel2 = select_asd_feature(g, labels);
    EXPECT_EQ(sel.index, sel2.index);
    if (sel.index) EXPECT_LT(sel.features[static_cast<std::size_t>(*sel.index)].test.p, 0.05);
  }
}

TEST(Property, GeneratedMatricesAreConnectivity) {
  Rng rng(111);
  for (int trial = 0; trial < 10; ++trial) {
    vae::Architecture arch;
    arch.edges = edge_count_for(12);
    arch.hidden = {6, 6};
    auto model = vae::make_model(arch, rng.next());
    vae::CohortStats cohort;
    cohort.mean = Vector::Zero(2);
    cohort.sd = Vector::Ones(2);
    cohort.mean_age = 20.0;
    cohort.subjects = 10;
    model.cohort = cohort;
    Vector z(2);
    z << rng.normal(0, 3), rng.normal(0, 3);
    const Matrix g = generator::generate_matrix(model, z, rng.uniform(5.0, 60.0));
    EXPECT_NO_THROW(validate_connectivity(g));
    EXPECT_EQ(g.diagonal().cwiseAbs().maxCoeff(), 0.0);
    const auto d = generator::feature_delta(model, static_cast<Index>(rng.below(2)), rng.normal(0, 2));
    EXPECT_EQ((d.values - d.values.transpose()).cwiseAbs().maxCoeff(), 0.0);
  }
}
