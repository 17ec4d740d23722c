#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "latentconn/dataset.hpp"
#include "latentconn/nnet.hpp"
#include "latentconn/rng.hpp"
#include "oracles.hpp"

namespace fixture {

using namespace latentconn;

inline std::vector<oracle::NaiveLayer> to_naive(const nnet::Network& net) {
  std::vector<oracle::NaiveLayer> out;
  for (const auto& l : net.layers) {
    oracle::NaiveLayer n;
    n.w.assign(static_cast<std::size_t>(l.out_dim()), std::vector<double>(static_cast<std::size_t>(l.in_dim())));
    for (Index o = 0; o < l.out_dim(); ++o)
      for (Index i = 0; i < l.in_dim(); ++i) n.w[static_cast<std::size_t>(o)][static_cast<std::size_t>(i)] = l.weights(o, i);
    n.b.assign(l.biases.data(), l.biases.data() + l.biases.size());
    n.act = l.activation == nnet::Activation::identity ? 0 : l.activation == nnet::Activation::rectifier ? 1 : 2;
    out.push_back(std::move(n));
  }
  return out;
}

// Small cohort with one group-linked factor loading on the first `planted`
// edges; ASD subjects sit at +1, NC at -1 on the factor.
inline std::vector<SubjectRecord> small_cohort(std::size_t subjects, Index edges, Index planted, std::uint64_t seed,
                                               double loading = -0.25) {
  Rng rng(seed);
  Vector base(edges);
  for (Index e = 0; e < edges; ++e) base(e) = rng.uniform(0.3, 0.6);
  std::vector<SubjectRecord> out;
  for (std::size_t s = 0; s < subjects; ++s) {
    SubjectRecord r;
    r.subject_id = "s" + std::to_string(1000 + s);
    r.group = s % 2 == 0 ? Group::asd : Group::nc;
    r.age = rng.uniform(8.0, 40.0);
    const double factor = (r.group == Group::asd ? 1.0 : -1.0) + rng.normal();
    r.fiq = 100.0 - 5.0 * factor + rng.normal(0.0, 5.0);
    r.edges = base;
    for (Index e = 0; e < edges; ++e) {
      double v = base(e) + (e < planted ? loading * factor : 0.0) + rng.normal(0.0, 0.03);
      r.edges(e) = std::clamp(v, 0.0, 1.0);
    }
    out.push_back(std::move(r));
  }
  return out;
}

// Fresh scratch directory under the system temp dir, removed on scope exit.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("latentconn_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
  std::filesystem::path path_;
};

}  // namespace fixture
