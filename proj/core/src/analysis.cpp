#include "latentconn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "latentconn/connectome.hpp"
#include "latentconn/csv.hpp"
#include "latentconn/errors.hpp"

namespace latentconn::analysis {

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta: continued fraction did not converge");
}

GroupSummary summarize(std::span<const double> v) {
  GroupSummary s;
  s.n = v.size();
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

void require_both_groups(std::span<const Group> labels, const char* what) {
  const bool asd = std::find(labels.begin(), labels.end(), Group::asd) != labels.end();
  const bool nc = std::find(labels.begin(), labels.end(), Group::nc) != labels.end();
  if (!asd || !nc) throw ValidationError(std::string(what) + ": both ASD and NC subjects are required");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("incomplete beta: shape parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("incomplete beta: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("student t: degrees of freedom must be positive");
  if (std::isnan(t)) throw NumericError("student t: NaN statistic");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(incomplete_beta(0.5 * df, 0.5, x), 0.0, 1.0);
}

TTestResult ttest_ind(std::span<const double> a, std::span<const double> b, VarianceModel variance) {
  if (a.size() < 2 || b.size() < 2) throw ValidationError("ttest_ind: each sample needs at least 2 values");
  for (auto s : {a, b})
    for (double v : s)
      if (!std::isfinite(v)) throw ValidationError("ttest_ind: non-finite value");
  const auto sa = summarize(a);
  const auto sb = summarize(b);
  const double na = static_cast<double>(sa.n);
  const double nb = static_cast<double>(sb.n);
  const double va = sa.sd * sa.sd;
  const double vb = sb.sd * sb.sd;

  TTestResult r;
  double se = 0.0;
  if (variance == VarianceModel::pooled) {
    r.df = na + nb - 2.0;
    const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / r.df;
    se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  } else {
    const double qa = va / na;
    const double qb = vb / nb;
    se = std::sqrt(qa + qb);
    r.df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  }
  if (!(se > 0.0)) throw DegenerateSeriesError("ttest_ind: zero variance in both samples");
  r.t = (sa.mean - sb.mean) / se;
  r.p = student_t_two_sided(r.t, r.df);
  return r;
}

CorrelationResult pearson_with_p(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("pearson_with_p: length mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) continue;
    xs.push_back(x[i]);
    ys.push_back(y[i]);
  }
  CorrelationResult c;
  c.n_used = xs.size();
  if (c.n_used < 3) {
    throw InsufficientDataError("pearson_with_p: " + std::to_string(c.n_used) + " complete pairs, need 3");
  }
  c.r = pearson_corr(xs, ys);
  if (std::abs(c.r) >= 1.0) {
    c.p = 0.0;
    return c;
  }
  const double df = static_cast<double>(c.n_used) - 2.0;
  const double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
  c.p = student_t_two_sided(t, df);
  return c;
}

double roc_auc(std::span<const double> scores, std::span<const Group> labels) {
  if (scores.size() != labels.size()) throw ShapeError("roc_auc: score/label length mismatch");
  require_both_groups(labels, "roc_auc");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return scores[i] < scores[j]; });

  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) ++end;
    const double midrank = 0.5 * static_cast<double>(start + 1 + end);  // ranks are 1-based
    for (std::size_t k = start; k < end; ++k) {
      if (labels[order[k]] == Group::asd) {
        rank_sum += midrank;
        ++n_pos;
      }
    }
    start = end;
  }
  const double pos = static_cast<double>(n_pos);
  const double neg = static_cast<double>(scores.size() - n_pos);
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const Group> labels) {
  if (scores.size() != labels.size()) throw ShapeError("roc_curve: score/label length mismatch");
  require_both_groups(labels, "roc_curve");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return scores[i] > scores[j]; });
  const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), Group::asd));
  const auto neg = static_cast<double>(labels.size()) - pos;

  std::vector<RocPoint> curve{{0.0, 0.0}};
  double tp = 0.0, fp = 0.0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) {
      (labels[order[end]] == Group::asd ? tp : fp) += 1.0;
      ++end;
    }
    curve.push_back({fp / neg, tp / pos});
    start = end;
  }
  return curve;
}

double trapezoid_auc(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t k = 1; k < curve.size(); ++k) {
    area += (curve[k].false_positive_rate - curve[k - 1].false_positive_rate) *
            (curve[k].true_positive_rate + curve[k - 1].true_positive_rate) * 0.5;
  }
  return area;
}

Selection select_asd_feature(const Matrix& features, std::span<const Group> labels, VarianceModel variance,
                             double alpha) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw ShapeError("select_asd_feature: feature rows do not match labels");
  }
  require_both_groups(labels, "select_asd_feature");
  Selection sel;
  for (Index j = 0; j < features.cols(); ++j) {
    std::vector<double> asd, nc;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      (labels[i] == Group::asd ? asd : nc).push_back(features(static_cast<Index>(i), j));
    }
    FeatureComparison fc;
    fc.feature = j;
    fc.asd = summarize(asd);
    fc.nc = summarize(nc);
    fc.test = ttest_ind(asd, nc, variance);
    sel.features.push_back(fc);
  }
  for (const auto& fc : sel.features) {
    if (fc.test.p < alpha && (!sel.index || fc.test.p < sel.features[static_cast<std::size_t>(*sel.index)].test.p)) {
      sel.index = fc.feature;
    }
  }
  return sel;
}

StatsReport analyze(const Matrix& features, std::span<const Group> labels, std::span<const double> iq,
                    VarianceModel variance, double alpha) {
  StatsReport rep;
  rep.variance = variance;
  rep.alpha = alpha;
  rep.n_subjects = labels.size();
  rep.n_asd = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Group::asd));
  rep.n_nc = rep.n_subjects - rep.n_asd;
  auto sel = select_asd_feature(features, labels, variance, alpha);
  rep.features = std::move(sel.features);
  rep.selected = sel.index;
  if (!rep.selected) return rep;

  const auto& chosen = rep.features[static_cast<std::size_t>(*rep.selected)];
  rep.orientation = chosen.asd.mean >= chosen.nc.mean ? 1 : -1;
  const Vector column = features.col(*rep.selected);
  const std::span<const double> scores(column.data(), static_cast<std::size_t>(column.size()));

  AucResult auc;
  auc.value = roc_auc(scores, labels);
  auc.inverted = auc.value < 0.5;
  auc.oriented = std::max(auc.value, 1.0 - auc.value);
  rep.auc = auc;

  if (!iq.empty()) {
    if (iq.size() != labels.size()) throw ShapeError("analyze: IQ length does not match subjects");
    try {
      const auto c = pearson_with_p(scores, iq);
      rep.iq = {true, c.n_used, c.r, c.p, c.r * rep.orientation};
    } catch (const InsufficientDataError&) {
      rep.iq.present = false;
      rep.iq.n_used = static_cast<std::size_t>(std::count_if(iq.begin(), iq.end(), [](double v) { return !std::isnan(v); }));
    }
  }
  return rep;
}

std::string report_json(const StatsReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["schema"] = "latentconn-stats/1";
  j["checkpoint_sha256"] = r.checkpoint_sha256;
  j["test"] = r.variance == VarianceModel::pooled ? "student-pooled" : "welch";
  j["alpha"] = r.alpha;
  j["n_subjects"] = r.n_subjects;
  j["n_asd"] = r.n_asd;
  j["n_nc"] = r.n_nc;
  ordered_json feats = ordered_json::array();
  for (const auto& f : r.features) {
    feats.push_back({{"index", f.feature},
                     {"name", "f" + std::to_string(f.feature + 1)},
                     {"asd_mean", f.asd.mean},
                     {"asd_sd", f.asd.sd},
                     {"nc_mean", f.nc.mean},
                     {"nc_sd", f.nc.sd},
                     {"t", f.test.t},
                     {"df", f.test.df},
                     {"p", f.test.p}});
  }
  j["features"] = std::move(feats);
  j["selected_feature"] = r.selected ? ordered_json(*r.selected) : ordered_json(nullptr);
  j["orientation"] = r.orientation;
  j["iq_correlation"] = {{"present", r.iq.present},
                         {"n_used", r.iq.n_used},
                         {"r", r.iq.present ? ordered_json(r.iq.r) : ordered_json(nullptr)},
                         {"p", r.iq.present ? ordered_json(r.iq.p) : ordered_json(nullptr)},
                         {"r_oriented", r.iq.present ? ordered_json(r.iq.r_oriented) : ordered_json(nullptr)}};
  if (r.auc) {
    j["auc"] = {{"value", r.auc->value}, {"inverted", r.auc->inverted}, {"oriented", r.auc->oriented}};
  } else {
    j["auc"] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::string report_text(const StatsReport& r) {
  auto num = [](double v) { return csv::format_number(v, 6); };
  std::ostringstream os;
  os << "subjects: " << r.n_subjects << " (ASD " << r.n_asd << ", NC " << r.n_nc << ")\n";
  os << "test: " << (r.variance == VarianceModel::pooled ? "Student t, pooled variance" : "Welch t")
     << ", alpha " << num(r.alpha) << "\n\n";
  os << "feature  ASD mean+-SD           NC mean+-SD            t          df       p\n";
  for (const auto& f : r.features) {
    char line[256];
    std::snprintf(line, sizeof line, "f%-7lld %9.4f +- %-9.4f %9.4f +- %-9.4f %-10.4f %-8.2f %.3g\n",
                  static_cast<long long>(f.feature + 1), f.asd.mean, f.asd.sd, f.nc.mean, f.nc.sd, f.test.t,
                  f.test.df, f.test.p);
    os << line;
  }
  os << "\n";
  if (!r.selected) {
    os << "selected feature: none (no feature with p < " << num(r.alpha) << ")\n";
  } else {
    os << "selected feature: f" << (*r.selected + 1) << " (ASD " << (r.orientation > 0 ? "higher" : "lower")
       << " than NC)\n";
    if (r.auc) {
      os << "AUC: " << num(r.auc->value) << (r.auc->inverted ? " (inverted; ASD scores lower)" : "") << "\n";
    }
    if (r.iq.present) {
      os << "IQ correlation: r = " << num(r.iq.r) << ", p = " << num(r.iq.p) << ", n = " << r.iq.n_used << "\n";
    } else {
      os << "IQ correlation: absent (n_used = " << r.iq.n_used << ")\n";
    }
  }
  if (!r.checkpoint_sha256.empty()) os << "checkpoint sha256: " << r.checkpoint_sha256 << "\n";
  return os.str();
}

}  // namespace latentconn::analysis
