#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latentconn/dataset.hpp"
#include "latentconn/types.hpp"

namespace latentconn::analysis {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T| >= |t|) of Student's t with df degrees
/// of freedom (df may be fractional).
double student_t_two_sided(double t, double df);

enum class VarianceModel { pooled, welch };

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Independent two-sample t test, two-sided. Pooled variance by default
/// (df = na + nb - 2). Throws ValidationError for samples smaller than 2 or
/// non-finite values, DegenerateSeriesError when the variance is zero.
TTestResult ttest_ind(std::span<const double> a, std::span<const double> b,
                      VarianceModel variance = VarianceModel::pooled);

struct CorrelationResult {
  double r = 0.0;
  double p = 1.0;
  std::size_t n_used = 0;
};

/// Signed Pearson r with a two-sided p from t = r sqrt((n-2)/(1-r^2)).
/// Pairs where either value is NaN are dropped; n_used counts the rest.
/// Throws InsufficientDataError when fewer than 3 pairs remain.
CorrelationResult pearson_with_p(std::span<const double> x, std::span<const double> y);

/// P(score_ASD > score_NC) + P(tie) / 2 via midranks. Throws
/// ValidationError unless both groups are present.
double roc_auc(std::span<const double> scores, std::span<const Group> labels);

struct RocPoint {
  double false_positive_rate = 0.0;
  double true_positive_rate = 0.0;
};

/// ROC curve from the highest threshold down, one point per distinct score,
/// starting at (0, 0) and ending at (1, 1). ASD is the positive class.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const Group> labels);
double trapezoid_auc(std::span<const RocPoint> curve);

struct GroupSummary {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

struct FeatureComparison {
  Index feature = 0;
  GroupSummary asd;
  GroupSummary nc;
  TTestResult test;  // ASD minus NC
};

struct Selection {
  std::optional<Index> index;  // absent when no feature reaches alpha
  std::vector<FeatureComparison> features;
};

/// Compares every feature column between groups; picks the one with the
/// smallest p among those with p < alpha.
Selection select_asd_feature(const Matrix& features, std::span<const Group> labels,
                             VarianceModel variance = VarianceModel::pooled, double alpha = 0.05);

struct IqCorrelation {
  bool present = false;  // false when IQ is missing or fewer than 3 pairs remain
  std::size_t n_used = 0;
  double r = 0.0;
  double p = 1.0;
  double r_oriented = 0.0;  // r of the feature flipped so ASD scores higher
};

struct AucResult {
  double value = 0.5;     // ASD positive, higher feature value scores positive
  bool inverted = false;  // value < 0.5: ASD scores lower on this feature
  double oriented = 0.5;  // max(value, 1 - value)
};

struct StatsReport {
  VarianceModel variance = VarianceModel::pooled;
  double alpha = 0.05;
  std::size_t n_subjects = 0;
  std::size_t n_asd = 0;
  std::size_t n_nc = 0;
  std::vector<FeatureComparison> features;
  std::optional<Index> selected;
  int orientation = 1;  // +1 when ASD mean > NC mean on the selected feature
  IqCorrelation iq;
  std::optional<AucResult> auc;
  std::string checkpoint_sha256;
};

/// Full group analysis of a subjects x features table. iq may be empty (no
/// IQ column) or hold NaN for missing values.
StatsReport analyze(const Matrix& features, std::span<const Group> labels, std::span<const double> iq,
                    VarianceModel variance = VarianceModel::pooled, double alpha = 0.05);

std::string report_json(const StatsReport& report);
std::string report_text(const StatsReport& report);

}  // namespace latentconn::analysis
