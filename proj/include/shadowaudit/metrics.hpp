// Copyright 2026 The shadow-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "shadowaudit/error.hpp"
#include "shadowaudit/profile.hpp"

namespace shadowaudit {

/// Multiclass confusion counts over the eight classes, plus per-true-class
/// counts of subjects that received no prediction at all (e.g. non-users
/// with no surviving link). Unclassified subjects enter recall denominators
/// and base rates but are excluded from agreement (κ).
class ConfusionMatrix {
 public:
  void add(OrientationClass truth, OrientationClass predicted, std::uint64_t n = 1) {
    counts_[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)] += n;
  }
  void add_unclassified(OrientationClass truth, std::uint64_t n = 1) {
    unclassified_[static_cast<std::size_t>(truth)] += n;
  }

  std::uint64_t count(OrientationClass truth, OrientationClass predicted) const {
    return counts_[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
  }
  std::uint64_t unclassified(OrientationClass truth) const {
    return unclassified_[static_cast<std::size_t>(truth)];
  }

  std::uint64_t row_total(OrientationClass truth) const {  // classified only
    std::uint64_t s = 0;
    for (std::uint64_t v : counts_[static_cast<std::size_t>(truth)]) s += v;
    return s;
  }
  std::uint64_t col_total(OrientationClass predicted) const {
    std::uint64_t s = 0;
    for (const auto& row : counts_) s += row[static_cast<std::size_t>(predicted)];
    return s;
  }
  std::uint64_t diagonal_total() const {
    std::uint64_t s = 0;
    for (int c = 0; c < kNumClasses; ++c) s += counts_[c][c];
    return s;
  }
  std::uint64_t classified_total() const {
    std::uint64_t s = 0;
    for (const auto& row : counts_)
      for (std::uint64_t v : row) s += v;
    return s;
  }
  std::uint64_t unclassified_total() const {
    std::uint64_t s = 0;
    for (std::uint64_t v : unclassified_) s += v;
    return s;
  }
  std::uint64_t total() const { return classified_total() + unclassified_total(); }

  /// Classified subjects of class c plus unclassified ones: everyone whose
  /// true class is c.
  std::uint64_t subject_total(OrientationClass c) const {
    return row_total(c) + unclassified(c);
  }

  friend bool operator==(const ConfusionMatrix& a, const ConfusionMatrix& b) = default;

 private:
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts_{};
  std::array<std::uint64_t, kNumClasses> unclassified_{};
};

/// Cohen's Kappa over the classified subjects:
///   κ = (Pr(a) − Pr(e)) / (1 − Pr(e))
/// with Pr(a) the observed agreement and Pr(e) the chance agreement from
/// the row/column marginals.
inline double kappa(const ConfusionMatrix& cm) {
  const std::uint64_t t = cm.classified_total();
  if (t == 0) fail(ErrorCode::DegenerateAgreement, "no classified subjects");
  const double total = static_cast<double>(t);
  const double pa = static_cast<double>(cm.diagonal_total()) / total;
  double pe = 0.0;
  for (OrientationClass c : kAllClasses) {
    pe += (static_cast<double>(cm.row_total(c)) / total) *
          (static_cast<double>(cm.col_total(c)) / total);
  }
  if (pe >= 1.0) {
    fail(ErrorCode::DegenerateAgreement, "chance agreement Pr(e) = 1");
  }
  return (pa - pe) / (1.0 - pe);
}

namespace detail {

/// One-vs-rest binary κ from a collapsed 2×2. Degenerate marginals
/// (Pr(e) = 1, e.g. the class absent from truth and predictions) map to 0.
inline double binary_kappa(std::uint64_t tp, std::uint64_t fn, std::uint64_t fp,
                           std::uint64_t tn) {
  const double total = static_cast<double>(tp + fn + fp + tn);
  if (total == 0.0) return 0.0;
  const double pa = static_cast<double>(tp + tn) / total;
  const double p_true = static_cast<double>(tp + fn) / total;
  const double p_pred = static_cast<double>(tp + fp) / total;
  const double pe = p_true * p_pred + (1.0 - p_true) * (1.0 - p_pred);
  if (pe >= 1.0) return 0.0;
  return (pa - pe) / (1.0 - pe);
}

}  // namespace detail

struct ClassScore {
  double precision = 0.0;
  double recall = 0.0;
  double base_rate = 0.0;
  double kappa = 0.0;            // one-vs-rest over classified subjects
  std::uint64_t subjects = 0;    // classified + unclassified of this class
};

struct ClassScores {
  std::array<ClassScore, kNumClasses> per_class{};
  /// Unweighted mean of one-vs-rest κ over classes with ≥ 1 subject.
  double mean_kappa = 0.0;
};

inline ClassScores class_scores(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) fail(ErrorCode::DegenerateAgreement, "empty confusion matrix");
  const std::uint64_t classified = cm.classified_total();

  ClassScores out;
  double kappa_sum = 0.0;
  std::size_t kappa_classes = 0;
  for (OrientationClass c : kAllClasses) {
    ClassScore& s = out.per_class[static_cast<std::size_t>(c)];
    const std::uint64_t diag = cm.count(c, c);
    const std::uint64_t row = cm.row_total(c);
    const std::uint64_t col = cm.col_total(c);
    s.subjects = cm.subject_total(c);
    s.precision = col == 0 ? 0.0 : static_cast<double>(diag) / static_cast<double>(col);
    s.recall = s.subjects == 0
                   ? 0.0
                   : static_cast<double>(diag) / static_cast<double>(s.subjects);
    s.base_rate = static_cast<double>(s.subjects) / static_cast<double>(total);
    s.kappa = detail::binary_kappa(diag, row - diag, col - diag,
                                   classified - row - col + diag);
    if (s.subjects > 0) {
      kappa_sum += s.kappa;
      ++kappa_classes;
    }
  }
  out.mean_kappa = kappa_classes == 0 ? 0.0 : kappa_sum / static_cast<double>(kappa_classes);
  return out;
}

// ---------------------------------------------------------------------------
// Regression / correlation.

inline double student_t_cdf(double t, double dof) {
  boost::math::students_t dist(dof);
  return boost::math::cdf(dist, t);
}

/// Two-sided p-value for a t statistic with `dof` degrees of freedom.
inline double two_sided_t_pvalue(double t, double dof) {
  const double tail = 1.0 - student_t_cdf(std::abs(t), dof);
  return std::min(1.0, 2.0 * tail);
}

struct LeakFactorEstimate {
  double slope = 0.0;        // the privacy leak factor
  double intercept = 0.0;
  double std_error = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  std::size_t n_points = 0;
  bool perfect_fit = false;  // residuals ~ 0; p_value forced to 0
};

/// Ordinary least squares of y on x with intercept; the slope is the leak
/// factor and its two-sided t-test (n−2 dof) gives the p-value.
inline LeakFactorEstimate ols_leak_factor(
    const std::vector<std::pair<double, double>>& points) {
  const std::size_t n = points.size();
  if (n < 3) fail(ErrorCode::InvalidConfig, "regression needs at least 3 points");

  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& [x, y] : points) {
    mean_x += x;
    mean_y += y;
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = x - mean_x;
    const double dy = y - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) fail(ErrorCode::ConstantX, "regression x values are all equal");

  LeakFactorEstimate est;
  est.n_points = n;
  est.slope = sxy / sxx;
  est.intercept = mean_y - est.slope * mean_x;

  double ssr = syy - est.slope * sxy;  // residual sum of squares
  if (ssr < 0.0) ssr = 0.0;            // numeric guard
  const double dof = static_cast<double>(n - 2);
  if (ssr <= 1e-12 * std::max(1.0, syy)) {
    est.perfect_fit = true;
    est.std_error = 0.0;
    est.t_stat = 0.0;
    est.p_value = 0.0;
    return est;
  }
  est.std_error = std::sqrt(ssr / dof / sxx);
  est.t_stat = est.slope / est.std_error;
  est.p_value = two_sided_t_pvalue(est.t_stat, dof);
  return est;
}

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;
  std::size_t n_points = 0;
};

namespace detail {

inline std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

/// Spearman rank correlation (average ranks for ties), p-value from the
/// t approximation with n−2 dof.
inline SpearmanResult spearman(const std::vector<std::pair<double, double>>& points) {
  const std::size_t n = points.size();
  if (n < 3) fail(ErrorCode::InvalidConfig, "spearman needs at least 3 points");
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = points[i].first;
    ys[i] = points[i].second;
  }
  const std::vector<double> rx = detail::average_ranks(xs);
  const std::vector<double> ry = detail::average_ranks(ys);

  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += rx[i];
    mean_y += ry[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean_x;
    const double dy = ry[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    fail(ErrorCode::ConstantX, "spearman input has a constant variable");
  }

  SpearmanResult out;
  out.n_points = n;
  out.rho = sxy / std::sqrt(sxx * syy);
  const double dof = static_cast<double>(n - 2);
  const double r2 = std::min(1.0, out.rho * out.rho);
  if (1.0 - r2 <= 0.0) {
    out.p_value = 0.0;
  } else {
    const double t = out.rho * std::sqrt(dof / (1.0 - r2));
    out.p_value = two_sided_t_pvalue(t, dof);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binned true-positive rates.

struct TprSubject {
  double bin_value = 0.0;
  bool classified = false;
  bool correct = false;  // only meaningful when classified
};

struct TprBin {
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t population = 0;   // all subjects mapped to the bin
  std::uint64_t classified = 0;
  std::uint64_t correct = 0;
  std::optional<double> tpr;      // nullopt marks an undefined (empty) bin
};

/// Bins are [lo, hi) with the final bin right-closed; values on an interior
/// edge belong to the bin starting there. Subjects outside [first, last]
/// are ignored. TPR = correct / classified; bins with no classified subject
/// carry the undefined marker rather than a fake zero.
inline std::vector<TprBin> binned_tpr(const std::vector<TprSubject>& subjects,
                                      const std::vector<double>& bin_edges) {
  if (bin_edges.size() < 2) fail(ErrorCode::InvalidConfig, "need at least 2 bin edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i] > bin_edges[i - 1])) {
      fail(ErrorCode::InvalidConfig, "bin edges must be strictly increasing");
    }
  }
  const std::size_t n_bins = bin_edges.size() - 1;
  std::vector<TprBin> bins(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    bins[b].lo = bin_edges[b];
    bins[b].hi = bin_edges[b + 1];
  }
  for (const TprSubject& s : subjects) {
    if (s.bin_value < bin_edges.front() || s.bin_value > bin_edges.back()) continue;
    std::size_t b;
    if (s.bin_value >= bin_edges[n_bins]) {
      b = n_bins - 1;  // final bin right-closed
    } else {
      b = static_cast<std::size_t>(
              std::upper_bound(bin_edges.begin(), bin_edges.end(), s.bin_value) -
              bin_edges.begin()) -
          1;
    }
    ++bins[b].population;
    if (s.classified) {
      ++bins[b].classified;
      if (s.correct) ++bins[b].correct;
    }
  }
  for (TprBin& b : bins) {
    if (b.classified > 0) {
      b.tpr = static_cast<double>(b.correct) / static_cast<double>(b.classified);
    }
  }
  return bins;
}

}  // namespace shadowaudit
