#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pliers/recommenders.hpp"
#include "pliers/types.hpp"

namespace pliers {

/// |a ∩ b| / |a ∪ b| over two sorted, duplicate-free ranges. J(∅, ∅) = 1.
template <class SortedRange>
double jaccard(const SortedRange& a, const SortedRange& b) {
  const auto size_a = static_cast<std::size_t>(std::distance(std::begin(a), std::end(a)));
  const auto size_b = static_cast<std::size_t>(std::distance(std::begin(b), std::end(b)));
  if (size_a == 0 && size_b == 0) return 1.0;
  std::size_t shared = 0;
  auto pa = std::begin(a);
  auto pb = std::begin(b);
  while (pa != std::end(a) && pb != std::end(b)) {
    if (*pa < *pb) {
      ++pa;
    } else if (*pb < *pa) {
      ++pb;
    } else {
      ++shared, ++pa, ++pb;
    }
  }
  return static_cast<double>(shared) / static_cast<double>(size_a + size_b - shared);
}

/// Jaccard over the item sets of two recommendation vectors (order ignored).
inline double recommendation_jaccard(const RecommendationVector& a, const RecommendationVector& b) {
  std::vector<std::string> ia, ib;
  for (const auto& r : a.ranked) ia.push_back(r.item);
  for (const auto& r : b.ranked) ib.push_back(r.item);
  std::sort(ia.begin(), ia.end());
  std::sort(ib.begin(), ib.end());
  return jaccard(ia, ib);
}

enum class SpearmanMode { Literal, Corrected };

/// Footrule-based similarity of two rankings, positions 1-based.
///
/// Literal: 1 - Σ_{x ∈ R1∩R2} |R1(x) - R2(x)| / max(|R1|, |R2|). Disjoint
/// rankings score 1 and heavily permuted ones can go negative.
///
/// Corrected: the sum runs over R1 ∪ R2 with displacement max(|R1|, |R2|) for
/// elements present in only one ranking, normalized by |R1 ∪ R2| · max(|R1|, |R2|),
/// so the result lies in [0, 1] and equals 1 only for identical rankings.
inline double spearman_similarity(const RecommendationVector& r1, const RecommendationVector& r2,
                                  SpearmanMode mode = SpearmanMode::Corrected) {
  if (r1.empty() && r2.empty()) return 1.0;
  std::unordered_map<std::string_view, std::size_t> pos2;
  for (std::size_t p = 0; p < r2.ranked.size(); ++p) pos2.emplace(r2.ranked[p].item, p + 1);
  const double longest = static_cast<double>(std::max(r1.size(), r2.size()));
  double shared_displacement = 0.0;
  std::size_t shared = 0;
  for (std::size_t p = 0; p < r1.ranked.size(); ++p) {
    auto it = pos2.find(r1.ranked[p].item);
    if (it == pos2.end()) continue;
    ++shared;
    shared_displacement += std::abs(static_cast<double>(p + 1) - static_cast<double>(it->second));
  }
  if (mode == SpearmanMode::Literal) return 1.0 - shared_displacement / longest;
  const std::size_t union_size = r1.size() + r2.size() - shared;
  const std::size_t unshared = union_size - shared;
  const double total = shared_displacement + static_cast<double>(unshared) * longest;
  return 1.0 - total / (static_cast<double>(union_size) * longest);
}

// ---- link-prediction accuracy ----------------------------------------------

/// Recommendation list L(u) and removed items T(u) for one evaluated user.
struct UserEvaluation {
  std::vector<std::string> recommended;
  std::vector<std::string> removed;
};

namespace detail {
inline void check_removed(const std::map<std::string, UserEvaluation>& users) {
  for (const auto& [user, e] : users) {
    if (e.removed.empty()) throw InvalidInput("evaluation: user '" + user + "' has no removed items");
  }
}
}  // namespace detail

/// P = (1/|U|) Σ_u (1/|T(u)|) Σ_{t ∈ T(u)} 1/pos(t). Items missing from L(u)
/// contribute 0. No users gives 0.
inline double precision(const std::map<std::string, UserEvaluation>& users) {
  detail::check_removed(users);
  if (users.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [user, e] : users) {
    double inner = 0.0;
    for (const auto& t : e.removed) {
      auto it = std::find(e.recommended.begin(), e.recommended.end(), t);
      if (it != e.recommended.end()) inner += 1.0 / static_cast<double>(it - e.recommended.begin() + 1);
    }
    total += inner / static_cast<double>(e.removed.size());
  }
  return total / static_cast<double>(users.size());
}

/// R = (1/|U|) Σ_u |L(u) ∩ T(u)| / |T(u)|. No users gives 0.
inline double recall(const std::map<std::string, UserEvaluation>& users) {
  detail::check_removed(users);
  if (users.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [user, e] : users) {
    std::size_t hit = 0;
    for (const auto& t : e.removed) {
      if (std::find(e.recommended.begin(), e.recommended.end(), t) != e.recommended.end()) ++hit;
    }
    total += static_cast<double>(hit) / static_cast<double>(e.removed.size());
  }
  return total / static_cast<double>(users.size());
}

// ---- correlation / regression ------------------------------------------------

struct CorrelationReport {
  double r_yx1 = 0.0;
  double r_yx2 = 0.0;
  double r_squared = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  bool degenerate_x1 = false;  ///< x1 or y has zero variance; r_yx1 reported as 0
  bool degenerate_x2 = false;  ///< x2 or y has zero variance; r_yx2 reported as 0
  bool singular_fit = false;   ///< normal equations singular; betas from the non-degenerate regressor
};

/// Pearson correlation; nullopt if either series has zero variance.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n, my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Pearson r of y against each regressor and the least-squares fit
/// y = β1·x1 + β2·x2 (no intercept). R² = 1 - SS_res/SS_tot with SS_tot taken
/// about the mean of y, clamped to [0, 1]; a constant y gives R² = 0.
inline CorrelationReport correlation_analysis(std::span<const double> y, std::span<const double> x1,
                                              std::span<const double> x2) {
  if (y.size() != x1.size() || y.size() != x2.size()) {
    throw InvalidInput("correlation_analysis: series lengths differ");
  }
  if (y.size() < 3) throw InvalidInput("correlation_analysis: need at least 3 observations");
  CorrelationReport rep;
  auto r1 = pearson(y, x1);
  auto r2 = pearson(y, x2);
  rep.degenerate_x1 = !r1;
  rep.degenerate_x2 = !r2;
  rep.r_yx1 = r1.value_or(0.0);
  rep.r_yx2 = r2.value_or(0.0);

  double s11 = 0.0, s12 = 0.0, s22 = 0.0, s1y = 0.0, s2y = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    s11 += x1[i] * x1[i];
    s12 += x1[i] * x2[i];
    s22 += x2[i] * x2[i];
    s1y += x1[i] * y[i];
    s2y += x2[i] * y[i];
  }
  const double det = s11 * s22 - s12 * s12;
  const double scale = std::max(s11 * s22, 1e-300);
  if (std::abs(det) > 1e-12 * scale) {
    rep.beta1 = (s22 * s1y - s12 * s2y) / det;
    rep.beta2 = (s11 * s2y - s12 * s1y) / det;
  } else {
    // Collinear or all-zero regressors: fit on whichever carries signal.
    rep.singular_fit = true;
    if (s11 > 0.0) {
      rep.beta1 = s1y / s11;
    } else if (s22 > 0.0) {
      rep.beta2 = s2y / s22;
    }
  }

  double mean_y = 0.0;
  for (double v : y) mean_y += v;
  mean_y /= static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double fit = rep.beta1 * x1[i] + rep.beta2 * x2[i];
    ss_res += (y[i] - fit) * (y[i] - fit);
    ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
  }
  rep.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 0.0;
  return rep;
}

}  // namespace pliers
