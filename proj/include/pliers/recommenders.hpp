#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pliers/folksonomy.hpp"

namespace pliers {

/// Raw per-item scores for one target user, indexed by the item handles of the
/// graph they were computed on. Owned items keep their scores; rank() drops them.
struct ScoreVector {
  UserHandle target;
  std::vector<double> scores;

  double operator[](ItemHandle i) const { return scores[i.value]; }
  double total() const {
    double sum = 0.0;
    for (double s : scores) sum += s;
    return sum;
  }
};

struct RankedItem {
  std::string item;
  double score;

  bool operator==(const RankedItem&) const = default;
};

/// Ranked unowned items, by score descending then item key ascending.
struct RecommendationVector {
  std::string target;
  std::vector<RankedItem> ranked;

  std::size_t size() const { return ranked.size(); }
  bool empty() const { return ranked.empty(); }
};

enum class Algorithm { Pliers, PliersBipartite, Affinity, Similarity, ProbS, HeatS, Hybrid, UserCF, TagExpansion };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Pliers: return "pliers";
    case Algorithm::PliersBipartite: return "pliers-bipartite";
    case Algorithm::Affinity: return "affinity";
    case Algorithm::Similarity: return "similarity";
    case Algorithm::ProbS: return "probs";
    case Algorithm::HeatS: return "heats";
    case Algorithm::Hybrid: return "hybrid";
    case Algorithm::UserCF: return "cf";
    case Algorithm::TagExpansion: return "tagexp";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::Pliers, Algorithm::PliersBipartite, Algorithm::Affinity,
                      Algorithm::Similarity, Algorithm::ProbS, Algorithm::HeatS, Algorithm::Hybrid,
                      Algorithm::UserCF, Algorithm::TagExpansion}) {
    if (name == to_string(a)) return a;
  }
  return std::nullopt;
}

namespace detail {

inline double inverse_degree(std::size_t degree) {
  // Every item has a creator edge and a tag edge, and every node reached by a
  // walk has the edge it was reached through.
  if (degree == 0) throw std::logic_error("zero degree reached during diffusion");
  return 1.0 / static_cast<double>(degree);
}

/// Dense accumulator that remembers which slots were touched.
class Scratch {
 public:
  explicit Scratch(std::size_t n) : sum_(n, 0.0), count_(n, 0) {}

  void add(std::uint32_t slot, double value) {
    if (count_[slot]++ == 0) touched_.push_back(slot);
    sum_[slot] += value;
  }

  template <class F>
  void drain(F&& f) {
    for (std::uint32_t slot : touched_) {
      f(slot, sum_[slot], count_[slot]);
      sum_[slot] = 0.0;
      count_[slot] = 0;
    }
    touched_.clear();
  }

 private:
  std::vector<double> sum_;
  std::vector<std::uint32_t> count_;
  std::vector<std::uint32_t> touched_;
};

/// PLIERS on a generic bipartite relation between items and "sides" (users or
/// tags). For each target item s and each side node l of s, every item j of l
/// receives 1/(k(l) k(s)); the per-pair total is then scaled by the overlap
/// |S_s ∩ S_j| / k(j). Visiting l ∈ S_s ∩ S_j exactly once per (s, j) makes the
/// overlap equal to the number of visits, so no explicit intersection is needed.
template <class SidesOf, class ItemsOf, class SideDegree, class ItemDegree>
std::vector<double> pliers_diffusion(std::size_t item_count, std::span<const ItemHandle> target_items,
                                     SidesOf sides_of, ItemsOf items_of, SideDegree side_degree,
                                     ItemDegree item_degree) {
  std::vector<double> scores(item_count, 0.0);
  Scratch scratch(item_count);
  for (ItemHandle s : target_items) {
    const double inv_ks = inverse_degree(item_degree(s));
    for (auto side : sides_of(s)) {
      const double inv_kl = inverse_degree(side_degree(side));
      for (ItemHandle j : items_of(side)) scratch.add(j.value, inv_kl);
    }
    scratch.drain([&](std::uint32_t j, double mass, std::uint32_t overlap) {
      scores[j] += mass * inv_ks * overlap * inverse_degree(item_degree(ItemHandle{j}));
    });
  }
  return scores;
}

}  // namespace detail

/// Mass diffusion: unit resource on each target item, split equally to its
/// users, then each user's share split equally to its items. Total mass equals
/// the target's item count.
inline ScoreVector probs_scores(const FolksonomyGraph& g, UserHandle target) {
  ScoreVector out{target, std::vector<double>(g.item_count(), 0.0)};
  std::vector<double> user_mass(g.user_count(), 0.0);
  for (ItemHandle s : g.items_of(target)) {
    const double share = detail::inverse_degree(g.user_degree(s));
    for (UserHandle u : g.users_of(s)) user_mass[u.value] += share;
  }
  for (std::uint32_t u = 0; u < g.user_count(); ++u) {
    if (user_mass[u] == 0.0) continue;
    const double share = user_mass[u] * detail::inverse_degree(g.degree(UserHandle{u}));
    for (ItemHandle j : g.items_of(UserHandle{u})) out.scores[j.value] += share;
  }
  return out;
}

/// Heat spreading: like ProbS, but each node averages what flows into it, i.e.
/// transfers are divided by the receiving node's degree.
inline ScoreVector heats_scores(const FolksonomyGraph& g, UserHandle target) {
  ScoreVector out{target, std::vector<double>(g.item_count(), 0.0)};
  std::vector<double> user_heat(g.user_count(), 0.0);
  for (ItemHandle s : g.items_of(target)) {
    for (UserHandle u : g.users_of(s)) user_heat[u.value] += 1.0;
  }
  for (std::uint32_t u = 0; u < g.user_count(); ++u) {
    if (user_heat[u] == 0.0) continue;
    user_heat[u] *= detail::inverse_degree(g.degree(UserHandle{u}));
    for (ItemHandle j : g.items_of(UserHandle{u})) out.scores[j.value] += user_heat[u];
  }
  for (std::uint32_t j = 0; j < g.item_count(); ++j) {
    if (out.scores[j] != 0.0) out.scores[j] *= detail::inverse_degree(g.user_degree(ItemHandle{j}));
  }
  return out;
}

/// lambda_h * ProbS/sum(ProbS) + (1 - lambda_h) * HeatS/sum(HeatS). Each part is
/// sum-normalized because their raw magnitudes are not comparable.
inline ScoreVector hybrid_scores(const FolksonomyGraph& g, UserHandle target, double lambda_h) {
  if (lambda_h < 0.0 || lambda_h > 1.0) throw InvalidInput("hybrid: lambda_h outside [0, 1]");
  ScoreVector probs = probs_scores(g, target);
  ScoreVector heats = heats_scores(g, target);
  const double probs_total = probs.total();
  const double heats_total = heats.total();
  const double wp = probs_total > 0.0 ? lambda_h / probs_total : 0.0;
  const double wh = heats_total > 0.0 ? (1.0 - lambda_h) / heats_total : 0.0;
  ScoreVector out{target, std::vector<double>(g.item_count(), 0.0)};
  for (std::size_t j = 0; j < out.scores.size(); ++j) {
    out.scores[j] = wp * probs.scores[j] + wh * heats.scores[j];
  }
  return out;
}

/// Affinity index: PLIERS over user-item links, with k_i(u) for users and
/// k_u(i) (popularity) for items.
inline ScoreVector affinity_scores(const FolksonomyGraph& g, UserHandle target) {
  return {target, detail::pliers_diffusion(
                      g.item_count(), g.items_of(target),
                      [&](ItemHandle i) { return g.users_of(i); },
                      [&](UserHandle u) { return g.items_of(u); },
                      [&](UserHandle u) { return g.degree(u); },
                      [&](ItemHandle i) { return g.user_degree(i); })};
}

/// PLIERS on the user-item bipartite graph. Same degrees as the affinity index.
inline ScoreVector pliers_bipartite(const FolksonomyGraph& g, UserHandle target) {
  return affinity_scores(g, target);
}

/// Similarity index: PLIERS over item-tag links, with k_i(t) for tags and
/// k_t(i) for items. The walk starts from the target's items.
inline ScoreVector similarity_scores(const FolksonomyGraph& g, UserHandle target) {
  return {target, detail::pliers_diffusion(
                      g.item_count(), g.items_of(target),
                      [&](ItemHandle i) { return g.tags_of(i); },
                      [&](TagHandle t) { return g.items_of(t); },
                      [&](TagHandle t) { return g.degree(t); },
                      [&](ItemHandle i) { return g.tag_degree(i); })};
}

/// lambda * affinity + (1 - lambda) * similarity, un-normalized.
inline ScoreVector pliers_tripartite(const FolksonomyGraph& g, UserHandle target, double lambda = 0.5) {
  if (lambda < 0.0 || lambda > 1.0) throw InvalidInput("pliers: lambda outside [0, 1]");
  ScoreVector a = affinity_scores(g, target);
  ScoreVector s = similarity_scores(g, target);
  for (std::size_t j = 0; j < a.scores.size(); ++j) {
    a.scores[j] = lambda * a.scores[j] + (1.0 - lambda) * s.scores[j];
  }
  return a;
}

/// Cosine similarity of two users' binary item vectors.
inline double user_cosine(const FolksonomyGraph& g, UserHandle a, UserHandle b) {
  auto ia = g.items_of(a);
  auto ib = g.items_of(b);
  if (ia.empty() || ib.empty()) return 0.0;
  std::size_t common = 0;
  for (auto pa = ia.begin(), pb = ib.begin(); pa != ia.end() && pb != ib.end();) {
    if (*pa < *pb) {
      ++pa;
    } else if (*pb < *pa) {
      ++pb;
    } else {
      ++common, ++pa, ++pb;
    }
  }
  return static_cast<double>(common) / std::sqrt(static_cast<double>(ia.size() * ib.size()));
}

/// User-based collaborative filtering: the k users most cosine-similar to the
/// target (ties by user key) vote for their items with their similarity.
inline ScoreVector cf_user_based(const FolksonomyGraph& g, UserHandle target, std::size_t k) {
  if (k == 0) throw InvalidInput("cf: k must be positive");
  struct Neighbor {
    double sim;
    UserHandle user;
  };
  std::vector<Neighbor> neighbors;
  for (std::uint32_t u = 0; u < g.user_count(); ++u) {
    if (UserHandle{u} == target) continue;
    neighbors.push_back({user_cosine(g, target, UserHandle{u}), UserHandle{u}});
  }
  const std::size_t keep = std::min(k, neighbors.size());
  std::partial_sort(neighbors.begin(), neighbors.begin() + static_cast<std::ptrdiff_t>(keep),
                    neighbors.end(), [&](const Neighbor& a, const Neighbor& b) {
                      if (a.sim != b.sim) return a.sim > b.sim;
                      return g.key(a.user) < g.key(b.user);
                    });
  ScoreVector out{target, std::vector<double>(g.item_count(), 0.0)};
  for (std::size_t n = 0; n < keep; ++n) {
    for (ItemHandle j : g.items_of(neighbors[n].user)) out.scores[j.value] += neighbors[n].sim;
  }
  return out;
}

/// Tags chosen by tag expansion: the target's own tags plus the k other tags
/// with the largest summed co-occurrence count against them (ties by key).
inline std::vector<TagHandle> expanded_tags(const FolksonomyGraph& g, UserHandle target, std::size_t k) {
  std::vector<TagHandle> own = g.tags_of(target);
  if (own.empty()) return own;
  std::vector<std::size_t> cooccurrence(g.tag_count(), 0);
  for (TagHandle t : own) {
    for (ItemHandle i : g.items_of(t)) {
      for (TagHandle other : g.tags_of(i)) ++cooccurrence[other.value];
    }
  }
  std::vector<bool> is_own(g.tag_count(), false);
  for (TagHandle t : own) is_own[t.value] = true;
  std::vector<TagHandle> candidates;
  for (std::uint32_t t = 0; t < g.tag_count(); ++t) {
    if (!is_own[t]) candidates.push_back(TagHandle{t});
  }
  const std::size_t keep = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end(), [&](TagHandle a, TagHandle b) {
                      if (cooccurrence[a.value] != cooccurrence[b.value]) {
                        return cooccurrence[a.value] > cooccurrence[b.value];
                      }
                      return g.key(a) < g.key(b);
                    });
  own.insert(own.end(), candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep));
  std::sort(own.begin(), own.end());
  return own;
}

/// Tag expansion baseline. An item scores the number of its tags inside the
/// expanded tag set, so the boolean "tagged with one of these" rule becomes a
/// ranking.
inline ScoreVector tag_expansion(const FolksonomyGraph& g, UserHandle target, std::size_t k) {
  if (k == 0) throw InvalidInput("tagexp: k must be positive");
  ScoreVector out{target, std::vector<double>(g.item_count(), 0.0)};
  for (TagHandle t : expanded_tags(g, target, k)) {
    for (ItemHandle i : g.items_of(t)) out.scores[i.value] += 1.0;
  }
  return out;
}

/// Parameters of a single scoring call, for front ends that pick the
/// algorithm at run time.
struct ScoringOptions {
  Algorithm algorithm = Algorithm::Pliers;
  double lambda = 0.5;
  std::size_t k = 10;
};

inline ScoreVector score(const FolksonomyGraph& g, UserHandle target, const ScoringOptions& opt) {
  switch (opt.algorithm) {
    case Algorithm::Pliers: return pliers_tripartite(g, target, opt.lambda);
    case Algorithm::PliersBipartite: return pliers_bipartite(g, target);
    case Algorithm::Affinity: return affinity_scores(g, target);
    case Algorithm::Similarity: return similarity_scores(g, target);
    case Algorithm::ProbS: return probs_scores(g, target);
    case Algorithm::HeatS: return heats_scores(g, target);
    case Algorithm::Hybrid: return hybrid_scores(g, target, opt.lambda);
    case Algorithm::UserCF: return cf_user_based(g, target, opt.k);
    case Algorithm::TagExpansion: return tag_expansion(g, target, opt.k);
  }
  throw std::logic_error("unknown algorithm");
}

/// Scores closer than this, relative to the larger, are ranked as ties.
/// Mathematically equal scores reached along different diffusion paths can
/// differ in the last bits; without this the key tie-break would not apply.
inline constexpr double kTieTolerance = 1e-12;

/// Drops owned and zero-score items, sorts by (score desc, key asc) and keeps
/// at most `top_n` entries. Runs of scores within kTieTolerance of the run's
/// highest score are ordered by key.
inline RecommendationVector rank(const ScoreVector& scores, const FolksonomyGraph& g,
                                 std::optional<std::size_t> top_n = std::nullopt) {
  RecommendationVector out{g.key(scores.target), {}};
  struct Entry {
    double score;
    ItemHandle item;
  };
  std::vector<Entry> entries;
  for (std::uint32_t j = 0; j < scores.scores.size(); ++j) {
    const double s = scores.scores[j];
    if (s > 0.0 && !g.has_edge(scores.target, ItemHandle{j})) entries.push_back({s, ItemHandle{j}});
  }
  auto by_key = [&](const Entry& a, const Entry& b) { return g.key(a.item) < g.key(b.item); };
  std::sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    return by_key(a, b);
  });
  for (auto run = entries.begin(); run != entries.end();) {
    const double floor = run->score * (1.0 - kTieTolerance);
    auto end = std::find_if(run, entries.end(), [&](const Entry& e) { return e.score < floor; });
    if (end - run > 1) std::sort(run, end, by_key);
    run = end;
  }
  const std::size_t keep = top_n ? std::min(*top_n, entries.size()) : entries.size();
  out.ranked.reserve(keep);
  for (std::size_t n = 0; n < keep; ++n) out.ranked.push_back({g.key(entries[n].item), entries[n].score});
  return out;
}

/// Scores and ranks for a user given by key. An absent user gets an empty
/// recommendation.
inline RecommendationVector recommend(const FolksonomyGraph& g, std::string_view user,
                                      const ScoringOptions& opt,
                                      std::optional<std::size_t> top_n = std::nullopt) {
  auto target = g.find_user(user);
  if (!target) return {std::string(user), {}};
  return rank(score(g, *target, opt), g, top_n);
}

}  // namespace pliers
