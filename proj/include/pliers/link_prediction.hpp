#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pliers/folksonomy.hpp"
#include "pliers/metrics.hpp"
#include "pliers/random.hpp"
#include "pliers/recommenders.hpp"

namespace pliers {

/// Minimum number of popular (k_u > 1) items a user needs to lose a link.
inline constexpr std::size_t kMinItemsForRemoval = 5;

struct LinkRemovalSet {
  std::map<std::string, std::string> removals;  ///< user key -> removed item key
  double removed_fraction = 0.0;                ///< removals / original |E|
};

struct PrunedGraph {
  FolksonomyGraph graph;
  LinkRemovalSet removed;
};

/// Hides one user-item link per eligible user. Users are visited in key order;
/// a user is eligible when, in the graph as pruned so far, at least
/// kMinItemsForRemoval of its items have popularity > 1, and the removed edge
/// is drawn uniformly among those items, listed in key order. No item is ever
/// orphaned.
inline PrunedGraph prune_for_link_prediction(const FolksonomyGraph& graph, std::uint64_t seed) {
  PrunedGraph out{graph, {}};
  FolksonomyGraph& g = out.graph;
  std::vector<UserHandle> users;
  for (std::uint32_t u = 0; u < g.user_count(); ++u) users.push_back(UserHandle{u});
  std::sort(users.begin(), users.end(), [&](UserHandle a, UserHandle b) { return g.key(a) < g.key(b); });

  Rng rng(seed);
  std::vector<ItemHandle> candidates;
  for (UserHandle u : users) {
    candidates.clear();
    for (ItemHandle i : g.items_of(u)) {
      if (g.user_degree(i) > 1) candidates.push_back(i);
    }
    if (candidates.size() < kMinItemsForRemoval) continue;
    std::sort(candidates.begin(), candidates.end(),
              [&](ItemHandle a, ItemHandle b) { return g.key(a) < g.key(b); });
    const ItemHandle victim = candidates[rng.below(candidates.size())];
    out.removed.removals.emplace(g.key(u), g.key(victim));
    g.remove_adoption(u, victim);
  }
  const std::size_t original_edges = graph.user_item_edge_count();
  out.removed.removed_fraction =
      original_edges == 0 ? 0.0
                          : static_cast<double>(out.removed.removals.size()) / static_cast<double>(original_edges);
  return out;
}

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  std::map<std::string, UserEvaluation> per_user;
};

/// Scores every user with a removed link on the pruned graph and computes
/// Precision and Recall against the hidden items. `top_n` bounds L(u); unset
/// means every unowned item with a positive score.
inline EvalReport evaluate_link_prediction(const PrunedGraph& pruned, const ScoringOptions& options,
                                           std::optional<std::size_t> top_n = std::nullopt) {
  EvalReport rep;
  for (const auto& [user, item] : pruned.removed.removals) {
    UserEvaluation e;
    for (auto& r : recommend(pruned.graph, user, options, top_n).ranked) e.recommended.push_back(std::move(r.item));
    e.removed.push_back(item);
    rep.per_user.emplace(user, std::move(e));
  }
  rep.precision = precision(rep.per_user);
  rep.recall = recall(rep.per_user);
  return rep;
}

}  // namespace pliers
