#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pliers/folksonomy.hpp"
#include "pliers/random.hpp"
#include "pliers/traces.hpp"

namespace pliers {

/// Zero-padded key so lexical and numeric order agree.
inline std::string indexed_key(char prefix, std::size_t index, std::size_t count) {
  std::string digits = std::to_string(index);
  const std::size_t width = std::to_string(count > 0 ? count - 1 : 0).size();
  return std::string(1, prefix) + std::string(width - std::min(width, digits.size()), '0') + digits;
}

// ---- contacts ----------------------------------------------------------------

struct ContactGenParams {
  std::size_t n_agents = 250;
  std::size_t n_communities = 60;
  double rewiring_p = 0.1;
  Seconds duration = 4 * 3600;
  Seconds interval = 60;
  std::uint64_t seed = 1;
};

/// Community contact model standing in for mobility traces. Agents are dealt
/// round-robin into communities; every `interval` each agent, in index order,
/// meets one partner: from its own community with probability 1 - rewiring_p,
/// otherwise uniformly from outside it. Falls back to the other pool when the
/// chosen one is empty. Output is sorted by time.
inline std::vector<ContactEvent> generate_synthetic_contacts(const ContactGenParams& p) {
  if (p.n_communities == 0 || p.n_communities > p.n_agents) {
    throw InvalidInput("contacts: need 1 <= n_communities <= n_agents");
  }
  if (p.rewiring_p < 0.0 || p.rewiring_p > 1.0) throw InvalidInput("contacts: rewiring_p outside [0, 1]");
  if (p.interval <= 0) throw InvalidInput("contacts: interval must be positive");
  std::vector<std::string> ids;
  for (std::size_t a = 0; a < p.n_agents; ++a) ids.push_back(indexed_key('n', a, p.n_agents));
  std::vector<std::vector<std::size_t>> members(p.n_communities);
  for (std::size_t a = 0; a < p.n_agents; ++a) members[a % p.n_communities].push_back(a);

  Rng rng(p.seed);
  std::vector<ContactEvent> out;
  if (p.n_agents < 2) return out;
  for (Seconds t = 0; t < p.duration; t += p.interval) {
    for (std::size_t a = 0; a < p.n_agents; ++a) {
      const auto& own = members[a % p.n_communities];
      const std::size_t inside = own.size() - 1;
      const std::size_t outside = p.n_agents - own.size();
      bool local = !rng.bernoulli(p.rewiring_p);
      if (local && inside == 0) local = false;
      if (!local && outside == 0) local = true;
      std::size_t partner;
      if (local) {
        // Uniform over own community minus self.
        std::size_t pick = rng.below(inside);
        std::size_t self_pos = a / p.n_communities;
        partner = own[pick >= self_pos ? pick + 1 : pick];
      } else {
        // Uniform over agents outside the community: draw until outside.
        do {
          partner = rng.below(p.n_agents);
        } while (partner % p.n_communities == a % p.n_communities);
      }
      out.push_back({t, ids[a], ids[partner]});
    }
  }
  return out;
}

// ---- contents ----------------------------------------------------------------

/// Discrete power law on {1, ..., max_tags}: P(k) ∝ k^-exponent.
inline std::vector<double> tags_per_item_weights(std::size_t max_tags, double exponent) {
  return power_law_weights(max_tags, exponent);
}

inline double tags_per_item_mean(std::size_t max_tags, double exponent) {
  auto w = tags_per_item_weights(max_tags, exponent);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) num += static_cast<double>(k + 1) * w[k], den += w[k];
  return num / den;
}

/// Draws `count` distinct indices by weight (successive draws, rejecting repeats).
inline std::vector<std::size_t> sample_distinct(const WeightedSampler& sampler, std::size_t count, Rng& rng) {
  count = std::min(count, sampler.size());
  std::vector<std::size_t> out;
  while (out.size() < count) {
    std::size_t x = sampler.sample(rng);
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
  return out;
}

struct ContentGenParams {
  std::vector<std::string> creators;   ///< agent ids allowed to publish
  double items_per_minute = 2.0;       ///< Poisson rate of the whole population
  Seconds start = 0;
  Seconds duration = 4 * 3600;
  std::size_t n_tags = 300;
  double tag_exponent = 1.0;           ///< Zipf exponent of tag popularity
  std::size_t max_tags_per_item = 13;
  double tags_per_item_exponent = 2.2;
  double activity_exponent = 1.0;      ///< Zipf exponent of per-creator output
  std::uint64_t seed = 1;
};

/// Poisson content stream with long-tailed creator activity and tag
/// popularity. Item keys are `c<index>`, tags `t<rank>` where rank 0 is the
/// most popular.
inline std::vector<ContentEvent> generate_synthetic_contents(const ContentGenParams& p) {
  if (p.creators.empty()) throw InvalidInput("contents: no creators");
  if (p.items_per_minute <= 0.0) throw InvalidInput("contents: rate must be positive");
  if (p.n_tags == 0 || p.max_tags_per_item == 0) throw InvalidInput("contents: empty tag vocabulary");
  Rng rng(p.seed);
  std::vector<std::size_t> creator_rank(p.creators.size());
  for (std::size_t i = 0; i < creator_rank.size(); ++i) creator_rank[i] = i;
  rng.shuffle(creator_rank);
  WeightedSampler creator_sampler(power_law_weights(p.creators.size(), p.activity_exponent));
  WeightedSampler tag_sampler(power_law_weights(p.n_tags, p.tag_exponent));
  WeightedSampler count_sampler(tags_per_item_weights(p.max_tags_per_item, p.tags_per_item_exponent));

  struct Draft {
    Seconds time;
    std::size_t creator;
    std::vector<std::size_t> tags;
  };
  std::vector<Draft> drafts;
  const double rate_per_second = p.items_per_minute / 60.0;
  for (double t = rng.exponential(rate_per_second); t < static_cast<double>(p.duration);
       t += rng.exponential(rate_per_second)) {
    Draft d;
    d.time = p.start + static_cast<Seconds>(t);
    d.creator = creator_rank[creator_sampler.sample(rng)];
    d.tags = sample_distinct(tag_sampler, count_sampler.sample(rng) + 1, rng);
    drafts.push_back(std::move(d));
  }
  std::vector<ContentEvent> out;
  out.reserve(drafts.size());
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    ContentEvent e{drafts[i].time, p.creators[drafts[i].creator], indexed_key('c', i, drafts.size()), {}};
    for (std::size_t t : drafts[i].tags) e.tags.push_back(indexed_key('t', t, p.n_tags));
    out.push_back(std::move(e));
  }
  return out;
}

// ---- static folksonomy ---------------------------------------------------------

struct FolksonomyGenParams {
  std::size_t n_users = 500;
  std::size_t n_items = 800;
  std::size_t n_tags = 300;
  std::size_t n_topics = 20;
  double activity_exponent = 1.0;       ///< Zipf exponent of item creation per user
  double tag_exponent = 1.0;            ///< Zipf exponent of tag use inside a topic
  double tags_per_item_exponent = 2.2;
  std::size_t max_tags_per_item = 13;
  double appeal_exponent = 1.0;         ///< Zipf exponent of item appeal among a tag's items
  std::size_t min_adoptions = 3;        ///< per-user downloads: min_adoptions + power-law extra
  std::size_t max_adoptions = 60;
  double adoption_exponent = 1.5;
  double on_topic = 0.85;               ///< probability a download follows the user's tags
  std::size_t followed_tags = 3;        ///< tags each user follows
  std::uint64_t seed = 1;
};

/// Topic-structured long-tail folksonomy with downloads.
///
/// Tags belong to topics round-robin; an item takes 1..max tags from its
/// creator's topic (or, off-topic, a random one) with Zipf weights. Each user
/// follows a few tags of its topic and adopts items carrying them, and has a
/// taste for mainstream or niche content: mainstream users pick a tag's items
/// proportionally to their appeal, niche users inversely, so users consistently
/// adopt items of similar popularity. Users are `u<i>`, items `i<i>`, tags `t<i>`.
inline FolksonomyGraph generate_folksonomy(const FolksonomyGenParams& p) {
  if (p.n_users == 0 || p.n_items == 0 || p.n_tags == 0 || p.n_topics == 0) {
    throw InvalidInput("folksonomy: empty dimension");
  }
  Rng rng(p.seed);
  const std::size_t topics = std::min({p.n_topics, p.n_tags, p.n_items});
  std::vector<std::vector<std::size_t>> topic_tags(topics), tag_items(p.n_tags);
  for (std::size_t t = 0; t < p.n_tags; ++t) topic_tags[t % topics].push_back(t);

  std::vector<std::size_t> user_topic(p.n_users);
  std::vector<bool> mainstream(p.n_users);
  for (std::size_t u = 0; u < p.n_users; ++u) {
    user_topic[u] = rng.below(topics);
    mainstream[u] = rng.bernoulli(0.5);
  }
  std::vector<std::size_t> creator_rank(p.n_users);
  for (std::size_t u = 0; u < p.n_users; ++u) creator_rank[u] = u;
  rng.shuffle(creator_rank);
  WeightedSampler creator_sampler(power_law_weights(p.n_users, p.activity_exponent));
  WeightedSampler count_sampler(tags_per_item_weights(p.max_tags_per_item, p.tags_per_item_exponent));

  FolksonomyGraph g;
  for (std::size_t i = 0; i < p.n_items; ++i) {
    const std::size_t creator = creator_rank[creator_sampler.sample(rng)];
    const std::size_t topic = rng.bernoulli(p.on_topic) ? user_topic[creator] : rng.below(topics);
    const auto& pool = topic_tags[topic];
    WeightedSampler tag_sampler(power_law_weights(pool.size(), p.tag_exponent));
    std::vector<std::string> tags;
    for (std::size_t t : sample_distinct(tag_sampler, count_sampler.sample(rng) + 1, rng)) {
      tags.push_back(indexed_key('t', pool[t], p.n_tags));
      tag_items[pool[t]].push_back(i);
    }
    g.add_content(indexed_key('u', creator, p.n_users), indexed_key('i', i, p.n_items), tags,
                  static_cast<Seconds>(i) * 60);
  }

  // Appeal rank among a tag's items is creation order: early items are hits.
  std::vector<WeightedSampler> hit_sampler, niche_sampler;
  for (std::size_t t = 0; t < p.n_tags; ++t) {
    auto w = power_law_weights(std::max<std::size_t>(1, tag_items[t].size()), p.appeal_exponent);
    hit_sampler.emplace_back(w);
    for (double& x : w) x = 1.0 / x;
    niche_sampler.emplace_back(w);
  }
  const std::size_t extra_span = p.max_adoptions > p.min_adoptions ? p.max_adoptions - p.min_adoptions + 1 : 1;
  WeightedSampler adoption_sampler(power_law_weights(extra_span, p.adoption_exponent));
  const Seconds end = static_cast<Seconds>(p.n_items) * 60;
  for (std::size_t u = 0; u < p.n_users; ++u) {
    const std::string user = indexed_key('u', u, p.n_users);
    const auto& pool = topic_tags[user_topic[u]];
    WeightedSampler pool_sampler(power_law_weights(pool.size(), p.tag_exponent));
    std::vector<std::size_t> followed;
    for (std::size_t t : sample_distinct(pool_sampler, p.followed_tags, rng)) followed.push_back(pool[t]);
    const std::size_t wanted = p.min_adoptions + adoption_sampler.sample(rng);
    for (std::size_t d = 0, attempts = 0; d < wanted && attempts < wanted * 20; ++attempts) {
      std::size_t tag;
      if (rng.bernoulli(p.on_topic)) {
        tag = followed[rng.below(followed.size())];
      } else {
        tag = rng.below(p.n_tags);
      }
      if (tag_items[tag].empty()) continue;
      const auto& sampler = mainstream[u] ? hit_sampler[tag] : niche_sampler[tag];
      const std::string item = indexed_key('i', tag_items[tag][sampler.sample(rng)], p.n_items);
      auto uh = g.find_user(user);
      if (uh && g.has_edge(*uh, *g.find_item(item))) continue;
      g.add_adoption(user, item, end);
      ++d;
    }
  }
  return g;
}

}  // namespace pliers
