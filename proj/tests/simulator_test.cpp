#include "pliers/simulator.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "oracles.hpp"
#include "pliers/synthetic.hpp"

using namespace pliers;

namespace {

SimConfig config(std::optional<Seconds> window = std::nullopt) {
  SimConfig c;
  c.expiry_window = window;
  c.threads = 1;
  return c;
}

std::vector<std::string> item_keys(const FolksonomyGraph& g) {
  std::vector<std::string> out;
  for (std::uint32_t i = 0; i < g.item_count(); ++i) out.push_back(g.key(ItemHandle{i}));
  std::sort(out.begin(), out.end());
  return out;
}

bool contained_in(const FolksonomyGraph& small, const FolksonomyGraph& big) {
  auto a = small.flatten();
  auto b = big.flatten();
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// ---- scripted oracle -------------------------------------------------------
//
// Knowledge is tracked as the set of content events each agent knows; graphs,
// scores and metrics are rebuilt from scratch from those sets.

using Flat = std::set<std::tuple<char, std::string, std::string>>;

Flat flat_of(const std::vector<ContentEvent>& known) {
  Flat out;
  for (const auto& e : known) {
    out.insert({'U', e.creator, e.item});
    for (const auto& t : e.tags) out.insert({'I', e.item, t});
  }
  return out;
}

double set_jaccard(const Flat& a, const Flat& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t shared = 0;
  for (const auto& x : a) shared += b.contains(x);
  return static_cast<double>(shared) / static_cast<double>(a.size() + b.size() - shared);
}

/// PLIERS recommendation for `agent` over the given contents, via the dense
/// literal-sum oracles.
std::vector<std::string> oracle_recommend(const std::vector<ContentEvent>& known, const std::string& agent) {
  std::map<std::string, std::size_t> users, items, tags;
  for (const auto& e : known) {
    users.emplace(e.creator, 0);
    items.emplace(e.item, 0);
    for (const auto& t : e.tags) tags.emplace(t, 0);
  }
  if (!users.contains(agent)) return {};
  auto number = [](auto& m) {
    std::size_t n = 0;
    for (auto& [k, v] : m) v = n++;
  };
  number(users), number(items), number(tags);
  pliers::testing::RandomCase c;
  c.n_users = users.size();
  c.n_items = items.size();
  c.n_tags = tags.size();
  for (const auto& e : known) {
    c.user_item.emplace_back(users[e.creator], items[e.item]);
    for (const auto& t : e.tags) c.item_tag.emplace_back(items[e.item], tags[t]);
  }
  const std::size_t target = users[agent];
  auto fa = pliers::testing::oracle_affinity(c, target);
  auto fs = pliers::testing::oracle_similarity(c, target);
  std::set<std::size_t> owned;
  for (auto [u, i] : c.user_item) {
    if (u == target) owned.insert(i);
  }
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& [key, idx] : items) {
    const double f = 0.5 * fa[idx] + 0.5 * fs[idx];
    if (f > 0 && !owned.contains(idx)) scored.push_back({f, key});
  }
  return pliers::testing::order_with_ties(std::move(scored));
}

double oracle_spearman(const std::vector<std::string>& r1, const std::vector<std::string>& r2, bool corrected) {
  if (r1.empty() && r2.empty()) return 1.0;
  const double m = static_cast<double>(std::max(r1.size(), r2.size()));
  std::set<std::string> all(r1.begin(), r1.end());
  all.insert(r2.begin(), r2.end());
  double sum = 0;
  for (const auto& x : all) {
    auto p1 = std::find(r1.begin(), r1.end(), x);
    auto p2 = std::find(r2.begin(), r2.end(), x);
    if (p1 != r1.end() && p2 != r2.end()) {
      sum += std::abs(static_cast<double>((p1 - r1.begin()) - (p2 - r2.begin())));
    } else if (corrected) {
      sum += m;
    }
  }
  return corrected ? 1.0 - sum / (static_cast<double>(all.size()) * m) : 1.0 - sum / m;
}

double oracle_item_jaccard(std::vector<std::string> a, std::vector<std::string> b) {
  Flat fa, fb;
  for (auto& x : a) fa.insert({'X', x, ""});
  for (auto& x : b) fb.insert({'X', x, ""});
  return set_jaccard(fa, fb);
}

struct OracleRow {
  double graph = 0, rec_j = 1, sp_c = 1, sp_l = 1;
};

std::vector<OracleRow> oracle_run(const std::vector<std::string>& agents, const std::vector<ContactEvent>& contacts,
                                  const std::vector<ContentEvent>& contents, Seconds step, std::int64_t steps,
                                  std::optional<Seconds> window) {
  std::map<std::string, std::set<std::size_t>> knows;  // agent -> content indices
  for (const auto& a : agents) knows[a];
  std::set<std::size_t> global;
  std::vector<OracleRow> rows;
  for (std::int64_t s = 0; s < steps; ++s) {
    const Seconds end = (s + 1) * step;
    for (std::size_t c = 0; c < contents.size(); ++c) {
      if (contents[c].time >= s * step && contents[c].time < end) knows[contents[c].creator].insert(c), global.insert(c);
    }
    for (const auto& e : contacts) {
      if (e.time < s * step || e.time >= end) continue;
      auto both = knows[e.a];
      both.insert(knows[e.b].begin(), knows[e.b].end());
      knows[e.a] = knows[e.b] = both;
    }
    auto visible = [&](const std::set<std::size_t>& ids) {
      std::vector<ContentEvent> out;
      for (std::size_t c : ids) {
        if (!window || contents[c].time >= end - *window) out.push_back(contents[c]);
      }
      return out;
    };
    const auto gkg = visible(global);
    const Flat gflat = flat_of(gkg);
    OracleRow row;
    double rj = 0, sc = 0, sl = 0;
    std::size_t n_rec = 0;
    for (const auto& a : agents) {
      const auto lkg = visible(knows[a]);
      row.graph += set_jaccard(flat_of(lkg), gflat);
      auto rl = oracle_recommend(lkg, a);
      auto rg = oracle_recommend(gkg, a);
      if (rl.empty() && rg.empty()) continue;
      ++n_rec;
      rj += oracle_item_jaccard(rl, rg);
      sc += oracle_spearman(rl, rg, true);
      sl += oracle_spearman(rl, rg, false);
    }
    row.graph /= static_cast<double>(agents.size());
    if (n_rec) row.rec_j = rj / n_rec, row.sp_c = sc / n_rec, row.sp_l = sl / n_rec;
    rows.push_back(row);
  }
  return rows;
}

struct Fixture {
  std::vector<std::string> agents{"a", "b", "c", "d", "e"};
  std::vector<ContentEvent> contents{
      {0, "a", "i1", {"music", "jazz"}},    {10, "b", "i2", {"music"}},
      {70, "c", "i3", {"jazz", "live"}},    {75, "a", "i4", {"news"}},
      {130, "d", "i5", {"music", "live"}},  {200, "e", "i6", {"news", "music"}},
      {250, "b", "i7", {"jazz"}},
  };
  std::vector<ContactEvent> contacts{
      {20, "a", "b"},  {80, "b", "c"},  {90, "c", "d"},  {140, "d", "e"},
      {150, "a", "c"}, {260, "e", "a"}, {265, "b", "d"},
  };
};

void expect_matches_oracle(const RunResult& got, const std::vector<OracleRow>& want) {
  ASSERT_EQ(got.metrics.size(), want.size());
  for (std::size_t s = 0; s < want.size(); ++s) {
    const auto& m = got.metrics[s];
    EXPECT_NEAR(m.avg_graph_jaccard, want[s].graph, 1e-12) << "step " << s;
    EXPECT_NEAR(m.avg_rec_jaccard, want[s].rec_j, 1e-12) << "step " << s;
    EXPECT_NEAR(m.avg_rec_spearman_corrected, want[s].sp_c, 1e-12) << "step " << s;
    EXPECT_NEAR(m.avg_rec_spearman_literal, want[s].sp_l, 1e-12) << "step " << s;
  }
}

}  // namespace

TEST(Simulator, NoContactsGivesOneOverN) {
  auto r = run(config(), {}, {{0, "a", "i1", {"t"}}, {65, "a", "i2", {"t"}}}, std::vector<std::string>{"a", "b", "c", "d"});
  ASSERT_EQ(r.metrics.size(), 2u);
  for (const auto& m : r.metrics) EXPECT_DOUBLE_EQ(m.avg_graph_jaccard, 0.25);
}

TEST(Simulator, CompleteMixingReachesFullKnowledge) {
  std::vector<std::string> agents{"a", "b", "c", "d"};
  std::vector<ContentEvent> contents{{0, "a", "i1", {"x"}}, {0, "b", "i2", {"x", "y"}}, {0, "c", "i3", {"y"}}};
  std::vector<ContactEvent> contacts;
  for (Seconds t = 0; t < 300; t += 60)
    for (std::size_t i = 0; i < agents.size(); ++i)
      for (std::size_t j = i + 1; j < agents.size(); ++j) contacts.push_back({t, agents[i], agents[j]});
  auto r = run(config(), contacts, contents);
  ASSERT_EQ(r.metrics.size(), 5u);
  for (const auto& m : r.metrics) {
    EXPECT_EQ(m.avg_graph_jaccard, 1.0);
    EXPECT_EQ(m.avg_rec_jaccard, 1.0);
    EXPECT_EQ(m.avg_rec_spearman_corrected, 1.0);
    EXPECT_EQ(m.avg_rec_spearman_literal, 1.0);
  }
}

TEST(Simulator, EmptyContentIsTriviallySimilar) {
  auto r = run(config(), {{0, "a", "b"}, {70, "b", "c"}}, {});
  ASSERT_EQ(r.metrics.size(), 2u);
  for (const auto& m : r.metrics) {
    EXPECT_EQ(m.avg_graph_jaccard, 1.0);
    EXPECT_EQ(m.avg_rec_jaccard, 1.0);
    EXPECT_EQ(m.rec_agents, 0u);
  }
}

TEST(Simulator, ChainWithinOneStepForwards) {
  auto r = run(config(), {{10, "a", "b"}, {20, "b", "c"}}, {{0, "a", "i1", {"t"}}});
  ASSERT_EQ(r.metrics.size(), 1u);
  EXPECT_EQ(r.metrics[0].avg_graph_jaccard, 1.0);
  // Reversed order in the file: c meets b before b has met a.
  auto late = run(config(), {{10, "b", "c"}, {20, "a", "b"}}, {{0, "a", "i1", {"t"}}});
  EXPECT_DOUBLE_EQ(late.metrics[0].avg_graph_jaccard, 2.0 / 3.0);
}

TEST(Encounter, ExchangesAndReportsDiscoveries) {
  Simulator sim(config(), {"a", "b"});
  sim.apply_content({0, "a", "i1", {"t1"}});
  sim.apply_content({0, "b", "i2", {"t1"}});
  auto out = sim.encounter("a", "b", 5);
  EXPECT_EQ(out.discovered_by_a, std::vector<std::string>{"i2"});
  EXPECT_EQ(out.discovered_by_b, std::vector<std::string>{"i1"});
  EXPECT_EQ(item_keys(sim.agent_state("a").lkg), (std::vector<std::string>{"i1", "i2"}));
  EXPECT_EQ(sim.agent_state("a").lkg, sim.agent_state("b").lkg);
  // Similarity index of i2 for a: tag t1 shared by two items.
  ASSERT_EQ(out.scores_a.size(), 1u);
  EXPECT_DOUBLE_EQ(out.scores_a[0], 0.25);

  auto again = sim.encounter("b", "a", 6);
  EXPECT_TRUE(again.discovered_by_a.empty());
  EXPECT_TRUE(again.discovered_by_b.empty());
}

TEST(Encounter, IsCommutative) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ContentEvent> contents;
    for (int i = 0; i < 8; ++i) {
      contents.push_back({i, "n" + std::to_string(rng() % 3), "i" + std::to_string(i), {"t" + std::to_string(rng() % 4)}});
    }
    Simulator s1(config(), {"n0", "n1", "n2"});
    Simulator s2(config(), {"n0", "n1", "n2"});
    for (const auto& c : contents) s1.apply_content(c), s2.apply_content(c);
    s1.encounter("n0", "n1", 10);
    s2.encounter("n1", "n0", 10);
    for (auto id : {"n0", "n1", "n2"}) EXPECT_EQ(s1.agent_state(id).lkg, s2.agent_state(id).lkg);
  }
}

TEST(Simulator, MatchesScriptedOracle) {
  Fixture f;
  auto got = run(config(), f.contacts, f.contents, f.agents);
  expect_matches_oracle(got, oracle_run(f.agents, f.contacts, f.contents, 60, 5, std::nullopt));
}

TEST(Simulator, MatchesScriptedOracleWithExpiry) {
  Fixture f;
  for (Seconds w : {60, 100, 150}) {
    auto got = run(config(w), f.contacts, f.contents, f.agents);
    expect_matches_oracle(got, oracle_run(f.agents, f.contacts, f.contents, 60, 5, w));
  }
}

TEST(Simulator, InfiniteWindowEqualsNoExpiry) {
  Fixture f;
  auto plain = run(config(), f.contacts, f.contents, f.agents);
  auto wide = run(config(300), f.contacts, f.contents, f.agents);
  EXPECT_EQ(plain.metrics, wide.metrics);
}

TEST(Simulator, ContainmentAndMonotoneGrowth) {
  ContactGenParams cp{30, 5, 0.1, 1800, 60, 4};
  auto contacts = generate_synthetic_contacts(cp);
  ContentGenParams kp;
  kp.creators = {"n00", "n07", "n13", "n21"};
  kp.duration = 1800;
  auto contents = generate_synthetic_contents(kp);
  std::vector<std::string> agents = agents_in(contacts, contents);

  Simulator sim(config(), agents);
  std::map<std::string, std::size_t> sizes;
  std::size_t nc = 0, ne = 0;
  for (std::int64_t step = 0; step < 30; ++step) {
    const Seconds end = (step + 1) * 60;
    for (; ne < contents.size() && contents[ne].time < end; ++ne) sim.apply_content(contents[ne]);
    for (; nc < contacts.size() && contacts[nc].time < end; ++nc) sim.encounter(contacts[nc].a, contacts[nc].b, end);
    for (const auto& a : sim.agents()) {
      ASSERT_TRUE(contained_in(a.lkg, sim.gkg()));
      const std::size_t size = a.lkg.user_item_edge_count() + a.lkg.item_tag_edge_count();
      ASSERT_GE(size, sizes[a.id]);
      sizes[a.id] = size;
    }
  }
}

TEST(Simulator, StaticContentSimilarityNeverDecreases) {
  ContactGenParams cp{40, 8, 0.1, 3600, 60, 6};
  auto contacts = generate_synthetic_contacts(cp);
  ContentGenParams kp;
  kp.creators = {"n00", "n11", "n22", "n33"};
  kp.duration = 600;
  kp.items_per_minute = 3;
  auto r = run(config(), contacts, generate_synthetic_contents(kp));
  for (std::size_t s = 11; s < r.metrics.size(); ++s) {
    EXPECT_GE(r.metrics[s].avg_graph_jaccard, r.metrics[s - 1].avg_graph_jaccard);
  }
}

TEST(Simulator, RandomGossipConverges) {
  const std::size_t n = 100;
  std::vector<std::string> agents;
  for (std::size_t a = 0; a < n; ++a) agents.push_back(indexed_key('n', a, n));
  std::vector<ContentEvent> contents;
  for (std::size_t c = 0; c < 10; ++c) contents.push_back({0, agents[c * 7], "i" + std::to_string(c), {"t"}});
  Rng rng(8);
  std::vector<ContactEvent> contacts;
  for (Seconds round = 0; round < 20; ++round) {
    for (std::size_t a = 0; a < n; ++a) {
      std::size_t b = rng.below(n - 1);
      if (b >= a) ++b;
      contacts.push_back({round * 60, agents[a], agents[b]});
    }
  }
  auto r = run(config(), contacts, contents);
  ASSERT_EQ(r.metrics.size(), 20u);
  EXPECT_GE(r.metrics.back().avg_graph_jaccard, 0.99);
}

TEST(Simulator, DeterministicAcrossThreadCounts) {
  ContactGenParams cp{50, 5, 0.2, 1200, 60, 2};
  auto contacts = generate_synthetic_contacts(cp);
  ContentGenParams kp;
  kp.creators = {"n01", "n02", "n30"};
  kp.duration = 1200;
  auto contents = generate_synthetic_contents(kp);
  auto one = run(config(), contacts, contents);
  SimConfig c = config();
  c.threads = 4;
  EXPECT_EQ(run(c, contacts, contents).metrics, one.metrics);
  EXPECT_EQ(run(config(), contacts, contents).metrics, one.metrics);
}

TEST(Simulator, CadenceAggregatesCounts) {
  Fixture f;
  SimConfig c = config();
  c.metric_cadence = 2;
  auto r = run(c, f.contacts, f.contents, f.agents);
  ASSERT_EQ(r.metrics.size(), 3u);
  EXPECT_EQ(r.metrics[0].step, 0);
  EXPECT_EQ(r.metrics[1].step, 2);
  EXPECT_EQ(r.metrics[2].step, 4);
  EXPECT_EQ(r.metrics[0].sim_time, 60);
  // Step 0: two contents, one contact; steps 1-2: three contents, four
  // contacts; steps 3-4: two of each.
  EXPECT_EQ(r.metrics[0].n_contents, 2u);
  EXPECT_EQ(r.metrics[0].n_contacts, 1u);
  EXPECT_EQ(r.metrics[1].n_contents, 3u);
  EXPECT_EQ(r.metrics[1].n_contacts, 4u);
  EXPECT_EQ(r.metrics[2].n_contents, 2u);
  EXPECT_EQ(r.metrics[2].n_contacts, 2u);
}

TEST(Simulator, DurationAndStartTime) {
  SimConfig c = config();
  c.start_time = 1000;
  c.duration = 300;
  auto r = run(c, {{1010, "a", "b"}}, {{1000, "a", "i1", {"t"}}});
  ASSERT_EQ(r.metrics.size(), 5u);
  EXPECT_EQ(r.metrics.back().sim_time, 1300);
  EXPECT_THROW(run(c, {{999, "a", "b"}}, {}), InvalidInput);
}

TEST(Simulator, DownloadPolicyObservesDiscoveries) {
  Fixture f;
  SimConfig c = config();
  c.download_policy = parse_download_policy("buffer:1");
  Simulator sim(c, f.agents);
  for (const auto& e : f.contents) sim.apply_content(e);
  sim.encounter("a", "b", 300);
  const auto& policy = *sim.agent_state("a").policy;
  EXPECT_EQ(policy.observed(), 2u);
  EXPECT_EQ(policy.buffer().size(), 1u);
}

TEST(Simulator, RejectsBadInput) {
  EXPECT_THROW(run(config(), {{0, "a", "zz"}}, {}, std::vector<std::string>{"a", "b"}), InvalidInput);
  EXPECT_THROW(run(config(), {}, {{0, "a", "i", {"t"}}, {5, "b", "i", {"t"}}}), InvalidInput);
  SimConfig bad = config();
  bad.step_length = 0;
  EXPECT_THROW(run(bad, {}, {}), InvalidInput);
  bad = config();
  bad.metric_cadence = 0;
  EXPECT_THROW(bad.validate(), InvalidInput);
}

TEST(SimilarityDeltas, PairsChangesWithCounts) {
  std::vector<StepMetrics> rows(3);
  rows[0].avg_graph_jaccard = 0.2;
  rows[1].avg_graph_jaccard = 0.5, rows[1].n_contents = 2, rows[1].n_contacts = 7;
  rows[2].avg_graph_jaccard = 0.4, rows[2].n_contents = 0, rows[2].n_contacts = 3;
  auto d = similarity_deltas(rows);
  ASSERT_EQ(d.delta.size(), 2u);
  EXPECT_DOUBLE_EQ(d.delta[0], 0.3);
  EXPECT_DOUBLE_EQ(d.delta[1], -0.1);
  EXPECT_EQ(d.contents, (std::vector<double>{2, 0}));
  EXPECT_EQ(d.contacts, (std::vector<double>{7, 3}));
}
