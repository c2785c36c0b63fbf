#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "pliers/download_policy.hpp"
#include "pliers/folksonomy.hpp"
#include "pliers/metrics.hpp"
#include "pliers/recommenders.hpp"
#include "pliers/traces.hpp"

namespace pliers {

struct SimConfig {
  Seconds step_length = 60;
  double lambda = 0.5;
  std::optional<Seconds> expiry_window;
  std::size_t metric_cadence = 1;
  std::optional<std::size_t> top_n;
  SpearmanMode spearman_mode = SpearmanMode::Corrected;
  std::uint64_t rng_seed = 0;
  std::optional<DownloadPolicySpec> download_policy;
  Seconds start_time = 0;
  /// Simulated span; unset runs through the step of the last event.
  std::optional<Seconds> duration;
  /// Worker threads for metric computation; 0 picks hardware concurrency.
  std::size_t threads = 0;

  void validate() const {
    if (step_length <= 0) throw InvalidInput("step_length must be positive");
    if (metric_cadence < 1) throw InvalidInput("metric_cadence must be at least 1");
    if (lambda < 0.0 || lambda > 1.0) throw InvalidInput("lambda must be in [0, 1]");
    if (expiry_window && *expiry_window <= 0) throw InvalidInput("expiry_window must be positive");
    if (duration && *duration <= 0) throw InvalidInput("duration must be positive");
  }
};

/// Measurements taken at the end of one simulated step. Event counts cover
/// every step since the previous metrics row.
struct StepMetrics {
  std::int64_t step = 0;
  Seconds sim_time = 0;  ///< end of the step
  double avg_graph_jaccard = 1.0;
  double avg_rec_jaccard = 1.0;
  double avg_rec_spearman = 1.0;  ///< the configured mode
  double avg_rec_spearman_corrected = 1.0;
  double avg_rec_spearman_literal = 1.0;
  std::size_t n_contacts = 0;
  std::size_t n_contents = 0;
  std::size_t rec_agents = 0;  ///< agents contributing to the recommendation averages

  bool operator==(const StepMetrics&) const = default;
};

struct EncounterOutcome {
  std::vector<std::string> discovered_by_a;  ///< items a learned from b
  std::vector<std::string> discovered_by_b;
  std::vector<double> scores_a;  ///< PLIERS score of each discovered item for a
  std::vector<double> scores_b;
};

/// Local and global knowledge of a population of agents, advanced by content
/// and contact events.
class Simulator {
 public:
  struct Agent {
    std::string id;
    FolksonomyGraph lkg;
    std::optional<DownloadPolicyState> policy;
  };

  Simulator(SimConfig config, std::vector<std::string> agent_ids) : config_(std::move(config)) {
    config_.validate();
    std::sort(agent_ids.begin(), agent_ids.end());
    agent_ids.erase(std::unique(agent_ids.begin(), agent_ids.end()), agent_ids.end());
    for (auto& id : agent_ids) {
      index_.emplace(id, agents_.size());
      Agent a{std::move(id), {}, std::nullopt};
      if (config_.download_policy) a.policy.emplace(*config_.download_policy);
      agents_.push_back(std::move(a));
    }
  }

  /// The creator's LKG and the GKG both gain the content.
  void apply_content(const ContentEvent& e) {
    Agent& creator = agent(e.creator);
    if (gkg_.find_item(e.item)) throw InvalidInput("content '" + e.item + "' created twice");
    creator.lkg.add_content(e.creator, e.item, e.tags, e.time);
    gkg_.add_content(e.creator, e.item, e.tags, e.time);
  }

  /// Symmetric LKG exchange. Both sides end with the union of the two
  /// pre-contact graphs, which a.merge(b) followed by b.merge(a) produces since
  /// union with min-timestamps is idempotent. Each side then scores what it
  /// discovered against its own merged LKG.
  EncounterOutcome encounter(std::string_view a_id, std::string_view b_id, Seconds now) {
    Agent& a = agent(a_id);
    Agent& b = agent(b_id);
    EncounterOutcome out;
    if (&a == &b) return out;
    auto new_a = a.lkg.merge(b.lkg);
    auto new_b = b.lkg.merge(a.lkg);
    evaluate(a, new_a, now, out.discovered_by_a, out.scores_a);
    evaluate(b, new_b, now, out.discovered_by_b, out.scores_b);
    return out;
  }

  /// Graph and recommendation similarity between every LKG and the GKG.
  StepMetrics compute_metrics(std::int64_t step, Seconds now) const {
    struct AgentResult {
      double graph_jaccard = 0.0;
      bool has_rec = false;
      double rec_jaccard = 0.0, spearman_corrected = 0.0, spearman_literal = 0.0;
    };
    std::optional<FolksonomyGraph> global_view;
    if (config_.expiry_window) global_view = gkg_.prune_older_than(now, *config_.expiry_window);
    const FolksonomyGraph& global = global_view ? *global_view : gkg_;
    const ScoringOptions scoring{Algorithm::Pliers, config_.lambda, 0};

    std::vector<AgentResult> results(agents_.size());
    auto work = [&](std::size_t begin, std::size_t end) {
      for (std::size_t n = begin; n < end; ++n) {
        const Agent& ag = agents_[n];
        std::optional<FolksonomyGraph> local_view;
        if (config_.expiry_window) local_view = ag.lkg.prune_older_than(now, *config_.expiry_window);
        const FolksonomyGraph& local = local_view ? *local_view : ag.lkg;
        AgentResult& r = results[n];
        r.graph_jaccard = graph_jaccard(local, global);
        RecommendationVector rec_local = recommend(local, ag.id, scoring, config_.top_n);
        RecommendationVector rec_global = recommend(global, ag.id, scoring, config_.top_n);
        if (rec_local.empty() && rec_global.empty()) continue;
        r.has_rec = true;
        r.rec_jaccard = recommendation_jaccard(rec_local, rec_global);
        r.spearman_corrected = spearman_similarity(rec_local, rec_global, SpearmanMode::Corrected);
        r.spearman_literal = spearman_similarity(rec_local, rec_global, SpearmanMode::Literal);
      }
    };
    std::size_t threads = config_.threads ? config_.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(1, agents_.size() / 16));
    if (threads <= 1) {
      work(0, agents_.size());
    } else {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (agents_.size() + threads - 1) / threads;
      for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(agents_.size(), begin + chunk);
        if (begin < end) pool.emplace_back(work, begin, end);
      }
    }

    StepMetrics m;
    m.step = step;
    m.sim_time = now;
    double graph_sum = 0.0, rec_j = 0.0, sp_c = 0.0, sp_l = 0.0;
    for (const auto& r : results) {
      graph_sum += r.graph_jaccard;
      if (!r.has_rec) continue;
      ++m.rec_agents;
      rec_j += r.rec_jaccard;
      sp_c += r.spearman_corrected;
      sp_l += r.spearman_literal;
    }
    // An empty population matches an empty GKG; with no agent holding a
    // recommendation the recommendation averages are vacuously 1.
    m.avg_graph_jaccard = agents_.empty() ? 1.0 : graph_sum / static_cast<double>(agents_.size());
    if (m.rec_agents > 0) {
      const auto n = static_cast<double>(m.rec_agents);
      m.avg_rec_jaccard = rec_j / n;
      m.avg_rec_spearman_corrected = sp_c / n;
      m.avg_rec_spearman_literal = sp_l / n;
    }
    m.avg_rec_spearman = config_.spearman_mode == SpearmanMode::Corrected ? m.avg_rec_spearman_corrected
                                                                         : m.avg_rec_spearman_literal;
    return m;
  }

  const SimConfig& config() const { return config_; }
  const FolksonomyGraph& gkg() const { return gkg_; }
  const std::vector<Agent>& agents() const { return agents_; }
  const Agent& agent_state(std::string_view id) const { return const_cast<Simulator*>(this)->agent(id); }
  bool has_agent(std::string_view id) const { return index_.contains(std::string(id)); }

 private:
  Agent& agent(std::string_view id) {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) throw InvalidInput("unknown agent '" + std::string(id) + "'");
    return agents_[it->second];
  }

  void evaluate(Agent& ag, const std::vector<ItemHandle>& discovered, Seconds now, std::vector<std::string>& keys,
                std::vector<double>& scores) {
    if (discovered.empty()) return;
    std::optional<ScoreVector> sv;
    if (auto self = ag.lkg.find_user(ag.id)) sv = pliers_tripartite(ag.lkg, *self, config_.lambda);
    for (ItemHandle i : discovered) {
      const double s = sv ? (*sv)[i] : 0.0;
      keys.push_back(ag.lkg.key(i));
      scores.push_back(s);
      if (ag.policy) ag.policy->observe(keys.back(), s, now);
    }
  }

  SimConfig config_;
  std::vector<Agent> agents_;
  std::unordered_map<std::string, std::size_t> index_;
  FolksonomyGraph gkg_;
};

struct RunResult {
  std::vector<StepMetrics> metrics;
  std::vector<std::string> agents;
};

/// Every agent id named by either trace, sorted.
inline std::vector<std::string> agents_in(const std::vector<ContactEvent>& contacts,
                                          const std::vector<ContentEvent>& contents) {
  std::set<std::string> ids;
  for (const auto& c : contacts) ids.insert(c.a), ids.insert(c.b);
  for (const auto& c : contents) ids.insert(c.creator);
  return {ids.begin(), ids.end()};
}

/// Replays both traces step by step. Within step [t, t + step_length): content
/// events first, then contacts in input order, then metrics every
/// `metric_cadence` steps (counted from step 0). `agents` defaults to every id
/// appearing in the traces; a contact naming an unregistered agent throws.
inline RunResult run(const SimConfig& config, std::vector<ContactEvent> contacts, std::vector<ContentEvent> contents,
                     std::optional<std::vector<std::string>> agents = std::nullopt) {
  config.validate();
  RunResult result;
  result.agents = agents ? *agents : agents_in(contacts, contents);
  Simulator sim(config, result.agents);

  auto by_time = [](const auto& x, const auto& y) { return x.time < y.time; };
  std::stable_sort(contacts.begin(), contacts.end(), by_time);
  std::stable_sort(contents.begin(), contents.end(), by_time);
  auto step_of = [&](Seconds t) {
    if (t < config.start_time) throw InvalidInput("event at " + std::to_string(t) + " precedes start_time");
    return (t - config.start_time) / config.step_length;
  };

  if (!contacts.empty()) step_of(contacts.front().time);
  if (!contents.empty()) step_of(contents.front().time);

  std::int64_t steps = 0;
  if (config.duration) {
    steps = (*config.duration + config.step_length - 1) / config.step_length;
  } else {
    if (!contacts.empty()) steps = std::max(steps, step_of(contacts.back().time) + 1);
    if (!contents.empty()) steps = std::max(steps, step_of(contents.back().time) + 1);
  }

  std::size_t next_contact = 0, next_content = 0;
  std::size_t pending_contacts = 0, pending_contents = 0;
  for (std::int64_t step = 0; step < steps; ++step) {
    const Seconds end = config.start_time + (step + 1) * config.step_length;
    for (; next_content < contents.size() && contents[next_content].time < end; ++next_content) {
      sim.apply_content(contents[next_content]);
      ++pending_contents;
    }
    for (; next_contact < contacts.size() && contacts[next_contact].time < end; ++next_contact) {
      const auto& c = contacts[next_contact];
      if (!sim.has_agent(c.a) || !sim.has_agent(c.b)) {
        throw InvalidInput("contact at " + std::to_string(c.time) + " names an unknown agent");
      }
      sim.encounter(c.a, c.b, c.time);
      ++pending_contacts;
    }
    if (step % static_cast<std::int64_t>(config.metric_cadence) == 0) {
      StepMetrics m = sim.compute_metrics(step, end);
      m.n_contacts = pending_contacts;
      m.n_contents = pending_contents;
      pending_contacts = pending_contents = 0;
      result.metrics.push_back(m);
    }
  }
  return result;
}

/// Per-row change of avg_graph_jaccard against the previous row, paired with
/// that row's content and contact counts, fed to correlation_analysis.
struct SimilarityDeltaSeries {
  std::vector<double> delta, contents, contacts;
};

inline SimilarityDeltaSeries similarity_deltas(const std::vector<StepMetrics>& rows) {
  SimilarityDeltaSeries s;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    s.delta.push_back(rows[k].avg_graph_jaccard - rows[k - 1].avg_graph_jaccard);
    s.contents.push_back(static_cast<double>(rows[k].n_contents));
    s.contacts.push_back(static_cast<double>(rows[k].n_contacts));
  }
  return s;
}

}  // namespace pliers
