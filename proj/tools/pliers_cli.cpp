// Command-line front end: simulate, linkpred, recommend, gen-traces.
//
// Exit codes: 0 success, 1 I/O failure, 2 malformed input file, 3 bad
// configuration or option value, 4 unknown user.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pliers/config.hpp"
#include "pliers/graph_io.hpp"
#include "pliers/link_prediction.hpp"
#include "pliers/recommenders.hpp"
#include "pliers/report.hpp"
#include "pliers/simulator.hpp"
#include "pliers/synthetic.hpp"
#include "pliers/traces.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace pliers;

namespace {

enum Exit { kOk = 0, kIo = 1, kParse = 2, kConfig = 3, kUnknownUser = 4 };

struct Failure {
  Exit code;
  std::string message;
};

// ---- logging -----------------------------------------------------------------

enum class LogLevel { Quiet, Info, Debug };

LogLevel log_level() {
  const char* env = std::getenv("PLIERS_LOG_LEVEL");
  const std::string v = env ? env : "";
  if (v == "info") return LogLevel::Info;
  if (v == "debug") return LogLevel::Debug;
  return LogLevel::Quiet;
}

void log(LogLevel at, const std::string& msg) {
  if (log_level() >= at) std::cerr << "pliers: " << msg << '\n';
}

// ---- files -------------------------------------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kIo, "cannot open " + path};
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content) || !out.flush()) throw Failure{kIo, "cannot write " + path.string()};
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

/// Run description written next to every output file.
class Manifest {
 public:
  explicit Manifest(std::string command) {
    doc_["command"] = std::move(command);
    doc_["tool_version"] = PLIERS_VERSION;
    doc_["started_utc"] = utc_now();
  }

  json& operator[](const char* key) { return doc_[key]; }

  void input(const std::string& role, const std::string& path, const std::string& content) {
    doc_["inputs"][role] = {{"path", path}, {"fnv1a64", digest(content)}, {"bytes", content.size()}};
  }

  void output(const std::string& role, const fs::path& path, const std::string& content) {
    doc_["outputs"][role] = {{"path", path.string()}, {"fnv1a64", digest(content)}, {"bytes", content.size()}};
  }

  void write(const fs::path& path) {
    doc_["finished_utc"] = utc_now();
    write_file(path, doc_.dump(2) + "\n");
  }

 private:
  json doc_;
};

std::vector<ContactEvent> load_contacts(const std::string& path, Manifest& m) {
  if (path.empty()) return {};
  const std::string text = read_file(path);
  m.input("contacts", path, text);
  std::istringstream in(text);
  return read_contacts_csv(in, path);
}

std::vector<ContentEvent> load_contents(const std::string& path, Manifest& m) {
  const std::string text = read_file(path);
  m.input("contents", path, text);
  std::istringstream in(text);
  return read_contents_csv(in, path);
}

FolksonomyGraph load_graph(const std::string& path, Manifest& m) {
  const std::string text = read_file(path);
  m.input("graph", path, text);
  std::istringstream in(text);
  return read_graph_tsv(in, path);
}

Algorithm algorithm_or_fail(const std::string& name) {
  auto a = parse_algorithm(name);
  if (!a) throw Failure{kConfig, "unknown algorithm '" + name + "'"};
  return *a;
}

bool uses_k(Algorithm a) { return a == Algorithm::UserCF || a == Algorithm::TagExpansion; }

// ---- simulate ----------------------------------------------------------------

struct SimulateArgs {
  std::string contacts, contents, config, out_dir = ".";
  std::vector<std::string> set;
};

int cmd_simulate(const SimulateArgs& a) {
  Manifest manifest("simulate");
  SimConfig config;
  if (!a.config.empty()) {
    const std::string text = read_file(a.config);
    manifest.input("config", a.config, text);
    std::istringstream in(text);
    config = read_sim_config(in, a.config);
  }
  for (const auto& kv : a.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_setting(config, detail::trim(std::string_view(kv).substr(0, eq)),
                  detail::trim(std::string_view(kv).substr(eq + 1)));
  }
  try {
    config.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }

  auto contacts = load_contacts(a.contacts, manifest);
  auto contents = load_contents(a.contents, manifest);
  log(LogLevel::Info, std::to_string(contacts.size()) + " contacts, " + std::to_string(contents.size()) +
                          " contents");
  RunResult result;
  try {
    result = run(config, std::move(contacts), std::move(contents));
  } catch (const InvalidInput& e) {
    // Inconsistent traces: duplicate content, events before the start time.
    throw Failure{kParse, e.what()};
  }

  std::ostringstream metrics, correlation;
  write_metrics_csv(metrics, result.metrics);
  write_correlation_csv(correlation, result.metrics);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  write_file(dir / "metrics.csv", metrics.str());
  write_file(dir / "correlation.csv", correlation.str());

  json cfg;
  for (const auto& [k, v] : describe(config)) cfg[k] = v;
  manifest["config"] = cfg;
  manifest["seed"] = config.rng_seed;
  manifest["agents"] = result.agents.size();
  manifest["steps"] = result.metrics.empty() ? 0 : result.metrics.back().step + 1;
  manifest["conventions"] = {
      {"sim_time_s", "end of the step; steps are [start + k*step_length, start + (k+1)*step_length)"},
      {"event_order", "contents before contacts within a step; contacts in input order"},
      {"avg_graph_jaccard", "mean over all agents of J(flatten(LKG), flatten(GKG)); J(empty, empty) = 1"},
      {"recommendation_averages",
       "PLIERS, lambda from config; agents whose local and global lists are both empty are excluded; "
       "1 when no agent qualifies"},
      {"top_n", "truncates both lists before the recommendation similarities; none means unbounded"},
      {"counts", "n_contacts and n_contents cover every step since the previous row"},
      {"correlation", "delta of avg_graph_jaccard between rows regressed on n_contents (x1) and n_contacts (x2), "
                      "no intercept"},
  };
  manifest.output("metrics", dir / "metrics.csv", metrics.str());
  manifest.output("correlation", dir / "correlation.csv", correlation.str());
  manifest.write(dir / "manifest.json");
  log(LogLevel::Info, "wrote " + std::to_string(result.metrics.size()) + " metric rows to " + dir.string());
  return kOk;
}

// ---- linkpred ----------------------------------------------------------------

struct LinkpredArgs {
  std::string graph, out;
  std::vector<std::string> algorithms{"pliers", "cf", "tagexp"};
  std::vector<std::size_t> ks{10};
  std::uint64_t seed = 1;
  double lambda = 0.5;
  std::size_t top_n = 0;
};

int cmd_linkpred(const LinkpredArgs& a) {
  Manifest manifest("linkpred");
  std::vector<Algorithm> algs;
  for (const auto& name : a.algorithms) algs.push_back(algorithm_or_fail(name));
  for (std::size_t k : a.ks) {
    if (k == 0) throw Failure{kConfig, "k must be positive"};
  }
  if (a.lambda < 0.0 || a.lambda > 1.0) throw Failure{kConfig, "lambda must be in [0, 1]"};
  auto graph = load_graph(a.graph, manifest);
  auto pruned = prune_for_link_prediction(graph, a.seed);
  log(LogLevel::Info, std::to_string(pruned.removed.removals.size()) + " links hidden");

  const std::optional<std::size_t> top_n = a.top_n ? std::optional<std::size_t>(a.top_n) : std::nullopt;
  std::ostringstream csv;
  csv << "algorithm,k,precision,recall,removed_fraction\n";
  for (Algorithm alg : algs) {
    const std::vector<std::size_t> ks = uses_k(alg) ? a.ks : std::vector<std::size_t>{0};
    for (std::size_t k : ks) {
      auto rep = evaluate_link_prediction(pruned, {alg, a.lambda, k ? k : 1}, top_n);
      csv << to_string(alg) << ',' << (k ? std::to_string(k) : "") << ',' << format_real(rep.precision) << ','
          << format_real(rep.recall) << ',' << format_real(pruned.removed.removed_fraction) << '\n';
    }
  }

  manifest["seed"] = a.seed;
  manifest["algorithms"] = a.algorithms;
  manifest["k"] = a.ks;
  manifest["lambda"] = a.lambda;
  manifest["top_n"] = a.top_n ? json(a.top_n) : json("none");
  manifest["removed_links"] = pruned.removed.removals.size();
  if (a.out.empty() || a.out == "-") {
    std::cout << csv.str();
  } else {
    write_file(a.out, csv.str());
    manifest.output("report", a.out, csv.str());
    manifest.write(a.out + ".manifest.json");
  }
  return kOk;
}

// ---- recommend ---------------------------------------------------------------

struct RecommendArgs {
  std::string graph, user, algorithm = "pliers";
  double lambda = 0.5;
  std::size_t k = 10;
  std::optional<std::size_t> top_n;
};

int cmd_recommend(const RecommendArgs& a) {
  Manifest manifest("recommend");
  const Algorithm alg = algorithm_or_fail(a.algorithm);
  if (a.lambda < 0.0 || a.lambda > 1.0) throw Failure{kConfig, "lambda must be in [0, 1]"};
  if (a.k == 0) throw Failure{kConfig, "k must be positive"};
  auto graph = load_graph(a.graph, manifest);
  if (!graph.find_user(a.user)) throw Failure{kUnknownUser, "unknown user '" + a.user + "'"};
  auto rec = recommend(graph, a.user, {alg, a.lambda, a.k}, a.top_n);
  std::cout << "rank,item,score\n";
  for (std::size_t r = 0; r < rec.ranked.size(); ++r) {
    std::cout << r + 1 << ',' << rec.ranked[r].item << ',' << format_real(rec.ranked[r].score) << '\n';
  }
  return kOk;
}

// ---- gen-traces --------------------------------------------------------------

struct GenArgs {
  std::string contacts_out, contents_out, graph_out;
  ContactGenParams contacts;
  std::size_t creators = 0;
  double items_per_minute = 2.0;
  Seconds content_duration = 0;
  std::size_t n_tags = 300;
  double tag_exponent = 1.0;
  std::size_t max_tags = 13;
  double tags_per_item_exponent = 2.2;
  FolksonomyGenParams folksonomy;
};

int cmd_gen_traces(GenArgs a) {
  Manifest manifest("gen-traces");
  if (a.contacts_out.empty() && a.contents_out.empty() && a.graph_out.empty()) {
    throw Failure{kConfig, "nothing to generate: give --contacts-out, --contents-out or --graph-out"};
  }
  try {
    if (!a.contacts_out.empty()) {
      std::ostringstream s;
      write_contacts_csv(s, generate_synthetic_contacts(a.contacts));
      write_file(a.contacts_out, s.str());
      manifest.output("contacts", a.contacts_out, s.str());
    }
    if (!a.contents_out.empty()) {
      ContentGenParams p;
      const std::size_t creators = a.creators ? std::min(a.creators, a.contacts.n_agents) : a.contacts.n_agents;
      // Creators are spread evenly over the agent population.
      for (std::size_t c = 0; c < creators; ++c) {
        p.creators.push_back(indexed_key('n', c * a.contacts.n_agents / creators, a.contacts.n_agents));
      }
      p.items_per_minute = a.items_per_minute;
      p.duration = a.content_duration ? a.content_duration : a.contacts.duration;
      p.n_tags = a.n_tags;
      p.tag_exponent = a.tag_exponent;
      p.max_tags_per_item = a.max_tags;
      p.tags_per_item_exponent = a.tags_per_item_exponent;
      p.seed = a.contacts.seed + 1;
      std::ostringstream s;
      write_contents_csv(s, generate_synthetic_contents(p));
      write_file(a.contents_out, s.str());
      manifest.output("contents", a.contents_out, s.str());
    }
    if (!a.graph_out.empty()) {
      a.folksonomy.seed = a.contacts.seed;
      std::ostringstream s;
      write_graph_tsv(s, generate_folksonomy(a.folksonomy));
      write_file(a.graph_out, s.str());
      manifest.output("graph", a.graph_out, s.str());
    }
  } catch (const InvalidInput& e) {
    throw Failure{kConfig, e.what()};
  }
  const auto& c = a.contacts;
  manifest["seed"] = c.seed;
  manifest["contacts"] = {{"agents", c.n_agents}, {"communities", c.n_communities},
                          {"rewiring_p", c.rewiring_p}, {"duration_s", c.duration}, {"interval_s", c.interval}};
  manifest["contents"] = {{"creators", a.creators ? a.creators : c.n_agents},
                          {"items_per_minute", a.items_per_minute},
                          {"tags", a.n_tags},
                          {"tag_exponent", a.tag_exponent},
                          {"max_tags_per_item", a.max_tags},
                          {"tags_per_item_exponent", a.tags_per_item_exponent}};
  const auto& f = a.folksonomy;
  manifest["folksonomy"] = {{"users", f.n_users}, {"items", f.n_items}, {"tags", f.n_tags}, {"topics", f.n_topics}};
  std::string first = !a.contacts_out.empty() ? a.contacts_out : !a.contents_out.empty() ? a.contents_out : a.graph_out;
  manifest.write(first + ".manifest.json");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tag-based diffusion recommendation and opportunistic gossip simulation"};
  app.set_version_flag("--version", PLIERS_VERSION);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Replay contact and content traces and measure knowledge similarity");
  simulate->add_option("--contacts", sim.contacts, "Contact trace CSV (time_s,agent_a,agent_b)");
  simulate->add_option("--contents", sim.contents, "Content trace CSV (time_s,agent,item_key,tags)")->required();
  simulate->add_option("--config", sim.config, "key = value configuration file");
  simulate->add_option("--set", sim.set, "Override a configuration key (key=value), repeatable");
  simulate->add_option("--out", sim.out_dir, "Output directory")->capture_default_str();

  LinkpredArgs lp;
  auto* linkpred = app.add_subcommand("linkpred", "Hide links, recommend, and score Precision and Recall");
  linkpred->add_option("--graph", lp.graph, "Graph snapshot TSV")->required();
  linkpred->add_option("--algorithms", lp.algorithms, "pliers, cf, tagexp, probs, heats, hybrid, ...")
      ->delimiter(',')
      ->capture_default_str();
  linkpred->add_option("--k", lp.ks, "Neighbourhood sizes for cf and tagexp")->delimiter(',')->capture_default_str();
  linkpred->add_option("--seed", lp.seed, "Link removal seed")->capture_default_str();
  linkpred->add_option("--lambda", lp.lambda, "PLIERS and hybrid mixing weight")->capture_default_str();
  linkpred->add_option("--top-n", lp.top_n, "Bound recommendation lists (0 = unbounded)")->capture_default_str();
  linkpred->add_option("--out", lp.out, "Report CSV (default: standard output)");

  RecommendArgs rc;
  auto* recommend_cmd = app.add_subcommand("recommend", "Rank unowned items for one user");
  recommend_cmd->add_option("--graph", rc.graph, "Graph snapshot TSV")->required();
  recommend_cmd->add_option("--user", rc.user, "Target user key")->required();
  recommend_cmd->add_option("--algorithm", rc.algorithm, "Scoring algorithm")->capture_default_str();
  recommend_cmd->add_option("--lambda", rc.lambda, "PLIERS and hybrid mixing weight")->capture_default_str();
  recommend_cmd->add_option("--k", rc.k, "Neighbourhood size for cf and tagexp")->capture_default_str();
  recommend_cmd->add_option("--top-n", rc.top_n, "Maximum number of items");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-traces", "Write synthetic contact, content and graph files");
  gen_cmd->add_option("--contacts-out", gen.contacts_out, "Contact trace CSV to write");
  gen_cmd->add_option("--contents-out", gen.contents_out, "Content trace CSV to write");
  gen_cmd->add_option("--graph-out", gen.graph_out, "Static folksonomy TSV to write");
  gen_cmd->add_option("--agents", gen.contacts.n_agents)->capture_default_str();
  gen_cmd->add_option("--communities", gen.contacts.n_communities)->capture_default_str();
  gen_cmd->add_option("--rewiring", gen.contacts.rewiring_p, "Inter-community contact probability")
      ->capture_default_str();
  gen_cmd->add_option("--duration", gen.contacts.duration, "Seconds")->capture_default_str();
  gen_cmd->add_option("--interval", gen.contacts.interval, "Seconds between contact rounds")->capture_default_str();
  gen_cmd->add_option("--seed", gen.contacts.seed)->capture_default_str();
  gen_cmd->add_option("--creators", gen.creators, "Agents that publish (0 = all)")->capture_default_str();
  gen_cmd->add_option("--items-per-minute", gen.items_per_minute)->capture_default_str();
  gen_cmd->add_option("--content-duration", gen.content_duration, "Seconds of publishing (0 = --duration)")
      ->capture_default_str();
  gen_cmd->add_option("--tags", gen.n_tags, "Tag vocabulary size")->capture_default_str();
  gen_cmd->add_option("--tag-exponent", gen.tag_exponent)->capture_default_str();
  gen_cmd->add_option("--max-tags", gen.max_tags, "Maximum tags per item")->capture_default_str();
  gen_cmd->add_option("--tags-per-item-exponent", gen.tags_per_item_exponent)->capture_default_str();
  gen_cmd->add_option("--graph-users", gen.folksonomy.n_users)->capture_default_str();
  gen_cmd->add_option("--graph-items", gen.folksonomy.n_items)->capture_default_str();
  gen_cmd->add_option("--graph-tags", gen.folksonomy.n_tags)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfig;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*linkpred) return cmd_linkpred(lp);
    if (*recommend_cmd) return cmd_recommend(rc);
    if (*gen_cmd) return cmd_gen_traces(gen);
  } catch (const Failure& f) {
    std::cerr << "pliers: " << f.message << '\n';
    return f.code;
  } catch (const ParseError& e) {
    std::cerr << "pliers: " << e.what() << '\n';
    return kParse;
  } catch (const ConfigError& e) {
    std::cerr << "pliers: " << e.what() << '\n';
    return kConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "pliers: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "pliers: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}
