#pragma once

// Campaign orchestration: parse -> ground -> generate -> attack -> score ->
// analyze, each stage reading the previous stage's record files from the
// output directory. Stages are idempotent; append-only outputs resume by key.

#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "mwp/constraints.hpp"
#include "mwp/features.hpp"
#include "mwp/gateway.hpp"
#include "mwp/generate.hpp"
#include "mwp/grounding.hpp"
#include "mwp/metrics.hpp"
#include "mwp/prompts.hpp"
#include "mwp/records.hpp"

namespace mwp {

namespace fs = std::filesystem;

class MissingInputError : public std::runtime_error {
 public:
  explicit MissingInputError(const std::string& what) : std::runtime_error(what) {}
};

inline ConstraintConfig constraint_preset(const std::string& name) {
  if (name == "core") return ConstraintConfig::core();
  if (name == "paper-appendix-d" || name == "extended") return ConstraintConfig::extended();
  throw std::invalid_argument("unknown constraint preset: " + name +
                              " (expected 'core' or 'paper-appendix-d')");
}

struct CampaignConfig {
  std::string dataset_path;
  std::vector<GenerationMethod> methods = {GenerationMethod::M1, GenerationMethod::M2,
                                           GenerationMethod::M3};
  int problems_sample = 100;
  int variants_per_problem = 100;
  int attempts = 30000;
  int max_scientific_digits = 6;
  uint64_t seed = 0;
  std::string constraint_preset_name = "core";
  std::string out_dir = "campaign";
  std::vector<ModelSpec> models;
  std::string grounding_oracle_model;  // optional model name used for scenario-2 grounding
  int efficient_k = 5;
  FeatureConfig features;
};

inline ModelSpec model_spec_from_json(const json& j) {
  ModelSpec spec;
  spec.name = j.at("name").get<std::string>();
  std::string transport = j.value("transport", "mock");
  if (transport == "http") {
    HttpChatTransport http;
    http.endpoint = j.at("endpoint").get<std::string>();
    http.model_id = j.value("model_id", spec.name);
    http.auth_env = j.value("auth_env", "");
    spec.transport = http;
  } else {
    MockProfile mock;
    const json& jm = j.contains("mock") ? j.at("mock") : json::object();
    std::string kind = jm.value("kind", "perfect");
    if (kind == "perfect") {
      mock.kind = MockProfile::Kind::PerfectSolver;
    } else if (kind == "fixed_accuracy") {
      mock.kind = MockProfile::Kind::FixedAccuracy;
      mock.accuracy = jm.at("accuracy").get<double>();
      mock.seed = jm.value("seed", 0ULL);
    } else if (kind == "fail_predicate") {
      mock.kind = MockProfile::Kind::FailOnPredicate;
      mock.predicate_name = jm.at("predicate").get<std::string>();
      mock_predicate(mock.predicate_name);  // validate eagerly
    } else {
      throw std::invalid_argument("unknown mock kind: " + kind);
    }
    spec.transport = mock;
  }
  spec.max_concurrency = j.value("max_concurrency", 1);
  spec.request_timeout_ms = j.value("timeout_ms", 30000);
  spec.retry.max_retries = j.value("max_retries", 3);
  spec.retry.backoff_base_ms = j.value("backoff_ms", 500);
  spec.temperature = j.value("temperature", 0.0);
  spec.max_output_tokens = j.value("max_tokens", 1024);
  return spec;
}

inline CampaignConfig config_from_json(const json& j) {
  CampaignConfig c;
  c.dataset_path = j.at("dataset").get<std::string>();
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j["methods"]) {
      auto parsed = method_from_name(m.get<std::string>());
      if (!parsed) throw std::invalid_argument("unknown method: " + m.dump());
      c.methods.push_back(*parsed);
    }
  }
  c.problems_sample = j.value("problems_sample", 100);
  c.variants_per_problem = j.value("variants_per_problem", 100);
  c.attempts = j.value("attempts", 30000);
  c.max_scientific_digits = j.value("max_scientific_digits", 6);
  c.seed = j.value("seed", 0ULL);
  c.constraint_preset_name = j.value("constraints", "core");
  constraint_preset(c.constraint_preset_name);  // validate eagerly
  c.out_dir = j.value("out", "campaign");
  if (j.contains("models"))
    for (const auto& jm : j["models"]) c.models.push_back(model_spec_from_json(jm));
  c.grounding_oracle_model = j.value("grounding_oracle", "");
  c.efficient_k = j.value("efficient_k", 5);
  c.features.digits_per_token = j.value("answer_digits_per_token", 1);
  return c;
}

enum class Stage { Parse, Ground, Generate, Attack, Score, Analyze };

inline std::optional<Stage> stage_from_name(std::string_view s) {
  if (s == "parse") return Stage::Parse;
  if (s == "ground") return Stage::Ground;
  if (s == "generate") return Stage::Generate;
  if (s == "attack") return Stage::Attack;
  if (s == "score") return Stage::Score;
  if (s == "analyze") return Stage::Analyze;
  return std::nullopt;
}

namespace pipeline_detail {

struct Paths {
  fs::path out;
  explicit Paths(const CampaignConfig& c) : out(c.out_dir) {}
  fs::path parse() const { return out / "parse.jsonl"; }
  fs::path ground() const { return out / "ground.jsonl"; }
  fs::path sample() const { return out / "sample.jsonl"; }
  fs::path generate() const { return out / "generate.jsonl"; }
  fs::path queries(const std::string& model, const std::string& method) const {
    std::string m = model;
    for (auto& ch : m)
      if (!std::isalnum((unsigned char)ch)) ch = '-';
    return out / ("queries_" + m + "_" + method + ".jsonl");
  }
  fs::path metrics() const { return out / "metrics.jsonl"; }
  fs::path report() const { return out / "report.txt"; }
  fs::path analyze() const { return out / "analyze.jsonl"; }
  fs::path coefficients() const { return out / "coefficients.txt"; }
  fs::path features_tsv(const std::string& model, const std::string& method) const {
    std::string m = model;
    for (auto& ch : m)
      if (!std::isalnum((unsigned char)ch)) ch = '-';
    return out / ("features_" + m + "_" + method + ".tsv");
  }
};

inline void require_file(const fs::path& p, const std::string& producing_stage) {
  if (!fs::exists(p))
    throw MissingInputError(p.string() + " is missing; run the '" + producing_stage +
                            "' stage first");
}

struct ParsedProblem {
  Problem problem;
  ProblemTree tree;       // grounding not applied yet
  ValidationVerdict verdict;
};

// parse.jsonl rows for problems whose script parsed; invalid rows keep the
// verdict only.
inline std::map<std::string, json> load_parse_rows(const Paths& paths) {
  std::map<std::string, json> rows;
  for (auto& j : read_jsonl(paths.parse(), "mwp.parse.v1"))
    rows[j.at("id").get<std::string>()] = std::move(j);
  return rows;
}

inline std::map<std::string, json> load_ground_rows(const Paths& paths) {
  std::map<std::string, json> rows;
  for (auto& j : read_jsonl(paths.ground(), "mwp.ground.v1"))
    rows[j.at("problem_id").get<std::string>()] = std::move(j);
  return rows;
}

// Problems that parsed valid and grounded, with the grounding applied, keyed
// by id; `order` preserves dataset order.
struct Prepared {
  Problem problem;
  ProblemTree tree;
  Grounding grounding;
};

inline std::map<std::string, Prepared> load_prepared(const Paths& paths,
                                                     std::vector<std::string>* order = nullptr) {
  require_file(paths.parse(), "parse");
  require_file(paths.ground(), "ground");
  auto ground_rows = load_ground_rows(paths);
  std::map<std::string, Prepared> out;
  for (auto& j : read_jsonl(paths.parse(), "mwp.parse.v1")) {
    std::string id = j.at("id").get<std::string>();
    if (j.at("verdict").get<std::string>() != "valid") continue;
    auto git = ground_rows.find(id);
    if (git == ground_rows.end()) continue;
    Grounding g = grounding_from_json(git->second);
    if (g.status != GroundingStatus::Grounded) continue;
    Prepared prep;
    prep.problem.id = id;
    prep.problem.text = j.at("question").get<std::string>();
    prep.problem.answer = Decimal::parse(j.at("answer").get<std::string>());
    prep.tree = tree_from_json(j.at("tree"));
    prep.grounding = std::move(g);
    apply_grounding(prep.tree, prep.grounding);
    if (order) order->push_back(id);
    out.emplace(id, std::move(prep));
  }
  return out;
}

inline std::vector<std::string> read_sample(const Paths& paths) {
  require_file(paths.sample(), "generate");
  std::vector<std::string> ids;
  for (auto& j : read_jsonl(paths.sample(), "mwp.sample.v1"))
    ids.push_back(j.at("id").get<std::string>());
  return ids;
}

inline std::vector<std::string> sampled_ids(const Paths& paths, const CampaignConfig& config,
                                            const std::vector<std::string>& eligible) {
  if (fs::exists(paths.sample())) return read_sample(paths);
  std::vector<std::string> ids = eligible;
  if (int(ids.size()) > config.problems_sample) {
    std::vector<size_t> idx(ids.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(mix_seed(config.seed, "sample"));
    for (size_t i = idx.size() - 1; i > 0; --i)
      std::swap(idx[i], idx[size_t(rng.uniform_u64(0, i))]);
    idx.resize(size_t(config.problems_sample));
    std::sort(idx.begin(), idx.end());  // keep dataset order
    std::vector<std::string> picked;
    for (size_t i : idx) picked.push_back(ids[i]);
    ids = std::move(picked);
  }
  JsonlWriter w(paths.sample(), "mwp.sample.v1");
  for (const auto& id : ids) w.write(json{{"id", id}});
  return ids;
}

inline VerdictStatus verdict_for_script_error(const ScriptError& e) {
  switch (e.kind()) {
    case ScriptErrorKind::ComplexExpression: return VerdictStatus::ComplexExpression;
    case ScriptErrorKind::UnsupportedConstruct:
    case ScriptErrorKind::Syntax:
    case ScriptErrorKind::Structural: return VerdictStatus::UnsupportedConstruct;
  }
  return VerdictStatus::UnsupportedConstruct;
}

}  // namespace pipeline_detail

inline void run_parse(const CampaignConfig& config) {
  pipeline_detail::Paths paths(config);
  fs::create_directories(paths.out);
  if (!fs::exists(config.dataset_path))
    throw MissingInputError("dataset file " + config.dataset_path + " does not exist");
  std::set<std::string> done;
  if (fs::exists(paths.parse()))
    for (auto& j : read_jsonl(paths.parse(), "mwp.parse.v1"))
      done.insert(j.at("id").get<std::string>());
  JsonlWriter writer(paths.parse(), "mwp.parse.v1", /*append=*/true);

  std::ifstream in(config.dataset_path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json jin = json::parse(line);
    Problem problem = problem_from_json(jin);
    if (done.count(problem.id)) continue;
    json row{{"id", problem.id},
             {"question", problem.text},
             {"answer", problem.answer.to_string()}};
    try {
      SolutionScript script = parse_script(jin.at("code").get<std::string>());
      ProblemTree tree = build_tree(script);
      ValidationVerdict verdict = validate(tree, problem);
      row["verdict"] = verdict_name(verdict.status);
      row["detail"] = verdict.detail;
      row["tree"] = tree_to_json(tree);
    } catch (const ScriptError& e) {
      row["verdict"] = verdict_name(pipeline_detail::verdict_for_script_error(e));
      row["detail"] = e.what();
    } catch (const EvalError& e) {
      row["verdict"] = verdict_name(VerdictStatus::AnswerMismatch);
      row["detail"] = std::string("evaluation failed: ") + e.what();
    }
    writer.write(row);
  }
}

inline void run_ground(const CampaignConfig& config) {
  pipeline_detail::Paths paths(config);
  pipeline_detail::require_file(paths.parse(), "parse");
  std::set<std::string> done;
  if (fs::exists(paths.ground()))
    for (auto& j : read_jsonl(paths.ground(), "mwp.ground.v1"))
      done.insert(j.at("problem_id").get<std::string>());
  JsonlWriter writer(paths.ground(), "mwp.ground.v1", /*append=*/true);

  GroundingOracle oracle = nullptr;
  std::shared_ptr<ModelClient> oracle_client;
  if (!config.grounding_oracle_model.empty()) {
    for (const auto& spec : config.models)
      if (spec.name == config.grounding_oracle_model)
        oracle_client = std::make_shared<ModelClient>(spec);
    if (!oracle_client)
      throw std::invalid_argument("grounding_oracle names no configured model: " +
                                  config.grounding_oracle_model);
    oracle = [oracle_client](const std::string& question) -> std::optional<Decimal> {
      QueryRecord rec = oracle_client->ask(render_prompt(question, PromptTemplate::ZeroShotCoT));
      return rec.extracted_answer;
    };
  }

  for (auto& j : read_jsonl(paths.parse(), "mwp.parse.v1")) {
    std::string id = j.at("id").get<std::string>();
    if (done.count(id)) continue;
    if (j.at("verdict").get<std::string>() != "valid") continue;
    Problem problem;
    problem.id = id;
    problem.text = j.at("question").get<std::string>();
    problem.answer = Decimal::parse(j.at("answer").get<std::string>());
    ProblemTree tree = tree_from_json(j.at("tree"));
    Grounding g = ground(problem, tree, oracle, mix_seed(config.seed, "ground|" + id));
    json row = grounding_to_json(g);
    row["problem_id"] = id;
    writer.write(row);
  }
}

inline void run_generate(const CampaignConfig& config) {
  pipeline_detail::Paths paths(config);
  std::vector<std::string> eligible;
  auto prepared = pipeline_detail::load_prepared(paths, &eligible);
  std::vector<std::string> ids = pipeline_detail::sampled_ids(paths, config, eligible);

  std::set<std::pair<std::string, std::string>> done;  // (problem, method)
  if (fs::exists(paths.generate()))
    for (auto& j : read_jsonl(paths.generate(), "mwp.generate.v1"))
      done.emplace(j.at("problem_id").get<std::string>(), j.at("method").get<std::string>());
  JsonlWriter writer(paths.generate(), "mwp.generate.v1", /*append=*/true);

  ConstraintConfig constraints = constraint_preset(config.constraint_preset_name);
  for (const auto& id : ids) {
    auto it = prepared.find(id);
    if (it == prepared.end()) continue;
    for (GenerationMethod method : config.methods) {
      if (done.count({id, method_name(method)})) continue;
      GenerationParams params;
      params.max_attempts = config.attempts;
      params.max_scientific_digits = config.max_scientific_digits;
      params.target_variants = config.variants_per_problem;
      params.seed = mix_seed(config.seed, id + "|" + method_name(method));
      auto variants = generate(it->second.problem, it->second.tree, it->second.grounding,
                               method, params, constraints);
      for (size_t i = 0; i < variants.size(); ++i)
        writer.write(variant_to_json(variants[i], int(i)));
    }
  }
}

inline void run_attack(const CampaignConfig& config) {
  pipeline_detail::Paths paths(config);
  pipeline_detail::require_file(paths.generate(), "generate");
  auto prepared = pipeline_detail::load_prepared(paths);
  std::vector<std::string> ids = pipeline_detail::read_sample(paths);

  struct Task {
    std::string problem_id;
    int variant_index;
    std::string question;
    Decimal expected;
  };

  auto run_sweep = [&](const ModelClient& client, const std::string& method_label,
                       const std::vector<Task>& tasks) {
    std::set<std::pair<std::string, int>> done;
    fs::path log = paths.queries(client.spec().name, method_label);
    if (fs::exists(log))
      for (auto& j : read_jsonl(log, "mwp.query.v1"))
        done.emplace(j.at("problem_id").get<std::string>(), j.at("variant_index").get<int>());
    JsonlWriter writer(log, "mwp.query.v1", /*append=*/true);
    std::mutex write_mutex;
    std::atomic<size_t> next{0};
    std::atomic<bool> abort{false};
    std::string abort_reason;
    auto worker = [&] {
      while (!abort.load()) {
        size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        const Task& t = tasks[i];
        if (done.count({t.problem_id, t.variant_index})) continue;
        MockHint hint{t.problem_id, t.variant_index, t.expected};
        try {
          QueryRecord rec =
              client.ask(render_prompt(t.question, PromptTemplate::ZeroShotCoT), hint);
          std::lock_guard<std::mutex> lk(write_mutex);
          writer.write(query_to_json(rec));
        } catch (const GatewayError& e) {
          std::lock_guard<std::mutex> lk(write_mutex);
          if (e.kind() == GatewayErrorKind::AuthFailure) {
            abort.store(true);
            abort_reason = e.what();
            return;
          }
          std::cerr << "attack: " << client.spec().name << " " << t.problem_id << "#"
                    << t.variant_index << ": " << e.what() << " (will retry on rerun)\n";
        }
      }
    };
    int workers = std::max(1, std::min(client.spec().max_concurrency, 16));
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    if (abort.load())
      throw GatewayError(GatewayErrorKind::AuthFailure,
                         client.spec().name + ": " + abort_reason);
  };

  // variants grouped by method, in file order
  std::map<std::string, std::vector<Task>> variant_tasks;
  for (auto& j : read_jsonl(paths.generate(), "mwp.generate.v1")) {
    Task t{j.at("problem_id").get<std::string>(), j.at("variant_index").get<int>(),
           j.at("question").get<std::string>(),
           Decimal::parse(j.at("answer").get<std::string>())};
    variant_tasks[j.at("method").get<std::string>()].push_back(std::move(t));
  }
  std::vector<Task> original_tasks;
  for (const auto& id : ids) {
    auto it = prepared.find(id);
    if (it == prepared.end()) continue;
    original_tasks.push_back({id, -1, it->second.problem.text, it->second.problem.answer});
  }

  for (const auto& spec : config.models) {
    ModelClient client(spec);
    run_sweep(client, "original", original_tasks);
    for (GenerationMethod method : config.methods) {
      auto it = variant_tasks.find(method_name(method));
      if (it != variant_tasks.end()) run_sweep(client, method_name(method), it->second);
    }
  }
}

struct ScoredCampaigns {
  // campaigns[method][model index aligned with config.models]
  std::map<std::string, std::vector<CampaignResult>> campaigns;
};

inline ScoredCampaigns assemble_campaigns(const CampaignConfig& config) {
  pipeline_detail::Paths paths(config);
  pipeline_detail::require_file(paths.generate(), "generate");
  auto prepared = pipeline_detail::load_prepared(paths);
  std::vector<std::string> ids = pipeline_detail::read_sample(paths);

  struct VariantRow {
    std::string problem_id;
    int variant_index;
    Decimal answer;
  };
  std::map<std::string, std::vector<VariantRow>> variants_by_method;
  for (auto& j : read_jsonl(paths.generate(), "mwp.generate.v1"))
    variants_by_method[j.at("method").get<std::string>()].push_back(
        {j.at("problem_id").get<std::string>(), j.at("variant_index").get<int>(),
         Decimal::parse(j.at("answer").get<std::string>())});

  ScoredCampaigns out;
  for (const auto& spec : config.models) {
    // original outcomes, shared across methods
    fs::path olog = paths.queries(spec.name, "original");
    pipeline_detail::require_file(olog, "attack");
    std::map<std::string, bool> original_correct;
    std::map<std::pair<std::string, int>, std::optional<Decimal>> extracted;
    for (auto& j : read_jsonl(olog, "mwp.query.v1")) {
      QueryRecord rec = query_from_json(j);
      extracted[{rec.problem_id, rec.variant_index}] = rec.extracted_answer;
    }
    for (const auto& id : ids) {
      auto it = prepared.find(id);
      if (it == prepared.end()) continue;
      auto eit = extracted.find({id, -1});
      if (eit == extracted.end())
        throw MissingInputError("attack log for model " + spec.name +
                                " lacks the original query for problem " + id);
      original_correct[id] =
          eit->second && answers_match(*eit->second, it->second.problem.answer);
    }

    for (GenerationMethod method : config.methods) {
      std::string mname = method_name(method);
      fs::path vlog = paths.queries(spec.name, mname);
      pipeline_detail::require_file(vlog, "attack");
      std::map<std::pair<std::string, int>, std::optional<Decimal>> vext;
      for (auto& j : read_jsonl(vlog, "mwp.query.v1")) {
        QueryRecord rec = query_from_json(j);
        vext[{rec.problem_id, rec.variant_index}] = rec.extracted_answer;
      }
      CampaignResult campaign;
      campaign.model = spec.name;
      for (const auto& [id, correct] : original_correct) {
        ProblemOutcome po;
        po.original_correct = correct;
        campaign.problems[id] = po;
      }
      for (const auto& row : variants_by_method[mname]) {
        auto pit = campaign.problems.find(row.problem_id);
        if (pit == campaign.problems.end()) continue;
        auto eit = vext.find({row.problem_id, row.variant_index});
        if (eit == vext.end())
          throw MissingInputError("attack log for model " + spec.name + " method " + mname +
                                  " lacks " + row.problem_id + "#" +
                                  std::to_string(row.variant_index));
        bool correct = eit->second && answers_match(*eit->second, row.answer);
        pit->second.variants.push_back({row.variant_index, correct});
      }
      out.campaigns[mname].push_back(std::move(campaign));
    }
  }
  return out;
}

inline void run_score(const CampaignConfig& config) {
  pipeline_detail::Paths paths(config);
  ScoredCampaigns scored = assemble_campaigns(config);

  JsonlWriter writer(paths.metrics(), "mwp.score.v1");
  std::ofstream report(paths.report());
  auto pad = [](const std::string& s, size_t w) {
    return s.size() >= w ? s + " " : s + std::string(w - s.size() + 1, ' ');
  };

  // per-model metric table
  report << "== Attack metrics ==\n";
  {
    std::string head = pad("Model", 18) + pad("OA", 7);
    for (GenerationMethod m : config.methods)
      head += pad(std::string(method_name(m)) + ".AA", 9) +
              pad(std::string(method_name(m)) + ".ASR", 9);
    report << head << "\n";
  }
  for (size_t mi = 0; mi < config.models.size(); ++mi) {
    const std::string& model = config.models[mi].name;
    std::string line;
    bool first_method = true;
    for (GenerationMethod method : config.methods) {
      const auto& campaign = scored.campaigns[method_name(method)][mi];
      AttackReport r = score(campaign);
      if (first_method) {
        line = pad(model, 18) + pad(format_pct_table(r.oa_pct), 7);
        first_method = false;
      }
      line += pad(format_pct_table(r.aa_pct), 9) +
              pad(r.asr_defined ? format_pct_table(r.asr_pct) : "-", 9);
      VariantDistribution dist = incorrect_variant_distribution(campaign);
      json row{{"type", "model_metrics"},
               {"model", model},
               {"method", method_name(method)},
               {"oa_pct", r.oa_pct},
               {"aa_pct", r.aa_pct},
               {"asr_pct", r.asr_defined ? json(r.asr_pct) : json()},
               {"oa_print", format_pct_table(r.oa_pct)},
               {"aa_print", format_pct_table(r.aa_pct)},
               {"asr_print", r.asr_defined ? format_pct_table(r.asr_pct) : "-"},
               {"mean_incorrect_variant_pct", dist.mean_pct},
               {"incorrect_variant_deciles", dist.decile_counts},
               {"problems", r.problems_total}};
      writer.write(row);
    }
    report << line << "\n";
  }

  // incorrect-variant averages (per model, per method)
  report << "\n== Incorrect variants, mean % per problem ==\n";
  report << pad("Model", 18);
  for (GenerationMethod m : config.methods) report << pad(method_name(m), 8);
  report << "\n";
  for (size_t mi = 0; mi < config.models.size(); ++mi) {
    report << pad(config.models[mi].name, 18);
    for (GenerationMethod method : config.methods) {
      VariantDistribution dist =
          incorrect_variant_distribution(scored.campaigns[method_name(method)][mi]);
      report << pad(format_pct_1dp(dist.mean_pct), 8);
    }
    report << "\n";
  }

  // universal attacks: prefix of the configured model ordering
  report << "\n== Universal attacks ==\n";
  report << pad("Ct", 4) << pad("Model", 18);
  for (GenerationMethod m : config.methods) report << pad(method_name(m), 8);
  report << "\n";
  std::map<std::string, std::vector<std::optional<double>>> universal;
  for (GenerationMethod method : config.methods)
    universal[method_name(method)] = universal_attacks(scored.campaigns[method_name(method)]);
  for (size_t mi = 0; mi < config.models.size(); ++mi) {
    report << pad(std::to_string(mi + 1), 4) << pad(config.models[mi].name, 18);
    for (GenerationMethod method : config.methods) {
      auto v = universal[method_name(method)][mi];
      report << pad(v ? format_pct_1dp(*v) : "-", 8);
      writer.write(json{{"type", "universal"},
                        {"method", method_name(method)},
                        {"k", mi + 1},
                        {"model", config.models[mi].name},
                        {"shared_pct", v ? json(*v) : json()}});
    }
    report << "\n";
  }

  // pairwise transferability per method
  for (GenerationMethod method : config.methods) {
    const auto& campaigns = scored.campaigns[method_name(method)];
    auto matrix = transfer_matrix(campaigns);
    report << "\n== Transferability (" << method_name(method) << "), row A attacked by column B ==\n";
    report << pad("", 18);
    for (const auto& spec : config.models) report << pad(spec.name, 18);
    report << "\n";
    for (size_t i = 0; i < campaigns.size(); ++i) {
      report << pad(config.models[i].name, 18);
      for (size_t j = 0; j < campaigns.size(); ++j) {
        report << pad(matrix[i][j] ? format_pct_1dp(*matrix[i][j]) : "-", 18);
        writer.write(json{{"type", "transfer"},
                          {"method", method_name(method)},
                          {"model_a", config.models[i].name},
                          {"model_b", config.models[j].name},
                          {"pct", matrix[i][j] ? json(*matrix[i][j]) : json()}});
      }
      report << "\n";
    }
  }

  // efficient attack plans per model and method
  report << "\n== Efficient attacks (top-" << config.efficient_k << " problems) ==\n";
  report << pad("Model", 18) << pad("Method", 8) << pad("Req Call", 10)
         << pad("Full Sweep", 12) << pad("Req Delta (%)", 14) << "\n";
  for (size_t mi = 0; mi < config.models.size(); ++mi) {
    for (GenerationMethod method : config.methods) {
      const auto& campaign = scored.campaigns[method_name(method)][mi];
      EfficientAttackPlan plan = efficient_attack_plan(campaign, config.efficient_k);
      report << pad(config.models[mi].name, 18) << pad(method_name(method), 8)
             << pad(std::to_string(plan.plan_requests), 10)
             << pad(std::to_string(plan.full_sweep_requests), 12)
             << pad(format_pct_1dp(plan.request_reduction_pct), 14) << "\n";
      json entries = json::array();
      for (const auto& e : plan.entries)
        entries.push_back({{"problem_id", e.problem_id}, {"variants", e.failing_variants}});
      writer.write(json{{"type", "efficient"},
                        {"model", config.models[mi].name},
                        {"method", method_name(method)},
                        {"k", config.efficient_k},
                        {"plan_requests", plan.plan_requests},
                        {"full_sweep_requests", plan.full_sweep_requests},
                        {"request_reduction_pct", plan.request_reduction_pct},
                        {"entries", std::move(entries)}});
    }
  }
}

inline void run_analyze(const CampaignConfig& config) {
  pipeline_detail::Paths paths(config);
  ScoredCampaigns scored = assemble_campaigns(config);
  auto prepared = pipeline_detail::load_prepared(paths);

  std::map<std::string, std::vector<json>> variants_by_method;
  for (auto& j : read_jsonl(paths.generate(), "mwp.generate.v1"))
    variants_by_method[j.at("method").get<std::string>()].push_back(std::move(j));

  JsonlWriter writer(paths.analyze(), "mwp.analyze.v1");
  std::ofstream table(paths.coefficients());
  auto pad = [](const std::string& s, size_t w) {
    return s.size() >= w ? s + " " : s + std::string(w - s.size() + 1, ' ');
  };

  for (size_t mi = 0; mi < config.models.size(); ++mi) {
    const std::string& model = config.models[mi].name;
    for (GenerationMethod method : config.methods) {
      std::string mname = method_name(method);
      const CampaignResult& campaign = scored.campaigns[mname][mi];
      // variant correctness lookup
      std::map<std::pair<std::string, int>, bool> correct;
      for (const auto& [pid, outcome] : campaign.problems)
        for (const auto& v : outcome.variants) correct[{pid, v.variant_index}] = v.correct;

      std::vector<FeatureVector> rows;
      std::vector<int> labels;
      std::ofstream tsv(paths.features_tsv(model, mname));
      tsv << "problem_id\tvariant_index";
      for (const auto& name : feature_names()) tsv << "\t" << name;
      tsv << "\tcorrect\n";
      for (const auto& j : variants_by_method[mname]) {
        std::string pid = j.at("problem_id").get<std::string>();
        int vidx = j.at("variant_index").get<int>();
        auto cit = correct.find({pid, vidx});
        auto pit = prepared.find(pid);
        if (cit == correct.end() || pit == prepared.end()) continue;
        VariantRecord v = variant_from_json(j);
        FeatureVector f = extract_features(pit->second.tree, v, config.features);
        tsv << pid << "\t" << vidx;
        for (double x : f.values) tsv << "\t" << x;
        tsv << "\t" << (cit->second ? 1 : 0) << "\n";
        rows.push_back(std::move(f));
        labels.push_back(cit->second ? 1 : 0);
      }
      if (rows.empty()) continue;
      RegressionModel fitted = fit(rows, labels);
      auto entries = coefficient_report(fitted, feature_names());
      json jents = json::array();
      for (const auto& e : entries)
        jents.push_back({{"name", e.name},
                         {"weight", e.weight},
                         {"top_positive", e.flagged_positive},
                         {"top_negative", e.flagged_negative}});
      json degenerate = json::array();
      for (int d : fitted.degenerate_features) degenerate.push_back(feature_names()[size_t(d)]);
      writer.write(json{{"type", "fit"},
                        {"model", model},
                        {"method", mname},
                        {"samples", rows.size()},
                        {"iterations", fitted.iterations},
                        {"final_loss", fitted.final_loss},
                        {"converged", fitted.converged},
                        {"degenerate_features", std::move(degenerate)},
                        {"coefficients", std::move(jents)}});

      table << "== Coefficients: " << model << " / " << mname << " ==\n";
      for (const auto& e : entries) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%+.4f", e.weight);
        table << pad(e.name, 22) << buf
              << (e.flagged_positive ? "  [top+]" : e.flagged_negative ? "  [top-]" : "")
              << "\n";
      }
      table << "\n";
    }
  }
}

inline void run_stage(Stage stage, const CampaignConfig& config) {
  switch (stage) {
    case Stage::Parse: run_parse(config); break;
    case Stage::Ground: run_ground(config); break;
    case Stage::Generate: run_generate(config); break;
    case Stage::Attack: run_attack(config); break;
    case Stage::Score: run_score(config); break;
    case Stage::Analyze: run_analyze(config); break;
  }
}

inline void run_all(const CampaignConfig& config) {
  run_parse(config);
  run_ground(config);
  run_generate(config);
  run_attack(config);
  run_score(config);
  run_analyze(config);
}

}  // namespace mwp
