// Campaign CLI: each subcommand runs one pipeline stage against a campaign
// config file. Stage outputs land in the configured output directory and are
// append-only, so interrupted stages resume where they left off.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mwp/pipeline.hpp"

namespace {

mwp::CampaignConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mwp::MissingInputError("config file " + path + " does not exist");
  mwp::json j = mwp::json::parse(in);
  return mwp::config_from_json(j);
}

void print_file(const std::filesystem::path& p, const std::string& producer) {
  if (!std::filesystem::exists(p))
    throw mwp::MissingInputError(p.string() + " is missing; run the '" + producer +
                                 "' stage first");
  std::ifstream in(p);
  std::cout << in.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Adversarial math word problem campaigns: perturb problem numbers through a "
      "computation tree, re-query models, and report attack metrics.\n"
      "HTTP model credentials are read from the environment variable named by each "
      "model's 'auth_env' config entry (e.g. OPENAI_API_KEY)."};
  app.require_subcommand(1);

  std::string config_path = "campaign.json";
  std::string out_override;
  uint64_t seed_override = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "Campaign config JSON file")
      ->capture_default_str();
  app.add_option("--out", out_override, "Override the output directory");
  app.add_option("--seed", seed_override, "Override the campaign seed")
      ->each([&](const std::string&) { seed_set = true; });

  std::string gen_method;
  int gen_attempts = -1, gen_variants = -1;
  std::string gen_constraints;

  CLI::App* parse_cmd = app.add_subcommand("parse", "Parse solution scripts into trees");
  CLI::App* ground_cmd = app.add_subcommand("ground", "Associate text numbers with tree leaves");
  CLI::App* generate_cmd = app.add_subcommand("generate", "Generate constrained variants");
  generate_cmd->add_option("--method", gen_method, "Restrict to one method: m1, m2 or m3");
  generate_cmd->add_option("--attempts", gen_attempts, "Accept/reject attempts per problem");
  generate_cmd->add_option("--variants", gen_variants, "Target variants per problem");
  generate_cmd->add_option("--constraints", gen_constraints,
                           "Constraint preset: core or paper-appendix-d");
  CLI::App* attack_cmd = app.add_subcommand("attack", "Query configured models");
  CLI::App* score_cmd = app.add_subcommand("score", "Compute OA/AA/ASR and cross-model tables");
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Feature extraction and regression");
  CLI::App* report_cmd = app.add_subcommand("report", "Print the score/analyze tables");

  CLI11_PARSE(app, argc, argv);

  try {
    mwp::CampaignConfig config = load_config(config_path);
    if (!out_override.empty()) config.out_dir = out_override;
    if (seed_set) config.seed = seed_override;

    if (generate_cmd->parsed()) {
      if (!gen_method.empty()) {
        auto m = mwp::method_from_name(gen_method);
        if (!m) throw std::invalid_argument("unknown method: " + gen_method);
        config.methods = {*m};
      }
      if (gen_attempts > 0) config.attempts = gen_attempts;
      if (gen_variants > 0) config.variants_per_problem = gen_variants;
      if (!gen_constraints.empty()) {
        mwp::constraint_preset(gen_constraints);
        config.constraint_preset_name = gen_constraints;
      }
    }

    if (parse_cmd->parsed()) mwp::run_stage(mwp::Stage::Parse, config);
    else if (ground_cmd->parsed()) mwp::run_stage(mwp::Stage::Ground, config);
    else if (generate_cmd->parsed()) mwp::run_stage(mwp::Stage::Generate, config);
    else if (attack_cmd->parsed()) mwp::run_stage(mwp::Stage::Attack, config);
    else if (score_cmd->parsed()) mwp::run_stage(mwp::Stage::Score, config);
    else if (analyze_cmd->parsed()) mwp::run_stage(mwp::Stage::Analyze, config);
    else if (report_cmd->parsed()) {
      mwp::pipeline_detail::Paths paths(config);
      print_file(paths.report(), "score");
      if (std::filesystem::exists(paths.coefficients())) print_file(paths.coefficients(), "analyze");
    }
  } catch (const mwp::MissingInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mwp::GatewayError& e) {
    std::cerr << "gateway error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
