#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "llmprior/cli.hpp"
#include "llmprior/errors.hpp"

namespace {

template <class T>
void add_path(CLI::App* cmd, const std::string& flag, std::optional<T>& target, const std::string& help) {
  cmd->add_option_function<std::string>(flag, [&target](const std::string& v) { target = T(v); }, help);
}

}  // namespace

int main(int argc, char** argv) {
  using llmprior::RunConfig;
  RunConfig cfg;
  std::string out_dir = cfg.output_dir.string();
  std::string data, spec, prior_label;

  CLI::App app{"Elicit, score and use Gaussian coefficient priors for GLMs"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* c, bool needs_data) {
    c->add_option("--spec", spec, "model spec JSON")->required();
    if (needs_data) c->add_option("--data", data, "CSV dataset")->required();
    c->add_option("--out", out_dir, "output directory")->capture_default_str();
    c->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  };

  auto* prompt = app.add_subcommand("prompt", "print the elicitation prompt");
  prompt->add_option("--spec", spec, "model spec JSON")->required();
  prompt->add_option("--context", cfg.extra_context, "text appended after the model details");
  add_path(prompt, "--prompt-template", cfg.prompt_template_path, "prompt template JSON");

  auto* elicit = app.add_subcommand("elicit", "query an LLM endpoint and write a prior catalog");
  common(elicit, false);
  add_path(elicit, "--endpoint", cfg.endpoint_config_path, "endpoint config JSON");
  add_path(elicit, "--catalog", cfg.catalog_path, "catalog output path (default <out>/catalog.json)");
  elicit->add_option("--context", cfg.extra_context, "text appended after the model details");
  add_path(elicit, "--prompt-template", cfg.prompt_template_path, "prompt template JSON");

  auto* evaluate = app.add_subcommand("evaluate", "KL table of prior sets against the MLE, plus density curves");
  common(evaluate, true);
  add_path(evaluate, "--catalog", cfg.catalog_path, "prior catalog JSON");
  evaluate->add_option("--bootstrap-reps", cfg.bootstrap_reps, "bootstrap replicates for MLE sds (0 = Fisher)")
      ->capture_default_str();

  auto* cv = app.add_subcommand("cv", "k-fold cross-validation, frequentist vs each prior set");
  common(cv, true);
  add_path(cv, "--catalog", cfg.catalog_path, "prior catalog JSON (omit for frequentist only)");
  cv->add_option("--folds", cfg.folds, "number of folds")->capture_default_str();
  cv->add_option("--mc-draws", cfg.mc_draws, "posterior predictive draws (binary models)")->capture_default_str();

  auto* posterior = app.add_subcommand("posterior", "prior, MLE and posterior curves for one prior set");
  common(posterior, true);
  add_path(posterior, "--catalog", cfg.catalog_path, "prior catalog JSON");
  posterior->add_option("--prior-label", prior_label, "label of the prior set")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(llmprior::ExitCode::validation);
  }

  cfg.output_dir = out_dir;
  cfg.dataset_path = data;
  cfg.spec_path = spec;
  try {
    std::string text;
    if (*prompt) text = llmprior::cmd_prompt(cfg);
    else if (*elicit) text = llmprior::cmd_elicit(cfg);
    else if (*evaluate) text = llmprior::cmd_evaluate(cfg);
    else if (*cv) text = llmprior::cmd_cv(cfg);
    else text = llmprior::cmd_posterior(cfg, prior_label);
    std::cout << text;
    return 0;
  } catch (const llmprior::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(llmprior::ExitCode::io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(llmprior::ExitCode::numeric);
  }
}
