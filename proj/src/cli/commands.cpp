#include "llmprior/cli.hpp"

#include <cctype>

#include <fmt/format.h>

#include "json_fields.hpp"
#include "llmprior/bayes.hpp"
#include "llmprior/cv.hpp"
#include "llmprior/errors.hpp"
#include "llmprior/eval.hpp"
#include "llmprior/glm.hpp"
#include "llmprior/report.hpp"

namespace llmprior {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
  if (folds < 2) throw ArgumentError("--folds must be >= 2");
  if (bootstrap_reps < 0) throw ArgumentError("--bootstrap-reps must be >= 0");
  if (bootstrap_reps == 1) throw ArgumentError("--bootstrap-reps must be 0 or >= 2");
  if (mc_draws < 1) throw ArgumentError("--mc-draws must be >= 1");
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec || !fs::is_directory(output_dir))
    throw IoError("output directory '" + output_dir.string() + "' cannot be created: " + ec.message());
}

std::string file_stem(const std::string& label) {
  std::string out;
  for (char c : label) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  return out.empty() ? "prior" : out;
}

namespace {

void write_json(const fs::path& path, const json& j) { detail::write_text_file(path, j.dump(2) + "\n"); }

const fs::path& need(const std::optional<fs::path>& p, const char* flag) {
  if (!p) throw ArgumentError(std::string("this command needs ") + flag);
  return *p;
}

struct Inputs {
  ModelSpec spec;
  BoundDataset data;
};

Inputs load_inputs(const RunConfig& config) {
  if (config.spec_path.empty()) throw ArgumentError("this command needs --spec");
  if (config.dataset_path.empty()) throw ArgumentError("this command needs --data");
  ModelSpec spec = load_model_spec(config.spec_path);
  BoundDataset data = load_csv(config.dataset_path, spec);
  return {spec, std::move(data)};
}

PriorCatalog load_checked_catalog(const fs::path& path, const ModelSpec& spec) {
  PriorCatalog catalog = load_catalog(path);
  require_valid(catalog, spec);
  return catalog;
}

std::vector<GaussianDist> prior_marginals(const PriorSet& set, const std::vector<std::string>& names) {
  std::vector<GaussianDist> out;
  for (const auto& n : names) out.push_back(set.entry(n).dist());
  return out;
}

}  // namespace

std::string cmd_prompt(const RunConfig& config) {
  if (config.spec_path.empty()) throw ArgumentError("this command needs --spec");
  const ModelSpec spec = load_model_spec(config.spec_path);
  const PromptTemplate tmpl =
      config.prompt_template_path ? load_prompt_template(*config.prompt_template_path) : PromptTemplate::standard();
  return build_prompt(spec, likelihood_for(spec), config.extra_context, tmpl);
}

std::string cmd_elicit(const RunConfig& config) {
  config.validate();
  if (config.spec_path.empty()) throw ArgumentError("this command needs --spec");
  const ModelSpec spec = load_model_spec(config.spec_path);
  const EndpointConfig endpoint = load_endpoint_config(need(config.endpoint_config_path, "--endpoint"));

  ElicitOptions opts;
  opts.extra_context = config.extra_context;
  if (config.prompt_template_path) opts.prompt_template = load_prompt_template(*config.prompt_template_path);
  opts.audit_path = config.output_dir / "elicitation_audit.jsonl";

  ElicitationRecord rec;
  try {
    rec = elicit(spec, endpoint, opts);
  } catch (const ParseError& e) {
    const fs::path raw = config.output_dir / "raw_response.txt";
    detail::write_text_file(raw, e.raw());
    throw ParseError(std::string(e.what()) + "; raw response saved to " + raw.string(), e.raw());
  }

  PriorCatalog catalog{spec.id, rec.parsed_sets};
  const fs::path out = config.catalog_path.value_or(config.output_dir / "catalog.json");
  save_catalog(catalog, out);
  return fmt::format("{} prior set(s) written to {}\naudit record appended to {}\n", catalog.sets.size(),
                     out.string(), opts.audit_path.string());
}

std::string cmd_evaluate(const RunConfig& config) {
  config.validate();
  const Inputs in = load_inputs(config);
  const PriorCatalog catalog = load_checked_catalog(need(config.catalog_path, "--catalog"), in.spec);
  const MLEFit mle = fit_mle(in.data);

  json mle_json = to_json(mle);
  std::vector<GaussianDist> mle_marginals = mle.marginals;
  std::string method = "fisher";
  if (config.bootstrap_reps > 0) {
    const BootstrapResult boot = bootstrap_mle(in.data, config.bootstrap_reps, config.seed);
    mle_json["bootstrap"] = to_json(boot, mle.names);
    // Bootstrap sds around the full-data estimates.
    for (std::size_t j = 0; j < mle_marginals.size(); ++j)
      mle_marginals[j] = GaussianDist(mle.marginals[j].mean(), boot.summary[j].sd());
    method = "bootstrap";
  }

  const KLReport report = kl_table(mle_marginals, catalog, in.spec, method);
  const std::string table = format_kl_table(report);

  std::vector<CurveSource> sources{{"MLE", "mle", mle_marginals}};
  for (const auto& label : report.labels)
    sources.push_back({label, "prior", prior_marginals(catalog.find(label), mle.names)});

  write_json(config.output_dir / "mle.json", mle_json);
  write_json(config.output_dir / "kl_report.json", to_json(report));
  detail::write_text_file(config.output_dir / "kl_table.txt", table);
  write_json(config.output_dir / "curves.json",
             {{"model_spec_id", in.spec.id}, {"mle_method", method}, {"coefficients", density_curves(mle.names, sources)}});
  return table;
}

std::string cmd_cv(const RunConfig& config) {
  config.validate();
  const Inputs in = load_inputs(config);
  const PriorCatalog catalog =
      config.catalog_path ? load_checked_catalog(*config.catalog_path, in.spec) : PriorCatalog{in.spec.id, {}};
  const FoldPlan folds = make_folds(in.data, config.folds, config.seed);
  CVConfig cv;
  cv.seed = config.seed;
  cv.mc_draws = config.mc_draws;
  const CVReport report = run_cv(in.data, catalog, folds, cv);
  const std::string table = format_cv_table(report);
  write_json(config.output_dir / "cv_report.json", to_json(report));
  detail::write_text_file(config.output_dir / "cv_table.txt", table);
  return table;
}

std::string cmd_posterior(const RunConfig& config, const std::string& prior_label) {
  config.validate();
  const Inputs in = load_inputs(config);
  const PriorCatalog catalog = load_catalog(need(config.catalog_path, "--catalog"));
  if (prior_label.empty()) throw ArgumentError("this command needs --prior-label");
  const PriorSet& prior = catalog.find(prior_label);
  const auto findings = validate_prior_set(prior, in.spec);
  if (!findings.empty()) throw ValidationError("prior set '" + prior.label + "': " + findings.front().message);

  const MLEFit mle = fit_mle(in.data);
  const PosteriorFit post = fit_posterior(in.data, prior);
  const std::vector<CurveSource> sources{{"prior: " + prior.label, "prior", prior_marginals(prior, mle.names)},
                                         {"MLE", "mle", mle.marginals},
                                         {"posterior", "posterior", post.marginals}};
  const fs::path out = config.output_dir / ("posterior_" + file_stem(prior.label) + ".json");
  write_json(out, {{"model_spec_id", in.spec.id},
                   {"prior", to_json(prior)},
                   {"mle", to_json(mle)},
                   {"posterior", to_json(post)},
                   {"coefficients", density_curves(mle.names, sources)}});

  std::string text = fmt::format("{:<20}  {:>12}  {:>12}  {:>12}\n", "coefficient", "prior", "MLE", "posterior");
  for (std::size_t j = 0; j < mle.names.size(); ++j) {
    const PriorEntry& e = prior.entry(mle.names[j]);
    text += fmt::format("{:<20}  {:>12.4g}  {:>12.4g}  {:>12.4g}\n", mle.names[j], e.mean, mle.coefficients[j],
                        post.mode[j]);
  }
  return text + "curves written to " + out.string() + "\n";
}

}  // namespace llmprior
