#include <algorithm>

#include "json_fields.hpp"
#include "llmprior/elicit.hpp"
#include "llmprior/errors.hpp"

namespace llmprior {

using nlohmann::json;

std::string to_string(Likelihood likelihood) { return likelihood == Likelihood::logistic ? "logistic" : "linear"; }

Likelihood likelihood_for(const ModelSpec& spec) {
  return spec.response_kind == ResponseKind::binary ? Likelihood::logistic : Likelihood::linear;
}

PromptTemplate PromptTemplate::standard() {
  PromptTemplate t;
  t.persona =
      "You are an expert in {{expertise}}. For the {{model_kind}} model provided below, which predicts "
      "{{outcome}}, your task is to propose and justify suitable normally distributed prior distributions for all "
      "regression parameters ({{parameter_range}}).";
  t.model_block =
      "**Model Details:**\n"
      "Response: {{response_description}}\n"
      "Linear Predictor: {{linear_predictor}}\n"
      "Predictor Details:\n"
      "{{predictor_details}}";
  t.instruction_blocks = {
      "1. **Leverage Knowledge & Simulate Tool Use**: Briefly state how you'll use your existing knowledge of "
      "{{knowledge_topic}} and {{model_kind}} modelling (simulating the consultation of relevant literature or "
      "databases for effect sizes and typical parameter ranges) to inform your suggestions.",

      "2. **Propose Multiple Prior Sets**: Generate at least two distinct sets of prior distributions (e.g., "
      "\"Suggestion A: Moderately Informative Priors based on Domain Knowledge\" and \"Suggestion B: Weakly "
      "Informative / More Conservative Priors\").",

      "3. **Detailed Justification for Each Parameter**: For each parameter ({{first_parameter}} through "
      "{{last_parameter}}) within each suggested set, provide:\n"
      "    * The specific normal prior distribution: $N(\\text{mean}, \\text{standard deviation}^2)$. Clearly state "
      "the mean and standard deviation.\n"
      "    * The source of knowledge behind the choice (published effect sizes, clinical or physical reasoning, "
      "or general modelling conventions).\n"
      "    * The range of values the prior treats as plausible, stated on the scale of the coefficient.",

      "4. **Comparative Evaluation & Weighting**:\n"
      "    * Critically evaluate and compare the different sets of priors you've proposed. Discuss the strengths "
      "and weaknesses of each set and the situations in which it would be preferred.\n"
      "    * Assign a relative weighting or confidence score (e.g., Suggestion A: 60%, Suggestion B: 40%).",
  };
  t.output_contract =
      "5. **Machine-Readable Summary**: Finish with one fenced ```json block containing every proposed set in this "
      "form, using standard deviations (not variances) and confidence weights as fractions that sum to 1:\n"
      "```json\n"
      "{\"sets\": [{\"label\": \"Suggestion A\", \"source\": \"<your model name>\", "
      "\"informativeness\": \"moderate\", \"confidence_weight\": 0.6, \"entries\": {{{coefficient_keys}}}}]}\n"
      "```\n"
      "\"informativeness\" is one of \"moderate\", \"weak\" or \"custom\". \"entries\" must contain exactly these "
      "keys: {{coefficient_list}}.";
  return t;
}

PromptTemplate prompt_template_from_json(const json& j) {
  using namespace detail;
  PromptTemplate t;
  t.persona = require_string(j, "persona", "");
  t.model_block = require_string(j, "model_block", "");
  const json& blocks = require(j, "instruction_blocks", "");
  if (!blocks.is_array()) throw SchemaError("instruction_blocks", "field 'instruction_blocks' must be an array");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (!blocks[i].is_string())
      throw SchemaError("instruction_blocks[" + std::to_string(i) + "]", "instruction blocks must be strings");
    t.instruction_blocks.push_back(blocks[i].get<std::string>());
  }
  t.output_contract = require_string(j, "output_contract", "");
  return t;
}

json to_json(const PromptTemplate& t) {
  return {{"persona", t.persona},
          {"model_block", t.model_block},
          {"instruction_blocks", t.instruction_blocks},
          {"output_contract", t.output_contract}};
}

PromptTemplate load_prompt_template(const std::filesystem::path& path) {
  return prompt_template_from_json(detail::parse_json_text(detail::read_text_file(path), path.string()));
}

std::string render_template(const std::string& text, const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = text.find("{{", pos);
    if (open == std::string::npos) break;
    // "{{{x}}}" renders as "{" + value(x) + "}".
    std::size_t start = open;
    while (start + 2 < text.size() && text[start + 2] == '{') ++start;
    const std::size_t close = text.find("}}", start + 2);
    if (close == std::string::npos) break;
    const std::string name = text.substr(start + 2, close - start - 2);
    auto it = std::find_if(values.begin(), values.end(), [&](const auto& kv) { return kv.first == name; });
    if (it == values.end()) throw ArgumentError("unknown prompt placeholder {{" + name + "}}");
    out.append(text, pos, start - pos);
    out += it->second;
    pos = close + 2;
  }
  out.append(text, pos, std::string::npos);
  return out;
}

namespace {

std::string beta(std::size_t i) { return "\\beta_" + (i < 10 ? std::to_string(i) : "{" + std::to_string(i) + "}"); }

std::string detail_line(const Predictor& p) {
  std::string desc = p.description.empty() ? p.name : p.description;
  if (!p.unit.empty() && desc.find(p.unit) == std::string::npos) desc += " (" + p.unit + ")";
  return "    * " + p.name + ": " + desc;
}

}  // namespace

std::string linear_predictor_text(const ModelSpec& spec, Likelihood likelihood) {
  std::string out = likelihood == Likelihood::logistic ? "$\\eta = " : "$\\mathbb{E}[y] = ";
  std::size_t i = 0;
  if (spec.intercept) out += beta(i++);
  for (const auto& p : spec.predictors) {
    if (i > 0) out += " + ";
    out += beta(spec.intercept ? i : i + 1) + " \\text{" + p.name + "}";
    ++i;
  }
  return out + "$";
}

std::string build_prompt(const ModelSpec& spec, Likelihood likelihood, const std::string& extra_context,
                         const PromptTemplate& tmpl) {
  if (spec.predictors.empty()) throw ArgumentError("cannot build a prompt for a model with no predictors");
  spec.validate();

  const PromptContext& ctx = spec.prompt;
  const std::size_t first = spec.intercept ? 0 : 1;
  const std::size_t last = first + spec.coefficient_count() - 1;

  std::string details;
  for (const auto& p : spec.predictors) details += (details.empty() ? "" : "\n") + detail_line(p);

  std::string keys, list;
  for (const auto& name : spec.coefficient_names()) {
    keys += (keys.empty() ? "" : ", ") + ("\"" + name + "\": {\"mean\": 0.0, \"sd\": 1.0, \"justification\": \"...\"}");
    list += (list.empty() ? "" : ", ") + name;
  }

  std::string response = ctx.response_description;
  if (response.empty())
    response = likelihood == Likelihood::logistic ? "$y \\in \\{0,1\\}$ (" + spec.response_name + ")"
                                                  : "$y \\in \\mathbb{R}$ (" + spec.response_name + ")";

  const std::string outcome = ctx.outcome.empty() ? spec.response_name : ctx.outcome;
  const std::vector<std::pair<std::string, std::string>> values{
      {"expertise", ctx.expertise.empty() ? "applied statistics" : ctx.expertise},
      {"model_kind", likelihood == Likelihood::logistic ? "logistic regression" : "linear regression"},
      {"outcome", outcome},
      {"parameter_range", "$" + beta(first) + ", \\ldots, " + beta(last) + "$"},
      {"response_description", response},
      {"linear_predictor", linear_predictor_text(spec, likelihood)},
      {"predictor_details", details},
      {"knowledge_topic", ctx.knowledge_topic.empty() ? outcome : ctx.knowledge_topic},
      {"first_parameter", "$" + beta(first) + "$"},
      {"last_parameter", "$" + beta(last) + "$"},
      {"coefficient_keys", keys},
      {"coefficient_list", list},
  };

  std::string out = render_template(tmpl.persona, values) + "\n\n" + render_template(tmpl.model_block, values) + "\n";
  for (const std::string* extra : {&ctx.extra_context, &extra_context})
    if (!extra->empty()) out += "\n" + *extra + "\n";
  out += "\n**Your Response Should:**\n";
  for (const auto& block : tmpl.instruction_blocks) out += render_template(block, values) + "\n";
  if (!tmpl.output_contract.empty()) out += render_template(tmpl.output_contract, values) + "\n";
  return out;
}

}  // namespace llmprior
