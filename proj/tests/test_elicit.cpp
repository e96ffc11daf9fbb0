#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "llmprior/elicit.hpp"
#include "llmprior/errors.hpp"
#include "support.hpp"
#include "stub_server.hpp"

using namespace llmprior;
namespace ts = testing_support;
using nlohmann::json;

namespace {

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

EndpointConfig stub_endpoint(const ts::StubServer& s) {
  EndpointConfig c;
  c.provider = "openai";
  c.base_url = s.base_url();
  c.model = "stub-model";
  c.backoff_ms = 1;
  c.timeout_s = 5;
  return c;
}

// Two complete sets for the heart spec with awkward doubles.
json heart_sets_json() {
  const ModelSpec spec = ts::heart_spec();
  json sets = json::array();
  double v = 0.1;
  for (const char* label : {"Suggestion A", "Suggestion B"}) {
    json entries = json::object();
    for (const auto& name : spec.coefficient_names()) {
      v = v * 1.37 + 1.0 / 3.0;
      entries[name] = {{"mean", v - 2.0}, {"sd", v / 7.0}, {"justification", "because " + name}};
    }
    sets.push_back({{"label", label},
                    {"source", "stub-model"},
                    {"informativeness", std::string(label) == "Suggestion A" ? "moderate" : "weak"},
                    {"confidence_weight", std::string(label) == "Suggestion A" ? 0.6 : 0.4},
                    {"entries", entries}});
  }
  return {{"model_spec_id", spec.id}, {"sets", sets}};
}

std::string wrap_in_prose(const json& j) {
  return "Here is my analysis of the coefficients {with braces in prose}.\n\n"
         "**Suggestion A** uses domain knowledge...\n\n```json\n" +
         j.dump(2) + "\n```\nI hope this helps.";
}

}  // namespace

TEST(Prompt, HeartPromptContainsPredictorDetails) {
  const ModelSpec spec = ts::heart_spec();
  const std::string p = build_prompt(spec, Likelihood::logistic, "");
  EXPECT_NE(p.find("sex: categorical (1 = male; 0 = female)"), std::string::npos);
  for (const auto& pr : spec.predictors) EXPECT_EQ(count_of(p, "    * " + pr.name + ":"), 1u) << pr.name;
  EXPECT_NE(p.find("Propose Multiple Prior Sets"), std::string::npos);
  EXPECT_NE(p.find("logistic"), std::string::npos);
  EXPECT_EQ(p.find("{{"), std::string::npos);
  EXPECT_EQ(p, build_prompt(spec, Likelihood::logistic, ""));
}

TEST(Prompt, ConcretePromptListsEveryComponent) {
  const ModelSpec spec = ts::concrete_spec();
  const std::string p = build_prompt(spec, Likelihood::linear, "");
  EXPECT_EQ(spec.predictors.size(), 8u);
  for (const auto& pr : spec.predictors) EXPECT_EQ(count_of(p, "    * " + pr.name + ":"), 1u) << pr.name;
  EXPECT_NE(p.find("Superplasticizer"), std::string::npos);
  EXPECT_NE(p.find("1 to 365 days"), std::string::npos);
  const std::string extra = build_prompt(spec, Likelihood::linear, "Strength measured at 28 days.");
  EXPECT_NE(extra.find("Strength measured at 28 days."), std::string::npos);
}

TEST(Prompt, LinearPredictorText) {
  const ModelSpec spec = ts::toy_spec(2, ResponseKind::binary);
  const std::string t = linear_predictor_text(spec, Likelihood::logistic);
  EXPECT_NE(t.find("x1"), std::string::npos);
  EXPECT_NE(t.find("x2"), std::string::npos);
  EXPECT_NE(t.find("eta"), std::string::npos);
}

TEST(Prompt, EmptyPredictorsRejected) {
  ModelSpec spec = ts::toy_spec(0, ResponseKind::binary);
  EXPECT_THROW(build_prompt(spec, Likelihood::logistic, ""), ArgumentError);
}

TEST(Prompt, TemplateRendering) {
  EXPECT_EQ(render_template("a {{x}} b {{y}}", {{"x", "1"}, {"y", "2"}}), "a 1 b 2");
  EXPECT_EQ(render_template("{{{x}}}", {{"x", "v"}}), "{v}");
  EXPECT_THROW(render_template("{{nope}}", {{"x", "1"}}), ArgumentError);
}

TEST(Prompt, CustomTemplateRoundTrip) {
  PromptTemplate t = PromptTemplate::standard();
  t.persona = "You are a careful {{expertise}} analyst.";
  const auto dir = ts::temp_dir("tmpl");
  {
    std::ofstream f(dir / "t.json");
    f << to_json(t).dump(2);
  }
  const PromptTemplate back = load_prompt_template(dir / "t.json");
  const std::string p = build_prompt(ts::heart_spec(), Likelihood::logistic, "", back);
  EXPECT_EQ(p.rfind("You are a careful ", 0), 0u);
}

TEST(Parse, JsonBlockInProse) {
  const ModelSpec spec = ts::heart_spec();
  const json j = heart_sets_json();
  const auto sets = parse_response(wrap_in_prose(j), spec, "stub-model");
  ASSERT_EQ(sets.size(), 2u);
  EXPECT_EQ(sets[0].label, "Suggestion A");
  EXPECT_EQ(sets[0].informativeness, Informativeness::moderate);
  EXPECT_EQ(sets[1].confidence_weight, 0.4);
  for (std::size_t s = 0; s < 2; ++s)
    for (const auto& name : spec.coefficient_names()) {
      EXPECT_EQ(sets[s].entry(name).mean, j["sets"][s]["entries"][name]["mean"].get<double>());
      EXPECT_EQ(sets[s].entry(name).sd, j["sets"][s]["entries"][name]["sd"].get<double>());
    }
}

TEST(Parse, RoundTripThroughCatalogJson) {
  const ModelSpec spec = ts::heart_spec();
  PriorCatalog c = load_catalog(ts::data_dir() / "examples" / "heart_catalog.json");
  const auto sets = parse_response("Answer:\n" + to_json(c).dump() + "\nDone.", spec);
  EXPECT_EQ(sets, c.sets);
}

TEST(Parse, MissingCoefficientIsNamed) {
  const ModelSpec spec = ts::heart_spec();
  json j = heart_sets_json();
  j["sets"][1]["entries"].erase("thalach");
  const std::string raw = wrap_in_prose(j);
  try {
    parse_response(raw, spec);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("thalach"), std::string::npos);
    EXPECT_EQ(e.raw(), raw);
  }
}

TEST(Parse, NoPriorsAtAllIsParseError) {
  EXPECT_THROW(parse_response("I cannot help with that.", ts::heart_spec()), ParseError);
}

TEST(Parse, ProseNotation) {
  const ModelSpec spec = ts::toy_spec(2, ResponseKind::binary);
  const std::string raw =
      "### Suggestion A: Moderately informative\n"
      "* Intercept β₀: N(−1.5, 0.5²)\n"
      "* β₁: N(0.05, 0.02²)\n"
      "* $\\beta_2 \\sim \\mathcal{N}(0.3, (0.1)^2)$\n"
      "### Suggestion B: Weakly informative\n"
      "* β₀ ~ N(0, 2.5^2)\n"
      "* β₁ ~ N(0, 1^2)\n"
      "* β₂ ~ N(0, 1^2)\n"
      "Weights: Suggestion A: 70%, Suggestion B: 30%\n";
  const auto sets = parse_response(raw, spec, "m");
  ASSERT_EQ(sets.size(), 2u);
  EXPECT_EQ(sets[0].label, "m/A");
  EXPECT_EQ(sets[0].informativeness, Informativeness::moderate);
  EXPECT_EQ(sets[1].informativeness, Informativeness::weak);
  EXPECT_DOUBLE_EQ(sets[0].entry("intercept").mean, -1.5);
  EXPECT_DOUBLE_EQ(sets[0].entry("x1").mean, 0.05);
  EXPECT_DOUBLE_EQ(sets[0].entry("x1").sd, 0.02);
  EXPECT_DOUBLE_EQ(sets[0].entry("x2").sd, 0.1);
  EXPECT_DOUBLE_EQ(sets[1].entry("intercept").sd, 2.5);
  EXPECT_DOUBLE_EQ(sets[0].confidence_weight, 0.7);
  EXPECT_DOUBLE_EQ(sets[1].confidence_weight, 0.3);
}

TEST(Parse, NormalizeNotation) {
  EXPECT_EQ(normalize_notation("β₁"), "beta_1");
  EXPECT_EQ(normalize_notation("−2"), "-2");
  EXPECT_EQ(normalize_notation("0.5²"), "0.5^2");
}

TEST(Client, EchoesThroughOpenAiShape) {
  ts::StubServer s([](const ts::StubRequest& r, int) {
    const json req = json::parse(r.body);
    return ts::StubReply{200, ts::openai_reply("echo: " + req["messages"].back()["content"].get<std::string>())};
  });
  const LlmExchange ex = call_llm("hello", stub_endpoint(s));
  EXPECT_EQ(ex.text, "echo: hello");
  EXPECT_EQ(ex.attempts, 1);
  ASSERT_TRUE(ex.usage.has_value());
  EXPECT_EQ(ex.usage->prompt_tokens, 120);
  const auto reqs = s.requests();
  ASSERT_EQ(reqs.size(), 1u);
  EXPECT_EQ(reqs[0].path, "/v1/chat/completions");
  EXPECT_EQ(json::parse(reqs[0].body)["temperature"], 0.0);
}

TEST(Client, AnthropicAndGeminiShapes) {
  ts::StubServer s([](const ts::StubRequest& r, int) {
    if (r.path.find("/messages") != std::string::npos)
      return ts::StubReply{200, R"({"content":[{"type":"text","text":"from claude"}],"usage":{"input_tokens":3,"output_tokens":4}})"};
    return ts::StubReply{200, R"({"candidates":[{"content":{"parts":[{"text":"from gemini"}]}}]})"};
  });
  EndpointConfig c = stub_endpoint(s);
  c.provider = "anthropic";
  EXPECT_EQ(call_llm("x", c).text, "from claude");
  c.provider = "gemini";
  c.base_url = s.base_url("/v1beta");
  EXPECT_EQ(call_llm("x", c).text, "from gemini");
  const auto reqs = s.requests();
  EXPECT_EQ(reqs[0].path, "/v1/messages");
  EXPECT_TRUE(reqs[0].headers.count("anthropic-version"));
  EXPECT_EQ(reqs[1].path, "/v1beta/models/stub-model:generateContent");
}

TEST(Client, RetriesServerErrorsThenGivesUp) {
  ts::StubServer s([](const ts::StubRequest&, int) { return ts::StubReply{500, "{}"}; });
  try {
    call_llm("x", stub_endpoint(s));
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.kind(), TransportFailure::status);
    EXPECT_EQ(e.attempts(), 3);
  }
  EXPECT_EQ(s.requests().size(), 3u);
}

TEST(Client, RecoversAfterTransientFailure) {
  ts::StubServer s([](const ts::StubRequest&, int call) {
    return call < 2 ? ts::StubReply{429, "{}"} : ts::StubReply{200, ts::openai_reply("ok")};
  });
  const LlmExchange ex = call_llm("x", stub_endpoint(s));
  EXPECT_EQ(ex.text, "ok");
  EXPECT_EQ(ex.attempts, 2);
}

TEST(Client, AuthFailureIsNotRetried) {
  ts::StubServer s([](const ts::StubRequest&, int) { return ts::StubReply{401, R"({"error":"bad key"})"}; });
  try {
    call_llm("x", stub_endpoint(s));
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.kind(), TransportFailure::auth);
    EXPECT_EQ(e.attempts(), 1);
  }
  EXPECT_EQ(s.requests().size(), 1u);
}

TEST(Client, EmptyBodyIsEmptyResponse) {
  ts::StubServer s([](const ts::StubRequest&, int) { return ts::StubReply{200, ""}; });
  try {
    call_llm("x", stub_endpoint(s));
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.kind(), TransportFailure::empty_response);
  }
}

TEST(Client, SendsBearerKeyAndRequiresEnvVar) {
  ts::StubServer s([](const ts::StubRequest&, int) { return ts::StubReply{200, ts::openai_reply("ok")}; });
  EndpointConfig c = stub_endpoint(s);
  c.api_key_env = "LLMPRIOR_TEST_KEY_UNSET_123";
  ::unsetenv(c.api_key_env.c_str());
  try {
    call_llm("x", c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("LLMPRIOR_TEST_KEY_UNSET_123"), std::string::npos);
  }
  EXPECT_TRUE(s.requests().empty());
  ::setenv(c.api_key_env.c_str(), "sk-test", 1);
  call_llm("x", c);
  ::unsetenv(c.api_key_env.c_str());
  const auto reqs = s.requests();
  ASSERT_EQ(reqs.size(), 1u);
  EXPECT_EQ(reqs[0].headers.find("Authorization")->second, "Bearer sk-test");
  EXPECT_EQ(reqs[0].body.find("sk-test"), std::string::npos);
}

TEST(Client, UnreachableServerIsConnectionError) {
  EndpointConfig c;
  c.base_url = "http://127.0.0.1:1/v1";
  c.model = "m";
  c.max_attempts = 2;
  c.backoff_ms = 1;
  c.timeout_s = 2;
  try {
    call_llm("x", c);
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.kind(), TransportFailure::connection);
    EXPECT_EQ(e.attempts(), 2);
  }
}

TEST(Endpoint, ConfigFilesLoad) {
  for (const char* f : {"openai", "anthropic", "gemini", "local"})
    EXPECT_NO_THROW(load_endpoint_config(ts::data_dir() / "examples" / "endpoints" / (std::string(f) + ".json"))) << f;
  json j = to_json(EndpointConfig{});
  j["provider"] = "mistral";
  EXPECT_THROW(endpoint_config_from_json(j), SchemaError);
}

TEST(Elicit, StubRoundTripIsBitExactAndAudited) {
  const ModelSpec spec = ts::heart_spec();
  const json j = heart_sets_json();
  const std::string reply = wrap_in_prose(j);
  ts::StubServer s([&](const ts::StubRequest&, int) { return ts::StubReply{200, ts::openai_reply(reply)}; });
  const auto dir = ts::temp_dir("elicit_audit");
  ElicitOptions opts;
  opts.audit_path = dir / "audit.jsonl";
  const ElicitationRecord rec = elicit(spec, stub_endpoint(s), opts);
  EXPECT_EQ(rec.raw_response, reply);
  EXPECT_FALSE(rec.parse_failed);
  ASSERT_EQ(rec.parsed_sets.size(), 2u);
  PriorCatalog cat{spec.id, rec.parsed_sets};
  EXPECT_NO_THROW(require_valid(cat, spec));
  for (std::size_t k = 0; k < 2; ++k)
    for (const auto& name : spec.coefficient_names()) {
      EXPECT_EQ(rec.parsed_sets[k].entry(name).mean, j["sets"][k]["entries"][name]["mean"].get<double>());
      EXPECT_EQ(rec.parsed_sets[k].entry(name).sd, j["sets"][k]["entries"][name]["sd"].get<double>());
    }

  // a second call appends a second line
  elicit(spec, stub_endpoint(s), opts);
  std::ifstream in(opts.audit_path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const json a = json::parse(line);
    EXPECT_EQ(a["model_name"], "stub-model");
    EXPECT_EQ(a["raw_response"], reply);
    EXPECT_FALSE(a["timestamp"].get<std::string>().empty());
    ++lines;
  }
  EXPECT_EQ(lines, 2);
}

TEST(Elicit, ParseFailureIsAuditedThenRethrown) {
  ts::StubServer s([](const ts::StubRequest&, int) { return ts::StubReply{200, ts::openai_reply("no priors here")}; });
  const auto dir = ts::temp_dir("elicit_fail");
  ElicitOptions opts;
  opts.audit_path = dir / "audit.jsonl";
  EXPECT_THROW(elicit(ts::heart_spec(), stub_endpoint(s), opts), ParseError);
  std::ifstream in(opts.audit_path);
  std::string line;
  ASSERT_TRUE(std::getline(in, line));
  const json a = json::parse(line);
  EXPECT_TRUE(a["parse_failed"].get<bool>());
  EXPECT_EQ(a["raw_response"], "no priors here");
}
