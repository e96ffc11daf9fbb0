#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "llmprior/errors.hpp"
#include "llmprior/priors.hpp"
#include "support.hpp"

using namespace llmprior;
namespace ts = testing_support;

namespace {

PriorCatalog heart_catalog() { return load_catalog(ts::data_dir() / "examples" / "heart_catalog.json"); }

bool has_finding(const std::vector<ValidationFinding>& fs, ValidationFinding::Kind k, const std::string& coef) {
  for (const auto& f : fs)
    if (f.kind == k && f.coefficient == coef) return true;
  return false;
}

}  // namespace

TEST(Priors, ExampleCatalogValidatesAgainstSpec) {
  const PriorCatalog c = heart_catalog();
  EXPECT_EQ(c.sets.size(), 6u);
  EXPECT_NO_THROW(require_valid(c, ts::heart_spec()));
  for (const auto& s : c.sets) EXPECT_TRUE(validate_prior_set(s, ts::heart_spec()).empty()) << s.label;
}

TEST(Priors, JsonRoundTripIsExact) {
  PriorCatalog c = heart_catalog();
  // awkward doubles must survive the text round trip bit for bit
  c.sets[0].entries["age"].mean = 0.1 + 0.2;
  c.sets[0].entries["chol"].sd = 1.0 / 3.0;
  c.sets[1].entries["oldpeak"].mean = -std::numeric_limits<double>::denorm_min();
  const auto dir = ts::temp_dir("priors_rt");
  save_catalog(c, dir / "c.json");
  EXPECT_EQ(load_catalog(dir / "c.json"), c);
  EXPECT_EQ(catalog_from_json(to_json(c)), c);
}

TEST(Priors, FindingsNameTheCoefficient) {
  const ModelSpec spec = ts::heart_spec();
  PriorSet s = ts::uniform_prior(spec, "x", 0.0, 1.0);
  s.entries.erase("chol");
  s.entries["thal"] = {0.0, 1.0, ""};
  s.entries["age"].sd = 0.0;
  s.entries["sex"].mean = std::nan("");
  s.confidence_weight = 1.5;
  const auto fs = validate_prior_set(s, spec);
  using K = ValidationFinding::Kind;
  EXPECT_TRUE(has_finding(fs, K::missing_coefficient, "chol"));
  EXPECT_TRUE(has_finding(fs, K::extra_coefficient, "thal"));
  EXPECT_TRUE(has_finding(fs, K::invalid_sd, "age"));
  EXPECT_TRUE(has_finding(fs, K::invalid_mean, "sex"));
  EXPECT_TRUE(has_finding(fs, K::weight_out_of_range, ""));
  EXPECT_EQ(fs.size(), 5u);
}

TEST(Priors, NegativeAndInfiniteSdAreInvalid) {
  const ModelSpec spec = ts::toy_spec(1, ResponseKind::binary);
  for (double sd : {-1.0, std::numeric_limits<double>::infinity(), std::nan("")}) {
    PriorSet s = ts::uniform_prior(spec, "x", 0.0, 1.0);
    s.entries["x1"].sd = sd;
    EXPECT_TRUE(has_finding(validate_prior_set(s, spec), ValidationFinding::Kind::invalid_sd, "x1"));
  }
}

TEST(Priors, RequireValidThrows) {
  const ModelSpec spec = ts::heart_spec();
  PriorCatalog c = heart_catalog();
  c.sets[2].entries.erase("oldpeak");
  try {
    require_valid(c, spec);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("oldpeak"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(c.sets[2].label), std::string::npos);
  }
}

TEST(Priors, DuplicateLabelRejected) {
  auto j = to_json(heart_catalog());
  j["sets"][1]["label"] = j["sets"][0]["label"];
  EXPECT_THROW(catalog_from_json(j), ValidationError);
}

TEST(Priors, SchemaErrorsNameField) {
  auto j = to_json(heart_catalog());
  j["sets"][0]["informativeness"] = "strong";
  EXPECT_THROW(catalog_from_json(j), SchemaError);
  auto k = to_json(heart_catalog());
  k["sets"][0]["entries"]["age"].erase("sd");
  try {
    catalog_from_json(k);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(e.field().find("sd"), std::string::npos);
  }
}

TEST(Priors, NormalizeWeight) {
  EXPECT_EQ(normalize_weight(60.0), 0.6);
  EXPECT_EQ(normalize_weight(100.0), 1.0);
  EXPECT_EQ(normalize_weight(0.4), 0.4);
  EXPECT_EQ(normalize_weight(1.0), 1.0);
  EXPECT_EQ(normalize_weight(0.0), 0.0);
  // out of range stays out of range so validation catches it
  EXPECT_EQ(normalize_weight(150.0), 150.0);
}

TEST(Priors, FindListsAvailableLabels) {
  const PriorCatalog c = heart_catalog();
  EXPECT_EQ(c.find("expert-b/weak").source, "expert-b");
  try {
    c.find("nope");
    FAIL();
  } catch (const LookupError& e) {
    EXPECT_EQ(e.available(), c.labels());
  }
}
