#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <regex>
#include <sstream>

#include "llmprior/elicit.hpp"
#include "llmprior/errors.hpp"

namespace llmprior {

using nlohmann::json;

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

// End of the balanced {...} starting at `open`, honouring JSON strings.
std::optional<std::size_t> balanced_end(const std::string& s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i;
  }
  return std::nullopt;
}

std::optional<json> first_catalog_block(const std::string& raw) {
  for (std::size_t pos = raw.find('{'); pos != std::string::npos; pos = raw.find('{', pos + 1)) {
    const auto end = balanced_end(raw, pos);
    if (!end) continue;
    json j = json::parse(raw.begin() + static_cast<std::ptrdiff_t>(pos),
                         raw.begin() + static_cast<std::ptrdiff_t>(*end) + 1, nullptr, false);
    if (j.is_object() && j.contains("sets") && j["sets"].is_array()) return j;
  }
  return std::nullopt;
}

std::vector<PriorSet> sets_from_json(json j, const std::string& raw, const ModelSpec& spec, const std::string& source) {
  // Fill what the output contract makes optional in practice.
  auto& sets = j["sets"];
  const double even = sets.empty() ? 1.0 : 1.0 / static_cast<double>(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    auto& s = sets[i];
    if (!s.is_object()) continue;
    if (!s.contains("label")) s["label"] = source + "/" + std::to_string(i + 1);
    if (!s.contains("source")) s["source"] = source;
    if (!s.contains("informativeness")) s["informativeness"] = "custom";
    if (!s.contains("confidence_weight")) s["confidence_weight"] = even;
  }
  PriorCatalog catalog;
  try {
    catalog = catalog_from_json(j);
  } catch (const ValidationError& e) {
    throw ParseError(std::string("response JSON does not match the priors schema: ") + e.what(), raw);
  }
  if (catalog.sets.empty()) throw ParseError("response JSON contains no prior sets", raw);
  for (const auto& set : catalog.sets) {
    const auto report = validate_prior_set(set, spec);
    if (!report.empty()) {
      std::string msg = "prior set '" + set.label + "' in response JSON is invalid:";
      for (const auto& f : report) msg += " " + f.message + ";";
      throw ParseError(msg, raw);
    }
  }
  return catalog.sets;
}

Informativeness level_from_heading(const std::string& heading) {
  const std::string h = lower(heading);
  for (const char* w : {"weak", "conservative", "vague", "diffuse", "non-informative", "uninformative"})
    if (h.find(w) != std::string::npos) return Informativeness::weak;
  for (const char* w : {"moderate", "informative", "strong"})
    if (h.find(w) != std::string::npos) return Informativeness::moderate;
  return Informativeness::custom;
}

struct ProseSet {
  std::string key;
  Informativeness level = Informativeness::custom;
  std::map<std::string, PriorEntry> entries;
};

// Coefficient named on a prior line: beta index first, then the earliest
// intercept/predictor mention.
std::optional<std::string> coefficient_on_line(const std::string& text, const ModelSpec& spec,
                                               const std::vector<std::string>& names) {
  static const std::regex beta_re(R"(beta\s*_?\s*(\d+))", std::regex::icase);
  std::smatch m;
  if (std::regex_search(text, m, beta_re)) {
    const long idx = std::stol(m[1].str());
    const long col = spec.intercept ? idx : idx - 1;
    if (col >= 0 && col < static_cast<long>(names.size())) return names[static_cast<std::size_t>(col)];
  }
  const std::string l = lower(text);
  auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  std::optional<std::string> best;
  std::size_t best_pos = std::string::npos;
  for (const auto& name : names) {
    std::vector<std::string> forms{lower(name)};
    std::string spaced = forms[0];
    std::replace(spaced.begin(), spaced.end(), '_', ' ');
    if (spaced != forms[0]) forms.push_back(spaced);
    for (const auto& form : forms) {
      for (std::size_t p = l.find(form); p != std::string::npos; p = l.find(form, p + 1)) {
        const bool left = p == 0 || !is_word(l[p - 1]);
        const bool right = p + form.size() >= l.size() || !is_word(l[p + form.size()]);
        if (left && right) {
          if (p < best_pos) {
            best_pos = p;
            best = name;
          }
          break;
        }
      }
    }
  }
  return best;
}

}  // namespace

std::string normalize_notation(const std::string& text) {
  std::string s;
  s.reserve(text.size());
  bool in_subscript = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    // U+2080..U+2089 subscript digits: E2 82 80..89
    if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x82) {
      const auto d = static_cast<unsigned char>(text[i + 2]);
      if (d >= 0x80 && d <= 0x89) {
        if (!in_subscript) s += '_';
        s += static_cast<char>('0' + (d - 0x80));
        in_subscript = true;
        i += 2;
        continue;
      }
    }
    in_subscript = false;
    s += text[i];
  }
  replace_all(s, "\xCE\xB2", "beta");      // β
  replace_all(s, "\xC2\xB2", "^2");        // ²
  replace_all(s, "\xE2\x88\x92", "-");     // minus sign
  replace_all(s, "\\mathcal{N}", "N");
  replace_all(s, "\\mathcal N", "N");
  replace_all(s, "\\mathrm{N}", "N");
  replace_all(s, "\\beta", "beta");
  replace_all(s, "\\left(", "(");
  replace_all(s, "\\right)", ")");
  replace_all(s, "\\,", "");
  replace_all(s, "$", "");
  replace_all(s, "`", "");
  static const std::regex braced_sub(R"(_\{(\d+)\})");
  static const std::regex braced_sup(R"(\^\{2\})");
  static const std::regex text_cmd(R"(\\text\{([^}]*)\})");
  s = std::regex_replace(s, braced_sub, "_$1");
  s = std::regex_replace(s, braced_sup, "^2");
  s = std::regex_replace(s, text_cmd, "$1");
  return s;
}

std::vector<PriorSet> parse_prose_sets(const std::string& raw, const ModelSpec& spec, const std::string& source) {
  const auto names = spec.coefficient_names();
  static const std::string num = R"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)";
  static const std::regex normal_re(R"((?:^|[^A-Za-z])N\s*\(\s*(?:mean\s*=\s*|mu\s*=\s*)?()" + num +
                                        R"()\s*,\s*(?:(sd|sigma|variance|var)\s*=\s*)?\(?\s*()" + num +
                                        R"()\s*\)?\s*(\^\s*2)?\s*\))",
                                    std::regex::icase);
  static const std::regex heading_re(R"(\b(?:suggestion|set|option)\s+([A-Za-z]|\d+)\b)", std::regex::icase);
  static const std::regex weight_re(
      R"(\b(?:suggestion|set|option)\s+([A-Za-z]|\d+)\s*[:=\-]?\s*\(?\s*(\d+(?:\.\d+)?)\s*%)", std::regex::icase);

  std::vector<ProseSet> sets;
  auto set_for = [&](const std::string& key) -> ProseSet& {
    for (auto& s : sets)
      if (s.key == key) return s;
    sets.push_back({key, Informativeness::custom, {}});
    return sets.back();
  };

  std::map<std::string, double> weights;
  std::string current;
  std::istringstream lines(raw);
  std::string line;
  while (std::getline(lines, line)) {
    const std::string text = normalize_notation(line);
    for (auto it = std::sregex_iterator(text.begin(), text.end(), weight_re); it != std::sregex_iterator(); ++it) {
      std::string key = (*it)[1].str();
      std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::toupper(c); });
      weights.emplace(key, std::stod((*it)[2].str()) / 100.0);
    }

    std::smatch nm;
    const bool has_prior = std::regex_search(text, nm, normal_re);
    std::smatch hm;
    if (!has_prior && text.find('%') == std::string::npos && std::regex_search(text, hm, heading_re)) {
      current = hm[1].str();
      std::transform(current.begin(), current.end(), current.begin(), [](unsigned char c) { return std::toupper(c); });
      ProseSet& s = set_for(current);
      if (s.entries.empty() && s.level == Informativeness::custom) s.level = level_from_heading(text);
      continue;
    }
    if (!has_prior) continue;

    const std::string before = text.substr(0, static_cast<std::size_t>(nm.position(0)));
    auto coef = coefficient_on_line(before, spec, names);
    if (!coef) coef = coefficient_on_line(text, spec, names);
    if (!coef) continue;

    const double mean = std::stod(nm[1].str());
    const double second = std::stod(nm[3].str());
    const std::string kw = lower(nm[2].str());
    // Without "^2" the second argument is a variance, matching N(mean, sd^2).
    const bool is_sd = nm[4].matched || kw == "sd" || kw == "sigma";
    const double sd = is_sd ? second : std::sqrt(second);

    ProseSet& s = set_for(current.empty() ? "1" : current);
    s.entries.emplace(*coef, PriorEntry{mean, sd, trim(line)});
  }

  std::vector<PriorSet> out;
  std::size_t nonempty = 0;
  for (const auto& s : sets) nonempty += s.entries.empty() ? 0 : 1;
  for (const auto& s : sets) {
    if (s.entries.empty()) continue;
    PriorSet p;
    p.label = source + "/" + s.key;
    p.source = source;
    p.informativeness = s.level;
    auto w = weights.find(s.key);
    p.confidence_weight = w != weights.end() ? w->second : 1.0 / static_cast<double>(nonempty);
    p.entries = s.entries;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PriorSet> parse_response(const std::string& raw, const ModelSpec& spec, const std::string& source) {
  if (auto j = first_catalog_block(raw)) return sets_from_json(std::move(*j), raw, spec, source);

  const auto candidates = parse_prose_sets(raw, spec, source);
  std::vector<PriorSet> complete;
  std::string problems;
  for (const auto& set : candidates) {
    const auto report = validate_prior_set(set, spec);
    if (report.empty()) {
      complete.push_back(set);
      continue;
    }
    problems += " set '" + set.label + "':";
    for (const auto& f : report) problems += " " + f.message + ";";
  }
  if (!complete.empty()) return complete;
  if (candidates.empty()) throw ParseError("response contains no JSON prior block and no N(mean, sd^2) statements", raw);
  throw ParseError("no complete prior set in response;" + problems, raw);
}

}  // namespace llmprior
