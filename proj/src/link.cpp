#include "collabmap/link.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "collabmap/text.hpp"

namespace collabmap::link {

namespace {

const std::vector<std::uint32_t> kNoPostings;

std::string exact_key(std::string_view s) {
  return text::to_lower_ascii(text::collapse_whitespace(s));
}

std::vector<std::string> distinct_tokens(std::string_view s) {
  auto tokens = text::word_tokens(s);
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

template <typename F>
void for_each_name(const RegistryRecord& r, F&& f) {
  f(r.primary_name);
  for (const auto& a : r.aliases) f(a);
  for (const auto& a : r.acronyms) f(a);
}

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

bool drop_segment(std::string_view seg) {
  std::size_t run = 0;
  for (char c : seg) {
    if (c >= '0' && c <= '9') return true;
    if (is_upper(c)) {
      ++run;
      continue;
    }
    if (run == 2 || run == 3) return true;
    run = 0;
  }
  return run == 2 || run == 3;
}

// Acronym-shaped pieces of a string: maximal runs of ASCII alphanumerics,
// case preserved.
std::vector<std::string> raw_words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if ((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || is_upper(c)) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string json_string_or_empty(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

}  // namespace

std::string_view to_string(InstType t) {
  switch (t) {
    case InstType::Education: return "Education";
    case InstType::Healthcare: return "Healthcare";
    case InstType::Company: return "Company";
    case InstType::Archive: return "Archive";
    case InstType::Nonprofit: return "Nonprofit";
    case InstType::Government: return "Government";
    case InstType::Facility: return "Facility";
    case InstType::Other: return "Other";
  }
  return "Other";
}

std::optional<InstType> parse_inst_type(std::string_view s) {
  for (auto t : kAllInstTypes) {
    if (text::equals_ci(text::trim(s), to_string(t))) return t;
  }
  return std::nullopt;
}

Registry::Registry(std::vector<RegistryRecord> records) : records_(std::move(records)) {
  std::sort(records_.begin(), records_.end(),
            [](const RegistryRecord& a, const RegistryRecord& b) { return a.ror_id < b.ror_id; });
  for (std::uint32_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!by_id_.emplace(r.ror_id, i).second) {
      throw RegistryError("duplicate ror_id in registry: " + r.ror_id);
    }
    std::set<std::string> tokens;
    std::set<std::string> exact;
    for_each_name(r, [&](const std::string& name) {
      for (auto& t : text::word_tokens(name)) tokens.insert(std::move(t));
      auto key = exact_key(name);
      if (!key.empty()) exact.insert(std::move(key));
    });
    for (const auto& t : tokens) name_index_[t].push_back(i);
    for (const auto& e : exact) exact_index_[e].push_back(i);
    std::set<std::string> acronyms(r.acronyms.begin(), r.acronyms.end());
    for (const auto& a : acronyms) {
      auto key = std::string(text::trim(a));
      if (!key.empty()) acronym_index_[key].push_back(i);
    }
  }
}

const RegistryRecord* Registry::find(std::string_view ror_id) const {
  auto it = by_id_.find(std::string(ror_id));
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

const std::vector<std::uint32_t>& Registry::postings(const std::string& token) const {
  auto it = name_index_.find(token);
  return it == name_index_.end() ? kNoPostings : it->second;
}

const std::vector<std::uint32_t>& Registry::acronym_matches(const std::string& acronym) const {
  auto it = acronym_index_.find(acronym);
  return it == acronym_index_.end() ? kNoPostings : it->second;
}

const std::vector<std::uint32_t>& Registry::exact_name_matches(std::string_view s) const {
  auto it = exact_index_.find(exact_key(s));
  return it == exact_index_.end() ? kNoPostings : it->second;
}

double Registry::idf(const std::string& token) const {
  const auto& p = postings(token);
  const double df = p.empty() ? 1.0 : static_cast<double>(p.size());
  return std::log(1.0 + static_cast<double>(records_.size()) / df);
}

std::map<InstType, std::size_t> Registry::type_histogram() const {
  std::map<InstType, std::size_t> h;
  for (const auto& r : records_) ++h[r.inst_type];
  return h;
}

Registry parse_registry_dump(const nlohmann::json& dump, std::vector<std::string>* warnings) {
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };
  if (!dump.is_array()) throw RegistryError("registry dump must be a JSON array");
  if (dump.empty()) warn("registry dump is empty");

  std::vector<RegistryRecord> records;
  records.reserve(dump.size());
  for (std::size_t i = 0; i < dump.size(); ++i) {
    const auto& org = dump[i];
    const std::string where = "registry entry " + std::to_string(i);
    if (!org.is_object()) throw RegistryError(where + " is not an object");
    RegistryRecord r;
    r.ror_id = json_string_or_empty(org, "id");
    if (r.ror_id.empty()) throw RegistryError(where + " has no id");

    if (auto names = org.find("names"); names != org.end() && names->is_array()) {
      std::string first_label;
      for (const auto& n : *names) {
        const auto value = json_string_or_empty(n, "value");
        if (value.empty()) continue;
        std::set<std::string> types;
        if (auto t = n.find("types"); t != n.end() && t->is_array()) {
          for (const auto& ty : *t) {
            if (ty.is_string()) types.insert(ty.get<std::string>());
          }
        }
        if (types.count("ror_display") && r.primary_name.empty()) {
          r.primary_name = value;
        } else if (types.count("acronym")) {
          r.acronyms.push_back(value);
        } else {
          if (types.count("label") && first_label.empty()) first_label = value;
          r.aliases.push_back(value);
        }
      }
      if (r.primary_name.empty() && !first_label.empty()) {
        r.primary_name = first_label;
        std::erase(r.aliases, first_label);
      }
    } else {
      r.primary_name = json_string_or_empty(org, "name");
      if (auto a = org.find("aliases"); a != org.end() && a->is_array()) {
        for (const auto& v : *a) {
          if (v.is_string()) r.aliases.push_back(v.get<std::string>());
        }
      }
      if (auto a = org.find("acronyms"); a != org.end() && a->is_array()) {
        for (const auto& v : *a) {
          if (v.is_string()) r.acronyms.push_back(v.get<std::string>());
        }
      }
      if (auto l = org.find("labels"); l != org.end() && l->is_array()) {
        for (const auto& v : *l) {
          const auto label = json_string_or_empty(v, "label");
          if (!label.empty()) r.aliases.push_back(label);
        }
      }
    }
    if (r.primary_name.empty()) throw RegistryError(where + " (" + r.ror_id + ") has no name");

    std::optional<InstType> type;
    if (auto t = org.find("types"); t != org.end() && t->is_array()) {
      for (const auto& v : *t) {
        if (v.is_string() && (type = parse_inst_type(v.get<std::string>()))) break;
      }
    }
    if (!type) warn(r.ror_id + ": missing or unknown type, loaded as Other");
    r.inst_type = type.value_or(InstType::Other);

    if (auto c = org.find("country"); c != org.end()) {
      if (c->is_string()) {
        r.country = c->get<std::string>();
      } else if (c->is_object()) {
        r.country = json_string_or_empty(*c, "country_code");
      }
    } else if (auto locs = org.find("locations"); locs != org.end() && locs->is_array()) {
      for (const auto& loc : *locs) {
        if (auto g = loc.find("geonames_details"); g != loc.end() && g->is_object()) {
          r.country = json_string_or_empty(*g, "country_code");
          if (!r.country.empty()) break;
        }
      }
    }
    records.push_back(std::move(r));
  }
  return Registry(std::move(records));
}

Registry load_registry(const std::filesystem::path& dump_file, std::vector<std::string>* warnings) {
  std::ifstream in(dump_file, std::ios::binary);
  if (!in) throw RegistryError("cannot open registry dump " + dump_file.string());
  nlohmann::json dump;
  try {
    dump = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw RegistryError("invalid registry dump " + dump_file.string() + ": " + e.what());
  }
  return parse_registry_dump(dump, warnings);
}

std::string clean_affiliation(std::string_view raw) {
  std::string out;
  for (auto seg : text::split(raw, ',')) {
    seg = text::trim(seg);
    if (seg.empty() || drop_segment(seg)) continue;
    if (!out.empty()) out += ", ";
    out += seg;
  }
  return out;
}

std::vector<Candidate> generate_candidates(std::string_view cleaned, const Registry& registry,
                                           std::size_t k) {
  std::vector<Candidate> out;
  if (k == 0 || registry.empty()) return out;
  const auto query = distinct_tokens(cleaned);

  std::unordered_map<std::uint32_t, double> acc;
  double total = 0.0;
  for (const auto& t : query) {
    const double w = registry.idf(t);
    total += w;
    for (auto idx : registry.postings(t)) acc[idx] += w;
  }
  std::unordered_map<std::uint32_t, double> scores;
  if (total > 0.0) {
    for (const auto& [idx, w] : acc) scores[idx] = w / total;
  }
  for (const auto& word : raw_words(cleaned)) {
    for (auto idx : registry.acronym_matches(word)) scores[idx] = 1.0;
  }

  out.reserve(scores.size());
  for (const auto& [idx, s] : scores) {
    out.push_back({registry.at(idx).ror_id, idx, std::min(s, 1.0)});
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.prefilter != b.prefilter) return a.prefilter > b.prefilter;
    return a.ror_id < b.ror_id;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

double token_set_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string_view> sa(a.begin(), a.end());
  std::set<std::string_view> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double score_candidate(std::string_view cleaned, const RegistryRecord& record) {
  std::vector<std::vector<std::string>> names;
  bool exact = false;
  for_each_name(record, [&](const std::string& name) {
    if (text::equals_ci(text::trim(cleaned), text::trim(name))) exact = true;
    names.push_back(text::word_tokens(name));
  });
  if (exact) return 1.0;

  std::vector<std::vector<std::string>> segments;
  for (auto seg : text::split(cleaned, ',')) {
    auto tokens = text::word_tokens(seg);
    if (!tokens.empty()) segments.push_back(std::move(tokens));
  }

  double best = 0.0;
  std::vector<std::string> span;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    span.clear();
    for (std::size_t j = i; j < segments.size(); ++j) {
      span.insert(span.end(), segments[j].begin(), segments[j].end());
      for (const auto& name : names) best = std::max(best, token_set_similarity(span, name));
      if (best == 1.0) return best;
    }
  }
  return best;
}

LinkResult link_affiliation(std::string_view raw, const Registry& registry, double threshold,
                            std::size_t k) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ConfigError("link threshold must be in (0, 1], got " + std::to_string(threshold));
  }
  LinkResult result;
  result.input_raw = std::string(raw);
  result.input_cleaned = clean_affiliation(raw);

  struct Scored {
    std::uint32_t index;
    double score;
    bool primary_exact;
    double prefilter;
  };
  std::vector<Scored> scored;
  for (const auto& c : generate_candidates(result.input_cleaned, registry, k)) {
    scored.push_back({c.index, score_candidate(result.input_cleaned, registry.at(c.index)), false,
                      c.prefilter});
  }
  for (auto idx : registry.exact_name_matches(raw)) {
    const bool primary = text::equals_ci(text::collapse_whitespace(raw),
                                         text::collapse_whitespace(registry.at(idx).primary_name));
    auto it = std::find_if(scored.begin(), scored.end(),
                           [&](const Scored& s) { return s.index == idx; });
    if (it == scored.end()) {
      scored.push_back({idx, 1.0, primary, 1.0});
    } else {
      it->score = 1.0;
      it->primary_exact = primary;
    }
  }
  if (scored.empty()) return result;

  const auto best = std::min_element(scored.begin(), scored.end(), [&](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.primary_exact != b.primary_exact) return a.primary_exact;
    if (a.prefilter != b.prefilter) return a.prefilter > b.prefilter;
    return registry.at(a.index).ror_id < registry.at(b.index).ror_id;
  });
  result.score = best->score;
  if (best->score >= threshold) result.ror_id = registry.at(best->index).ror_id;
  return result;
}

nlohmann::json to_json(const LinkResult& result, const Registry* registry) {
  nlohmann::json j = {{"input_raw", result.input_raw},
                      {"input_cleaned", result.input_cleaned},
                      {"status", result.linked() ? "linked" : "unlinked"},
                      {"score", result.score}};
  if (result.linked()) {
    j["ror_id"] = *result.ror_id;
    if (registry) {
      if (const auto* rec = registry->find(*result.ror_id)) {
        j["name"] = rec->primary_name;
        j["inst_type"] = to_string(rec->inst_type);
      }
    }
  }
  return j;
}

LinkReportEntry link_entry_from_json(const nlohmann::json& j) {
  try {
    LinkReportEntry e;
    e.result.input_raw = j.at("input_raw").get<std::string>();
    e.result.input_cleaned = j.at("input_cleaned").get<std::string>();
    e.result.score = j.at("score").get<double>();
    const auto status = j.at("status").get<std::string>();
    if (status == "linked") {
      e.result.ror_id = j.at("ror_id").get<std::string>();
      e.name = j.value("name", std::string());
      if (auto t = j.find("inst_type"); t != j.end()) {
        e.inst_type = parse_inst_type(t->get<std::string>());
        if (!e.inst_type) throw Error("unknown inst_type '" + t->get<std::string>() + "'");
      }
    } else if (status != "unlinked") {
      throw Error("unknown link status '" + status + "'");
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("invalid link report entry: ") + ex.what());
  }
}

}  // namespace collabmap::link
