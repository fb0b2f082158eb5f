#include "collabmap/inst_class.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "collabmap/csv.hpp"
#include "collabmap/metrics.hpp"
#include "collabmap/text.hpp"

namespace collabmap::instclass {

std::string_view to_string(Side s) { return s == Side::Industry ? "industry" : "academia"; }

std::string_view to_string(Vote v) {
  switch (v) {
    case Vote::Academia: return "academia";
    case Vote::Industry: return "industry";
    case Vote::Abstain: return "abstain";
  }
  return "abstain";
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::RegistryType: return "registry_type";
    case Provenance::EnsembleUnanimous: return "ensemble_unanimous";
    case Provenance::Manual: return "manual";
  }
  return "manual";
}

std::optional<Side> parse_side(std::string_view s) {
  s = text::trim(s);
  if (text::equals_ci(s, "academia")) return Side::Academia;
  if (text::equals_ci(s, "industry")) return Side::Industry;
  return std::nullopt;
}

std::optional<Vote> parse_vote(std::string_view s) {
  if (auto side = parse_side(s)) return to_vote(*side);
  if (text::equals_ci(text::trim(s), "abstain")) return Vote::Abstain;
  return std::nullopt;
}

std::optional<Provenance> parse_provenance(std::string_view s) {
  for (auto p : {Provenance::RegistryType, Provenance::EnsembleUnanimous, Provenance::Manual}) {
    if (text::equals_ci(text::trim(s), to_string(p))) return p;
  }
  return std::nullopt;
}

Vote to_vote(Side s) { return s == Side::Industry ? Vote::Industry : Vote::Academia; }

bool Votes::unanimous() const {
  return keyword != Vote::Abstain && keyword == domain && domain == model;
}

Side classify_by_registry_type(link::InstType type) {
  return type == link::InstType::Company ? Side::Industry : Side::Academia;
}

std::string institution_key(const link::LinkResult& result) {
  if (result.ror_id) return *result.ror_id;
  if (!result.input_cleaned.empty()) return result.input_cleaned;
  return text::collapse_whitespace(result.input_raw);
}

std::string labeled_list_key(std::string_view name) {
  return text::to_lower_ascii(text::collapse_whitespace(name));
}

LabeledList read_labeled_list(std::istream& in) {
  const auto rows = csv::read(in);
  if (rows.empty() || rows[0].fields.size() != 2 || text::trim(rows[0].fields[0]) != "name" ||
      text::trim(rows[0].fields[1]) != "label") {
    throw Error("labeled list must start with header \"name,label\"");
  }
  LabeledList list;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.fields.size() != 2) {
      throw Error("labeled list line " + std::to_string(row.line) + ": expected 2 fields");
    }
    const auto side = parse_side(row.fields[1]);
    if (!side) {
      throw Error("labeled list line " + std::to_string(row.line) + ": unknown label '" +
                  row.fields[1] + "'");
    }
    list[labeled_list_key(row.fields[0])] = *side;
  }
  return list;
}

Side keyword_classify(std::string_view cleaned, const LabeledList& labeled_list) {
  if (auto it = labeled_list.find(labeled_list_key(cleaned)); it != labeled_list.end()) {
    return it->second;
  }
  for (auto kw : kAcademicKeywords) {
    if (text::contains_ci(cleaned, kw)) return Side::Academia;
  }
  return Side::Industry;
}

FixtureResolver::FixtureResolver(std::map<std::string, std::vector<std::string>> answers)
    : answers_(std::move(answers)) {}

std::map<std::string, std::vector<std::string>> FixtureResolver::parse_map(const nlohmann::json& j) {
  if (!j.is_object()) throw ResolverError("resolver fixture must be a JSON object");
  std::map<std::string, std::vector<std::string>> answers;
  for (const auto& [query, urls] : j.items()) {
    if (!urls.is_array()) throw ResolverError("resolver fixture entry '" + query + "' is not a list");
    auto& out = answers[query];
    for (const auto& u : urls) {
      if (!u.is_string()) throw ResolverError("resolver fixture entry '" + query + "' has a non-string URL");
      out.push_back(u.get<std::string>());
    }
  }
  return answers;
}

FixtureResolver FixtureResolver::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResolverError("cannot open resolver fixture " + path.string());
  try {
    return FixtureResolver(parse_map(nlohmann::json::parse(in)));
  } catch (const nlohmann::json::exception& e) {
    throw ResolverError("invalid resolver fixture " + path.string() + ": " + e.what());
  }
}

std::vector<std::string> FixtureResolver::search(const std::string& query) {
  auto it = answers_.find(query);
  if (it == answers_.end()) throw ResolverError("no fixture answer for query '" + query + "'");
  return it->second;
}

CachingResolver::CachingResolver(std::filesystem::path cache_file, WebResolver* upstream)
    : cache_file_(std::move(cache_file)), upstream_(upstream) {
  if (std::filesystem::exists(cache_file_)) {
    std::ifstream in(cache_file_, std::ios::binary);
    try {
      cache_ = FixtureResolver::parse_map(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw ResolverError("invalid resolver cache " + cache_file_.string() + ": " + e.what());
    }
  }
}

std::vector<std::string> CachingResolver::search(const std::string& query) {
  if (auto it = cache_.find(query); it != cache_.end()) return it->second;
  if (!upstream_) throw ResolverError("query '" + query + "' not cached and no upstream resolver");
  auto urls = upstream_->search(query);
  cache_[query] = urls;
  return urls;
}

void CachingResolver::save() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [q, urls] : cache_) j[q] = urls;
  auto tmp = cache_file_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ResolverError("cannot write resolver cache " + tmp.string());
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, cache_file_);
}

std::string url_hostname(std::string_view url) {
  url = text::trim(url);
  if (auto scheme = url.find("://"); scheme != std::string_view::npos) {
    url.remove_prefix(scheme + 3);
  } else if (url.starts_with("//")) {
    url.remove_prefix(2);
  }
  url = url.substr(0, url.find_first_of("/?#"));
  if (auto at = url.rfind('@'); at != std::string_view::npos) url.remove_prefix(at + 1);
  if (url.starts_with('[')) return text::to_lower_ascii(url.substr(0, url.find(']') + 1));
  url = url.substr(0, url.find(':'));
  while (url.ends_with('.')) url.remove_suffix(1);
  return text::to_lower_ascii(url);
}

Vote domain_classify(std::string_view cleaned, WebResolver& resolver) {
  std::vector<std::string> urls;
  try {
    urls = resolver.search(std::string(cleaned));
  } catch (const ResolverError&) {
    return Vote::Abstain;
  }
  const std::size_t n = std::min<std::size_t>(urls.size(), 3);
  for (std::size_t i = 0; i < n; ++i) {
    const auto host = url_hostname(urls[i]);
    for (auto label : text::split(host, '.')) {
      if (label == "edu" || label == "ac" || label == "gov") return Vote::Academia;
    }
  }
  return Vote::Industry;
}

std::vector<std::string> institution_features(std::string_view cleaned) {
  std::vector<std::string> features;
  for (const auto& tok : text::word_tokens(cleaned)) {
    features.push_back("w:" + tok);
    const std::string padded = "^" + tok + "$";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      features.push_back("c:" + padded.substr(i, 3));
    }
  }
  return features;
}

learn::SparseVector featurize_institution(std::string_view cleaned, std::uint32_t dimension) {
  return learn::hashed_vector(institution_features(cleaned), dimension);
}

nlohmann::json TypeModel::to_json() const {
  return {{"format", "collabmap-type-model"},
          {"version", 1},
          {"dimension", dimension()},
          {"seed", seed},
          {"metrics", {{"validation_auc", validation_auc}, {"test_auc", test_auc}, {"best_epoch", best_epoch}}},
          {"sizes", {{"train", train_size}, {"validation", validation_size}, {"test", test_size}}},
          {"linear", linear.to_json()}};
}

TypeModel TypeModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "collabmap-type-model") throw Error("not a type model file");
    if (j.at("version") != 1) throw Error("unsupported type model version");
    TypeModel m;
    m.linear = learn::LinearModel::from_json(j.at("linear"));
    if (m.linear.dimension() != j.at("dimension").get<std::uint32_t>()) {
      throw Error("type model dimension mismatch");
    }
    m.seed = j.at("seed").get<std::uint64_t>();
    m.validation_auc = j.at("metrics").at("validation_auc").get<double>();
    m.test_auc = j.at("metrics").at("test_auc").get<double>();
    m.best_epoch = j.at("metrics").at("best_epoch").get<int>();
    m.train_size = j.at("sizes").at("train").get<std::size_t>();
    m.validation_size = j.at("sizes").at("validation").get<std::size_t>();
    m.test_size = j.at("sizes").at("test").get<std::size_t>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid type model: ") + e.what());
  }
}

void TypeModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write model file " + path.string());
  out << to_json().dump() << '\n';
}

TypeModel TypeModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("invalid model file " + path.string() + ": " + e.what());
  }
}

std::vector<LabeledName> registry_training_pairs(const link::Registry& registry) {
  std::vector<LabeledName> pairs;
  pairs.reserve(registry.size());
  for (const auto& r : registry.records()) {
    pairs.push_back({r.primary_name, classify_by_registry_type(r.inst_type)});
  }
  return pairs;
}

namespace {

double auc_of(const learn::LinearModel& model, std::span<const learn::Example> data) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(data.size());
  labels.reserve(data.size());
  for (const auto& ex : data) {
    scores.push_back(model.margin(ex.features));
    labels.push_back(ex.label);
  }
  return metrics::roc_auc(scores, labels);
}

}  // namespace

TypeModel train_type_model(std::span<const LabeledName> pairs, std::uint64_t seed,
                           std::uint32_t dimension) {
  std::vector<int> labels;
  labels.reserve(pairs.size());
  for (const auto& p : pairs) labels.push_back(p.label == Side::Industry ? 1 : 0);
  const auto n_ind = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (n_ind == 0 || n_ind == labels.size()) {
    throw Error("type model training needs both academia and industry examples");
  }

  const auto split = learn::stratified_split_indices(labels, {0.8, 0.1, 0.1}, seed);
  auto examples = [&](const std::vector<std::size_t>& idx) {
    std::vector<learn::Example> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back({featurize_institution(pairs[i].text, dimension), labels[i]});
    return out;
  };
  const auto train = examples(split.train);
  const auto val = examples(split.validation);
  const auto test = examples(split.test);
  auto has_both = [](const std::vector<learn::Example>& v) {
    bool pos = false, neg = false;
    for (const auto& e : v) (e.label ? pos : neg) = true;
    return pos && neg;
  };
  if (!has_both(train) || !has_both(val) || !has_both(test)) {
    throw Error("too few examples: every split needs both classes (have " +
                std::to_string(n_ind) + " industry of " + std::to_string(pairs.size()) + ")");
  }

  learn::TrainOptions options;
  options.seed = seed;
  const auto fit = learn::train_logistic(
      train, dimension, [&](const learn::LinearModel& m) { return auc_of(m, val); }, options);

  TypeModel model;
  model.linear = fit.model;
  model.seed = seed;
  model.validation_auc = fit.best_validation;
  model.test_auc = auc_of(fit.model, test);
  model.best_epoch = fit.best_epoch;
  model.train_size = train.size();
  model.validation_size = val.size();
  model.test_size = test.size();
  return model;
}

ModelVerdict model_classify(std::string_view cleaned, const TypeModel& model) {
  const double score = model.linear.probability(featurize_institution(cleaned, model.dimension()));
  return {score >= 0.5 ? Side::Industry : Side::Academia, score};
}

EnsembleOutcome ensemble_classify(std::string_view cleaned, const LabeledList& labeled_list,
                                  WebResolver& resolver, const TypeModel& model) {
  Votes votes;
  votes.keyword = to_vote(keyword_classify(cleaned, labeled_list));
  votes.domain = domain_classify(cleaned, resolver);
  votes.model = to_vote(model_classify(cleaned, model).label);
  if (votes.unanimous()) {
    InstitutionLabel label;
    label.institution_key = std::string(cleaned);
    label.label = votes.keyword == Vote::Industry ? Side::Industry : Side::Academia;
    label.provenance = Provenance::EnsembleUnanimous;
    label.votes = votes;
    label.display_name = std::string(cleaned);
    return label;
  }
  return ReviewItem{std::string(cleaned), votes, std::nullopt};
}

void export_review_queue(std::ostream& out, std::span<const ReviewItem> items) {
  out << kReviewHeader << '\n';
  for (const auto& item : items) {
    csv::write_row(out, {item.institution_key, to_string(item.votes.keyword),
                         to_string(item.votes.domain), to_string(item.votes.model),
                         item.resolved_label ? to_string(*item.resolved_label) : std::string_view{}});
  }
}

namespace {

void check_header(const std::vector<csv::Row>& rows, std::string_view expected, const char* what) {
  std::vector<std::string> want;
  for (auto f : text::split(expected, ',')) want.emplace_back(f);
  if (rows.empty() || rows[0].fields != want) {
    throw Error(std::string(what) + " must start with header \"" + std::string(expected) + "\"");
  }
}

}  // namespace

ReviewImport import_review_labels(std::istream& in) {
  const auto rows = csv::read(in);
  check_header(rows, kReviewHeader, "review queue");
  ReviewImport result;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    const std::size_t row = i;
    if (f.size() != 5) {
      throw ReviewImportError("review row " + std::to_string(row) + ": expected 5 fields, got " +
                                  std::to_string(f.size()),
                              row);
    }
    Votes votes;
    Vote* slots[] = {&votes.keyword, &votes.domain, &votes.model};
    for (int k = 0; k < 3; ++k) {
      auto v = parse_vote(f[static_cast<std::size_t>(k + 1)]);
      if (!v) {
        throw ReviewImportError("review row " + std::to_string(row) + ": unknown vote '" +
                                    f[static_cast<std::size_t>(k + 1)] + "'",
                                row);
      }
      *slots[k] = *v;
    }
    if (text::trim(f[4]).empty()) {
      result.unresolved_rows.push_back(row);
      result.unresolved.push_back({f[0], votes, std::nullopt});
      continue;
    }
    const auto side = parse_side(f[4]);
    if (!side) {
      throw ReviewImportError("review row " + std::to_string(row) + ": unknown label '" + f[4] + "'",
                              row);
    }
    result.labels.push_back({f[0], *side, Provenance::Manual, votes, f[0]});
  }
  return result;
}

void write_labels_csv(std::ostream& out, std::span<const InstitutionLabel> labels) {
  out << kLabelsHeader << '\n';
  for (const auto& l : labels) {
    const auto vote = [&](Vote Votes::*m) {
      return l.votes ? to_string((*l.votes).*m) : std::string_view{};
    };
    csv::write_row(out, {l.institution_key, to_string(l.label), to_string(l.provenance),
                         vote(&Votes::keyword), vote(&Votes::domain), vote(&Votes::model),
                         l.display_name});
  }
}

std::vector<InstitutionLabel> read_labels_csv(std::istream& in) {
  const auto rows = csv::read(in);
  check_header(rows, kLabelsHeader, "labels file");
  std::vector<InstitutionLabel> labels;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    const auto where = "labels line " + std::to_string(rows[i].line);
    if (f.size() != 7) throw Error(where + ": expected 7 fields");
    InstitutionLabel l;
    l.institution_key = f[0];
    const auto side = parse_side(f[1]);
    const auto prov = parse_provenance(f[2]);
    if (!side) throw Error(where + ": unknown label '" + f[1] + "'");
    if (!prov) throw Error(where + ": unknown provenance '" + f[2] + "'");
    l.label = *side;
    l.provenance = *prov;
    if (!f[3].empty() || !f[4].empty() || !f[5].empty()) {
      Votes v;
      auto k = parse_vote(f[3]), d = parse_vote(f[4]), m = parse_vote(f[5]);
      if (!k || !d || !m) throw Error(where + ": bad vote triple");
      v.keyword = *k;
      v.domain = *d;
      v.model = *m;
      l.votes = v;
    }
    if (l.provenance == Provenance::EnsembleUnanimous &&
        !(l.votes && l.votes->unanimous() && l.votes->keyword == to_vote(l.label))) {
      throw Error(where + ": ensemble_unanimous label without matching unanimous votes");
    }
    if (l.provenance == Provenance::RegistryType && l.votes) {
      throw Error(where + ": registry_type label must not carry votes");
    }
    l.display_name = f[6];
    labels.push_back(std::move(l));
  }
  return labels;
}

}  // namespace collabmap::instclass
