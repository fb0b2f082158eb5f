#include "collabmap/pipeline.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "collabmap/content.hpp"
#include "collabmap/csv.hpp"
#include "collabmap/inst_class.hpp"
#include "collabmap/text.hpp"

namespace collabmap::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Configuration

void PipelineConfig::validate() const {
  if (!(link_threshold > 0.0 && link_threshold <= 1.0)) {
    throw ConfigError("link_threshold must be in (0, 1], got " + std::to_string(link_threshold));
  }
  if (candidate_k == 0) throw ConfigError("candidate_k must be at least 1");
  if (top_k == 0 || yearly_top_k == 0) throw ConfigError("top_k and yearly_top_k must be at least 1");
  if (type_model_dimension < 2 || content_dimension < 2) {
    throw ConfigError("feature dimensions must be at least 2");
  }
  for (double r : split_ratios) {
    if (!(r >= 0.0)) throw ConfigError("split ratios must be non-negative");
  }
  if (split_ratios[0] + split_ratios[1] + split_ratios[2] <= 0.0) {
    throw ConfigError("split ratios must have a positive sum");
  }
  analytics::parse_graph_format(network_format);
  if (year && (*year < corpus::kMinYear || *year > corpus::kMaxYear)) {
    throw ConfigError("year must be within [1900, 2100]");
  }
}

ordered_json PipelineConfig::to_json() const {
  ordered_json j;
  j["inputs"] = inputs;
  j["corpus"] = corpus;
  j["registry"] = registry;
  j["links"] = links;
  j["labels"] = labels;
  j["labeled_list"] = labeled_list;
  j["resolver_fixture"] = resolver_fixture;
  j["resolver_cache"] = resolver_cache;
  j["type_model"] = type_model;
  j["review_labels"] = review_labels;
  j["votes"] = votes;
  j["out_dir"] = out_dir;
  j["link_threshold"] = link_threshold;
  j["candidate_k"] = candidate_k;
  j["type_model_seed"] = type_model_seed;
  j["type_model_dimension"] = type_model_dimension;
  j["content_seed"] = content_seed;
  j["content_dimension"] = content_dimension;
  j["split_ratios"] = split_ratios;
  j["network_min_weight"] = network_min_weight;
  j["network_format"] = network_format;
  j["top_k"] = top_k;
  j["yearly_top_k"] = yearly_top_k;
  j["venue"] = venue ? ordered_json(*venue) : ordered_json(nullptr);
  j["year"] = year ? ordered_json(*year) : ordered_json(nullptr);
  j["skip_errors"] = skip_errors;
  return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j, PipelineConfig c) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  const std::set<std::string> known = [] {
    std::set<std::string> k;
    const auto defaults = PipelineConfig{}.to_json();
    for (const auto& [key, v] : defaults.items()) k.insert(key);
    return k;
  }();
  try {
    for (const auto& [key, v] : j.items()) {
      if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    auto get = [&](const char* key, auto& field) {
      if (auto it = j.find(key); it != j.end()) it->get_to(field);
    };
    get("inputs", c.inputs);
    get("corpus", c.corpus);
    get("registry", c.registry);
    get("links", c.links);
    get("labels", c.labels);
    get("labeled_list", c.labeled_list);
    get("resolver_fixture", c.resolver_fixture);
    get("resolver_cache", c.resolver_cache);
    get("type_model", c.type_model);
    get("review_labels", c.review_labels);
    get("votes", c.votes);
    get("out_dir", c.out_dir);
    get("link_threshold", c.link_threshold);
    get("candidate_k", c.candidate_k);
    get("type_model_seed", c.type_model_seed);
    get("type_model_dimension", c.type_model_dimension);
    get("content_seed", c.content_seed);
    get("content_dimension", c.content_dimension);
    get("split_ratios", c.split_ratios);
    get("network_min_weight", c.network_min_weight);
    get("network_format", c.network_format);
    get("top_k", c.top_k);
    get("yearly_top_k", c.yearly_top_k);
    get("skip_errors", c.skip_errors);
    if (auto it = j.find("venue"); it != j.end()) {
      c.venue = it->is_null() ? std::nullopt : std::optional<std::string>(it->get<std::string>());
    }
    if (auto it = j.find("year"); it != j.end()) {
      c.year = it->is_null() ? std::nullopt : std::optional<int>(it->get<int>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) { return from_json(j, PipelineConfig{}); }

std::string PipelineConfig::hash() const { return text::hex64(text::fnv1a64(to_json().dump())); }

// ---------------------------------------------------------------------------
// Artifact bookkeeping

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ifstream open_input(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(std::string("cannot open ") + what + " " + path.string());
  return in;
}

const std::string& require(const std::string& value, const char* flag, std::string_view command) {
  if (value.empty()) {
    throw UsageError(std::string(command) + ": --" + flag + " is required");
  }
  return value;
}

// Writes artifacts into the output directory and, on finish(), the
// effective config and a manifest with a content hash per artifact.
class ArtifactWriter {
 public:
  ArtifactWriter(const PipelineConfig& config, std::string command)
      : config_(config), command_(std::move(command)), dir_(config.out_dir) {
    fs::create_directories(dir_);
  }

  ordered_json provenance() const {
    return {{"tool", kToolName}, {"version", kToolVersion}, {"command", command_},
            {"config_hash", config_.hash()}};
  }

  std::string banner() const {
    return std::string(kToolName) + " " + std::string(kToolVersion) + " " + command_ +
           " config " + config_.hash();
  }

  fs::path write(const std::string& filename, const std::string& content) {
    const auto path = dir_ / filename;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("failed writing " + path.string());
    manifest_.push_back({{"file", filename}, {"fnv1a64", text::hex64(text::fnv1a64(content))},
                         {"bytes", content.size()}});
    result_.artifacts.push_back(path);
    return path;
  }

  void warn(std::string message) { result_.warnings.push_back(std::move(message)); }

  CommandResult finish(std::string summary) {
    ordered_json manifest = provenance();
    manifest["summary"] = summary;
    manifest["warnings"] = result_.warnings;
    manifest["artifacts"] = manifest_;
    const auto config_path = dir_ / (command_ + ".effective_config.json");
    std::ofstream(config_path, std::ios::binary | std::ios::trunc) << config_.to_json().dump(2) << '\n';
    std::ofstream(dir_ / (command_ + ".manifest.json"), std::ios::binary | std::ios::trunc)
        << manifest.dump(2) << '\n';
    result_.summary = std::move(summary);
    return result_;
  }

 private:
  const PipelineConfig& config_;
  std::string command_;
  fs::path dir_;
  ordered_json manifest_ = ordered_json::array();
  CommandResult result_;
};

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Loaders

std::vector<corpus::PaperRecord> load_corpus(const fs::path& path) {
  auto in = open_input(path, "corpus");
  return corpus::parse_jsonl_corpus(in);
}

std::vector<link::LinkReportEntry> load_links(const fs::path& path) {
  auto in = open_input(path, "link report");
  std::vector<link::LinkReportEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      entries.push_back(link::link_entry_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw Error(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return entries;
}

analytics::InstitutionDirectory load_directory(const fs::path& links, const fs::path& labels) {
  analytics::InstitutionDirectory dir;
  for (const auto& e : load_links(links)) {
    auto key = instclass::institution_key(e.result);
    if (!key.empty()) dir.add_affiliation(e.result.input_raw, std::move(key));
  }
  auto in = open_input(labels, "labels");
  for (auto& l : instclass::read_labels_csv(in)) dir.add_label(std::move(l));
  return dir;
}

std::pair<std::optional<std::string>, std::optional<int>> infer_venue_year(const fs::path& tei_file) {
  const auto year_dir = tei_file.parent_path();
  const auto name = year_dir.filename().string();
  if (name.size() != 4 || name.find_first_not_of("0123456789") != std::string::npos) return {};
  const int year = std::stoi(name);
  if (year < corpus::kMinYear || year > corpus::kMaxYear) return {};
  const auto venue = year_dir.parent_path().filename().string();
  return {venue.empty() ? std::nullopt : std::optional<std::string>(venue), year};
}

// ---------------------------------------------------------------------------
// ingest

CommandResult run_ingest(const PipelineConfig& config) {
  config.validate();
  if (config.inputs.empty()) throw UsageError("ingest: no inputs given");

  std::vector<fs::path> files;
  for (const auto& input : config.inputs) {
    const fs::path p(input);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::recursive_directory_iterator(p)) {
        const auto s = entry.path().filename().string();
        if (entry.is_regular_file() && (ends_with(s, ".tei.xml") || ends_with(s, ".jsonl"))) {
          found.push_back(entry.path());
        }
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      throw UsageError("ingest: input not found: " + input);
    }
  }

  ArtifactWriter writer(config, "ingest");
  std::vector<corpus::PaperRecord> records;
  std::map<std::string, std::string> seen;  // paper_id -> source
  std::ostringstream errors;
  std::size_t skipped = 0;

  auto fail = [&](const fs::path& source, std::size_t line, const std::string& message,
                  std::optional<std::size_t> byte_offset) {
    if (!config.skip_errors) {
      const auto what = source.generic_string() + (line ? ":" + std::to_string(line) : "") + ": " + message;
      if (byte_offset) throw corpus::ParseError(what, *byte_offset);
      if (line) throw corpus::CorpusError(what, line);
      throw Error(what);
    }
    ordered_json e = {{"source", source.generic_string()}};
    if (line) e["line"] = line;
    if (byte_offset) e["byte_offset"] = *byte_offset;
    e["error"] = message;
    errors << e.dump() << '\n';
    ++skipped;
  };

  auto accept = [&](corpus::PaperRecord rec, const fs::path& source, std::size_t line) {
    const auto report = corpus::validate_record(rec);
    if (!report.ok()) {
      std::string msg = "invalid record '" + rec.paper_id + "':";
      for (const auto& v : report.violations) msg += " " + v + ";";
      msg.pop_back();
      fail(source, line, msg, std::nullopt);
      return;
    }
    const std::string where = source.generic_string() + (line ? ":" + std::to_string(line) : "");
    auto [it, inserted] = seen.emplace(rec.paper_id, where);
    if (!inserted) {
      fail(source, line, "duplicate paper_id '" + rec.paper_id + "' (first seen at " + it->second + ")",
           std::nullopt);
      return;
    }
    records.push_back(std::move(rec));
  };

  for (const auto& file : files) {
    const auto name = file.filename().string();
    if (ends_with(name, ".jsonl")) {
      auto in = open_input(file, "corpus");
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        corpus::PaperRecord rec;
        try {
          rec = corpus::from_json(nlohmann::json::parse(line));
        } catch (const std::exception& e) {
          fail(file, line_no, e.what(), std::nullopt);
          continue;
        }
        accept(std::move(rec), file, line_no);
      }
      continue;
    }
    std::string id = name;
    if (ends_with(id, ".tei.xml")) id.resize(id.size() - 8);
    try {
      auto rec = corpus::parse_tei_document(read_file(file), id);
      auto [venue, year] = infer_venue_year(file);
      if (config.venue) venue = config.venue;
      if (config.year) year = config.year;
      rec.venue = corpus::Venue::parse(venue.value_or("unknown"));
      if (year) rec.year = *year;
      accept(std::move(rec), file, 0);
    } catch (const corpus::ParseError& e) {
      fail(file, 0, e.detail(), e.byte_offset());
    } catch (const corpus::IncompleteRecordError& e) {
      fail(file, 0, e.what(), std::nullopt);
    }
  }

  std::ostringstream out;
  corpus::write_jsonl(out, records);
  writer.write("corpus.jsonl", out.str());
  writer.write("ingest_errors.jsonl", errors.str());
  return writer.finish(std::to_string(records.size()) + " records ingested / " +
                       std::to_string(skipped) + " skipped");
}

// ---------------------------------------------------------------------------
// link

CommandResult run_link(const PipelineConfig& config) {
  config.validate();
  require(config.registry, "registry", "link");
  require(config.corpus, "corpus", "link");
  ArtifactWriter writer(config, "link");
  std::vector<std::string> warnings;
  const auto registry = link::load_registry(config.registry, &warnings);
  for (auto& w : warnings) writer.warn(std::move(w));
  const auto records = load_corpus(config.corpus);

  std::set<std::string> unique;
  for (const auto& r : records) {
    for (const auto& a : r.authors) {
      for (const auto& aff : a.affiliations) {
        if (!text::trim(aff).empty()) unique.insert(aff);
      }
    }
  }
  std::ostringstream out;
  std::size_t linked = 0;
  for (const auto& raw : unique) {
    const auto result = link::link_affiliation(raw, registry, config.link_threshold, config.candidate_k);
    linked += result.linked();
    out << link::to_json(result, &registry).dump() << '\n';
  }
  writer.write("links.jsonl", out.str());
  return writer.finish(std::to_string(linked) + " linked / " + std::to_string(unique.size() - linked) +
                       " unlinked");
}

// ---------------------------------------------------------------------------
// train-type-model

CommandResult run_train_type_model(const PipelineConfig& config) {
  config.validate();
  require(config.registry, "registry", "train-type-model");
  ArtifactWriter writer(config, "train-type-model");
  std::vector<std::string> warnings;
  const auto registry = link::load_registry(config.registry, &warnings);
  for (auto& w : warnings) writer.warn(std::move(w));
  const auto pairs = instclass::registry_training_pairs(registry);
  const auto model = instclass::train_type_model(pairs, config.type_model_seed, config.type_model_dimension);
  auto j = model.to_json();
  j["provenance"] = writer.provenance();
  writer.write("type_model.json", j.dump() + "\n");
  std::ostringstream summary;
  summary << "type model trained on " << model.train_size << " names; validation AUC "
          << model.validation_auc << ", test AUC " << model.test_auc;
  return writer.finish(summary.str());
}

// ---------------------------------------------------------------------------
// classify and manual review

namespace {

class UnavailableResolver : public instclass::WebResolver {
 public:
  std::vector<std::string> search(const std::string& query) override {
    throw instclass::ResolverError("no resolver configured for '" + query + "'");
  }
};

std::string labels_csv(const std::map<std::string, instclass::InstitutionLabel>& labels) {
  std::vector<instclass::InstitutionLabel> v;
  v.reserve(labels.size());
  for (const auto& [k, l] : labels) v.push_back(l);
  std::ostringstream out;
  instclass::write_labels_csv(out, v);
  return out.str();
}

std::string review_csv(const std::map<std::string, instclass::ReviewItem>& items) {
  std::vector<instclass::ReviewItem> v;
  v.reserve(items.size());
  for (const auto& [k, item] : items) v.push_back(item);
  std::ostringstream out;
  instclass::export_review_queue(out, v);
  return out.str();
}

std::map<std::string, instclass::InstitutionLabel> read_label_map(const fs::path& path) {
  auto in = open_input(path, "labels");
  std::map<std::string, instclass::InstitutionLabel> out;
  for (auto& l : instclass::read_labels_csv(in)) {
    auto key = l.institution_key;
    if (!out.emplace(std::move(key), std::move(l)).second) {
      throw Error("labels file " + path.string() + " labels '" + l.institution_key + "' twice");
    }
  }
  return out;
}

// Applies manual labels; registry-typed institutions keep their label.
std::size_t merge_manual(std::map<std::string, instclass::InstitutionLabel>& labels,
                         std::map<std::string, instclass::ReviewItem>* queue,
                         const std::vector<instclass::InstitutionLabel>& manual, ArtifactWriter& writer) {
  std::size_t applied = 0;
  for (const auto& m : manual) {
    auto it = labels.find(m.institution_key);
    if (it != labels.end() && it->second.provenance == instclass::Provenance::RegistryType) {
      writer.warn("manual label for registry-linked '" + m.institution_key + "' ignored");
      continue;
    }
    auto label = m;
    if (queue) {
      if (auto q = queue->find(m.institution_key); q != queue->end()) {
        label.votes = q->second.votes;
        queue->erase(q);
      }
    }
    labels.insert_or_assign(m.institution_key, std::move(label));
    ++applied;
  }
  return applied;
}

}  // namespace

CommandResult run_classify(const PipelineConfig& config) {
  config.validate();
  require(config.links, "links", "classify");
  ArtifactWriter writer(config, "classify");
  const auto entries = load_links(config.links);

  std::optional<link::Registry> registry;
  if (!config.registry.empty()) {
    std::vector<std::string> warnings;
    registry = link::load_registry(config.registry, &warnings);
  }

  // One decision per institution key; the first report entry supplies it.
  std::map<std::string, const link::LinkReportEntry*> by_key;
  std::size_t unlinked = 0;
  for (const auto& e : entries) {
    auto key = instclass::institution_key(e.result);
    if (key.empty()) continue;
    if (by_key.emplace(key, &e).second && !e.result.linked()) ++unlinked;
  }

  instclass::LabeledList labeled_list;
  if (!config.labeled_list.empty()) {
    auto in = open_input(config.labeled_list, "labeled list");
    labeled_list = instclass::read_labeled_list(in);
  }
  std::optional<instclass::TypeModel> model;
  if (unlinked > 0) {
    if (config.type_model.empty()) {
      throw Error("classify: " + std::to_string(unlinked) +
                  " unlinked institutions need a type model; run train-type-model and pass --type-model");
    }
    model = instclass::TypeModel::load(config.type_model);
  }
  std::optional<instclass::FixtureResolver> fixture;
  if (!config.resolver_fixture.empty()) {
    fixture = instclass::FixtureResolver::from_file(config.resolver_fixture);
  }
  std::optional<instclass::CachingResolver> cache;
  UnavailableResolver unavailable;
  instclass::WebResolver* resolver = fixture ? static_cast<instclass::WebResolver*>(&*fixture) : &unavailable;
  if (!config.resolver_cache.empty()) {
    cache.emplace(config.resolver_cache, fixture ? &*fixture : nullptr);
    resolver = &*cache;
  }

  std::map<std::string, instclass::InstitutionLabel> labels;
  std::map<std::string, instclass::ReviewItem> queue;
  std::map<std::string, instclass::ReviewItem> all_votes;
  std::size_t n_registry = 0, n_ensemble = 0;
  for (const auto& [key, entry] : by_key) {
    if (entry->result.linked()) {
      auto type = entry->inst_type;
      std::string name = entry->name;
      if (!type && registry) {
        if (const auto* rec = registry->find(key)) {
          type = rec->inst_type;
          name = rec->primary_name;
        }
      }
      if (!type) throw Error("classify: no institution type for linked '" + key + "'; pass --registry");
      labels.emplace(key, instclass::InstitutionLabel{key, instclass::classify_by_registry_type(*type),
                                                      instclass::Provenance::RegistryType, std::nullopt,
                                                      name.empty() ? key : name});
      ++n_registry;
      continue;
    }
    auto outcome = instclass::ensemble_classify(key, labeled_list, *resolver, *model);
    if (auto* label = std::get_if<instclass::InstitutionLabel>(&outcome)) {
      all_votes.emplace(key, instclass::ReviewItem{key, *label->votes, std::nullopt});
      labels.emplace(key, std::move(*label));
      ++n_ensemble;
    } else {
      auto& item = std::get<instclass::ReviewItem>(outcome);
      all_votes.emplace(key, item);
      queue.emplace(key, std::move(item));
    }
  }
  if (cache) cache->save();

  std::size_t n_manual = 0;
  if (!config.review_labels.empty()) {
    auto in = open_input(config.review_labels, "review labels");
    const auto imported = instclass::import_review_labels(in);
    n_manual = merge_manual(labels, &queue, imported.labels, writer);
  }

  writer.write("labels.csv", labels_csv(labels));
  writer.write("review_queue.csv", review_csv(queue));
  writer.write("ensemble_votes.csv", review_csv(all_votes));
  return writer.finish(std::to_string(labels.size()) + " labeled (" + std::to_string(n_registry) +
                       " registry, " + std::to_string(n_ensemble) + " ensemble, " +
                       std::to_string(n_manual) + " manual) / " + std::to_string(queue.size()) +
                       " queued for review");
}

CommandResult run_review_export(const PipelineConfig& config) {
  config.validate();
  require(config.votes, "votes", "review-export");
  require(config.labels, "labels", "review-export");
  ArtifactWriter writer(config, "review-export");
  const auto labels = read_label_map(config.labels);
  auto in = open_input(config.votes, "votes");
  const auto rows = instclass::import_review_labels(in);
  std::map<std::string, instclass::ReviewItem> pending;
  for (const auto& item : rows.unresolved) {
    if (!labels.count(item.institution_key)) pending.emplace(item.institution_key, item);
  }
  for (const auto& l : rows.labels) {
    if (!labels.count(l.institution_key)) {
      pending.emplace(l.institution_key, instclass::ReviewItem{l.institution_key, *l.votes, std::nullopt});
    }
  }
  writer.write("review_queue.csv", review_csv(pending));
  return writer.finish(std::to_string(pending.size()) + " institutions pending review");
}

CommandResult run_review_import(const PipelineConfig& config) {
  config.validate();
  require(config.labels, "labels", "review-import");
  require(config.review_labels, "review-labels", "review-import");
  ArtifactWriter writer(config, "review-import");
  auto labels = read_label_map(config.labels);
  auto in = open_input(config.review_labels, "review labels");
  const auto imported = instclass::import_review_labels(in);
  const auto applied = merge_manual(labels, nullptr, imported.labels, writer);
  std::map<std::string, instclass::ReviewItem> pending;
  for (const auto& item : imported.unresolved) {
    if (!labels.count(item.institution_key)) pending.emplace(item.institution_key, item);
  }
  if (!imported.unresolved_rows.empty()) {
    std::string rows;
    for (auto r : imported.unresolved_rows) rows += (rows.empty() ? "" : ",") + std::to_string(r);
    writer.warn("unresolved review rows: " + rows);
  }
  writer.write("labels.csv", labels_csv(labels));
  writer.write("review_queue.csv", review_csv(pending));
  return writer.finish(std::to_string(applied) + " manual labels imported / " +
                       std::to_string(pending.size()) + " still unresolved");
}

// ---------------------------------------------------------------------------
// analyze, network, content

namespace {

struct Analysis {
  std::vector<corpus::PaperRecord> records;
  analytics::InstitutionDirectory directory;
  std::vector<analytics::PaperClassification> classifications;
  std::size_t unresolved_affiliations = 0;
  std::size_t papers_with_gaps = 0;
};

Analysis analyze_corpus(const PipelineConfig& config, std::string_view command) {
  require(config.corpus, "corpus", command);
  require(config.links, "links", command);
  require(config.labels, "labels", command);
  Analysis a;
  a.records = load_corpus(config.corpus);
  a.directory = load_directory(config.links, config.labels);
  std::set<std::string> unresolved;
  a.classifications.reserve(a.records.size());
  for (const auto& r : a.records) {
    auto pc = analytics::label_paper(r, a.directory);
    if (!pc.unresolved.empty()) ++a.papers_with_gaps;
    unresolved.insert(pc.unresolved.begin(), pc.unresolved.end());
    a.classifications.push_back(std::move(pc));
  }
  a.unresolved_affiliations = unresolved.size();
  return a;
}

std::map<std::string, analytics::NodeInfo> node_info(const analytics::InstitutionDirectory& dir) {
  std::map<std::string, analytics::NodeInfo> nodes;
  for (const auto& [key, label] : dir.labels()) {
    nodes[key] = {label.display_name.empty() ? key : label.display_name, label.label};
  }
  return nodes;
}

std::string render_graph(std::span<const analytics::CoauthorEdge> edges, analytics::GraphFormat format,
                         const std::map<std::string, analytics::NodeInfo>& nodes,
                         const ArtifactWriter& writer) {
  std::ostringstream body;
  analytics::export_graph(body, edges, format, nodes);
  std::string s = body.str();
  switch (format) {
    case analytics::GraphFormat::GraphML: {
      const auto eol = s.find('\n');
      return s.substr(0, eol + 1) + "<!-- " + writer.banner() + " -->\n" + s.substr(eol + 1);
    }
    case analytics::GraphFormat::Dot:
      return "// " + writer.banner() + "\n" + s;
    case analytics::GraphFormat::Json: {
      auto j = ordered_json::parse(s);
      j["provenance"] = writer.provenance();
      return j.dump(2) + "\n";
    }
  }
  return s;
}

ordered_json row_json(const analytics::YearRow& row) {
  ordered_json counts;
  counts["total"] = row.total;
  for (auto b : analytics::kBuckets) counts[std::string(to_string(b))] = row.buckets[static_cast<std::size_t>(b)];
  ordered_json proportions = nullptr;
  if (row.proportions) {
    proportions = {{"academia_only", (*row.proportions)[0]},
                   {"industry_only", (*row.proportions)[1]},
                   {"collaborative", (*row.proportions)[2]}};
  }
  ordered_json fa_counts;
  for (auto t : analytics::kFirstAuthorTypes) {
    fa_counts[std::string(to_string(t))] = row.first_author[static_cast<std::size_t>(t)];
  }
  ordered_json fa_props = nullptr;
  if (row.first_author_proportions) {
    fa_props = {{"academia", (*row.first_author_proportions)[0]},
                {"industry", (*row.first_author_proportions)[1]},
                {"dual", (*row.first_author_proportions)[2]}};
  }
  return {{"counts", counts},
          {"proportions", proportions},
          {"first_author", {{"counts", fa_counts}, {"proportions", fa_props}}}};
}

std::string fmt_opt(const std::optional<std::array<double, 3>>& v, std::size_t i) {
  if (!v) return "";
  return ordered_json((*v)[i]).dump();
}

}  // namespace

CommandResult run_analyze(const PipelineConfig& config) {
  config.validate();
  ArtifactWriter writer(config, "analyze");
  const auto a = analyze_corpus(config, "analyze");
  if (a.unresolved_affiliations > 0) {
    writer.warn(std::to_string(a.unresolved_affiliations) + " affiliation strings without a label on " +
                std::to_string(a.papers_with_gaps) + " papers");
  }
  const auto stats = analytics::yearly_stats(a.classifications, a.records);

  using instclass::Side;
  const auto top_academia = analytics::top_institutions(a.classifications, a.records, {Side::Academia, config.top_k, {}});
  const auto top_industry = analytics::top_institutions(a.classifications, a.records, {Side::Industry, config.top_k, {}});

  // rankings.csv
  std::ostringstream rankings;
  csv::write_row(rankings, {"rank", "side", "institution", "papers"});
  ordered_json rank_json = ordered_json::object();
  for (const auto* list : {&top_academia, &top_industry}) {
    const std::string side = list == &top_academia ? "academia" : "industry";
    rank_json[side] = ordered_json::array();
    for (std::size_t i = 0; i < list->size(); ++i) {
      const auto& r = (*list)[i];
      const auto name = a.directory.display_name(r.key);
      csv::write_row(rankings, {std::to_string(i + 1), side, name, std::to_string(r.papers)});
      rank_json[side].push_back({{"rank", i + 1}, {"key", r.key}, {"institution", name}, {"papers", r.papers}});
    }
  }

  // rankings_by_year.csv
  std::ostringstream by_year_csv;
  csv::write_row(by_year_csv, {"year", "rank", "side", "institution", "papers"});
  ordered_json by_year_json = ordered_json::object();
  for (const auto& [year, row] : stats.by_year) {
    const auto top = analytics::top_institutions(a.classifications, a.records, {std::nullopt, config.yearly_top_k, year});
    auto& arr = by_year_json[std::to_string(year)] = ordered_json::array();
    for (std::size_t i = 0; i < top.size(); ++i) {
      const auto name = a.directory.display_name(top[i].key);
      const std::string side(instclass::to_string(top[i].side));
      csv::write_row(by_year_csv, {std::to_string(year), std::to_string(i + 1), side, name,
                                   std::to_string(top[i].papers)});
      arr.push_back({{"rank", i + 1}, {"key", top[i].key}, {"institution", name}, {"side", side},
                     {"papers", top[i].papers}});
    }
  }

  // network
  const auto edges = analytics::build_collab_network(a.classifications);
  const auto kept = analytics::filter_edges(edges, config.network_min_weight);
  const auto nodes = node_info(a.directory);
  for (auto f : {analytics::GraphFormat::GraphML, analytics::GraphFormat::Dot, analytics::GraphFormat::Json}) {
    writer.write("network." + std::string(analytics::file_extension(f)), render_graph(kept, f, nodes, writer));
  }

  // plot-ready series
  std::ostringstream counts_csv, proportions_csv, first_author_csv;
  csv::write_row(counts_csv, {"venue", "year", "papers", "collaborative"});
  csv::write_row(proportions_csv, {"venue", "year", "academia_only", "industry_only", "collaborative", "unknown_papers"});
  csv::write_row(first_author_csv, {"year", "academia", "industry", "dual", "unknown", "academia_share",
                                    "industry_share", "dual_share"});
  auto series_rows = [&](const std::string& venue, int year, const analytics::YearRow& row) {
    csv::write_row(counts_csv, {venue, std::to_string(year), std::to_string(row.total), std::to_string(row.buckets[2])});
    csv::write_row(proportions_csv, {venue, std::to_string(year), fmt_opt(row.proportions, 0), fmt_opt(row.proportions, 1),
                          fmt_opt(row.proportions, 2), std::to_string(row.buckets[3])});
  };
  ordered_json venues = ordered_json::object();
  for (const auto& [vy, row] : stats.by_venue_year) {
    series_rows(vy.first, vy.second, row);
    venues[vy.first][std::to_string(vy.second)] = row_json(row);
  }
  ordered_json all_years = ordered_json::object();
  for (const auto& [year, row] : stats.by_year) {
    series_rows("ALL", year, row);
    all_years[std::to_string(year)] = row_json(row);
    csv::write_row(first_author_csv, {std::to_string(year), std::to_string(row.first_author[0]),
                          std::to_string(row.first_author[1]), std::to_string(row.first_author[2]),
                          std::to_string(row.first_author[3]), fmt_opt(row.first_author_proportions, 0),
                          fmt_opt(row.first_author_proportions, 1), fmt_opt(row.first_author_proportions, 2)});
  }

  // per-paper classifications
  std::ostringstream papers;
  std::array<std::size_t, 4> totals{};
  for (const auto& pc : a.classifications) {
    ++totals[static_cast<std::size_t>(pc.bucket)];
    ordered_json j = {{"paper_id", pc.paper_id},
                      {"bucket", analytics::to_string(pc.bucket)},
                      {"academic_count", pc.academic_count},
                      {"industry_count", pc.industry_count},
                      {"first_author_type", analytics::to_string(pc.first_author_type)},
                      {"academic", pc.academic_keys},
                      {"industry", pc.industry_keys},
                      {"unresolved", pc.unresolved}};
    papers << j.dump() << '\n';
  }

  ordered_json report;
  report["provenance"] = writer.provenance();
  ordered_json total_json;
  total_json["papers"] = a.classifications.size();
  for (auto b : analytics::kBuckets) total_json[std::string(to_string(b))] = totals[static_cast<std::size_t>(b)];
  report["totals"] = total_json;
  report["venues"] = venues;
  report["all_venues"] = all_years;
  report["rankings"] = rank_json;
  report["rankings_by_year"] = by_year_json;
  report["network"] = {{"min_weight_exclusive", config.network_min_weight},
                       {"edges_total", edges.size()},
                       {"edges_kept", kept.size()}};
  report["gaps"] = {{"unresolved_affiliations", a.unresolved_affiliations},
                    {"papers_with_gaps", a.papers_with_gaps}};

  writer.write("stats_report.json", report.dump(2) + "\n");
  writer.write("rankings.csv", rankings.str());
  writer.write("rankings_by_year.csv", by_year_csv.str());
  writer.write("series_paper_counts.csv", counts_csv.str());
  writer.write("series_proportions.csv", proportions_csv.str());
  writer.write("series_first_author.csv", first_author_csv.str());
  writer.write("paper_classifications.jsonl", papers.str());
  return writer.finish(std::to_string(a.classifications.size()) + " papers: " + std::to_string(totals[2]) +
                       " collaborative, " + std::to_string(totals[0]) + " academia-only, " +
                       std::to_string(totals[1]) + " industry-only, " + std::to_string(totals[3]) +
                       " unknown; " + std::to_string(kept.size()) + " network edges");
}

CommandResult run_network(const PipelineConfig& config) {
  config.validate();
  ArtifactWriter writer(config, "network");
  const auto a = analyze_corpus(config, "network");
  const auto format = analytics::parse_graph_format(config.network_format);
  const auto edges = analytics::build_collab_network(a.classifications);
  const auto kept = analytics::filter_edges(edges, config.network_min_weight);
  writer.write("network." + std::string(analytics::file_extension(format)),
               render_graph(kept, format, node_info(a.directory), writer));
  return writer.finish(std::to_string(kept.size()) + " of " + std::to_string(edges.size()) +
                       " edges with weight > " + std::to_string(config.network_min_weight));
}

CommandResult run_content(const PipelineConfig& config) {
  config.validate();
  ArtifactWriter writer(config, "content");
  const auto a = analyze_corpus(config, "content");
  const auto dataset = content::build_content_dataset(a.classifications, a.records);
  for (const auto& w : dataset.warnings) writer.warn(w);

  content::ExperimentConfig exp;
  exp.seed = config.content_seed;
  exp.ratios = config.split_ratios;
  exp.dimension = config.content_dimension;
  const auto rows = content::run_experiment_grid(dataset.items, exp);

  ordered_json j;
  j["provenance"] = writer.provenance();
  j["config"] = {{"seed", exp.seed}, {"split_ratios", exp.ratios}, {"dimension", exp.dimension}};
  j["seeds"] = {{"negative_sampling", exp.seed}, {"split", exp.seed}, {"random_baseline", exp.seed},
                {"training", exp.seed}};
  j["sizes"] = {{"dataset", dataset.items.size()},
                {"collaborative", dataset.positives()},
                {"non_collaborative", dataset.negatives()},
                {"dropped_empty_abstract", dataset.dropped_empty_abstract},
                {"excluded_industry_only", dataset.excluded_industry_only},
                {"excluded_unknown", dataset.excluded_unknown}};
  j["rows"] = ordered_json::array();
  std::string summary;
  for (const auto& row : rows) {
    ordered_json r = {{"method", row.method}, {"negative_sampling", row.negative_sampling}};
    r["metrics"] = content::to_json(row.report);
    j["rows"].push_back(std::move(r));
    std::ostringstream s;
    s << (summary.empty() ? "" : "; ") << row.method << (row.negative_sampling ? "+ns" : "") << " F1 "
      << row.report.metrics.macro_f1;
    summary += s.str();
  }
  writer.write("metrics.json", j.dump(2) + "\n");
  return writer.finish(summary);
}

// ---------------------------------------------------------------------------
// report

CommandResult run_report(const PipelineConfig& config) {
  config.validate();
  const fs::path dir(config.out_dir);
  const auto stats_path = dir / "stats_report.json";
  const auto metrics_path = dir / "metrics.json";
  if (!fs::exists(stats_path) && !fs::exists(metrics_path)) {
    throw UsageError("report: neither stats_report.json nor metrics.json in " + dir.string());
  }
  ArtifactWriter writer(config, "report");
  std::ostringstream md;
  md << "# Industry-academia collaboration report\n\n";
  md.setf(std::ios::fixed);
  md.precision(3);
  if (fs::exists(stats_path)) {
    const auto s = nlohmann::ordered_json::parse(read_file(stats_path));
    const auto& t = s.at("totals");
    md << "## Corpus\n\n"
       << "| papers | academia only | industry only | collaborative | unknown |\n"
       << "|---|---|---|---|---|\n"
       << "| " << t.at("papers") << " | " << t.at("academia_only") << " | " << t.at("industry_only") << " | "
       << t.at("collaborative") << " | " << t.at("unknown") << " |\n\n";
    md << "## Collaborative papers by year\n\n| year | papers | collaborative | share | academia-led |\n"
       << "|---|---|---|---|---|\n";
    for (const auto& [year, row] : s.at("all_venues").items()) {
      const auto& p = row.at("proportions");
      const auto& fa = row.at("first_author").at("proportions");
      md << "| " << year << " | " << row.at("counts").at("total") << " | "
         << row.at("counts").at("collaborative") << " | ";
      if (p.is_null()) md << "-"; else md << p.at("collaborative").get<double>();
      md << " | ";
      if (fa.is_null()) md << "-"; else md << fa.at("academia").get<double>();
      md << " |\n";
    }
    for (const char* side : {"academia", "industry"}) {
      md << "\n## Top " << side << " institutions\n\n| rank | institution | papers |\n|---|---|---|\n";
      for (const auto& r : s.at("rankings").at(side)) {
        md << "| " << r.at("rank") << " | " << r.at("institution").get<std::string>() << " | " << r.at("papers")
           << " |\n";
      }
    }
    const auto& n = s.at("network");
    md << "\nNetwork: " << n.at("edges_kept") << " of " << n.at("edges_total") << " edges with weight > "
       << n.at("min_weight_exclusive") << ".\n";
  }
  if (fs::exists(metrics_path)) {
    const auto m = nlohmann::ordered_json::parse(read_file(metrics_path));
    md << "\n## Abstract classification\n\n| method | accuracy | precision | recall | F1 |\n"
       << "|---|---|---|---|---|\n";
    for (const auto& row : m.at("rows")) {
      const auto& x = row.at("metrics");
      md << "| " << (row.at("negative_sampling").get<bool>() ? "with" : "without") << " negative sampling ("
         << row.at("method").get<std::string>() << ") | ";
      if (x.at("accuracy").is_null()) md << "-"; else md << x.at("accuracy").get<double>();
      md << " | " << x.at("macro_precision").get<double>() << " | " << x.at("macro_recall").get<double>()
         << " | " << x.at("macro_f1").get<double>() << " |\n";
    }
  }
  writer.write("report.md", md.str());
  return writer.finish("report written to " + (dir / "report.md").string());
}

// ---------------------------------------------------------------------------

const std::vector<std::string_view>& command_names() {
  static const std::vector<std::string_view> names = {
      "ingest", "link", "train-type-model", "classify", "review-export", "review-import",
      "analyze", "network", "content", "report"};
  return names;
}

CommandResult run_command(std::string_view name, const PipelineConfig& config) {
  if (name == "ingest") return run_ingest(config);
  if (name == "link") return run_link(config);
  if (name == "train-type-model") return run_train_type_model(config);
  if (name == "classify") return run_classify(config);
  if (name == "review-export") return run_review_export(config);
  if (name == "review-import") return run_review_import(config);
  if (name == "analyze") return run_analyze(config);
  if (name == "network") return run_network(config);
  if (name == "content") return run_content(config);
  if (name == "report") return run_report(config);
  throw UsageError("unknown command '" + std::string(name) + "'");
}

}  // namespace collabmap::pipeline
