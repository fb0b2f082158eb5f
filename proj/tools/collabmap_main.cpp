#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "collabmap/corpus.hpp"
#include "collabmap/csv.hpp"
#include "collabmap/inst_class.hpp"
#include "collabmap/pipeline.hpp"

namespace {

using collabmap::pipeline::PipelineConfig;

// Flags are parsed into a staging config; only flags that were actually given
// overwrite the values loaded from --config.
class Overlay {
 public:
  explicit Overlay(CLI::App* sub) : sub_(sub) {}

  template <class T>
  Overlay& option(const std::string& name, T PipelineConfig::*member, const std::string& help) {
    auto* opt = sub_->add_option(name, staged_.*member, help);
    appliers_.push_back([opt, member, this](PipelineConfig& c) {
      if (opt->count() > 0) c.*member = staged_.*member;
    });
    return *this;
  }

  template <class T>
  Overlay& optional(const std::string& name, std::optional<T> PipelineConfig::*member,
                    const std::string& help) {
    auto value = std::make_shared<T>();
    auto* opt = sub_->add_option(name, *value, help);
    appliers_.push_back([opt, member, value](PipelineConfig& c) {
      if (opt->count() > 0) c.*member = *value;
    });
    return *this;
  }

  Overlay& flag(const std::string& name, bool PipelineConfig::*member, const std::string& help) {
    auto* opt = sub_->add_flag(name, staged_.*member, help);
    appliers_.push_back([opt, member, this](PipelineConfig& c) {
      if (opt->count() > 0) c.*member = staged_.*member;
    });
    return *this;
  }

  void apply(PipelineConfig& c) const {
    for (const auto& f : appliers_) f(c);
  }

 private:
  CLI::App* sub_;
  PipelineConfig staged_;
  std::vector<std::function<void(PipelineConfig&)>> appliers_;
};

int report_error(std::string_view kind, const std::string& message, int code,
                 nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maps industry-academia collaboration in conference proceedings."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(collabmap::pipeline::kToolVersion));
  std::string config_file;
  app.add_option("--config", config_file, "JSON file with pipeline settings; flags override it")
      ->check(CLI::ExistingFile);

  std::vector<std::pair<CLI::App*, std::unique_ptr<Overlay>>> commands;
  auto add = [&](const char* name, const char* help) -> Overlay& {
    auto* sub = app.add_subcommand(name, help);
    commands.emplace_back(sub, std::make_unique<Overlay>(sub));
    auto& o = *commands.back().second;
    o.option("-o,--out-dir", &PipelineConfig::out_dir, "Directory for artifacts");
    return o;
  };

  add("ingest", "Parse TEI/JSONL inputs into a validated corpus.jsonl")
      .option("inputs", &PipelineConfig::inputs, "TEI files, JSONL files or directories")
      .optional("--venue", &PipelineConfig::venue, "Venue for every TEI input")
      .optional("--year", &PipelineConfig::year, "Year for every TEI input")
      .flag("--skip-errors", &PipelineConfig::skip_errors, "Record bad inputs instead of stopping");
  add("link", "Link affiliation strings to registry records")
      .option("--corpus", &PipelineConfig::corpus, "corpus.jsonl")
      .option("--registry", &PipelineConfig::registry, "Registry dump (JSON)")
      .option("--threshold", &PipelineConfig::link_threshold, "Minimum link score")
      .option("--candidates", &PipelineConfig::candidate_k, "Candidates scored per affiliation");
  add("train-type-model", "Train the institution-type model on registry names")
      .option("--registry", &PipelineConfig::registry, "Registry dump (JSON)")
      .option("--seed", &PipelineConfig::type_model_seed, "Split and training seed")
      .option("--dimension", &PipelineConfig::type_model_dimension, "Hashed feature dimension");
  add("classify", "Label institutions as academia or industry")
      .option("--links", &PipelineConfig::links, "links.jsonl")
      .option("--registry", &PipelineConfig::registry, "Registry dump, for reports without types")
      .option("--labeled-list", &PipelineConfig::labeled_list, "CSV name,label overriding keywords")
      .option("--resolver-fixture", &PipelineConfig::resolver_fixture, "JSON query -> URLs map")
      .option("--resolver-cache", &PipelineConfig::resolver_cache, "Persistent search cache")
      .option("--type-model", &PipelineConfig::type_model, "type_model.json")
      .option("--review-labels", &PipelineConfig::review_labels, "Resolved review queue to merge");
  add("review-export", "Export institutions that still need a manual label")
      .option("--votes", &PipelineConfig::votes, "ensemble_votes.csv")
      .option("--labels", &PipelineConfig::labels, "labels.csv");
  add("review-import", "Merge a resolved review queue into labels.csv")
      .option("--labels", &PipelineConfig::labels, "labels.csv")
      .option("--review-labels", &PipelineConfig::review_labels, "Resolved review queue");
  auto analysis_inputs = [](Overlay& o) -> Overlay& {
    return o.option("--corpus", &PipelineConfig::corpus, "corpus.jsonl")
        .option("--links", &PipelineConfig::links, "links.jsonl")
        .option("--labels", &PipelineConfig::labels, "labels.csv");
  };
  analysis_inputs(add("analyze", "Yearly statistics, rankings and the collaboration network"))
      .option("--top-k", &PipelineConfig::top_k, "Institutions per ranking")
      .option("--yearly-top-k", &PipelineConfig::yearly_top_k, "Institutions per yearly ranking")
      .option("--min-weight", &PipelineConfig::network_min_weight, "Keep edges heavier than this");
  analysis_inputs(add("network", "Export the collaboration network"))
      .option("--min-weight", &PipelineConfig::network_min_weight, "Keep edges heavier than this")
      .option("--format", &PipelineConfig::network_format, "graphml, dot or json");
  analysis_inputs(add("content", "Abstract classification experiment"))
      .option("--seed", &PipelineConfig::content_seed, "Experiment seed")
      .option("--dimension", &PipelineConfig::content_dimension, "Hashed feature dimension")
      .option("--split", &PipelineConfig::split_ratios, "Train/validation/test ratios");
  add("report", "Summarize analyze and content artifacts as Markdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("usage", e.what(), 2);
  }

  try {
    PipelineConfig config;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw collabmap::ConfigError("cannot parse config " + config_file + ": " + e.what());
      }
      config = PipelineConfig::from_json(j);
    }
    for (const auto& [sub, overlay] : commands) {
      if (!sub->parsed()) continue;
      overlay->apply(config);
      const auto result = collabmap::pipeline::run_command(sub->get_name(), config);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << result.summary << '\n';
      for (const auto& a : result.artifacts) std::cout << "  " << a.string() << '\n';
      return result.exit_code;
    }
  } catch (const collabmap::ConfigError& e) {
    return report_error("usage", e.what(), 2);
  } catch (const collabmap::corpus::ParseError& e) {
    return report_error("parse", e.what(), 1, {{"byte_offset", e.byte_offset()}});
  } catch (const collabmap::corpus::CorpusError& e) {
    return report_error("corpus", e.what(), 1, {{"line", e.line()}});
  } catch (const collabmap::instclass::ReviewImportError& e) {
    return report_error("review", e.what(), 1, {{"row", e.row()}});
  } catch (const std::exception& e) {
    return report_error("error", e.what(), 1);
  }
  return 0;
}
