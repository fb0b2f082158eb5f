#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "collabmap/analytics.hpp"
#include "collabmap/corpus.hpp"
#include "collabmap/link.hpp"

namespace collabmap::pipeline {

inline constexpr std::string_view kToolName = "collabmap";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Every setting a subcommand can read. Paths left empty are "not given".
struct PipelineConfig {
  std::vector<std::string> inputs;  // ingest: TEI files, JSONL files or directories
  std::string corpus;
  std::string registry;
  std::string links;
  std::string labels;
  std::string labeled_list;
  std::string resolver_fixture;
  std::string resolver_cache;
  std::string type_model;
  std::string review_labels;  // resolved review_queue.csv to merge
  std::string votes;          // ensemble_votes.csv written by classify
  std::string out_dir = "out";

  double link_threshold = link::kDefaultThreshold;
  std::size_t candidate_k = link::kDefaultCandidates;
  std::uint64_t type_model_seed = 13;
  std::uint32_t type_model_dimension = 1u << 18;
  std::uint64_t content_seed = 42;
  std::uint32_t content_dimension = 1u << 18;
  std::array<double, 3> split_ratios = {8.0, 1.0, 1.0};
  std::size_t network_min_weight = 5;  // edges kept iff weight > this
  std::string network_format = "graphml";
  std::size_t top_k = 10;
  std::size_t yearly_top_k = 5;
  std::optional<std::string> venue;  // ingest overrides
  std::optional<int> year;
  bool skip_errors = false;

  /// Throws ConfigError for out-of-range values.
  void validate() const;
  nlohmann::ordered_json to_json() const;
  /// Overlays the keys present in j onto base; unknown keys are an error.
  static PipelineConfig from_json(const nlohmann::json& j, PipelineConfig base);
  static PipelineConfig from_json(const nlohmann::json& j);
  /// FNV-1a of the canonical effective-config JSON, hex.
  std::string hash() const;
};

struct CommandResult {
  int exit_code = 0;
  std::string summary;  // one human-readable line
  std::vector<std::filesystem::path> artifacts;
  std::vector<std::string> warnings;
};

/// Thrown for invocation mistakes (missing inputs or required paths).
class UsageError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

CommandResult run_ingest(const PipelineConfig& config);
CommandResult run_link(const PipelineConfig& config);
CommandResult run_train_type_model(const PipelineConfig& config);
CommandResult run_classify(const PipelineConfig& config);
CommandResult run_review_export(const PipelineConfig& config);
CommandResult run_review_import(const PipelineConfig& config);
CommandResult run_analyze(const PipelineConfig& config);
CommandResult run_network(const PipelineConfig& config);
CommandResult run_content(const PipelineConfig& config);
CommandResult run_report(const PipelineConfig& config);

/// Dispatches on the subcommand name; UsageError for an unknown one.
CommandResult run_command(std::string_view name, const PipelineConfig& config);
const std::vector<std::string_view>& command_names();

// Shared loaders, exposed for tests.
std::vector<corpus::PaperRecord> load_corpus(const std::filesystem::path& path);
std::vector<link::LinkReportEntry> load_links(const std::filesystem::path& path);
analytics::InstitutionDirectory load_directory(const std::filesystem::path& links,
                                               const std::filesystem::path& labels);

/// Venue and year from a ".../<venue>/<year>/<id>.tei.xml" layout, when present.
std::pair<std::optional<std::string>, std::optional<int>> infer_venue_year(
    const std::filesystem::path& tei_file);

}  // namespace collabmap::pipeline
