#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "collabmap/error.hpp"

namespace collabmap::link {

enum class InstType { Education, Healthcare, Company, Archive, Nonprofit, Government, Facility, Other };

inline constexpr std::array<InstType, 8> kAllInstTypes = {
    InstType::Education,  InstType::Healthcare, InstType::Company,  InstType::Archive,
    InstType::Nonprofit,  InstType::Government, InstType::Facility, InstType::Other};

std::string_view to_string(InstType t);
/// Case-insensitive; nullopt for anything outside the eight registry types.
std::optional<InstType> parse_inst_type(std::string_view s);

struct RegistryRecord {
  std::string ror_id;
  std::string primary_name;
  std::vector<std::string> aliases;
  std::vector<std::string> acronyms;
  InstType inst_type = InstType::Other;
  std::string country;  // ISO 3166-1 alpha-2, may be empty

  friend bool operator==(const RegistryRecord&, const RegistryRecord&) = default;
};

class RegistryError : public Error {
 public:
  using Error::Error;
};

/// Immutable, indexed registry. Records are kept sorted by ror_id and are
/// addressed internally by their position in that order.
class Registry {
 public:
  Registry() = default;
  /// Throws RegistryError on duplicate ror_id.
  explicit Registry(std::vector<RegistryRecord> records);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<RegistryRecord>& records() const { return records_; }
  const RegistryRecord& at(std::uint32_t index) const { return records_.at(index); }
  const RegistryRecord* find(std::string_view ror_id) const;

  /// Record indices whose names (primary, aliases, acronyms) contain token.
  const std::vector<std::uint32_t>& postings(const std::string& token) const;
  /// Records carrying this acronym verbatim (case-sensitive).
  const std::vector<std::uint32_t>& acronym_matches(const std::string& acronym) const;
  /// Records with a name equal to s ignoring ASCII case and extra whitespace.
  const std::vector<std::uint32_t>& exact_name_matches(std::string_view s) const;

  /// ln(1 + N / df). Tokens absent from the index weigh as df = 1.
  double idf(const std::string& token) const;

  std::map<InstType, std::size_t> type_histogram() const;

  const std::unordered_map<std::string, std::vector<std::uint32_t>>& name_index() const {
    return name_index_;
  }

 private:
  std::vector<RegistryRecord> records_;
  std::unordered_map<std::string, std::uint32_t> by_id_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> name_index_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> acronym_index_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> exact_index_;
};

/// Builds a registry from the public dump format. Both the v1 layout
/// (name/aliases/acronyms/labels, country.country_code) and the v2 layout
/// (names[] with types, locations[].geonames_details.country_code) are read.
/// Records without a recognised type load as Other and add a warning.
Registry parse_registry_dump(const nlohmann::json& dump, std::vector<std::string>* warnings);
Registry load_registry(const std::filesystem::path& dump_file, std::vector<std::string>* warnings);

/// Splits on commas and drops every segment that contains a digit or a
/// maximal run of exactly two or three ASCII capitals (postal codes, state
/// and country abbreviations). Survivors are trimmed and rejoined with ", ".
std::string clean_affiliation(std::string_view raw);

struct Candidate {
  std::string ror_id;
  std::uint32_t index = 0;
  double prefilter = 0.0;
};

/// IDF-weighted overlap: sum of idf over query tokens found in the record's
/// names divided by the sum over all distinct query tokens. A token equal to
/// one of the record's acronyms scores 1. Sorted by score, then ror_id.
std::vector<Candidate> generate_candidates(std::string_view cleaned, const Registry& registry,
                                           std::size_t k);

/// Jaccard index of the two token sets; 0 when both are empty.
double token_set_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Best token-set Jaccard between any contiguous run of comma segments of
/// cleaned and any of the record's names. Matching a segment run lets a
/// department prefix or a city suffix sit next to the institution name.
double score_candidate(std::string_view cleaned, const RegistryRecord& record);

inline constexpr double kDefaultThreshold = 0.9;
inline constexpr std::size_t kDefaultCandidates = 20;

struct LinkResult {
  std::string input_raw;
  std::string input_cleaned;
  std::optional<std::string> ror_id;  // set iff linked
  double score = 0.0;                 // best candidate score, also when unlinked

  bool linked() const { return ror_id.has_value(); }
  friend bool operator==(const LinkResult&, const LinkResult&) = default;
};

/// Cleans, generates up to k candidates and scores them. A raw string equal
/// to a registered name scores 1 for that record. The best candidate is the
/// highest score, then an exact primary-name hit, then the higher prefilter,
/// then the smaller ror_id. Linked iff best score >= threshold.
/// Throws ConfigError unless 0 < threshold <= 1.
LinkResult link_affiliation(std::string_view raw, const Registry& registry,
                            double threshold = kDefaultThreshold,
                            std::size_t k = kDefaultCandidates);

/// Link report line. Linked results also carry the record's name and type so
/// the classification stage can run from the report alone.
nlohmann::json to_json(const LinkResult& result, const Registry* registry);

struct LinkReportEntry {
  LinkResult result;
  std::string name;                   // registry name when linked
  std::optional<InstType> inst_type;  // registry type when linked
};

LinkReportEntry link_entry_from_json(const nlohmann::json& j);

}  // namespace collabmap::link
