#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "collabmap/error.hpp"
#include "collabmap/learn.hpp"
#include "collabmap/link.hpp"

namespace collabmap::instclass {

enum class Side { Academia, Industry };
enum class Vote { Academia, Industry, Abstain };
enum class Provenance { RegistryType, EnsembleUnanimous, Manual };

std::string_view to_string(Side s);      // "academia" / "industry"
std::string_view to_string(Vote v);      // plus "abstain"
std::string_view to_string(Provenance p);  // "registry_type" / "ensemble_unanimous" / "manual"
std::optional<Side> parse_side(std::string_view s);
std::optional<Vote> parse_vote(std::string_view s);
std::optional<Provenance> parse_provenance(std::string_view s);
Vote to_vote(Side s);

struct Votes {
  Vote keyword = Vote::Abstain;
  Vote domain = Vote::Abstain;
  Vote model = Vote::Abstain;

  /// All three equal and none abstained.
  bool unanimous() const;
  friend bool operator==(const Votes&, const Votes&) = default;
};

struct InstitutionLabel {
  std::string institution_key;  // ror_id when linked, else the cleaned string
  Side label = Side::Academia;
  Provenance provenance = Provenance::RegistryType;
  std::optional<Votes> votes;  // absent for RegistryType
  std::string display_name;

  friend bool operator==(const InstitutionLabel&, const InstitutionLabel&) = default;
};

struct ReviewItem {
  std::string institution_key;
  Votes votes;
  std::optional<Side> resolved_label;

  friend bool operator==(const ReviewItem&, const ReviewItem&) = default;
};

/// Company is the only industrial registry type.
Side classify_by_registry_type(link::InstType type);

/// Key an affiliation is labeled under: the ror_id when linked, else the
/// cleaned string, else (when cleaning removed everything) the raw string
/// with whitespace collapsed. Empty for blank input.
std::string institution_key(const link::LinkResult& result);

// ---------------------------------------------------------------------------
// Keyword rule

/// Keys are stored lowercased with whitespace collapsed.
using LabeledList = std::map<std::string, Side>;

/// CSV with header "name,label", label in {academia, industry}.
LabeledList read_labeled_list(std::istream& in);
std::string labeled_list_key(std::string_view name);

inline constexpr std::array<std::string_view, 7> kAcademicKeywords = {
    "Universi", "Academ", "School", "Polytech", "Department", "Univ.", "Dept."};

Side keyword_classify(std::string_view cleaned, const LabeledList& labeled_list);

// ---------------------------------------------------------------------------
// Domain rule

class ResolverError : public Error {
 public:
  using Error::Error;
};

/// Search backend: ordered result URLs for a query, or ResolverError.
class WebResolver {
 public:
  virtual ~WebResolver() = default;
  virtual std::vector<std::string> search(const std::string& query) = 0;
};

/// Answers from a JSON object mapping query -> [url, ...]. Unknown queries fail.
class FixtureResolver : public WebResolver {
 public:
  explicit FixtureResolver(std::map<std::string, std::vector<std::string>> answers);
  static FixtureResolver from_file(const std::filesystem::path& path);
  static std::map<std::string, std::vector<std::string>> parse_map(const nlohmann::json& j);

  std::vector<std::string> search(const std::string& query) override;

 private:
  std::map<std::string, std::vector<std::string>> answers_;
};

/// Persistent cache in the fixture format in front of an optional upstream
/// resolver. Misses go upstream and are recorded; save() rewrites the cache
/// file through a temporary and a rename. Single writer.
class CachingResolver : public WebResolver {
 public:
  CachingResolver(std::filesystem::path cache_file, WebResolver* upstream);

  std::vector<std::string> search(const std::string& query) override;
  void save() const;
  std::size_t size() const { return cache_.size(); }

 private:
  std::filesystem::path cache_file_;
  WebResolver* upstream_;
  std::map<std::string, std::vector<std::string>> cache_;
};

/// Lowercased host of a URL, without scheme, credentials, port or path.
std::string url_hostname(std::string_view url);

/// Academia iff one of the first three result hosts has a dot-separated label
/// "edu", "ac" or "gov". A failing resolver yields Abstain.
Vote domain_classify(std::string_view cleaned, WebResolver& resolver);

// ---------------------------------------------------------------------------
// Trained model

inline constexpr std::uint32_t kDefaultTypeDimension = 1u << 18;

/// Word features "w:<token>" and per-token character trigrams "c:<tri>" of
/// the token padded as "^token$".
std::vector<std::string> institution_features(std::string_view cleaned);
learn::SparseVector featurize_institution(std::string_view cleaned, std::uint32_t dimension);

struct LabeledName {
  std::string text;
  Side label = Side::Academia;
};

struct TypeModel {
  learn::LinearModel linear;  // P(Industry)
  std::uint64_t seed = 0;
  double validation_auc = 0.0;
  double test_auc = 0.0;
  int best_epoch = 0;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
  std::size_t test_size = 0;

  std::uint32_t dimension() const { return linear.dimension(); }

  nlohmann::json to_json() const;
  static TypeModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static TypeModel load(const std::filesystem::path& path);
};

/// One pair per registry record: primary name, Industry iff type Company.
std::vector<LabeledName> registry_training_pairs(const link::Registry& registry);

/// Stratified 80/10/10 split, class-weighted logistic regression with early
/// stopping on validation ROC-AUC, test ROC-AUC recorded in the model.
/// Throws Error for single-class input or when a split ends up one-class.
TypeModel train_type_model(std::span<const LabeledName> pairs, std::uint64_t seed,
                           std::uint32_t dimension = kDefaultTypeDimension);

struct ModelVerdict {
  Side label = Side::Academia;
  double score = 0.0;  // P(Industry)
};

/// Industry iff score >= 0.5.
ModelVerdict model_classify(std::string_view cleaned, const TypeModel& model);

// ---------------------------------------------------------------------------
// Ensemble and manual review

using EnsembleOutcome = std::variant<InstitutionLabel, ReviewItem>;

/// Unanimous keyword/domain/model votes give an EnsembleUnanimous label keyed
/// by cleaned; any disagreement or abstention gives a ReviewItem.
EnsembleOutcome ensemble_classify(std::string_view cleaned, const LabeledList& labeled_list,
                                  WebResolver& resolver, const TypeModel& model);

inline constexpr std::string_view kReviewHeader =
    "institution_key,keyword_vote,domain_vote,model_vote,resolved_label";

void export_review_queue(std::ostream& out, std::span<const ReviewItem> items);

class ReviewImportError : public Error {
 public:
  ReviewImportError(const std::string& message, std::size_t row) : Error(message), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

struct ReviewImport {
  std::vector<InstitutionLabel> labels;      // provenance Manual
  std::vector<std::size_t> unresolved_rows;  // 1-based data rows, header excluded
  std::vector<ReviewItem> unresolved;        // the items on those rows
};

/// Throws ReviewImportError naming the row for a resolved_label outside
/// {academia, industry} (case-insensitive). Empty labels are reported as
/// unresolved, not imported.
ReviewImport import_review_labels(std::istream& in);

inline constexpr std::string_view kLabelsHeader =
    "institution_key,label,provenance,keyword_vote,domain_vote,model_vote,display_name";

void write_labels_csv(std::ostream& out, std::span<const InstitutionLabel> labels);
std::vector<InstitutionLabel> read_labels_csv(std::istream& in);

}  // namespace collabmap::instclass
