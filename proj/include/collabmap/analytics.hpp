#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "collabmap/corpus.hpp"
#include "collabmap/inst_class.hpp"

namespace collabmap::analytics {

enum class Bucket { AcademiaOnly, IndustryOnly, Collaborative, Unknown };
enum class FirstAuthorType { Academia, Industry, Dual, Unknown };

inline constexpr std::array<Bucket, 4> kBuckets = {Bucket::AcademiaOnly, Bucket::IndustryOnly,
                                                   Bucket::Collaborative, Bucket::Unknown};
inline constexpr std::array<FirstAuthorType, 4> kFirstAuthorTypes = {
    FirstAuthorType::Academia, FirstAuthorType::Industry, FirstAuthorType::Dual,
    FirstAuthorType::Unknown};

std::string_view to_string(Bucket b);
std::string_view to_string(FirstAuthorType t);

Bucket bucket_for(std::size_t academic_count, std::size_t industry_count);

/// Maps raw affiliation strings to institution keys and keys to labels.
class InstitutionDirectory {
 public:
  void add_affiliation(std::string raw, std::string key);
  /// Later labels for the same key replace earlier ones.
  void add_label(instclass::InstitutionLabel label);

  const std::string* key_for(std::string_view raw) const;
  const instclass::InstitutionLabel* label_for(std::string_view key) const;
  /// The label's display name, or the key itself.
  std::string display_name(std::string_view key) const;

  const std::map<std::string, instclass::InstitutionLabel, std::less<>>& labels() const {
    return labels_;
  }

 private:
  std::unordered_map<std::string, std::string> keys_;
  std::map<std::string, instclass::InstitutionLabel, std::less<>> labels_;
};

struct PaperClassification {
  std::string paper_id;
  std::size_t academic_count = 0;  // distinct academic institutions
  std::size_t industry_count = 0;
  Bucket bucket = Bucket::Unknown;
  FirstAuthorType first_author_type = FirstAuthorType::Unknown;
  std::vector<std::string> academic_keys;  // sorted, distinct
  std::vector<std::string> industry_keys;  // sorted, distinct
  std::vector<std::string> unresolved;     // raw strings without a key or label

  friend bool operator==(const PaperClassification&, const PaperClassification&) = default;
};

/// Counts distinct labeled institutions over all authors. The first author
/// (index 0) is Academia or Industry when all of its labeled affiliations
/// agree, Dual when they are mixed and Unknown when none is labeled.
PaperClassification label_paper(const corpus::PaperRecord& record,
                                const InstitutionDirectory& directory);

struct YearRow {
  std::size_t total = 0;
  std::array<std::size_t, 4> buckets{};  // indexed like kBuckets
  /// AcademiaOnly / IndustryOnly / Collaborative over the non-Unknown papers;
  /// empty when every paper is Unknown.
  std::optional<std::array<double, 3>> proportions;
  /// First-author types among Collaborative papers, indexed like kFirstAuthorTypes.
  std::array<std::size_t, 4> first_author{};
  /// Academia / Industry / Dual over Collaborative papers with a known first author.
  std::optional<std::array<double, 3>> first_author_proportions;
};

struct YearlyStats {
  std::map<std::pair<std::string, int>, YearRow> by_venue_year;
  std::map<int, YearRow> by_year;  // all venues together
};

/// Throws Error naming the paper when a classification has no record.
YearlyStats yearly_stats(std::span<const PaperClassification> classifications,
                         std::span<const corpus::PaperRecord> records);

struct RankingQuery {
  std::optional<instclass::Side> side;  // both sides when empty
  std::size_t k = 10;
  std::optional<int> year;
};

struct RankedInstitution {
  std::string key;
  instclass::Side side = instclass::Side::Academia;
  std::size_t papers = 0;

  friend bool operator==(const RankedInstitution&, const RankedInstitution&) = default;
};

/// Ranks institutions by the number of distinct Collaborative papers they
/// appear on, descending, ties by key. records is consulted only for the
/// year filter. Throws Error for k == 0.
std::vector<RankedInstitution> top_institutions(std::span<const PaperClassification> classifications,
                                                std::span<const corpus::PaperRecord> records,
                                                const RankingQuery& query);

struct CoauthorEdge {
  std::string inst_a;  // inst_a < inst_b
  std::string inst_b;
  std::size_t weight = 0;

  friend bool operator==(const CoauthorEdge&, const CoauthorEdge&) = default;
};

/// Every unordered pair of distinct institutions on a Collaborative paper
/// adds one to the pair's weight. Edges sorted by (inst_a, inst_b).
std::vector<CoauthorEdge> build_collab_network(std::span<const PaperClassification> classifications);

/// Keeps edges with weight > min_exclusive.
std::vector<CoauthorEdge> filter_edges(std::span<const CoauthorEdge> edges, std::size_t min_exclusive);

enum class GraphFormat { GraphML, Dot, Json };

/// "graphml", "dot" or "json"; ConfigError otherwise.
GraphFormat parse_graph_format(std::string_view name);
std::string_view file_extension(GraphFormat format);

struct NodeInfo {
  std::string label;
  std::optional<instclass::Side> side;
};

/// Nodes are the sorted endpoint keys and edges are sorted by endpoints. nodes supplies
/// optional label and side attributes.
void export_graph(std::ostream& out, std::span<const CoauthorEdge> edges, GraphFormat format,
                  const std::map<std::string, NodeInfo>& nodes = {});

}  // namespace collabmap::analytics
