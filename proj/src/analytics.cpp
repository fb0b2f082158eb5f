#include "collabmap/analytics.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include <json.hpp>

#include "collabmap/text.hpp"

namespace collabmap::analytics {

using instclass::Side;

std::string_view to_string(Bucket b) {
  switch (b) {
    case Bucket::AcademiaOnly: return "academia_only";
    case Bucket::IndustryOnly: return "industry_only";
    case Bucket::Collaborative: return "collaborative";
    case Bucket::Unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(FirstAuthorType t) {
  switch (t) {
    case FirstAuthorType::Academia: return "academia";
    case FirstAuthorType::Industry: return "industry";
    case FirstAuthorType::Dual: return "dual";
    case FirstAuthorType::Unknown: return "unknown";
  }
  return "unknown";
}

Bucket bucket_for(std::size_t academic_count, std::size_t industry_count) {
  if (academic_count > 0 && industry_count > 0) return Bucket::Collaborative;
  if (academic_count > 0) return Bucket::AcademiaOnly;
  if (industry_count > 0) return Bucket::IndustryOnly;
  return Bucket::Unknown;
}

void InstitutionDirectory::add_affiliation(std::string raw, std::string key) {
  keys_[std::move(raw)] = std::move(key);
}

void InstitutionDirectory::add_label(instclass::InstitutionLabel label) {
  auto key = label.institution_key;
  labels_.insert_or_assign(std::move(key), std::move(label));
}

const std::string* InstitutionDirectory::key_for(std::string_view raw) const {
  auto it = keys_.find(std::string(raw));
  return it == keys_.end() ? nullptr : &it->second;
}

const instclass::InstitutionLabel* InstitutionDirectory::label_for(std::string_view key) const {
  auto it = labels_.find(key);
  return it == labels_.end() ? nullptr : &it->second;
}

std::string InstitutionDirectory::display_name(std::string_view key) const {
  const auto* l = label_for(key);
  return l && !l->display_name.empty() ? l->display_name : std::string(key);
}

PaperClassification label_paper(const corpus::PaperRecord& record,
                                const InstitutionDirectory& directory) {
  PaperClassification pc;
  pc.paper_id = record.paper_id;
  std::set<std::string> academic, industry, unresolved;

  for (std::size_t a = 0; a < record.authors.size(); ++a) {
    bool any_academic = false, any_industry = false;
    for (const auto& raw : record.authors[a].affiliations) {
      if (text::trim(raw).empty()) continue;
      const auto* key = directory.key_for(raw);
      const auto* label = key ? directory.label_for(*key) : nullptr;
      if (!label) {
        unresolved.insert(raw);
        continue;
      }
      if (label->label == Side::Academia) {
        academic.insert(*key);
        any_academic = true;
      } else {
        industry.insert(*key);
        any_industry = true;
      }
    }
    if (a == 0) {
      pc.first_author_type = any_academic && any_industry ? FirstAuthorType::Dual
                             : any_academic               ? FirstAuthorType::Academia
                             : any_industry               ? FirstAuthorType::Industry
                                                          : FirstAuthorType::Unknown;
    }
  }
  pc.academic_keys.assign(academic.begin(), academic.end());
  pc.industry_keys.assign(industry.begin(), industry.end());
  pc.unresolved.assign(unresolved.begin(), unresolved.end());
  pc.academic_count = academic.size();
  pc.industry_count = industry.size();
  pc.bucket = bucket_for(pc.academic_count, pc.industry_count);
  return pc;
}

namespace {

void accumulate(YearRow& row, const PaperClassification& pc) {
  ++row.total;
  ++row.buckets[static_cast<std::size_t>(pc.bucket)];
  if (pc.bucket == Bucket::Collaborative) {
    ++row.first_author[static_cast<std::size_t>(pc.first_author_type)];
  }
}

void finish(YearRow& row) {
  const std::size_t known = row.buckets[0] + row.buckets[1] + row.buckets[2];
  if (known > 0) {
    const double d = static_cast<double>(known);
    row.proportions = std::array<double, 3>{static_cast<double>(row.buckets[0]) / d,
                                            static_cast<double>(row.buckets[1]) / d,
                                            static_cast<double>(row.buckets[2]) / d};
  }
  const std::size_t fa_known = row.first_author[0] + row.first_author[1] + row.first_author[2];
  if (fa_known > 0) {
    const double d = static_cast<double>(fa_known);
    row.first_author_proportions = std::array<double, 3>{
        static_cast<double>(row.first_author[0]) / d, static_cast<double>(row.first_author[1]) / d,
        static_cast<double>(row.first_author[2]) / d};
  }
}

std::unordered_map<std::string_view, const corpus::PaperRecord*> index_records(
    std::span<const corpus::PaperRecord> records) {
  std::unordered_map<std::string_view, const corpus::PaperRecord*> by_id;
  by_id.reserve(records.size());
  for (const auto& r : records) by_id.emplace(r.paper_id, &r);
  return by_id;
}

}  // namespace

YearlyStats yearly_stats(std::span<const PaperClassification> classifications,
                         std::span<const corpus::PaperRecord> records) {
  const auto by_id = index_records(records);
  YearlyStats stats;
  for (const auto& pc : classifications) {
    auto it = by_id.find(pc.paper_id);
    if (it == by_id.end()) throw Error("classification for paper '" + pc.paper_id + "' has no record");
    const auto& rec = *it->second;
    accumulate(stats.by_venue_year[{rec.venue.name(), rec.year}], pc);
    accumulate(stats.by_year[rec.year], pc);
  }
  for (auto& [k, row] : stats.by_venue_year) finish(row);
  for (auto& [k, row] : stats.by_year) finish(row);
  return stats;
}

std::vector<RankedInstitution> top_institutions(std::span<const PaperClassification> classifications,
                                                std::span<const corpus::PaperRecord> records,
                                                const RankingQuery& query) {
  if (query.k == 0) throw Error("ranking size k must be at least 1");
  std::unordered_map<std::string_view, const corpus::PaperRecord*> by_id;
  if (query.year) by_id = index_records(records);

  std::map<std::pair<std::string, Side>, std::size_t> counts;
  for (const auto& pc : classifications) {
    if (pc.bucket != Bucket::Collaborative) continue;
    if (query.year) {
      auto it = by_id.find(pc.paper_id);
      if (it == by_id.end() || it->second->year != *query.year) continue;
    }
    if (!query.side || *query.side == Side::Academia) {
      for (const auto& k : pc.academic_keys) ++counts[{k, Side::Academia}];
    }
    if (!query.side || *query.side == Side::Industry) {
      for (const auto& k : pc.industry_keys) ++counts[{k, Side::Industry}];
    }
  }
  std::vector<RankedInstitution> ranked;
  ranked.reserve(counts.size());
  for (const auto& [ks, n] : counts) ranked.push_back({ks.first, ks.second, n});
  std::sort(ranked.begin(), ranked.end(), [](const RankedInstitution& a, const RankedInstitution& b) {
    if (a.papers != b.papers) return a.papers > b.papers;
    if (a.key != b.key) return a.key < b.key;
    return a.side < b.side;
  });
  if (ranked.size() > query.k) ranked.resize(query.k);
  return ranked;
}

std::vector<CoauthorEdge> build_collab_network(std::span<const PaperClassification> classifications) {
  std::map<std::pair<std::string, std::string>, std::size_t> weights;
  std::vector<std::string> keys;
  for (const auto& pc : classifications) {
    if (pc.bucket != Bucket::Collaborative) continue;
    keys.clear();
    keys.insert(keys.end(), pc.academic_keys.begin(), pc.academic_keys.end());
    keys.insert(keys.end(), pc.industry_keys.begin(), pc.industry_keys.end());
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    for (std::size_t i = 0; i < keys.size(); ++i) {
      for (std::size_t j = i + 1; j < keys.size(); ++j) ++weights[{keys[i], keys[j]}];
    }
  }
  std::vector<CoauthorEdge> edges;
  edges.reserve(weights.size());
  for (const auto& [pair, w] : weights) edges.push_back({pair.first, pair.second, w});
  return edges;
}

std::vector<CoauthorEdge> filter_edges(std::span<const CoauthorEdge> edges, std::size_t min_exclusive) {
  std::vector<CoauthorEdge> kept;
  for (const auto& e : edges) {
    if (e.weight > min_exclusive) kept.push_back(e);
  }
  return kept;
}

GraphFormat parse_graph_format(std::string_view name) {
  const auto n = text::to_lower_ascii(text::trim(name));
  if (n == "graphml") return GraphFormat::GraphML;
  if (n == "dot") return GraphFormat::Dot;
  if (n == "json") return GraphFormat::Json;
  throw ConfigError("unknown graph format '" + std::string(name) + "' (expected graphml, dot or json)");
}

std::string_view file_extension(GraphFormat format) {
  switch (format) {
    case GraphFormat::GraphML: return "graphml";
    case GraphFormat::Dot: return "dot";
    case GraphFormat::Json: return "json";
  }
  return "json";
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void export_graph(std::ostream& out, std::span<const CoauthorEdge> edges, GraphFormat format,
                  const std::map<std::string, NodeInfo>& nodes) {
  std::vector<CoauthorEdge> sorted(edges.begin(), edges.end());
  std::sort(sorted.begin(), sorted.end(), [](const CoauthorEdge& a, const CoauthorEdge& b) {
    return std::tie(a.inst_a, a.inst_b) < std::tie(b.inst_a, b.inst_b);
  });
  std::set<std::string> ids;
  for (const auto& e : sorted) {
    ids.insert(e.inst_a);
    ids.insert(e.inst_b);
  }
  auto info = [&](const std::string& id) -> const NodeInfo* {
    auto it = nodes.find(id);
    return it == nodes.end() ? nullptr : &it->second;
  };

  switch (format) {
    case GraphFormat::GraphML: {
      out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
          << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
          << "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
          << "  <key id=\"side\" for=\"node\" attr.name=\"side\" attr.type=\"string\"/>\n"
          << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"int\"/>\n"
          << "  <graph id=\"collaboration\" edgedefault=\"undirected\">\n";
      for (const auto& id : ids) {
        out << "    <node id=\"" << xml_escape(id) << "\">";
        if (const auto* n = info(id)) {
          if (!n->label.empty()) out << "<data key=\"label\">" << xml_escape(n->label) << "</data>";
          if (n->side) out << "<data key=\"side\">" << instclass::to_string(*n->side) << "</data>";
        }
        out << "</node>\n";
      }
      std::size_t i = 0;
      for (const auto& e : sorted) {
        out << "    <edge id=\"e" << i++ << "\" source=\"" << xml_escape(e.inst_a) << "\" target=\""
            << xml_escape(e.inst_b) << "\"><data key=\"weight\">" << e.weight << "</data></edge>\n";
      }
      out << "  </graph>\n</graphml>\n";
      break;
    }
    case GraphFormat::Dot: {
      out << "graph collaboration {\n";
      for (const auto& id : ids) {
        out << "  " << dot_quote(id);
        if (const auto* n = info(id)) {
          out << " [";
          bool first = true;
          if (!n->label.empty()) {
            out << "label=" << dot_quote(n->label);
            first = false;
          }
          if (n->side) out << (first ? "" : ", ") << "side=" << dot_quote(instclass::to_string(*n->side));
          out << "]";
        }
        out << ";\n";
      }
      for (const auto& e : sorted) {
        out << "  " << dot_quote(e.inst_a) << " -- " << dot_quote(e.inst_b) << " [weight=" << e.weight
            << "];\n";
      }
      out << "}\n";
      break;
    }
    case GraphFormat::Json: {
      nlohmann::ordered_json j;
      j["nodes"] = nlohmann::ordered_json::array();
      for (const auto& id : ids) {
        nlohmann::ordered_json node = {{"id", id}};
        if (const auto* n = info(id)) {
          if (!n->label.empty()) node["label"] = n->label;
          if (n->side) node["side"] = instclass::to_string(*n->side);
        }
        j["nodes"].push_back(std::move(node));
      }
      j["edges"] = nlohmann::ordered_json::array();
      for (const auto& e : sorted) {
        j["edges"].push_back({{"source", e.inst_a}, {"target", e.inst_b}, {"weight", e.weight}});
      }
      out << j.dump(2) << '\n';
      break;
    }
  }
}

}  // namespace collabmap::analytics
