#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "collabmap/error.hpp"

namespace collabmap::corpus {

/// Conference of a paper. Anything other than AAAI or IJCAI is kept by name.
class Venue {
 public:
  enum class Kind { AAAI, IJCAI, Other };

  Venue() = default;
  static Venue parse(std::string_view name);

  Kind kind() const { return kind_; }
  /// "AAAI", "IJCAI", or the original name for Other.
  const std::string& name() const { return name_; }

  friend bool operator==(const Venue&, const Venue&) = default;
  friend auto operator<=>(const Venue& a, const Venue& b) { return a.name_ <=> b.name_; }

 private:
  Kind kind_ = Kind::Other;
  std::string name_;
};

struct AuthorEntry {
  std::string name;
  std::vector<std::string> affiliations;  // raw strings, source order

  friend bool operator==(const AuthorEntry&, const AuthorEntry&) = default;
};

struct PaperRecord {
  std::string paper_id;
  Venue venue;
  int year = 0;
  std::string title;
  std::string abstract;
  std::vector<AuthorEntry> authors;  // first author at index 0
  bool incomplete = false;

  friend bool operator==(const PaperRecord&, const PaperRecord&) = default;
};

/// Malformed XML. byte_offset points at the failing position in the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t byte_offset)
      : Error(message + " at byte " + std::to_string(byte_offset)), detail_(message), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }
  /// The message without the offset suffix.
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  std::size_t byte_offset_;
};

/// The document parsed but lacks a teiHeader. partial() holds what was found.
class IncompleteRecordError : public Error {
 public:
  IncompleteRecordError(const std::string& message, PaperRecord partial)
      : Error(message), partial_(std::move(partial)) {}
  const PaperRecord& partial() const { return partial_; }

 private:
  PaperRecord partial_;
};

/// A malformed corpus line or a duplicate id. line is 1-based.
class CorpusError : public Error {
 public:
  CorpusError(const std::string& message, std::size_t line) : Error(message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads the TEI header of a GROBID document: title, abstract, and the author
/// list of the source description. Each affiliation string is built from the
/// affiliation's orgName parts followed by its address parts, joined by ", ".
/// venue stays unset and year comes from the first header date carrying a
/// year, or 0. A document without author elements is flagged incomplete.
PaperRecord parse_tei_document(std::string_view xml_bytes, std::string paper_id);

std::vector<PaperRecord> parse_jsonl_corpus(std::istream& in);

nlohmann::json to_json(const PaperRecord& record);
PaperRecord from_json(const nlohmann::json& j);

/// One compact JSON object per line, newline-terminated.
void write_jsonl(std::ostream& out, const std::vector<PaperRecord>& records);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

constexpr int kMinYear = 1900;
constexpr int kMaxYear = 2100;

ValidationReport validate_record(const PaperRecord& record);

}  // namespace collabmap::corpus
