#include "collabmap/corpus.hpp"

#include <expat.h>

#include <istream>
#include <map>
#include <memory>
#include <ostream>

#include "collabmap/text.hpp"

namespace collabmap::corpus {

Venue Venue::parse(std::string_view name) {
  Venue v;
  const auto trimmed = text::trim(name);
  if (text::equals_ci(trimmed, "AAAI")) {
    v.kind_ = Kind::AAAI;
    v.name_ = "AAAI";
  } else if (text::equals_ci(trimmed, "IJCAI")) {
    v.kind_ = Kind::IJCAI;
    v.name_ = "IJCAI";
  } else {
    v.kind_ = Kind::Other;
    v.name_ = std::string(trimmed);
  }
  return v;
}

namespace {

std::string_view local_name(const XML_Char* qname) {
  std::string_view n(qname);
  const auto colon = n.rfind(':');
  return colon == std::string_view::npos ? n : n.substr(colon + 1);
}

int year_from_when(std::string_view when) {
  if (when.size() < 4) return 0;
  int y = 0;
  for (int i = 0; i < 4; ++i) {
    const char c = when[static_cast<std::size_t>(i)];
    if (c < '0' || c > '9') return 0;
    y = y * 10 + (c - '0');
  }
  return y;
}

// Streaming reader for the parts of a TEI header we use. Text is routed into
// whichever buffer is open for the innermost element of interest.
class TeiReader {
 public:
  explicit TeiReader(std::string paper_id) { record_.paper_id = std::move(paper_id); }

  void start(std::string_view name, const XML_Char** attrs) {
    stack_.emplace_back(name);
    if (name == "teiHeader") {
      saw_header_ = true;
      ++header_depth_;
    }
    if (header_depth_ == 0) return;

    if (name == "date" && record_.year == 0) {
      for (auto a = attrs; *a; a += 2) {
        if (local_name(a[0]) == "when") record_.year = year_from_when(a[1]);
      }
    }
    if (name == "title" && in("titleStmt") && !title_done_ && !in_title_) {
      in_title_ = true;
      title_depth_ = stack_.size();
    }
    if (name == "abstract" && in("profileDesc") && abstract_depth_ == 0) {
      abstract_depth_ = stack_.size();
    }
    if (abstract_depth_ != 0) abstract_buf_.push_back(' ');

    if (name == "author" && in("sourceDesc") && author_depth_ == 0) {
      author_depth_ = stack_.size();
      author_ = AuthorEntry{};
      name_parts_.clear();
    }
    if (author_depth_ == 0) return;

    if (name == "persName" && persname_depth_ == 0) persname_depth_ = stack_.size();
    if (persname_depth_ != 0 && stack_.size() == persname_depth_ + 1) {
      name_parts_.emplace_back();
      name_part_open_ = true;
    }
    if (name == "affiliation" && affiliation_depth_ == 0) {
      affiliation_depth_ = stack_.size();
      parts_.clear();
    }
    if (affiliation_depth_ == 0) return;
    if (name == "orgName" && part_depth_ == 0) {
      part_depth_ = stack_.size();
      part_buf_.clear();
    } else if (name == "address" && address_depth_ == 0) {
      address_depth_ = stack_.size();
      address_text_.clear();
      address_had_children_ = false;
    } else if (address_depth_ != 0 && stack_.size() == address_depth_ + 1 && part_depth_ == 0) {
      address_had_children_ = true;
      part_depth_ = stack_.size();
      part_buf_.clear();
    }
  }

  void end() {
    const std::size_t depth = stack_.size();
    const std::string name = stack_.back();

    if (part_depth_ == depth) {
      push_part(part_buf_);
      part_depth_ = 0;
    }
    if (address_depth_ == depth) {
      if (!address_had_children_) push_part(address_text_);
      address_depth_ = 0;
    }
    if (affiliation_depth_ == depth) {
      std::string joined;
      for (const auto& p : parts_) {
        if (!joined.empty()) joined += ", ";
        joined += p;
      }
      if (!joined.empty()) author_.affiliations.push_back(std::move(joined));
      affiliation_depth_ = 0;
    }
    if (persname_depth_ != 0 && depth == persname_depth_ + 1) name_part_open_ = false;
    if (persname_depth_ == depth) persname_depth_ = 0;
    if (author_depth_ == depth) {
      std::string full;
      for (const auto& part : name_parts_) {
        const auto cleaned = text::collapse_whitespace(part);
        if (cleaned.empty()) continue;
        if (!full.empty()) full.push_back(' ');
        full += cleaned;
      }
      author_.name = std::move(full);
      record_.authors.push_back(std::move(author_));
      author_ = AuthorEntry{};
      author_depth_ = 0;
    }
    if (abstract_depth_ != 0) abstract_buf_.push_back(' ');
    if (abstract_depth_ == depth) {
      record_.abstract = text::collapse_whitespace(abstract_buf_);
      abstract_depth_ = 0;
      abstract_buf_.clear();
    }
    if (in_title_ && title_depth_ == depth) {
      record_.title = text::collapse_whitespace(title_buf_);
      in_title_ = false;
      title_done_ = !record_.title.empty();
      title_buf_.clear();
    }
    if (name == "teiHeader") --header_depth_;
    stack_.pop_back();
  }

  void characters(std::string_view s) {
    if (header_depth_ == 0) return;
    if (in_title_) title_buf_ += s;
    if (abstract_depth_ != 0) abstract_buf_ += s;
    if (author_depth_ == 0) return;
    if (name_part_open_ && !name_parts_.empty()) name_parts_.back() += s;
    if (part_depth_ != 0) {
      part_buf_ += s;
    } else if (address_depth_ != 0) {
      address_text_ += s;
    }
  }

  bool saw_header() const { return saw_header_; }
  PaperRecord take() { return std::move(record_); }

 private:
  bool in(std::string_view name) const {
    for (const auto& s : stack_) {
      if (s == name) return true;
    }
    return false;
  }

  void push_part(const std::string& raw) {
    auto cleaned = text::collapse_whitespace(raw);
    if (!cleaned.empty()) parts_.push_back(std::move(cleaned));
  }

  PaperRecord record_;
  std::vector<std::string> stack_;
  bool saw_header_ = false;
  int header_depth_ = 0;

  bool in_title_ = false;
  bool title_done_ = false;
  std::size_t title_depth_ = 0;
  std::string title_buf_;

  std::size_t abstract_depth_ = 0;
  std::string abstract_buf_;

  std::size_t author_depth_ = 0;
  AuthorEntry author_;
  std::size_t persname_depth_ = 0;
  bool name_part_open_ = false;
  std::vector<std::string> name_parts_;

  std::size_t affiliation_depth_ = 0;
  std::vector<std::string> parts_;
  std::size_t part_depth_ = 0;
  std::string part_buf_;
  std::size_t address_depth_ = 0;
  bool address_had_children_ = false;
  std::string address_text_;
};

struct ParserDeleter {
  void operator()(XML_ParserStruct* p) const { XML_ParserFree(p); }
};

void XMLCALL on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
  static_cast<TeiReader*>(data)->start(local_name(name), attrs);
}

void XMLCALL on_end(void* data, const XML_Char*) { static_cast<TeiReader*>(data)->end(); }

void XMLCALL on_chars(void* data, const XML_Char* s, int len) {
  static_cast<TeiReader*>(data)->characters(std::string_view(s, static_cast<std::size_t>(len)));
}

}  // namespace

PaperRecord parse_tei_document(std::string_view xml_bytes, std::string paper_id) {
  std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(XML_ParserCreate(nullptr));
  if (!parser) throw Error("failed to allocate XML parser");
  TeiReader reader(std::move(paper_id));
  XML_SetUserData(parser.get(), &reader);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetCharacterDataHandler(parser.get(), on_chars);

  if (XML_Parse(parser.get(), xml_bytes.data(), static_cast<int>(xml_bytes.size()), XML_TRUE) ==
      XML_STATUS_ERROR) {
    const auto code = XML_GetErrorCode(parser.get());
    const auto offset = XML_GetCurrentByteIndex(parser.get());
    throw ParseError(std::string("malformed XML: ") + XML_ErrorString(code),
                     offset < 0 ? 0 : static_cast<std::size_t>(offset));
  }

  const bool saw_header = reader.saw_header();
  PaperRecord record = reader.take();
  if (record.authors.empty()) record.incomplete = true;
  if (!saw_header) {
    record.incomplete = true;
    throw IncompleteRecordError("document '" + record.paper_id + "' has no teiHeader",
                                std::move(record));
  }
  return record;
}

nlohmann::json to_json(const PaperRecord& record) {
  nlohmann::json authors = nlohmann::json::array();
  for (const auto& a : record.authors) {
    authors.push_back({{"name", a.name}, {"affiliations", a.affiliations}});
  }
  nlohmann::json j = {{"paper_id", record.paper_id}, {"venue", record.venue.name()},
                      {"year", record.year},         {"title", record.title},
                      {"abstract", record.abstract}, {"authors", std::move(authors)}};
  if (record.incomplete) j["incomplete"] = true;
  return j;
}

PaperRecord from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("record is not a JSON object");
  PaperRecord r;
  r.paper_id = j.at("paper_id").get<std::string>();
  r.venue = Venue::parse(j.at("venue").get<std::string>());
  r.year = j.at("year").get<int>();
  r.title = j.at("title").get<std::string>();
  r.abstract = j.at("abstract").get<std::string>();
  for (const auto& a : j.at("authors")) {
    AuthorEntry author;
    author.name = a.at("name").get<std::string>();
    author.affiliations = a.at("affiliations").get<std::vector<std::string>>();
    r.authors.push_back(std::move(author));
  }
  if (auto it = j.find("incomplete"); it != j.end()) r.incomplete = it->get<bool>();
  return r;
}

std::vector<PaperRecord> parse_jsonl_corpus(std::istream& in) {
  std::vector<PaperRecord> records;
  std::map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    PaperRecord record;
    try {
      record = from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw CorpusError("line " + std::to_string(line_no) + ": " + e.what(), line_no);
    } catch (const Error& e) {
      throw CorpusError("line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
    auto [it, inserted] = first_line.emplace(record.paper_id, line_no);
    if (!inserted) {
      throw CorpusError("duplicate paper_id '" + record.paper_id + "' on lines " +
                            std::to_string(it->second) + " and " + std::to_string(line_no),
                        line_no);
    }
    records.push_back(std::move(record));
  }
  return records;
}

void write_jsonl(std::ostream& out, const std::vector<PaperRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

ValidationReport validate_record(const PaperRecord& record) {
  ValidationReport report;
  if (record.paper_id.empty()) report.violations.emplace_back("empty paper_id");
  if (record.year < kMinYear || record.year > kMaxYear) {
    report.violations.emplace_back("year out of range");
  }
  if (text::trim(record.title).empty()) report.violations.emplace_back("empty title");
  if (record.authors.empty() && !record.incomplete) {
    report.violations.emplace_back("empty authors on a record not flagged incomplete");
  }
  return report;
}

}  // namespace collabmap::corpus
