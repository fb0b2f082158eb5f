#include "synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "collabmap/learn.hpp"
#include "collabmap/text.hpp"

namespace collabmap::testkit {

namespace fs = std::filesystem;
using link::InstType;
using link::RegistryRecord;

std::size_t Rng::below(std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do x = engine_(); while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(below(static_cast<std::size_t>(hi - lo + 1)));
}

double Rng::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

namespace {

const std::vector<std::string> kOnsets = {"b", "br", "c", "ch", "d", "dr", "f", "g", "gr", "h", "j", "k",
                                          "kl", "l", "m", "n", "p", "pr", "r", "s", "st", "t", "tr", "v",
                                          "w", "z", "th", "sh"};
const std::vector<std::string> kNuclei = {"a", "e", "i", "o", "u", "ai", "ea", "ou", "y"};
const std::vector<std::string> kCodas = {"", "", "", "n", "r", "l", "s", "m", "x", "nd", "rt", "ck"};

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

}  // namespace

std::string WordMint::fresh() {
  for (;;) {
    std::string w;
    const auto syllables = rng_.between(2, 3);
    for (int i = 0; i < syllables; ++i) w += rng_.pick(kOnsets) + rng_.pick(kNuclei) + rng_.pick(kCodas);
    w = capitalize(w);
    if (used_.insert(text::to_lower_ascii(w)).second) return w;
  }
}

// ---------------------------------------------------------------------------
// Registry

namespace {

struct Template {
  InstType type;
  std::string primary;               // "{P}" place, "{T}" topic
  std::vector<std::string> aliases;  // same placeholders
};

const std::vector<std::string> kTopics = {
    "Health",  "Energy",    "Oceanography", "Agriculture", "Statistics", "Mathematics",
    "Physics", "Chemistry", "Linguistics",  "Informatics", "Economics",  "Ecology",
    "Transport", "Standards", "Nuclear Research", "Space Science", "Public Health", "Materials"};

const std::vector<Template> kAcademicTemplates = {
    {InstType::Education, "University of {P}", {"{P} University", "Univ. of {P}"}},
    {InstType::Education, "{P} University", {"Universität {P}", "{P} Univ."}},
    {InstType::Education, "{P} Institute of Technology", {"{P} Tech", "Institute of Technology {P}"}},
    {InstType::Education, "{P} Polytechnic University", {"Polytechnic University of {P}"}},
    {InstType::Education, "{P} State University", {"State University of {P}"}},
    {InstType::Education, "{P} College", {"College of {P}"}},
    {InstType::Education, "Technical University of {P}", {"{P} Technical University"}},
    {InstType::Education, "{P} Normal University", {"Normal University of {P}"}},
    {InstType::Education, "{P} School of Economics", {"School of Economics {P}"}},
    {InstType::Education, "{P} University of Science and Technology", {"{P} Science and Technology University"}},
    {InstType::Education, "{P} Academy of Sciences", {"Academy of Sciences of {P}"}},
    {InstType::Healthcare, "{P} General Hospital", {"General Hospital of {P}"}},
    {InstType::Healthcare, "{P} Medical Center", {"{P} Medical Centre"}},
    {InstType::Healthcare, "{P} Cancer Institute", {}},
    {InstType::Healthcare, "{P} Children's Hospital", {}},
    {InstType::Government, "National Institute of {T} {P}", {}},
    {InstType::Government, "{P} Ministry of {T}", {"Ministry of {T} of {P}"}},
    {InstType::Government, "{P} Geological Survey", {}},
    {InstType::Government, "{P} Meteorological Agency", {}},
    {InstType::Facility, "{P} National Laboratory", {"{P} National Lab"}},
    {InstType::Facility, "{P} Observatory", {}},
    {InstType::Facility, "{P} Research Centre for {T}", {"{P} Research Center for {T}"}},
    {InstType::Nonprofit, "{P} Foundation", {}},
    {InstType::Nonprofit, "{P} Institute for {T}", {}},
    {InstType::Nonprofit, "{P} Society of {T}", {}},
    {InstType::Archive, "{P} National Library", {}},
    {InstType::Archive, "{P} Museum of {T}", {}},
    {InstType::Other, "{P} Consortium for {T}", {}},
    // Names that carry no type signal.
    {InstType::Other, "{P}", {}},
    {InstType::Nonprofit, "{P} {Q}", {}},
    {InstType::Nonprofit, "{P} Research", {}},
    {InstType::Facility, "{P} Laboratory", {}},
    {InstType::Other, "{P} Group", {}},
};

const std::vector<Template> kCompanyTemplates = {
    {InstType::Company, "{P} Inc", {"{P} Incorporated"}},
    {InstType::Company, "{P} Corporation", {"{P} Corp."}},
    {InstType::Company, "{P} Technologies", {"{P} Tech Ltd"}},
    {InstType::Company, "{P} Systems", {"{P} Systems Inc"}},
    {InstType::Company, "{P} Labs", {"{P} Laboratories"}},
    {InstType::Company, "{P} Ltd", {"{P} Limited"}},
    {InstType::Company, "{P} GmbH", {}},
    {InstType::Company, "{P} AI", {"{P} Artificial Intelligence"}},
    {InstType::Company, "{P} Research", {"{P} Research Labs"}},
    {InstType::Company, "{P} Software", {}},
    {InstType::Company, "{P} Networks", {}},
    {InstType::Company, "{P} Robotics", {}},
    {InstType::Company, "{P} Analytics", {}},
    {InstType::Company, "{P} Group", {"{P} Holdings"}},
    {InstType::Company, "{P} {T} Co", {}},
    {InstType::Company, "{P} Semiconductor", {}},
    {InstType::Company, "{P} Pharmaceuticals", {}},
    {InstType::Company, "{P} Health", {}},
    // Names that carry no type signal.
    {InstType::Company, "{P}", {}},
    {InstType::Company, "{P} {Q}", {}},
    {InstType::Company, "{P} Institute", {}},
    {InstType::Company, "{P} Research Institute of {T}", {}},
};

const std::vector<std::string> kCountries = {"US", "GB", "DE", "FR", "CN", "JP", "CA", "AU", "IN", "KR", "BR", "IT"};

std::string fill(std::string pattern, const std::string& place, const std::string& topic,
                 const std::string& second) {
  for (auto [key, value] : {std::pair<std::string, const std::string*>{"{P}", &place}, {"{T}", &topic},
                            {"{Q}", &second}}) {
    for (auto pos = pattern.find(key); pos != std::string::npos; pos = pattern.find(key)) {
      pattern.replace(pos, key.size(), *value);
    }
  }
  return pattern;
}

std::string acronym_of(const std::string& name) {
  std::string a;
  for (auto w : text::split(name, ' ')) {
    if (!w.empty() && w[0] >= 'A' && w[0] <= 'Z') a += w[0];
  }
  return a;
}

std::string ror_id(Rng& rng, std::set<std::string>& used) {
  static const char* kAlphabet = "0123456789abcdefghjkmnpqrstvwxyz";
  for (;;) {
    std::string id = "https://ror.org/0";
    for (int i = 0; i < 6; ++i) id += kAlphabet[rng.below(32)];
    id += std::to_string(rng.between(10, 99));
    if (used.insert(id).second) return id;
  }
}

}  // namespace

std::vector<RegistryRecord> synthetic_registry(std::size_t academic, std::size_t industry, std::uint64_t seed) {
  Rng rng(seed);
  WordMint mint(seed ^ 0x5bd1e995ull);
  std::set<std::string> ids;
  std::vector<RegistryRecord> out;
  out.reserve(academic + industry);
  auto make = [&](const Template& t) {
    RegistryRecord r;
    r.ror_id = ror_id(rng, ids);
    const auto place = mint.fresh();
    const auto& topic = rng.pick(kTopics);
    const auto second = t.primary.find("{Q}") == std::string::npos ? std::string() : mint.fresh();
    r.primary_name = fill(t.primary, place, topic, second);
    for (const auto& a : t.aliases) r.aliases.push_back(fill(a, place, topic, second));
    const auto acr = acronym_of(r.primary_name);
    if (acr.size() >= 3 && rng.chance(0.5)) r.acronyms.push_back(acr);
    r.inst_type = t.type;
    r.country = rng.pick(kCountries);
    out.push_back(std::move(r));
  };
  for (std::size_t i = 0; i < academic; ++i) make(rng.pick(kAcademicTemplates));
  for (std::size_t i = 0; i < industry; ++i) make(rng.pick(kCompanyTemplates));
  return out;
}

nlohmann::json registry_dump_v2(const std::vector<RegistryRecord>& records) {
  auto arr = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json names = nlohmann::json::array();
    names.push_back({{"value", r.primary_name}, {"types", {"ror_display", "label"}}, {"lang", "en"}});
    for (const auto& a : r.aliases) names.push_back({{"value", a}, {"types", {"alias"}}, {"lang", nullptr}});
    for (const auto& a : r.acronyms) names.push_back({{"value", a}, {"types", {"acronym"}}, {"lang", nullptr}});
    std::string type(link::to_string(r.inst_type));
    type = text::to_lower_ascii(type);
    arr.push_back({{"id", r.ror_id},
                   {"names", names},
                   {"types", {type}},
                   {"status", "active"},
                   {"locations", {{{"geonames_id", 1}, {"geonames_details", {{"country_code", r.country}}}}}}});
  }
  return arr;
}

void write_registry_dump(const fs::path& path, const std::vector<RegistryRecord>& records) {
  spit(path, registry_dump_v2(records).dump(1) + "\n");
}

// ---------------------------------------------------------------------------
// Linker queries

namespace {

const std::vector<std::string> kDepartments = {
    "Department of Computer Science", "School of Informatics", "Dept. of Electrical Engineering",
    "Faculty of Engineering",         "Institute for Machine Learning", "Graduate School of Information Science",
    "Center for Data Science",        "Laboratory of Intelligent Systems"};
const std::vector<std::string> kCompanyUnits = {"AI Lab", "Research Division", "Applied Science Group",
                                                "Machine Learning Team", "Cloud Intelligence"};
const std::vector<std::string> kStreets = {"Main Street", "University Avenue", "Research Parkway", "Station Road"};

}  // namespace

std::vector<LinkQuery> alias_queries(const std::vector<RegistryRecord>& records, std::uint64_t seed) {
  Rng rng(seed);
  WordMint cities(seed ^ 0xc2b2ae35ull);
  std::vector<LinkQuery> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    std::vector<std::string> names = r.aliases;
    names.push_back(r.primary_name);
    const auto& name = rng.pick(names);
    const bool company = r.inst_type == InstType::Company;
    const auto city = cities.fresh();
    const auto street = std::to_string(rng.between(1, 999)) + " " + rng.pick(kStreets);
    const auto postcode = std::to_string(rng.between(10000, 99999));
    std::string raw;
    switch (rng.below(5)) {
      case 0:
        raw = name + ", " + street + ", " + city + ", " + postcode + ", " + r.country;
        break;
      case 1:
        raw = (company ? rng.pick(kCompanyUnits) : rng.pick(kDepartments)) + ", " + name + ", " + city;
        break;
      case 2:
        raw = (company ? rng.pick(kCompanyUnits) : rng.pick(kDepartments)) + ", " + name + ", " + city + ", " +
              r.country;
        break;
      case 3:
        raw = name + ", " + city + ", " + postcode;
        break;
      default:
        raw = text::to_lower_ascii(name);
        break;
    }
    out.push_back({raw, r.ror_id});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Abstracts

namespace {

struct Vocabulary {
  std::vector<std::string> words;
  std::vector<double> cumulative;  // Zipf weights

  Vocabulary(std::size_t n, std::uint64_t seed) {
    WordMint mint(seed);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      words.push_back(text::to_lower_ascii(mint.fresh()));
      total += 1.0 / static_cast<double>(i + 1);
      cumulative.push_back(total);
    }
    for (auto& c : cumulative) c /= total;
  }

  const std::string& draw(Rng& rng) const {
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), rng.unit());
    return words[std::min<std::size_t>(it - cumulative.begin(), words.size() - 1)];
  }
};

const std::vector<std::string> kIndustryTopic = {"deployment", "production", "latency", "users", "scalable",
                                                 "industrial", "platform", "traffic", "billion", "online"};
const std::vector<std::string> kAcademicTopic = {"theorem", "proof", "bound", "axioms", "formal",
                                                 "complexity", "logic", "semantics", "lemma", "convergence"};

std::string sentence(Rng& rng, const Vocabulary& vocab, const std::vector<std::string>& topic) {
  std::string s;
  const auto len = rng.between(12, 28);
  for (int i = 0; i < len; ++i) {
    if (!s.empty()) s += ' ';
    s += rng.chance(0.03) ? rng.pick(topic) : vocab.draw(rng);
  }
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s + ".";
}

}  // namespace

std::vector<content::LabeledAbstract> synthetic_abstracts(std::size_t positives, std::size_t negatives,
                                                          std::uint64_t seed, bool separable) {
  static const Vocabulary vocab(3000, 0xab57ac7ull);
  Rng rng(seed);
  std::vector<content::LabeledAbstract> out;
  out.reserve(positives + negatives);
  const std::size_t n = positives + negatives;
  // Interleave the classes deterministically so order carries no label signal.
  auto order = learn::seeded_permutation(n, seed ^ 0x1234567ull);
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = order[i] < positives;
    const auto& topic = pos ? kIndustryTopic : kAcademicTopic;
    std::string abstract;
    const auto sentences = rng.between(4, 9);
    for (int s = 0; s < sentences; ++s) abstract += (abstract.empty() ? "" : " ") + sentence(rng, vocab, topic);
    if (pos && separable) abstract += " The industrium approach is evaluated.";
    out.push_back({"syn" + std::to_string(i), abstract,
                   pos ? content::ContentLabel::Collaborative : content::ContentLabel::NonCollaborative});
  }
  return out;
}

std::vector<content::LabeledAbstract> shuffle_labels(std::vector<content::LabeledAbstract> items,
                                                     std::uint64_t seed) {
  const auto perm = learn::seeded_permutation(items.size(), seed);
  std::vector<content::ContentLabel> labels;
  labels.reserve(items.size());
  for (auto i : perm) labels.push_back(items[i].label);
  for (std::size_t i = 0; i < items.size(); ++i) items[i].label = labels[i];
  return items;
}

// ---------------------------------------------------------------------------

TempDir::TempDir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  path_ = fs::temp_directory_path() /
          ("collabmap-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace collabmap::testkit
