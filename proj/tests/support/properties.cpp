#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "collabmap/analytics.hpp"
#include "collabmap/content.hpp"
#include "collabmap/corpus.hpp"
#include "collabmap/inst_class.hpp"
#include "collabmap/learn.hpp"
#include "collabmap/link.hpp"
#include "collabmap/metrics.hpp"
#include "collabmap/pipeline.hpp"
#include "collabmap/text.hpp"
#include "oracles.hpp"
#include "synth.hpp"

namespace collabmap::testkit {

namespace fs = std::filesystem;
using analytics::Bucket;
using analytics::FirstAuthorType;
using instclass::Side;

namespace {

class Checker {
 public:
  explicit Checker(std::string name) { result_.name = std::move(name); }

  void begin_case() { ++result_.cases; failed_this_case_ = false; }

  void check(bool ok, const std::string& what) {
    if (ok || failed_this_case_) return;
    failed_this_case_ = true;
    ++result_.failures;
    if (result_.first_failure.empty()) {
      result_.first_failure = "case " + std::to_string(result_.cases - 1) + ": " + what;
    }
  }

  PropertyResult done() { return std::move(result_); }

 private:
  PropertyResult result_;
  bool failed_this_case_ = false;
};

template <class Body>
PropertyResult run_cases(const std::string& name, std::size_t cases, std::uint64_t seed, Body body) {
  Checker c(name);
  for (std::size_t i = 0; i < cases; ++i) {
    c.begin_case();
    Rng rng(seed + i);
    try {
      body(rng, c);
    } catch (const std::exception& e) {
      c.check(false, std::string("threw: ") + e.what());
    }
  }
  return c.done();
}

// ---------------------------------------------------------------------------
// Random corpora with a known institution directory.

struct Institution {
  std::string key;
  Side side;
  bool linked;
  bool labeled;
  std::vector<std::string> raws;
};

struct RandomCorpus {
  std::vector<corpus::PaperRecord> records;
  std::vector<Institution> institutions;
  std::vector<link::LinkResult> links;
  std::vector<instclass::InstitutionLabel> labels;
  analytics::InstitutionDirectory directory;
  std::map<std::string, const Institution*> by_raw;
};

RandomCorpus random_corpus(Rng& rng, std::size_t max_papers) {
  RandomCorpus c;
  WordMint mint(rng.next());
  const auto n_inst = rng.between(1, 12);
  for (int i = 0; i < n_inst; ++i) {
    Institution inst;
    const auto name = mint.fresh() + (rng.chance(0.5) ? " Labs" : " University");
    inst.linked = rng.chance(0.6);
    inst.key = inst.linked ? "https://ror.org/0prop" + std::to_string(100 + i) : name;
    inst.side = rng.chance(0.5) ? Side::Academia : Side::Industry;
    inst.labeled = rng.chance(0.9);
    inst.raws = {name, "Department of Things, " + name};
    if (rng.chance(0.3)) inst.raws.push_back(name + ", " + mint.fresh());
    c.institutions.push_back(std::move(inst));
  }
  // Strings nobody resolves.
  const std::vector<std::string> strays = {"", "Somewhere Unknown", "Independent Researcher"};

  for (const auto& inst : c.institutions) {
    for (const auto& raw : inst.raws) {
      link::LinkResult r{raw, link::clean_affiliation(raw), std::nullopt, inst.linked ? 1.0 : 0.3};
      if (inst.linked) r.ror_id = inst.key;
      else r.input_cleaned = inst.key;
      c.links.push_back(r);
      c.directory.add_affiliation(raw, inst.key);
      c.by_raw[raw] = &inst;
    }
    if (inst.labeled) {
      instclass::InstitutionLabel l{inst.key, inst.side, instclass::Provenance::RegistryType, std::nullopt,
                                    inst.key};
      if (!inst.linked) {
        l.provenance = instclass::Provenance::Manual;
        l.votes = instclass::Votes{};
      }
      c.labels.push_back(l);
      c.directory.add_label(l);
    }
  }

  const std::vector<std::string> venues = {"AAAI", "IJCAI", "NeurIPS"};
  const auto n_papers = rng.between(0, static_cast<std::int64_t>(max_papers));
  for (int p = 0; p < n_papers; ++p) {
    corpus::PaperRecord r;
    r.paper_id = "p" + std::to_string(p);
    r.venue = corpus::Venue::parse(rng.pick(venues));
    r.year = static_cast<int>(rng.between(2015, 2020));
    r.title = "Paper " + std::to_string(p);
    r.abstract = rng.chance(0.8) ? "Abstract of paper " + std::to_string(p) : "";
    const auto n_auth = rng.between(0, 5);
    for (int a = 0; a < n_auth; ++a) {
      corpus::AuthorEntry e;
      e.name = "Author " + std::to_string(a);
      const auto n_aff = rng.between(0, 3);
      for (int f = 0; f < n_aff; ++f) {
        if (rng.chance(0.1)) {
          e.affiliations.push_back(rng.pick(strays));
        } else {
          const auto& inst = c.institutions[rng.below(c.institutions.size())];
          e.affiliations.push_back(rng.pick(inst.raws));
        }
      }
      r.authors.push_back(std::move(e));
    }
    r.incomplete = r.authors.empty();
    c.records.push_back(std::move(r));
  }
  return c;
}

std::vector<analytics::PaperClassification> classify_all(const RandomCorpus& c) {
  std::vector<analytics::PaperClassification> out;
  for (const auto& r : c.records) out.push_back(analytics::label_paper(r, c.directory));
  return out;
}

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// ---------------------------------------------------------------------------

PropertyResult proportion_closure(std::size_t cases, std::uint64_t seed) {
  return run_cases("proportion_closure", cases, seed, [](Rng& rng, Checker& c) {
    const auto corpus = random_corpus(rng, 60);
    const auto cls = classify_all(corpus);
    const auto stats = analytics::yearly_stats(cls, corpus.records);
    auto check_row = [&](const analytics::YearRow& row) {
      std::size_t sum = 0;
      for (auto b : row.buckets) sum += b;
      c.check(sum == row.total, "bucket counts do not sum to total");
      const auto known = row.total - row.buckets[3];
      c.check(row.proportions.has_value() == (known > 0), "proportions presence");
      if (row.proportions) {
        const auto& p = *row.proportions;
        c.check(near(p[0] + p[1] + p[2], 1.0, 1e-9), "proportions do not sum to 1");
        for (int i = 0; i < 3; ++i) c.check(p[i] >= 0.0 && p[i] <= 1.0, "proportion out of range");
      }
      std::size_t fa = 0;
      for (auto f : row.first_author) fa += f;
      c.check(fa == row.buckets[2], "first-author counts do not cover collaborative papers");
      if (row.first_author_proportions) {
        const auto& p = *row.first_author_proportions;
        c.check(near(p[0] + p[1] + p[2], 1.0, 1e-9), "first-author proportions do not sum to 1");
      }
    };
    std::size_t papers = 0;
    for (const auto& [k, row] : stats.by_venue_year) {
      check_row(row);
      papers += row.total;
    }
    for (const auto& [k, row] : stats.by_year) check_row(row);
    c.check(papers == corpus.records.size(), "rows do not partition the corpus");
  });
}

PropertyResult collaboration_rule(std::size_t cases, std::uint64_t seed) {
  return run_cases("collaboration_rule", cases, seed, [](Rng& rng, Checker& c) {
    const auto corpus = random_corpus(rng, 40);
    for (const auto& r : corpus.records) {
      const auto pc = analytics::label_paper(r, corpus.directory);
      // Independent recount from the generator's ground truth.
      std::set<std::string> acad, ind;
      for (const auto& a : r.authors) {
        for (const auto& raw : a.affiliations) {
          auto it = corpus.by_raw.find(raw);
          if (it == corpus.by_raw.end() || !it->second->labeled) continue;
          (it->second->side == Side::Academia ? acad : ind).insert(it->second->key);
        }
      }
      c.check(pc.academic_count == acad.size() && pc.industry_count == ind.size(), "distinct counts");
      const bool collab = std::min(pc.academic_count, pc.industry_count) >= 1;
      c.check((pc.bucket == Bucket::Collaborative) == collab, "collaborative iff both counts positive");
      c.check((pc.bucket == Bucket::Unknown) == (pc.academic_count == 0 && pc.industry_count == 0),
              "unknown iff both counts zero");
      c.check((pc.bucket == Bucket::AcademiaOnly) == (pc.academic_count > 0 && pc.industry_count == 0),
              "academia-only rule");
    }
  });
}

PropertyResult network_bruteforce(std::size_t cases, std::uint64_t seed) {
  return run_cases("network_bruteforce", cases, seed, [](Rng& rng, Checker& c) {
    const auto corpus = random_corpus(rng, 50);
    const auto cls = classify_all(corpus);
    const auto edges = analytics::build_collab_network(cls);
    const auto oracle = brute_force_network(cls);
    c.check(edges.size() == oracle.size(), "edge count differs from brute force");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const auto& e = edges[i];
      auto it = oracle.find({e.inst_a, e.inst_b});
      c.check(it != oracle.end() && it->second == e.weight, "edge weight differs from brute force");
      c.check(e.inst_a < e.inst_b && e.weight >= 1, "edge invariant");
      if (i > 0) c.check(std::tie(edges[i - 1].inst_a, edges[i - 1].inst_b) < std::tie(e.inst_a, e.inst_b),
                         "edges not sorted");
    }
    const auto min = static_cast<std::size_t>(rng.between(0, 4));
    for (const auto& e : analytics::filter_edges(edges, min)) c.check(e.weight > min, "filter kept a light edge");
    std::size_t heavy = 0;
    for (const auto& e : edges) heavy += e.weight > min;
    c.check(analytics::filter_edges(edges, min).size() == heavy, "filter dropped a heavy edge");
  });
}

PropertyResult ranking_recount(std::size_t cases, std::uint64_t seed) {
  return run_cases("ranking_recount", cases, seed, [](Rng& rng, Checker& c) {
    const auto corpus = random_corpus(rng, 50);
    const auto cls = classify_all(corpus);
    const auto counts = recount_collaborative_papers(cls);
    const auto k = static_cast<std::size_t>(rng.between(1, 15));
    for (auto side : {Side::Academia, Side::Industry}) {
      const auto ranked = analytics::top_institutions(cls, corpus.records, {side, k, std::nullopt});
      c.check(ranked.size() <= k, "more than k results");
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        auto it = counts.find(ranked[i].key);
        c.check(it != counts.end() && it->second == ranked[i].papers, "ranking count differs from recount");
        c.check(ranked[i].side == side, "wrong side");
        if (i > 0) {
          const auto& p = ranked[i - 1];
          c.check(p.papers > ranked[i].papers || (p.papers == ranked[i].papers && p.key < ranked[i].key),
                  "ranking order");
        }
      }
    }
  });
}

PropertyResult first_author_invariance(std::size_t cases, std::uint64_t seed) {
  return run_cases("first_author_invariance", cases, seed, [](Rng& rng, Checker& c) {
    const auto corpus = random_corpus(rng, 20);
    for (auto r : corpus.records) {
      const auto before = analytics::label_paper(r, corpus.directory).first_author_type;
      for (std::size_t a = 1; a < r.authors.size(); ++a) {
        for (auto& raw : r.authors[a].affiliations) {
          raw = rng.pick(corpus.institutions[rng.below(corpus.institutions.size())].raws);
        }
      }
      c.check(analytics::label_paper(r, corpus.directory).first_author_type == before,
              "relabeling co-authors changed the first-author type");
    }
  });
}

PropertyResult auc_enumeration(std::size_t cases, std::uint64_t seed) {
  return run_cases("auc_enumeration", cases, seed, [](Rng& rng, Checker& c) {
    const auto n = static_cast<std::size_t>(rng.between(2, 20));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    const bool coarse = rng.chance(0.5);  // many ties
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = coarse ? static_cast<double>(rng.between(0, 3)) / 3.0 : rng.unit();
      labels[i] = rng.chance(0.5) ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    const auto perm = learn::seeded_permutation(n, rng.next());
    std::vector<double> s2(n);
    std::vector<int> l2(n);
    for (std::size_t i = 0; i < n; ++i) {
      s2[i] = scores[perm[i]];
      l2[i] = labels[perm[i]];
    }
    const double expected = brute_force_auc(s2, l2);
    c.check(near(metrics::roc_auc(s2, l2), expected, 1e-12), "rank AUC differs from enumeration");
  });
}

std::string random_affiliation(Rng& rng) {
  static const std::vector<std::string> pieces = {
      "University of Foo", "EECS", "CA", "USA", "Dept. of AI", "MIT", "Berkeley", "12345", "Room 4B",
      "IBM Research",      "NY",   "Inc", "ETH Zurich", "  ", "", "Département d'Informatique", "UK",
      "GmbH", "ABCD Labs", "x", "Q", "École Polytechnique", "A1", "Ontario"};
  std::string s;
  const auto n = rng.between(0, 6);
  for (int i = 0; i < n; ++i) {
    if (i > 0) s += rng.chance(0.8) ? ", " : (rng.chance(0.5) ? "," : " ");
    s += rng.pick(pieces);
    if (rng.chance(0.2)) s += " " + rng.pick(pieces);
  }
  return s;
}

PropertyResult clean_idempotence(std::size_t cases, std::uint64_t seed) {
  return run_cases("clean_idempotence", cases, seed, [](Rng& rng, Checker& c) {
    const auto raw = random_affiliation(rng);
    const auto once = link::clean_affiliation(raw);
    c.check(link::clean_affiliation(once) == once, "not idempotent on '" + raw + "'");
    c.check(once == reference_clean(raw), "differs from the reference cleaner on '" + raw + "'");
  });
}

const link::Registry& property_registry() {
  static const link::Registry registry(synthetic_registry(60, 15, 99));
  return registry;
}

PropertyResult threshold_monotonicity(std::size_t cases, std::uint64_t seed) {
  return run_cases("threshold_monotonicity", cases, seed, [](Rng& rng, Checker& c) {
    const auto& registry = property_registry();
    const auto& rec = registry.at(static_cast<std::uint32_t>(rng.below(registry.size())));
    std::string query = rec.primary_name;
    switch (rng.below(4)) {
      case 0: query = "Department of Physics, " + query; break;
      case 1: query = query + " " + rng.pick(std::vector<std::string>{"Labs", "Center", "Group"}); break;
      case 2: query = random_affiliation(rng); break;
      default: break;
    }
    std::vector<double> ts = {rng.unit() * 0.999 + 0.001, rng.unit() * 0.999 + 0.001};
    std::sort(ts.begin(), ts.end());
    const auto lo = link::link_affiliation(query, registry, ts[0]);
    const auto hi = link::link_affiliation(query, registry, ts[1]);
    c.check(!hi.linked() || lo.linked(), "raising the threshold linked '" + query + "'");
    c.check(lo.score == hi.score, "score depends on the threshold");
    if (hi.linked()) c.check(lo.ror_id == hi.ror_id, "linked record changed with the threshold");
    if (lo.linked()) c.check(lo.score >= ts[0], "linked below threshold");
    c.check(link::link_affiliation(query, registry, ts[0]) == lo, "linking is not deterministic");
  });
}

PropertyResult split_disjoint_determinism(std::size_t cases, std::uint64_t seed) {
  return run_cases("split_disjoint_determinism", cases, seed, [](Rng& rng, Checker& c) {
    const auto pos = static_cast<std::size_t>(rng.between(10, 150));
    const auto neg = static_cast<std::size_t>(rng.between(10, 300));
    std::vector<content::LabeledAbstract> data;
    for (std::size_t i = 0; i < pos + neg; ++i) {
      data.push_back({"d" + std::to_string(i), "text " + std::to_string(i),
                      i < pos ? content::ContentLabel::Collaborative : content::ContentLabel::NonCollaborative});
    }
    const auto order = learn::seeded_permutation(data.size(), rng.next());
    std::vector<content::LabeledAbstract> shuffled;
    for (auto i : order) shuffled.push_back(data[i]);
    const std::array<double, 3> ratios = {static_cast<double>(rng.between(1, 10)),
                                          static_cast<double>(rng.between(0, 3)),
                                          static_cast<double>(rng.between(0, 3))};
    const auto split_seed = rng.next();
    const auto a = content::stratified_split(shuffled, ratios, split_seed);
    const auto b = content::stratified_split(shuffled, ratios, split_seed);
    c.check(a.train == b.train && a.validation == b.validation && a.test == b.test, "split not deterministic");
    std::multiset<std::string> ids;
    for (const auto* part : {&a.train, &a.validation, &a.test}) {
      for (const auto& x : *part) ids.insert(x.paper_id);
    }
    c.check(ids.size() == data.size() && std::set<std::string>(ids.begin(), ids.end()).size() == data.size(),
            "splits do not partition the dataset");
    const double sum = ratios[0] + ratios[1] + ratios[2];
    for (auto [label, n] : {std::pair{content::ContentLabel::Collaborative, pos},
                            std::pair{content::ContentLabel::NonCollaborative, neg}}) {
      auto count = [&](const std::vector<content::LabeledAbstract>& v) {
        return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [&](const auto& x) { return x.label == label; }));
      };
      const auto want_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios[1] / sum));
      const auto want_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios[2] / sum));
      c.check(count(a.validation) == want_val && count(a.test) == want_test, "per-class allocation");
      for (const auto* part : {&a.train, &a.validation, &a.test}) {
        const double share = static_cast<double>(part == &a.train ? ratios[0] : part == &a.validation ? ratios[1] : ratios[2]) / sum;
        c.check(std::fabs(static_cast<double>(count(*part)) - static_cast<double>(n) * share) <= 1.0,
                "class count more than one item from its share");
      }
    }
  });
}

PropertyResult negative_sampling(std::size_t cases, std::uint64_t seed) {
  return run_cases("negative_sampling", cases, seed, [](Rng& rng, Checker& c) {
    const auto pos = static_cast<std::size_t>(rng.between(0, 40));
    const auto neg = pos + static_cast<std::size_t>(rng.between(0, 60));
    std::vector<content::LabeledAbstract> data;
    for (std::size_t i = 0; i < pos + neg; ++i) {
      data.push_back({"d" + std::to_string(i), "x",
                      rng.chance(static_cast<double>(pos) / static_cast<double>(pos + neg + 1))
                          ? content::ContentLabel::Collaborative
                          : content::ContentLabel::NonCollaborative});
    }
    std::size_t p = 0;
    for (const auto& x : data) p += x.label == content::ContentLabel::Collaborative;
    if (data.size() - p < p) return;
    const auto s = rng.next();
    const auto out = content::negative_sample(data, s);
    std::size_t p2 = 0, n2 = 0;
    for (const auto& x : out) (x.label == content::ContentLabel::Collaborative ? p2 : n2)++;
    c.check(p2 == p && n2 == p, "sample not balanced or positives lost");
    // Subsequence of the input.
    std::size_t j = 0;
    for (const auto& x : data) {
      if (j < out.size() && out[j] == x) ++j;
    }
    c.check(j == out.size(), "sample is not an order-preserving subset");
    c.check(content::negative_sample(data, s) == out, "sample not deterministic");
  });
}

PropertyResult metric_bounds(std::size_t cases, std::uint64_t seed) {
  return run_cases("metric_bounds", cases, seed, [](Rng& rng, Checker& c) {
    const auto n = static_cast<std::size_t>(rng.between(1, 200));
    std::vector<int> gold(n), pred(n);
    const double pg = rng.unit(), pp = rng.unit();
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = rng.chance(pg);
      pred[i] = rng.chance(pp);
    }
    const auto r = metrics::binary_report(gold, pred, true);
    for (double v : {*r.accuracy, r.macro_precision, r.macro_recall, r.macro_f1, r.positive.precision,
                     r.positive.recall, r.positive.f1, r.negative.precision, r.negative.recall, r.negative.f1}) {
      c.check(v >= 0.0 && v <= 1.0, "metric outside [0, 1]");
    }
    c.check(r.macro_f1 <= std::max(r.positive.f1, r.negative.f1) + 1e-12, "macro F1 above the best class F1");
    // Majority closed form on the same gold labels.
    const auto negatives = static_cast<std::size_t>(std::count(gold.begin(), gold.end(), 0));
    if (negatives > 0) {
      const auto m = metrics::binary_report(gold, std::vector<int>(n, 0), false);
      const auto want = majority_closed_form(static_cast<double>(negatives) / static_cast<double>(n));
      c.check(near(m.macro_precision, want.precision, 1e-9) && near(m.macro_recall, want.recall, 1e-9) &&
                  near(m.macro_f1, want.f1, 1e-9),
              "majority baseline differs from the closed form");
    }
  });
}

corpus::PaperRecord random_record(Rng& rng) {
  static const std::vector<std::string> words = {"graph", "Ünïcode", "quote\"d", "back\\slash", "tab\there",
                                                 "line\nbreak", "plain", "<xml>", "&amp;", "数据"};
  auto phrase = [&](int max) {
    std::string s;
    const auto n = rng.between(0, max);
    for (int i = 0; i < n; ++i) s += (i ? " " : "") + rng.pick(words);
    return s;
  };
  corpus::PaperRecord r;
  r.paper_id = "id-" + std::to_string(rng.next() % 100000);
  r.venue = corpus::Venue::parse(rng.pick(std::vector<std::string>{"AAAI", "ijcai", "KDD", "Other Conf"}));
  r.year = static_cast<int>(rng.between(1900, 2100));
  r.title = phrase(6);
  r.abstract = phrase(30);
  const auto n = rng.between(0, 4);
  for (int i = 0; i < n; ++i) {
    corpus::AuthorEntry a;
    a.name = phrase(3);
    const auto m = rng.between(0, 3);
    for (int j = 0; j < m; ++j) a.affiliations.push_back(phrase(5));
    r.authors.push_back(std::move(a));
  }
  r.incomplete = r.authors.empty() && rng.chance(0.5);
  return r;
}

PropertyResult jsonl_roundtrip(std::size_t cases, std::uint64_t seed) {
  return run_cases("jsonl_roundtrip", cases, seed, [](Rng& rng, Checker& c) {
    std::vector<corpus::PaperRecord> records;
    const auto n = rng.between(1, 5);
    for (int i = 0; i < n; ++i) {
      auto r = random_record(rng);
      r.paper_id += "-" + std::to_string(i);
      records.push_back(std::move(r));
    }
    std::stringstream ss;
    corpus::write_jsonl(ss, records);
    c.check(corpus::parse_jsonl_corpus(ss) == records, "JSONL round trip changed a record");
  });
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

PropertyResult tei_author_order(std::size_t cases, std::uint64_t seed) {
  return run_cases("tei_author_order", cases, seed, [](Rng& rng, Checker& c) {
    WordMint mint(rng.next());
    const auto n = rng.between(1, 8);
    std::vector<std::string> names;
    std::vector<std::string> affs;
    std::string xml = "<TEI xmlns=\"http://www.tei-c.org/ns/1.0\"><teiHeader><fileDesc><titleStmt><title>T</title>"
                      "</titleStmt><sourceDesc><biblStruct><analytic>";
    for (int i = 0; i < n; ++i) {
      names.push_back(mint.fresh() + " " + mint.fresh());
      affs.push_back(mint.fresh() + " Institute");
      const auto sp = names.back().find(' ');
      xml += "<author><persName><forename>" + xml_escape(names.back().substr(0, sp)) + "</forename><surname>" +
             xml_escape(names.back().substr(sp + 1)) + "</surname></persName><affiliation><orgName>" +
             xml_escape(affs.back()) + "</orgName></affiliation></author>";
    }
    xml += "</analytic></biblStruct></sourceDesc></fileDesc></teiHeader></TEI>";
    const auto a = corpus::parse_tei_document(xml, "p");
    c.check(a == corpus::parse_tei_document(xml, "p"), "parsing not deterministic");
    c.check(a.authors.size() == names.size(), "author count");
    for (std::size_t i = 0; i < std::min(a.authors.size(), names.size()); ++i) {
      c.check(a.authors[i].name == names[i], "author order");
      c.check(a.authors[i].affiliations == std::vector<std::string>{affs[i]}, "affiliation order");
    }
  });
}

const instclass::TypeModel& property_type_model() {
  static const instclass::TypeModel model = [] {
    const link::Registry registry(synthetic_registry(300, 60, 5));
    const auto pairs = instclass::registry_training_pairs(registry);
    return instclass::train_type_model(pairs, 3, 1u << 14);
  }();
  return model;
}

PropertyResult ensemble_soundness(std::size_t cases, std::uint64_t seed) {
  return run_cases("ensemble_soundness", cases, seed, [](Rng& rng, Checker& c) {
    const auto& model = property_type_model();
    WordMint mint(rng.next());
    const auto name = mint.fresh() + " " +
                      rng.pick(std::vector<std::string>{"University", "Labs", "Inc", "School", "Systems", "Academy"});
    instclass::LabeledList list;
    if (rng.chance(0.3)) list[instclass::labeled_list_key(name)] = rng.chance(0.5) ? Side::Academia : Side::Industry;
    std::map<std::string, std::vector<std::string>> answers;
    if (rng.chance(0.8)) {
      answers[name] = {rng.chance(0.5) ? "https://www.x.edu/" : "https://www.x.com/"};
    }
    instclass::FixtureResolver resolver(answers);
    const auto outcome = instclass::ensemble_classify(name, list, resolver, model);
    const instclass::Votes votes{instclass::to_vote(instclass::keyword_classify(name, list)),
                                 answers.empty() ? instclass::Vote::Abstain
                                                 : instclass::domain_classify(name, resolver),
                                 instclass::to_vote(instclass::model_classify(name, model).label)};
    if (const auto* label = std::get_if<instclass::InstitutionLabel>(&outcome)) {
      c.check(label->provenance == instclass::Provenance::EnsembleUnanimous, "provenance");
      c.check(label->votes && label->votes->unanimous() && label->votes->keyword == instclass::to_vote(label->label),
              "auto label without unanimous matching votes");
      c.check(label->votes == votes, "stored votes differ from the sub-classifiers");
    } else {
      const auto& item = std::get<instclass::ReviewItem>(outcome);
      c.check(!item.votes.unanimous(), "unanimous votes sent to review");
      c.check(item.votes == votes, "queued votes differ from the sub-classifiers");
    }
  });
}

PropertyResult registry_rule(std::size_t cases, std::uint64_t seed) {
  return run_cases("registry_rule", cases, seed, [](Rng& rng, Checker& c) {
    const auto type = link::kAllInstTypes[rng.below(link::kAllInstTypes.size())];
    c.check((instclass::classify_by_registry_type(type) == Side::Industry) == (type == link::InstType::Company),
            "registry rule");
  });
}

// Writes the random corpus as pipeline inputs and runs analyze twice.
PropertyResult artifact_rerun(std::size_t cases, std::uint64_t seed) {
  TempDir dir("rerun");
  return run_cases("artifact_rerun", cases, seed, [&dir](Rng& rng, Checker& c) {
    const auto corpus = random_corpus(rng, 30);
    {
      std::ofstream out(dir / "corpus.jsonl", std::ios::binary | std::ios::trunc);
      corpus::write_jsonl(out, corpus.records);
    }
    {
      std::ofstream out(dir / "links.jsonl", std::ios::binary | std::ios::trunc);
      for (const auto& l : corpus.links) out << link::to_json(l, nullptr).dump() << '\n';
    }
    {
      std::ofstream out(dir / "labels.csv", std::ios::binary | std::ios::trunc);
      instclass::write_labels_csv(out, corpus.labels);
    }
    pipeline::PipelineConfig config;
    config.corpus = (dir / "corpus.jsonl").string();
    config.links = (dir / "links.jsonl").string();
    config.labels = (dir / "labels.csv").string();
    config.network_min_weight = static_cast<std::size_t>(rng.between(0, 2));
    config.out_dir = (dir / "out").string();
    std::vector<std::string> first;
    for (int run = 0; run < 2; ++run) {
      const auto result = pipeline::run_analyze(config);
      std::vector<std::string> bytes;
      for (const auto& a : result.artifacts) bytes.push_back(slurp(a));
      bytes.push_back(slurp(dir / "out" / "analyze.manifest.json"));
      bytes.push_back(slurp(dir / "out" / "analyze.effective_config.json"));
      if (run == 0) first = std::move(bytes);
      else c.check(bytes == first, "analyze artifacts differ between reruns");
    }
    std::error_code ec;
    fs::remove_all(dir / "out", ec);
  });
}

}  // namespace

const std::vector<Property>& property_suite() {
  static const std::vector<Property> suite = {
      {"proportion_closure", proportion_closure},
      {"collaboration_rule", collaboration_rule},
      {"network_bruteforce", network_bruteforce},
      {"auc_enumeration", auc_enumeration},
      {"clean_idempotence", clean_idempotence},
      {"threshold_monotonicity", threshold_monotonicity},
      {"split_disjoint_determinism", split_disjoint_determinism},
      {"artifact_rerun", artifact_rerun},
      {"ranking_recount", ranking_recount},
      {"first_author_invariance", first_author_invariance},
      {"negative_sampling", negative_sampling},
      {"metric_bounds", metric_bounds},
      {"jsonl_roundtrip", jsonl_roundtrip},
      {"tei_author_order", tei_author_order},
      {"ensemble_soundness", ensemble_soundness},
      {"registry_rule", registry_rule},
  };
  return suite;
}

PropertyResult run_property(const std::string& name, std::size_t cases, std::uint64_t seed) {
  for (const auto& p : property_suite()) {
    if (p.name == name) return p.run(cases, seed);
  }
  throw std::invalid_argument("unknown property " + name);
}

}  // namespace collabmap::testkit
