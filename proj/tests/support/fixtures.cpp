#include "support/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qgen/rng.hpp"
#include "qgen/stats.hpp"
#include "qgen/text.hpp"

namespace qgen::testing {

namespace fs = std::filesystem;
using nlohmann::json;

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "qgen-test-XXXXXX").string();
  if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << contents;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

namespace {

const std::vector<std::string> kNames = {"Beyoncé", "Houston", "Mathew Knowles", "Hanover", "Destiny", "Zoë",
                                         "Nirvana", "Texas", "Germany", "Europe", "Chopin", "Warsaw"};
const std::vector<std::string> kVerbs = {"founded", "visited", "described", "managed", "released", "built",
                                         "studied", "praised"};
const std::vector<std::string> kNouns = {"album", "zoo", "river", "company", "school", "bridge",
                                         "festival", "library", "award", "treaty"};
const std::vector<std::string> kYears = {"1981", "2003", "1849", "1999", "2009", "1066"};

template <typename T>
const T& pick(const std::vector<T>& v, Xoshiro256StarStar& rng) {
  return v[rng.bounded(v.size())];
}

}  // namespace

std::string synthetic_squad_json(std::size_t contexts, std::size_t questions_per_context, std::uint64_t seed) {
  Xoshiro256StarStar rng(seed);
  json paragraphs = json::array();
  std::size_t qid = 0;
  for (std::size_t c = 0; c < contexts; ++c) {
    std::string context;
    struct Fact {
      std::string subject, verb, object, year;
      std::size_t year_offset;  // code points
    };
    std::vector<Fact> facts;
    const std::size_t sentences = 3 + rng.bounded(3);
    for (std::size_t s = 0; s < sentences; ++s) {
      Fact f{pick(kNames, rng), pick(kVerbs, rng), pick(kNouns, rng), pick(kYears, rng), 0};
      if (!context.empty()) context += ' ';
      std::string sentence = f.subject + " " + f.verb + " the " + f.object + " in ";
      f.year_offset = text::decode_utf8(context).size() + text::decode_utf8(sentence).size();
      sentence += f.year + ".";
      context += sentence;
      facts.push_back(std::move(f));
    }
    json qas = json::array();
    for (std::size_t q = 0; q < questions_per_context; ++q) {
      const Fact& f = facts[rng.bounded(facts.size())];
      qas.push_back({{"id", "q" + std::to_string(qid++)},
                     {"question", "When did " + f.subject + " " + f.verb + " the " + f.object + "?"},
                     {"answers", json::array({{{"text", f.year}, {"answer_start", f.year_offset}}})}});
    }
    paragraphs.push_back({{"context", context}, {"qas", std::move(qas)}});
  }
  const json root{{"version", "1.1"}, {"data", json::array({{{"title", "Synthetic"}, {"paragraphs", paragraphs}}})}};
  return root.dump();
}

std::string synthetic_vectors_for(const std::string& squad_json, std::size_t dim, std::uint64_t seed) {
  std::set<std::string> vocab = {"who", "what", "when", "was", "is", "known", "about", "mentioned", "the", "text"};
  const json root = json::parse(squad_json);
  for (const json& doc : root.at("data")) {
    for (const json& p : doc.at("paragraphs")) {
      for (auto& t : text::tokenize(p.at("context").get<std::string>())) vocab.insert(t);
      for (const json& q : p.at("qas")) {
        for (auto& t : text::tokenize(q.at("question").get<std::string>())) vocab.insert(t);
      }
    }
  }
  Xoshiro256StarStar rng(seed);
  std::ostringstream out;
  for (const std::string& tok : vocab) {
    out << tok;
    for (std::size_t k = 0; k < dim; ++k) {
      const double v = static_cast<double>(rng.bounded(2000001)) / 1e6 - 1.0;
      out << ' ' << stats::format_double(v);
    }
    out << '\n';
  }
  return out.str();
}

similarity::EmbeddingTable random_table(const std::vector<std::string>& tokens, std::size_t dim, std::uint64_t seed) {
  similarity::EmbeddingTable table(dim);
  Xoshiro256StarStar rng(seed);
  std::vector<float> v(dim);
  for (const std::string& tok : tokens) {
    for (auto& x : v) x = static_cast<float>(static_cast<double>(rng.bounded(2000001)) / 1e6 - 1.0);
    table.add(tok, v);
  }
  return table;
}

const std::vector<WorkedExampleRow>& worked_example() {
  using promptgen::PromptId;
  static const std::vector<WorkedExampleRow> rows = {
      {PromptId::A, {0.833, 0.534, 0.749, 0.857, 0.935}, 0.935},
      {PromptId::B, {0.833, 0.472, 0.722, 0.433, 0.639}, 0.833},
      {PromptId::C, {0.865, 0.534, 0.749, 0.857, 0.719}, 0.865},
      {PromptId::D, {0.879, 0.535, 0.749, 0.956, 0.934}, 0.956},
  };
  return rows;
}

std::vector<eval::ScoreRecord> records_with_maxes(const std::vector<double>& maxes) {
  std::vector<eval::ScoreRecord> out;
  for (std::size_t i = 0; i < maxes.size(); ++i) {
    eval::ScoreRecord r;
    r.generated.index = i;
    r.question_max = maxes[i];
    out.push_back(std::move(r));
  }
  return out;
}

long double oracle_similarity(const std::string& a, const std::string& b, const similarity::EmbeddingTable& table) {
  auto mean = [&](const std::string& s) {
    std::vector<long double> acc(table.dim(), 0.0L);
    std::size_t n = 0;
    for (const std::string& tok : text::tokenize(s)) {
      const auto v = table.find(tok);
      if (v.empty()) continue;
      for (std::size_t k = 0; k < v.size(); ++k) acc[k] += v[k];
      ++n;
    }
    for (auto& x : acc) x = n ? x / static_cast<long double>(n) : 0.0L;
    return acc;
  };
  const auto va = mean(a), vb = mean(b);
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < va.size(); ++k) {
    dot += va[k] * vb[k];
    na += va[k] * va[k];
    nb += vb[k] * vb[k];
  }
  if (na == 0 || nb == 0) return 0.0L;
  return std::clamp(dot / std::sqrt(na * nb), -1.0L, 1.0L);
}

eval::BoxStats oracle_box_stats(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  auto q = [&](double p) {
    const double h = static_cast<double>(n - 1) * p;
    const double fl = std::floor(h);
    const auto lo = static_cast<std::size_t>(fl);
    const std::size_t hi = std::min(lo + 1, n - 1);
    return v[lo] + (h - fl) * (v[hi] - v[lo]);
  };
  eval::BoxStats s;
  s.n = n;
  long double sum = 0;
  for (double x : v) sum += x;
  s.mean = static_cast<double>(sum / static_cast<long double>(n));
  s.median = q(0.5);
  s.q1 = q(0.25);
  s.q3 = q(0.75);
  const double lo_fence = s.q1 - 1.5 * (s.q3 - s.q1);
  const double hi_fence = s.q3 + 1.5 * (s.q3 - s.q1);
  bool first = true;
  for (double x : v) {
    if (x < lo_fence || x > hi_fence) {
      s.outliers.push_back(x);
      continue;
    }
    if (first) s.whisker_lo = x;
    s.whisker_hi = x;
    first = false;
  }
  return s;
}

}  // namespace qgen::testing
