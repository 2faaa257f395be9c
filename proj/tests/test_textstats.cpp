#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "qgen/error.hpp"
#include "qgen/rng.hpp"
#include "qgen/textstats.hpp"

using namespace qgen;
using namespace qgen::textstats;

namespace {

std::string words(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " w" : "w") + std::to_string(i);
  return s;
}

// Independent Tukey oracle: quartiles by explicit closest-rank weights.
std::pair<double, double> oracle_fences(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(i);
    return i + 1 < v.size() ? (1.0 - w) * v[i] + w * v[i + 1] : v[i];
  };
  const double q1 = q(0.25), q3 = q(0.75);
  return {q1 - 1.5 * (q3 - q1), q3 + 1.5 * (q3 - q1)};
}

}  // namespace

TEST_CASE("identical lengths give one occupied bin") {
  const Histogram h = question_length_histogram({"a b c", "a b c", "a b c"}, 1);
  CHECK(h.bin_edges == std::vector<double>{3.0, 4.0});
  CHECK(h.counts == std::vector<std::size_t>{3});
  CHECK(h.excluded_outliers == 0);
  CHECK(h.length_unit == "whitespace_tokens");
}

TEST_CASE("Tukey fences drop the long outlier") {
  // Q1 = Q3 = 5, IQR = 0: fences collapse to [5, 5].
  const Histogram h = question_length_histogram({words(5), words(5), words(5), words(5), words(100)}, 1);
  CHECK(h.excluded_outliers == 1);
  std::size_t total = 0;
  for (auto c : h.counts) total += c;
  CHECK(total == 4);
  CHECK(h.bin_edges.front() == 5.0);
}

TEST_CASE("wider bins") {
  const Histogram h = question_length_histogram({words(2), words(3), words(4), words(5), words(6)}, 2);
  CHECK(h.bin_edges == std::vector<double>{2.0, 4.0, 6.0, 8.0});
  CHECK(h.counts == std::vector<std::size_t>{2, 2, 1});
}

TEST_CASE("histogram errors") {
  CHECK_THROWS_AS(question_length_histogram({}, 1), Error);
  CHECK_THROWS_AS(question_length_histogram({"a"}, 0), Error);
}

TEST_CASE("histogram conservation and binning against a brute-force oracle") {
  Xoshiro256StarStar rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.bounded(60);
    std::vector<std::string> qs;
    std::vector<double> lengths;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t len = rng.bounded(8) == 0 ? rng.bounded(80) : 4 + rng.bounded(10);
      qs.push_back(words(len));
      lengths.push_back(static_cast<double>(len));
    }
    const std::size_t width = 1 + rng.bounded(4);
    const Histogram h = question_length_histogram(qs, width);
    std::size_t total = 0;
    for (auto c : h.counts) total += c;
    REQUIRE(total + h.excluded_outliers == n);
    REQUIRE(h.counts.size() + 1 == h.bin_edges.size());
    for (std::size_t i = 1; i < h.bin_edges.size(); ++i) CHECK(h.bin_edges[i] > h.bin_edges[i - 1]);

    const auto [lo, hi] = oracle_fences(lengths);
    std::vector<std::size_t> expect(h.counts.size(), 0);
    std::size_t outliers = 0;
    for (double len : lengths) {
      if (len < lo || len > hi) {
        ++outliers;
        continue;
      }
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        if (len >= h.bin_edges[b] && len < h.bin_edges[b + 1]) ++expect[b];
      }
    }
    CHECK(outliers == h.excluded_outliers);
    CHECK(expect == h.counts);
  }
}

TEST_CASE("frequent_words hand count") {
  const KeywordFrequency kf = frequent_words({"the cat", "the dog", "the cat"}, {"the"}, 2);
  using E = std::vector<std::pair<std::string, std::size_t>>;
  CHECK(kf.entries == E{{"cat", 2}, {"dog", 1}});
}

TEST_CASE("frequent_words strips punctuation, lowercases and breaks ties lexicographically") {
  const KeywordFrequency kf = frequent_words({"Who wrote Hamlet?", "Where is hamlet, Denmark?"}, {"who", "is"}, 10);
  using E = std::vector<std::pair<std::string, std::size_t>>;
  CHECK(kf.entries == E{{"hamlet", 2}, {"denmark", 1}, {"where", 1}, {"wrote", 1}});
}

TEST_CASE("frequent_words errors") {
  CHECK_THROWS_AS(frequent_words({"the the", "a"}, {"the", "a"}, 3), Error);
  CHECK_THROWS_AS(frequent_words({"x"}, {}, 0), Error);
}

TEST_CASE("frequent_words matches a brute-force count and is permutation invariant") {
  const std::vector<std::string> vocab = {"the", "a", "cat", "dog", "river", "of", "Paris", "paris!", "war", "?"};
  const StopwordSet stop = {"the", "a", "of"};
  Xoshiro256StarStar rng(4);
  std::mt19937_64 shuffler(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> qs;
    for (std::size_t i = 0, n = 1 + rng.bounded(10); i < n; ++i) {
      std::string q;
      for (std::size_t k = 0, m = 1 + rng.bounded(6); k < m; ++k) q += vocab[rng.bounded(vocab.size())] + " ";
      qs.push_back(q);
    }
    std::map<std::string, std::size_t> brute;
    for (const auto& q : qs) {
      std::istringstream in(q);
      std::string w;
      while (in >> w) {
        std::string t;
        for (char c : w) {
          if (c != '!' && c != '?') t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        if (!t.empty() && !stop.contains(t)) ++brute[t];
      }
    }
    if (brute.empty()) {
      CHECK_THROWS_AS(frequent_words(qs, stop, 100), Error);
      continue;
    }
    const KeywordFrequency kf = frequent_words(qs, stop, 100);
    CHECK(kf.entries.size() == brute.size());
    for (const auto& [tok, count] : kf.entries) {
      CHECK_FALSE(stop.contains(tok));
      CHECK(brute[tok] == count);
    }
    std::shuffle(qs.begin(), qs.end(), shuffler);
    CHECK(frequent_words(qs, stop, 100) == kf);
  }
}

TEST_CASE("stopword files") {
  const StopwordSet s = parse_stopwords(std::string_view("# comment\nThe\n\n  and \n#x\n"));
  CHECK(s == StopwordSet{"the", "and"});
  CHECK(bundled_stopwords().contains("the"));
  CHECK(bundled_stopwords().contains("what"));
  CHECK_FALSE(bundled_stopwords().contains("#"));
}

TEST_CASE("csv outputs") {
  std::ostringstream h;
  write_histogram_csv(h, question_length_histogram({"a b", "a b c"}, 1));
  CHECK(h.str() == "bin_lo,bin_hi,count\n2,3,1\n3,4,1\n");
  std::ostringstream k;
  write_keywords_csv(k, KeywordFrequency{{{"a,b", 2}, {"c", 1}}});
  CHECK(k.str() == "token,count\n\"a,b\",2\nc,1\n");
}
