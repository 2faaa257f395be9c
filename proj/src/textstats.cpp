#include "qgen/textstats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "qgen/error.hpp"
#include "qgen/stats.hpp"
#include "qgen/text.hpp"

namespace qgen::textstats {

Histogram question_length_histogram(const std::vector<std::string>& questions, std::size_t bin_width) {
  if (bin_width == 0) throw Error(ErrorKind::InvalidArgument, "bin_width must be at least 1");
  if (questions.empty()) throw Error(ErrorKind::EmptyInput, "no questions to histogram");

  std::vector<double> lengths;
  lengths.reserve(questions.size());
  for (const std::string& q : questions) {
    lengths.push_back(static_cast<double>(text::whitespace_token_count(q)));
  }
  std::sort(lengths.begin(), lengths.end());
  const stats::TukeyFences fences = stats::tukey_fences(lengths);

  Histogram h;
  std::vector<double> kept;
  kept.reserve(lengths.size());
  for (double len : lengths) {
    if (len < fences.lo || len > fences.hi) {
      ++h.excluded_outliers;
    } else {
      kept.push_back(len);
    }
  }
  // Fences always contain q1..q3, so at least one length survives.
  const double lo = kept.front();
  const double hi = kept.back();
  const double width = static_cast<double>(bin_width);
  const auto bins = static_cast<std::size_t>(std::floor((hi - lo) / width)) + 1;
  h.bin_edges.reserve(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.bin_edges.push_back(lo + static_cast<double>(i) * width);
  h.counts.assign(bins, 0);
  for (double len : kept) {
    const auto idx = static_cast<std::size_t>(std::floor((len - lo) / width));
    ++h.counts[std::min(idx, bins - 1)];
  }
  return h;
}

KeywordFrequency frequent_words(const std::vector<std::string>& questions, const StopwordSet& stopwords,
                                std::size_t top_k) {
  if (top_k == 0) throw Error(ErrorKind::InvalidArgument, "top_k must be at least 1");
  std::map<std::string, std::size_t> counts;
  for (const std::string& q : questions) {
    for (std::string& tok : text::tokenize(q)) {
      if (stopwords.contains(tok)) continue;
      ++counts[std::move(tok)];
    }
  }
  if (counts.empty()) throw Error(ErrorKind::EmptyInput, "no tokens left after stopword filtering");

  KeywordFrequency kf;
  kf.entries.assign(counts.begin(), counts.end());
  // std::map iteration is already token-ascending, so a stable sort on count
  // gives the lexicographic tie-break.
  std::stable_sort(kf.entries.begin(), kf.entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (kf.entries.size() > top_k) kf.entries.resize(top_k);
  return kf;
}

StopwordSet parse_stopwords(std::istream& in) {
  StopwordSet out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.insert(text::to_lower(t));
  }
  return out;
}

StopwordSet parse_stopwords(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_stopwords(in);
}

const StopwordSet& bundled_stopwords() {
  static const StopwordSet kSet = parse_stopwords(bundled_stopwords_text());
  return kSet;
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << stats::format_double(h.bin_edges[i]) << ',' << stats::format_double(h.bin_edges[i + 1]) << ','
        << h.counts[i] << '\n';
  }
}

void write_keywords_csv(std::ostream& out, const KeywordFrequency& kf) {
  out << "token,count\n";
  for (const auto& [token, count] : kf.entries) out << text::csv_escape(token) << ',' << count << '\n';
}

}  // namespace qgen::textstats
