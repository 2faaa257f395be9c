#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

// Figure data for the dataset exploration plots: question lengths and
// stopword-filtered keyword counts.
namespace qgen::textstats {

struct Histogram {
  std::vector<double> bin_edges;    // strictly increasing; bins are [e_i, e_{i+1})
  std::vector<std::size_t> counts;  // |bin_edges| - 1
  std::size_t excluded_outliers = 0;
  std::string length_unit = "whitespace_tokens";

  bool operator==(const Histogram&) const = default;
};

struct KeywordFrequency {
  std::vector<std::pair<std::string, std::size_t>> entries;  // count desc, token asc

  bool operator==(const KeywordFrequency&) const = default;
};

using StopwordSet = std::unordered_set<std::string>;

// Question length in whitespace tokens; lengths outside the Tukey fences are
// excluded and counted. Throws EmptyInput / InvalidArgument.
Histogram question_length_histogram(const std::vector<std::string>& questions, std::size_t bin_width);

// Throws EmptyInput if no token survives filtering.
KeywordFrequency frequent_words(const std::vector<std::string>& questions, const StopwordSet& stopwords,
                                std::size_t top_k);

// One lowercase token per line; blank lines and '#' comments ignored.
StopwordSet parse_stopwords(std::istream& in);
StopwordSet parse_stopwords(std::string_view text);
std::string_view bundled_stopwords_text();
const StopwordSet& bundled_stopwords();

void write_histogram_csv(std::ostream& out, const Histogram& h);
void write_keywords_csv(std::ostream& out, const KeywordFrequency& kf);

}  // namespace qgen::textstats
