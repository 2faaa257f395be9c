#include "qgen/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qgen/error.hpp"
#include "qgen/rng.hpp"
#include "qgen/text.hpp"

namespace qgen::corpus {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::SchemaError, path + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing required field");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) schema_error(path + "." + key, "expected string");
  return v.get<std::string>();
}

const json& require_array(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_array()) schema_error(path + "." + key, "expected array");
  return v;
}

std::string indexed(const std::string& path, const char* key, std::size_t i) {
  return path + "." + key + "[" + std::to_string(i) + "]";
}

Answer parse_answer(const json& a, const std::string& path, const std::u32string& context,
                    const std::string& qas_id) {
  Answer answer;
  answer.text = require_string(a, "text", path);
  const json& start = require(a, "answer_start", path);
  if (!start.is_number_integer()) schema_error(path + ".answer_start", "expected integer");
  const auto raw_start = start.get<std::int64_t>();
  const std::u32string text = text::decode_utf8(answer.text);
  if (raw_start < 0 || static_cast<std::size_t>(raw_start) + text.size() > context.size()) {
    throw Error(ErrorKind::SpanError, "qas id " + qas_id + ": answer_start " +
                                          std::to_string(raw_start) + " with length " +
                                          std::to_string(text.size()) + " exceeds context length " +
                                          std::to_string(context.size()));
  }
  answer.answer_start = static_cast<std::size_t>(raw_start);
  if (context.compare(answer.answer_start, text.size(), text) != 0) {
    throw Error(ErrorKind::SpanError, "qas id " + qas_id + ": context slice at " +
                                          std::to_string(answer.answer_start) +
                                          " does not equal answer text \"" + answer.text + "\"");
  }
  return answer;
}

SquadDataset from_json(const json& root) {
  SquadDataset ds;
  if (!root.is_object()) schema_error("$", "expected object");
  if (const auto v = root.find("version"); v != root.end()) {
    if (!v->is_string()) schema_error("$.version", "expected string");
    ds.version = v->get<std::string>();
  }
  const json& data = require_array(root, "data", "$");
  for (std::size_t di = 0; di < data.size(); ++di) {
    const std::string dpath = indexed("$", "data", di);
    const std::string title = require_string(data[di], "title", dpath);
    const json& paragraphs = require_array(data[di], "paragraphs", dpath);
    for (std::size_t pi = 0; pi < paragraphs.size(); ++pi) {
      const std::string ppath = indexed(dpath, "paragraphs", pi);
      ContextRecord rec;
      rec.context_id = ds.records.size();
      rec.title = title;
      rec.text = require_string(paragraphs[pi], "context", ppath);
      if (text::trim(rec.text).empty()) schema_error(ppath + ".context", "empty context");
      const std::u32string context = text::decode_utf8(rec.text);
      const json& qas = require_array(paragraphs[pi], "qas", ppath);
      rec.baselines.reserve(qas.size());
      for (std::size_t qi = 0; qi < qas.size(); ++qi) {
        const std::string qpath = indexed(ppath, "qas", qi);
        BaselineQuestion q;
        q.id = require_string(qas[qi], "id", qpath);
        q.question = require_string(qas[qi], "question", qpath);
        if (text::trim(q.question).empty()) schema_error(qpath + ".question", "empty question");
        const json& answers = require_array(qas[qi], "answers", qpath);
        if (answers.empty()) {
          schema_error(qpath + ".answers",
                       "empty answers list (unanswerable entries are not supported), qas id " + q.id);
        }
        for (std::size_t ai = 0; ai < answers.size(); ++ai) {
          q.answers.push_back(parse_answer(answers[ai], indexed(qpath, "answers", ai), context, q.id));
        }
        rec.baselines.push_back(std::move(q));
      }
      ds.example_count += rec.baselines.size();
      ds.records.push_back(std::move(rec));
    }
  }
  return ds;
}

}  // namespace

SquadDataset parse_squad(std::string_view raw) {
  json root;
  try {
    root = json::parse(raw.begin(), raw.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedJson, e.what());
  }
  return from_json(root);
}

SquadDataset parse_squad(std::istream& in) {
  const std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_squad(std::string_view(raw));
}

SquadDataset load_squad_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open dataset " + path.string());
  return parse_squad(in);
}

std::string serialize_squad(const SquadDataset& ds) {
  json root;
  root["version"] = ds.version;
  json data = json::array();
  for (const ContextRecord& rec : ds.records) {
    if (data.empty() || data.back()["title"] != rec.title) {
      data.push_back({{"title", rec.title}, {"paragraphs", json::array()}});
    }
    json qas = json::array();
    for (const BaselineQuestion& q : rec.baselines) {
      json answers = json::array();
      for (const Answer& a : q.answers) {
        answers.push_back({{"text", a.text}, {"answer_start", a.answer_start}});
      }
      qas.push_back({{"id", q.id}, {"question", q.question}, {"answers", std::move(answers)}});
    }
    data.back()["paragraphs"].push_back({{"context", rec.text}, {"qas", std::move(qas)}});
  }
  root["data"] = std::move(data);
  return root.dump();
}

ReversedExample reverse_example(const QaExample& ex) {
  return {ex.context, ex.answer, ex.question};
}

QaExample restore_example(const ReversedExample& ex) {
  return {ex.context, ex.target_question, ex.input_answer};
}

std::vector<ReversedExample> reverse_dataset(const SquadDataset& ds) {
  std::vector<ReversedExample> out;
  out.reserve(ds.example_count);
  for (const ContextRecord& rec : ds.records) {
    for (const BaselineQuestion& q : rec.baselines) {
      out.push_back(reverse_example({rec.text, q.question, q.answers.front().text}));
    }
  }
  return out;
}

std::vector<ContextRecord> sample_contexts(const SquadDataset& ds, std::size_t n, std::uint64_t seed) {
  const std::size_t total = ds.records.size();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "sample size must be at least 1");
  if (n > total) {
    throw Error(ErrorKind::SampleTooLarge, "requested " + std::to_string(n) + " contexts but dataset has " +
                                               std::to_string(total));
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Xoshiro256StarStar rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.bounded(total - i));
    std::swap(order[i], order[j]);
  }
  order.resize(n);
  std::sort(order.begin(), order.end());
  std::vector<ContextRecord> out;
  out.reserve(n);
  for (std::size_t idx : order) out.push_back(ds.records[idx]);
  return out;
}

std::vector<Chunk> chunk_context(std::string_view text, std::size_t max_len, std::size_t doc_stride) {
  if (max_len <= doc_stride) {
    throw Error(ErrorKind::InvalidChunkParams, "max_len (" + std::to_string(max_len) +
                                                   ") must exceed doc_stride (" + std::to_string(doc_stride) + ")");
  }
  const std::u32string cps = text::decode_utf8(text);
  const std::vector<text::TokenSpan> tokens = text::whitespace_spans(cps);
  const std::size_t n = tokens.size();
  const std::size_t step = max_len - doc_stride;

  std::vector<Chunk> chunks;
  auto emit = [&](std::size_t tb, std::size_t te) {
    Chunk c;
    c.token_begin = tb;
    c.token_end = te;
    c.start = tokens[tb].begin;
    c.end = tokens[te - 1].end;
    c.text = text::encode_utf8(std::u32string_view(cps).substr(c.start, c.end - c.start));
    chunks.push_back(std::move(c));
  };

  if (n == 0) return chunks;
  for (std::size_t begin = 0;; begin += step) {
    if (begin + max_len >= n) {
      emit(n > max_len ? n - max_len : 0, n);
      break;
    }
    emit(begin, begin + max_len);
  }
  return chunks;
}

void write_reversed_jsonl(std::ostream& out, const std::vector<ReversedExample>& examples) {
  for (const ReversedExample& ex : examples) {
    out << json{{"context", ex.context}, {"input_answer", ex.input_answer},
                {"target_question", ex.target_question}}
               .dump()
        << '\n';
  }
}

std::vector<ReversedExample> read_reversed_jsonl(std::istream& in) {
  std::vector<ReversedExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      out.push_back({j.at("context").get<std::string>(), j.at("input_answer").get<std::string>(),
                     j.at("target_question").get<std::string>()});
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedJson, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_chunks_jsonl(std::ostream& out, const std::vector<Chunk>& chunks) {
  for (const Chunk& c : chunks) {
    out << json{{"start", c.start},
                {"end", c.end},
                {"token_begin", c.token_begin},
                {"token_end", c.token_end},
                {"text", c.text}}
               .dump()
        << '\n';
  }
}

std::vector<Chunk> read_chunks_jsonl(std::istream& in) {
  std::vector<Chunk> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      Chunk c;
      c.start = j.at("start").get<std::size_t>();
      c.end = j.at("end").get<std::size_t>();
      c.token_begin = j.at("token_begin").get<std::size_t>();
      c.token_end = j.at("token_end").get<std::size_t>();
      c.text = j.at("text").get<std::string>();
      out.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedJson, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace qgen::corpus
