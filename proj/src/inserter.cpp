#include "privmark/pipeline.hpp"

#include <algorithm>
#include <sstream>

// httplib pulls <resolv.h>, whose _res macro clashes with Eigen internals;
// it must come after the Eigen-including project headers.
#include <httplib.h>
#include <json.hpp>

namespace privmark {

using nlohmann::json;

std::string make_insertion_prompt(const std::vector<std::string>& words,
                                  const std::string& text) {
  std::ostringstream out;
  out << "Insert words: [";
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out << ", ";
    out << words[i];
  }
  out << "] into the text: " << text;
  return out.str();
}

std::vector<std::string> DefaultInserter::words_from_prompt(
    const std::string& prompt) {
  auto lb = prompt.find('[');
  auto rb = prompt.find(']');
  if (lb == std::string::npos || rb == std::string::npos || rb < lb)
    throw InserterError("prompt does not carry a word list");
  std::vector<std::string> words;
  std::string inner = prompt.substr(lb + 1, rb - lb - 1);
  std::istringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t b = item.find_first_not_of(' ');
    size_t e = item.find_last_not_of(' ');
    if (b != std::string::npos) words.push_back(item.substr(b, e - b + 1));
  }
  return words;
}

namespace {

struct Sentence {
  std::string body;        // without the terminator
  std::string terminator;  // ".", "!", "?" possibly with trailing quotes
};

std::vector<Sentence> split_sentences(const std::string& text) {
  std::vector<Sentence> out;
  std::string cur;
  for (size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    cur.push_back(ch);
    if (ch == '.' || ch == '!' || ch == '?') {
      bool end = (i + 1 >= text.size()) ||
                 std::isspace(static_cast<unsigned char>(text[i + 1]));
      if (end) {
        Sentence s;
        s.terminator = std::string(1, ch);
        cur.pop_back();
        s.body = cur;
        out.push_back(std::move(s));
        cur.clear();
        // swallow the following whitespace; rejoin adds single spaces
        while (i + 1 < text.size() &&
               std::isspace(static_cast<unsigned char>(text[i + 1])))
          ++i;
      }
    }
  }
  if (!cur.empty()) out.push_back(Sentence{cur, "."});
  return out;
}

}  // namespace

std::string DefaultInserter::rewrite(const std::string& prompt,
                                     const std::string& text) {
  std::vector<std::string> words = words_from_prompt(prompt);
  std::vector<Sentence> sentences = split_sentences(text);
  if (sentences.empty()) sentences.push_back(Sentence{text, "."});

  // Spread the words over evenly spaced sentence boundaries. The clause
  // keeps each inserted word a standalone token so it survives tokenization.
  size_t s_count = sentences.size();
  std::vector<std::vector<std::string>> at(s_count);
  for (size_t i = 0; i < words.size(); ++i) {
    size_t slot = ((i + 1) * s_count) / (words.size() + 1);
    if (slot >= s_count) slot = s_count - 1;
    at[slot].push_back(words[i]);
  }
  std::ostringstream out;
  for (size_t s = 0; s < s_count; ++s) {
    if (s) out << " ";
    out << sentences[s].body;
    if (!at[s].empty()) {
      out << ", and speaking of ";
      for (size_t i = 0; i < at[s].size(); ++i) {
        if (i) out << ", ";
        out << at[s][i];
      }
      out << ", so it goes";
    }
    out << sentences[s].terminator;
  }
  return out.str();
}

HttpInserter::HttpInserter(std::string host, int port, int timeout_ms)
    : host_(std::move(host)), port_(port), timeout_ms_(timeout_ms) {}

std::string HttpInserter::rewrite(const std::string& prompt,
                                  const std::string& text) {
  httplib::Client cli(host_, port_);
  cli.set_connection_timeout(0, timeout_ms_ * 1000);
  cli.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
  json req = {{"prompt", prompt}, {"text", text}};
  auto res = cli.Post("/rewrite", req.dump(), "application/json");
  if (!res)
    throw InserterError("inserter endpoint unreachable at " + host_ + ":" +
                        std::to_string(port_));
  if (res->status != 200)
    throw InserterError("inserter endpoint returned status " +
                        std::to_string(res->status));
  try {
    json body = json::parse(res->body);
    return body.at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw InserterError(std::string("bad inserter response: ") + e.what());
  }
}

}  // namespace privmark
