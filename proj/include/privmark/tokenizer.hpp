#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <unordered_map>
#include <vector>

namespace privmark {

// Public tokenizer rule: lowercase, split on whitespace, strip leading and
// trailing punctuation. Unknown tokens map to the reserved id -1, which
// embeds to the zero vector.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&]() {
    size_t b = 0, e = cur.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(cur[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(cur[e - 1]))) --e;
    if (e > b) out.push_back(cur.substr(b, e - b));
    cur.clear();
  };
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      cur.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  flush();
  return out;
}

// Public token list; ids index the embedder's row matrix.
struct TokenizerSpec {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, int> token2id;

  static constexpr int kUnknownId = -1;

  int size() const { return static_cast<int>(tokens.size()); }

  int id_of(const std::string& tok) const {
    auto it = token2id.find(tok);
    return it == token2id.end() ? kUnknownId : it->second;
  }

  std::vector<int> ids_of_text(const std::string& text) const {
    std::vector<int> ids;
    for (const auto& t : tokenize(text)) ids.push_back(id_of(t));
    return ids;
  }
};

inline TokenizerSpec tokenizer_from_tokens(std::vector<std::string> tokens) {
  TokenizerSpec s;
  s.tokens = std::move(tokens);
  for (size_t i = 0; i < s.tokens.size(); ++i) {
    auto& t = s.tokens[i];
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    s.token2id.emplace(t, static_cast<int>(i));
  }
  return s;
}

}  // namespace privmark
