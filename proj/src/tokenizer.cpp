#include "hmcgr/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace hmcgr {

using nlohmann::json;

namespace {

std::string lowercased(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

int SubwordVocab::intern(const std::string& piece) {
  auto it = piece_to_id_.find(piece);
  if (it != piece_to_id_.end()) return it->second;
  int id = static_cast<int>(id_to_piece_.size());
  piece_to_id_.emplace(piece, id);
  id_to_piece_.push_back(piece);
  return id;
}

int SubwordVocab::lookup(const std::string& piece) const {
  auto it = piece_to_id_.find(piece);
  return it == piece_to_id_.end() ? kUnk : it->second;
}

std::vector<std::string> SubwordVocab::split_word(const std::string& word) const {
  std::string w = options_.lowercase ? lowercased(word) : word;
  std::vector<std::string> pieces;
  std::size_t at = 0;
  while (at < w.size()) {
    std::size_t take = std::min<std::size_t>(options_.max_piece_len, w.size() - at);
    std::string piece = w.substr(at, take);
    if (at == 0)
      piece = options_.word_start + piece;
    else
      piece = options_.continuation + piece;
    pieces.push_back(std::move(piece));
    at += take;
  }
  if (pieces.empty()) pieces.push_back(options_.word_start + "");
  return pieces;
}

SubwordVocab SubwordVocab::build(std::span<const std::string> words, Options options) {
  SubwordVocab v;
  v.options_ = std::move(options);
  v.intern("[PAD]");
  v.intern("[UNK]");
  v.intern("[CLS]");
  for (const auto& word : words)
    for (const auto& piece : v.split_word(word)) v.intern(piece);
  return v;
}

SubwordVocab::Encoding SubwordVocab::encode(std::span<const std::string> words) const {
  Encoding enc;
  if (options_.prepend_cls) {
    enc.ids.push_back(kCls);
    enc.word_of_piece.push_back(-1);
  }
  for (std::size_t w = 0; w < words.size(); ++w) {
    int begin = static_cast<int>(enc.ids.size());
    for (const auto& piece : split_word(words[w])) {
      enc.ids.push_back(lookup(piece));
      enc.word_of_piece.push_back(static_cast<int>(w));
    }
    enc.word_pieces.emplace_back(begin, static_cast<int>(enc.ids.size()));
  }
  return enc;
}

json SubwordVocab::to_json() const {
  json j;
  j["max_piece_len"] = options_.max_piece_len;
  j["lowercase"] = options_.lowercase;
  j["continuation"] = options_.continuation;
  j["word_start"] = options_.word_start;
  j["prepend_cls"] = options_.prepend_cls;
  j["pieces"] = id_to_piece_;
  return j;
}

SubwordVocab SubwordVocab::from_json(const json& j) {
  SubwordVocab v;
  v.options_.max_piece_len = j.at("max_piece_len").get<int>();
  v.options_.lowercase = j.at("lowercase").get<bool>();
  v.options_.continuation = j.at("continuation").get<std::string>();
  v.options_.word_start = j.at("word_start").get<std::string>();
  v.options_.prepend_cls = j.at("prepend_cls").get<bool>();
  for (const auto& piece : j.at("pieces")) v.intern(piece.get<std::string>());
  return v;
}

int WordVocab::intern(const std::string& word) {
  auto it = word_to_id_.find(word);
  if (it != word_to_id_.end()) return it->second;
  int id = static_cast<int>(id_to_word_.size());
  word_to_id_.emplace(word, id);
  id_to_word_.push_back(word);
  return id;
}

std::vector<std::string> WordVocab::split_whitespace(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

WordVocab WordVocab::build(std::span<const std::string> texts) {
  WordVocab v;
  v.intern("[PAD]");
  v.intern("[UNK]");
  v.intern("[BOS]");
  v.intern("[EOS]");
  for (const auto& text : texts)
    for (const auto& w : split_whitespace(text)) v.intern(w);
  return v;
}

std::vector<int> WordVocab::encode(const std::string& text) const {
  std::vector<int> ids;
  for (const auto& w : split_whitespace(text)) ids.push_back(id_of(w));
  return ids;
}

int WordVocab::id_of(const std::string& word) const {
  auto it = word_to_id_.find(word);
  return it == word_to_id_.end() ? kUnk : it->second;
}

std::string WordVocab::decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (id < 0 || id >= size()) continue;
    if (id == kPad || id == kBos || id == kEos) continue;
    if (!out.empty()) out += ' ';
    out += id_to_word_[id];
  }
  return out;
}

json WordVocab::to_json() const { return json{{"words", id_to_word_}}; }

WordVocab WordVocab::from_json(const json& j) {
  WordVocab v;
  for (const auto& w : j.at("words")) v.intern(w.get<std::string>());
  return v;
}

}  // namespace hmcgr
