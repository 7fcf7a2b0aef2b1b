#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace hmcgr {

// Deterministic subword encoding: words are chunked to at most
// `max_piece_len` characters, continuation pieces carry `continuation` and
// the first piece carries `word_start`. Pieces unseen at build time map to
// [UNK]. Two differently-configured instances stand in for the two
// pretraining vocabularies of the dual encoder.
class SubwordVocab {
 public:
  struct Options {
    int max_piece_len = 12;
    bool lowercase = false;
    std::string continuation;  // e.g. "##"
    std::string word_start;    // e.g. "_"
    bool prepend_cls = false;  // classification prefix position
  };

  struct Encoding {
    std::vector<int> ids;
    std::vector<int> word_of_piece;              // -1 for special positions
    std::vector<std::pair<int, int>> word_pieces;  // per word: [begin, end) piece rows
  };

  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;

  static SubwordVocab build(std::span<const std::string> words, Options options);

  Encoding encode(std::span<const std::string> words) const;
  std::vector<std::string> split_word(const std::string& word) const;

  int size() const { return static_cast<int>(id_to_piece_.size()); }
  const Options& options() const { return options_; }

  nlohmann::json to_json() const;
  static SubwordVocab from_json(const nlohmann::json& j);

 private:
  int intern(const std::string& piece);
  int lookup(const std::string& piece) const;

  Options options_;
  std::map<std::string, int> piece_to_id_;
  std::vector<std::string> id_to_piece_;
};

// Whitespace-level vocabulary for the generation decoder's target side.
class WordVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;

  static WordVocab build(std::span<const std::string> texts);

  std::vector<int> encode(const std::string& text) const;  // no BOS/EOS added
  std::string decode(std::span<const int> ids) const;      // joins with single spaces
  int id_of(const std::string& word) const;                // kUnk when absent
  int size() const { return static_cast<int>(id_to_word_.size()); }

  nlohmann::json to_json() const;
  static WordVocab from_json(const nlohmann::json& j);

  static std::vector<std::string> split_whitespace(const std::string& text);

 private:
  int intern(const std::string& word);

  std::map<std::string, int> word_to_id_;
  std::vector<std::string> id_to_word_;
};

}  // namespace hmcgr
