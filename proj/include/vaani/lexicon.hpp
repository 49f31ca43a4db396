#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vaani/feature_set.hpp"

namespace vaani {

// Load failure with the file, line and rule that was violated.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(std::string file, int line, const std::string& rule)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + rule),
        file_(std::move(file)),
        line_(line) {}
  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

class OovError : public std::runtime_error {
 public:
  explicit OovError(std::string word)
      : std::runtime_error("OOV(" + word + ")"), word_(std::move(word)) {}
  const std::string& word() const { return word_; }

 private:
  std::string word_;
};

enum class Category { Noun, Verb, Adjective, Adverb, Pronoun, Postposition, Interjection, Other };

std::string_view category_name(Category c);
std::optional<Category> parse_category(std::string_view s);

enum class PhoneKind { Vowel, Consonant, Closure, Release };

struct PhoneUnit {
  std::string id;
  PhoneKind kind = PhoneKind::Consonant;
  // Release units name their closure unit here.
  std::string base_plosive;
  // "en" for vowels borrowed from English, empty otherwise.
  std::string origin;
};

class PhoneSet {
 public:
  PhoneSet() = default;
  explicit PhoneSet(std::vector<PhoneUnit> units);  // throws std::invalid_argument

  const std::vector<PhoneUnit>& units() const { return units_; }
  size_t size() const { return units_.size(); }
  bool contains(std::string_view id) const;
  const PhoneUnit* find(std::string_view id) const;
  // plosive label (its release unit) -> (closure unit, release unit)
  const std::map<std::string, std::pair<std::string, std::string>>& closure_release_pairs() const {
    return pairs_;
  }
  std::vector<std::string> extra_vowels() const;

 private:
  std::vector<PhoneUnit> units_;
  std::map<std::string, size_t, std::less<>> index_;
  std::map<std::string, std::pair<std::string, std::string>> pairs_;
};

struct PronEntry {
  std::string word;
  std::vector<std::string> phones;
};

class PronLexicon {
 public:
  void add(PronEntry e);  // throws std::invalid_argument on a duplicate word
  const std::vector<PronEntry>& entries() const { return entries_; }
  const PronEntry* find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word) != nullptr; }

 private:
  std::vector<PronEntry> entries_;
  std::map<std::string, size_t, std::less<>> index_;
};

enum class Direction { HindiToEnglish, EnglishToHindi };

struct TransferRule {
  std::string source_root;
  std::string target_root;
  Category category = Category::Other;
  FeatureSet constraints;
};

struct BilingualLexicon {
  Direction direction = Direction::HindiToEnglish;
  std::vector<TransferRule> rules;  // file order is the tie-break order

  std::vector<const TransferRule*> rules_for(std::string_view source_root) const;
};

struct RootEntry {
  std::string root;
  Category category = Category::Other;
};

struct FeatureEntry {
  std::string root;
  FeatureSet features;
};

struct MorphEntry {
  std::string surface;
  std::string root;
  Category category = Category::Other;
  FeatureSet features;
};

struct SuffixEntry {
  std::string suffix;
  Category category = Category::Other;
  FeatureSet features;
};

struct AuxiliaryEntry {
  std::string word;
  FeatureSet attributes;
};

struct SourceLexicon {
  std::vector<RootEntry> hindi_root_lexicon;
  std::vector<FeatureEntry> hindi_verb_features;
  std::vector<MorphEntry> morphological_lexicon;
  std::vector<FeatureEntry> noun_features;
  std::vector<SuffixEntry> suffixes;
  std::vector<AuxiliaryEntry> auxiliaries;

  std::vector<Category> categories_of(std::string_view root) const;
  const FeatureSet* inherent_features(std::string_view root, Category c) const;
  const AuxiliaryEntry* auxiliary(std::string_view word) const;
};

struct ParadigmRule {
  Category category = Category::Other;
  std::string suffix;
  std::string root_replacement;
  FeatureSet features;
};

struct IrregularForm {
  Category category = Category::Other;
  std::string surface;
  std::string root;
  FeatureSet features;
};

struct ParadigmTable {
  std::vector<ParadigmRule> rules;
  std::vector<IrregularForm> irregulars;
};

struct CorpusPair {
  std::vector<std::string> hindi;
  std::vector<std::string> english;
  std::vector<std::pair<size_t, size_t>> alignment;
};

struct QueryCorpus {
  std::vector<CorpusPair> pairs;
};

struct StopWordList {
  std::vector<std::string> words;  // file order
  std::set<std::string, std::less<>> set;

  bool contains(std::string_view w) const { return set.find(w) != set.end(); }
};

struct ResourceBundle {
  PhoneSet phones;
  PronLexicon pron;
  BilingualLexicon h2e{Direction::HindiToEnglish, {}};
  BilingualLexicon e2h{Direction::EnglishToHindi, {}};
  ParadigmTable paradigms_hi;
  ParadigmTable paradigms_en;
  SourceLexicon source;
  StopWordList stop_words;
  QueryCorpus corpus;
};

// Reads every file listed in the resource layout and checks all invariants.
ResourceBundle load_resources(const std::filesystem::path& dir);

// Canonical writer: records in stored order, fixed header comment per file.
void save_resources(const ResourceBundle& bundle, const std::filesystem::path& dir);

// Hindi corpus tokens that have no pronunciation, in first-seen order.
std::vector<std::string> oov_report(const ResourceBundle& bundle);

// Lexicon pronunciation with plosives expanded to (closure, release).
std::vector<std::string> pronounce(std::string_view word, const PronLexicon& lex, const PhoneSet& phones);

}  // namespace vaani
