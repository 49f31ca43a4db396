#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vaani/feature_set.hpp"
#include "vaani/lexicon.hpp"

namespace vaani {

struct LexicalItem {
  std::string surface;  // one or more words joined by a space
  std::string root;
  Category category = Category::Other;
  FeatureSet features;
  // Half-open range of positions in the whitespace-split input.
  size_t span_begin = 0;
  size_t span_end = 0;

  bool operator==(const LexicalItem&) const = default;
};

struct RemovedAuxiliary {
  std::string word;
  FeatureSet attributes;
  size_t position = 0;

  bool operator==(const RemovedAuxiliary&) const = default;
};

struct NormalizedInput {
  std::vector<std::string> tokens;
  // positions[i] is the input position of tokens[i].
  std::vector<size_t> positions;
  std::vector<RemovedAuxiliary> removed;
};

struct AnalysisRecord {
  std::vector<LexicalItem> items;
  std::vector<RemovedAuxiliary> removed_auxiliaries;
};

// Root/category/feature view used by the tagger; built from the Hindi source
// lexicon or from the source side of a bilingual lexicon.
class MorphLexicon {
 public:
  static MorphLexicon from_source(const SourceLexicon& src);
  static MorphLexicon from_bilingual(const BilingualLexicon& lex);

  bool has_root(std::string_view root, Category c) const;
  bool has_root(std::string_view root) const;
  std::vector<Category> categories_of(std::string_view root) const;
  const MorphEntry* surface_form(std::string_view surface) const;
  const FeatureSet* inherent_features(std::string_view root, Category c) const;
  size_t max_words() const { return max_words_; }
  const std::vector<AuxiliaryEntry>& auxiliaries() const { return auxiliaries_; }

 private:
  std::map<std::string, std::vector<Category>, std::less<>> roots_;
  std::vector<MorphEntry> surface_forms_;
  std::map<std::pair<std::string, Category>, FeatureSet> inherent_;
  std::vector<AuxiliaryEntry> auxiliaries_;
  size_t max_words_ = 1;
};

// English auxiliaries removed before tagging English text.
std::vector<AuxiliaryEntry> english_auxiliaries();

NormalizedInput normalize(std::string_view text, const std::vector<AuxiliaryEntry>& aux);

struct Analysis {
  std::string root;
  Category category = Category::Other;
  FeatureSet features;

  bool operator==(const Analysis&) const = default;
};

// Reverse morphology: irregular override, then the longest suffix rule whose
// reconstructed root is in the lexicon, else identity.
Analysis analyze(std::string_view word, const ParadigmTable& paradigms, const MorphLexicon& lex);

// Forward morphology. Irregulars first, then the most specific rule whose
// features are all requested (ties by file order), else the root unchanged.
std::string generate(std::string_view root, const FeatureSet& features, const ParadigmTable& paradigms,
                     std::optional<Category> category = std::nullopt);
// Same, from "k=v;k=v" text; conflicting values throw InvalidFeatures.
std::string generate(std::string_view root, std::string_view features, const ParadigmTable& paradigms,
                     std::optional<Category> category = std::nullopt);

// Greedy longest match (up to 3 contiguous tokens) then single-token analysis.
AnalysisRecord tag(const NormalizedInput& input, const MorphLexicon& lex, const ParadigmTable& paradigms);

std::string unknown_marker(std::string_view word);
bool is_unknown_marker(std::string_view token);

struct TransferredItem {
  LexicalItem source;
  // Target surface words; a single unknown marker when no rule survived.
  std::vector<std::string> target;
  const TransferRule* rule = nullptr;
};

// Per-item lexical transfer with feature-unification pruning.
std::vector<TransferredItem> transfer_items(const std::vector<LexicalItem>& items, const BilingualLexicon& lexicon,
                                            const ParadigmTable& paradigms_target);

// Full transfer to a target token list. Hindi to English output is put in
// English order (wh-word and copula first, genitive "X ka Y" as "the Y of X",
// postpositions as prepositions, adverbs last); English to Hindi stays in
// source order.
std::vector<std::string> transfer(const AnalysisRecord& record, const BilingualLexicon& lexicon,
                                  const ParadigmTable& paradigms_target);

// "surface⟶root[cat]{k=v,...}" per item, space separated.
std::string format_analysis(const AnalysisRecord& record);

}  // namespace vaani
