#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vaani/audio.hpp"
#include "vaani/lexicon.hpp"
#include "vaani/morph.hpp"
#include "vaani/recognizer.hpp"
#include "vaani/search.hpp"

namespace vaani {

struct EngineOptions {
  std::filesystem::path resources_dir;
  std::filesystem::path docs_path;
  std::filesystem::path templates_path;  // defaults to resources_dir/templates.tsv
  std::filesystem::path models_dir;      // empty: seeded synthetic phone models
  uint64_t acoustic_seed = 42;
  FeatureConfig features;
};

struct Translation {
  AnalysisRecord analysis;
  std::vector<std::string> english;
};

struct QueryOutcome {
  Translation translation;
  std::vector<std::string> keywords;
  std::optional<Query> query;  // nullopt: no keywords
  ResultPage page;
  std::optional<Answer> answer;
};

// Immutable bundle of everything the dialog loop needs.
class Engine {
 public:
  static std::shared_ptr<const Engine> load(const EngineOptions& opts);

  const ResourceBundle& resources() const { return resources_; }
  const MorphLexicon& hindi_lexicon() const { return hindi_; }
  const MorphLexicon& english_lexicon() const { return english_; }
  const SearchBackend& backend() const { return *backend_; }
  const DocumentCollection& documents() const { return backend_->documents(); }
  const std::vector<AnswerTemplate>& templates() const { return templates_; }
  const GrammarNetwork& grammar() const { return grammar_; }
  const FeatureConfig& feature_config() const { return features_; }
  HindiRenderer renderer() const;

  Translation translate_hindi(const std::string& text) const;
  Translation translate_english(const std::string& text) const;
  QueryOutcome run_query(const std::vector<std::string>& hindi_tokens, size_t k) const;
  Hypothesis recognize(const AudioClip& clip) const;

 private:
  Engine() = default;

  ResourceBundle resources_;
  MorphLexicon hindi_;
  MorphLexicon english_;
  std::unique_ptr<SearchBackend> backend_;
  std::vector<AnswerTemplate> templates_;
  GrammarNetwork grammar_;
  FeatureConfig features_;
};

// Default data directory baked in at build time, overridable by VAANI_DATA.
std::filesystem::path default_data_dir();
EngineOptions default_engine_options(const std::filesystem::path& data_dir = default_data_dir());

}  // namespace vaani
