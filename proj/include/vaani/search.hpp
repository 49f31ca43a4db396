#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vaani/lexicon.hpp"
#include "vaani/morph.hpp"

namespace vaani {

class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Link {
  std::string text;
  std::string href;

  bool operator==(const Link&) const = default;
};

struct Document {
  std::string id;
  std::string url;
  std::string title;
  std::vector<std::string> body;  // sentences
  std::vector<Link> links;
};

class DocumentCollection {
 public:
  DocumentCollection() = default;
  explicit DocumentCollection(std::vector<Document> docs);  // throws SearchError on a duplicate id

  const std::vector<Document>& docs() const { return docs_; }
  size_t size() const { return docs_.size(); }
  const Document* by_id(std::string_view id) const;
  const Document* by_url(std::string_view url) const;

 private:
  std::vector<Document> docs_;
  std::map<std::string, size_t, std::less<>> by_id_;
  std::map<std::string, size_t, std::less<>> by_url_;
};

// docs.jsonl: keys id, url, title, body (sentences), links ({text, href}).
DocumentCollection load_documents(const std::filesystem::path& path);
DocumentCollection parse_documents(std::string_view jsonl);

// Order-preserving, case-insensitive; drops stop words and unknown markers,
// keeps the first of any repeated keyword.
std::vector<std::string> drop_stop_words(const std::vector<std::string>& tokens, const StopWordList& stop);

struct Query {
  std::vector<std::string> keywords;
  std::vector<std::string> raw_english;
};

// nullopt means there is nothing to search for and the user must ask again.
std::optional<Query> build_query(const std::vector<std::string>& keywords,
                                 const std::vector<std::string>& raw_english = {});

struct Posting {
  uint32_t doc = 0;  // position in the indexed collection
  uint32_t tf = 0;
};

class SearchIndex {
 public:
  // Title and body sentences are indexed; terms are lowercased alphanumeric runs.
  static SearchIndex build(const DocumentCollection& docs);

  size_t num_docs() const { return doc_ids_.size(); }
  size_t num_terms() const { return postings_.size(); }
  size_t df(std::string_view term) const;
  uint32_t tf(std::string_view term, std::string_view doc_id) const;
  double idf(std::string_view term) const;
  const std::vector<Posting>* postings(std::string_view term) const;
  const std::string& doc_id(uint32_t doc) const { return doc_ids_[doc]; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }

 private:
  std::vector<std::string> doc_ids_;
  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
};

SearchIndex index_corpus(const DocumentCollection& docs);

struct Hit {
  std::string doc_id;
  double score = 0.0;
  std::string title;
  std::string url;
};

struct NumberedLink {
  size_t number = 0;
  std::string anchor_text;
  std::string target_url;

  bool operator==(const NumberedLink&) const = default;
};

struct ResultPage {
  std::vector<Hit> hits;
  // Links of the page currently shown, numbered from 1.
  std::vector<NumberedLink> numbered_links;
};

// tf-idf with idf = log((1 + N) / (1 + df)); ties by ascending doc id.
ResultPage search(const SearchIndex& index, const DocumentCollection& docs, const Query& query, size_t k);

std::vector<NumberedLink> number_hyperlinks(const Document& doc);

// Query-side search hook; the local index is the only shipped implementation.
class SearchBackend {
 public:
  virtual ~SearchBackend() = default;
  virtual ResultPage search(const Query& query, size_t k) const = 0;
  virtual const DocumentCollection& documents() const = 0;
};

class LocalSearchBackend : public SearchBackend {
 public:
  explicit LocalSearchBackend(DocumentCollection docs);
  ResultPage search(const Query& query, size_t k) const override;
  const DocumentCollection& documents() const override { return docs_; }
  const SearchIndex& index() const { return index_; }

 private:
  DocumentCollection docs_;
  SearchIndex index_;
};

struct AnswerTemplate {
  std::string pattern_keyword;
  std::string hindi_template;  // {1} and {2} slots
};

std::vector<AnswerTemplate> load_templates(const std::filesystem::path& path);

struct Answer {
  std::string english_sentence;
  std::string hindi_rendering;
  std::string source_doc_id;
};

// Resources for rendering an English answer sentence in Hindi.
struct HindiRenderer {
  const std::vector<AnswerTemplate>* templates = nullptr;
  const BilingualLexicon* e2h = nullptr;
  const ParadigmTable* paradigms_en = nullptr;
  const ParadigmTable* paradigms_hi = nullptr;
  const MorphLexicon* english = nullptr;
  const MorphLexicon* hindi = nullptr;

  std::string render(const std::string& sentence, const Query& query) const;
  // Word-by-word English to Hindi; unknown words keep their surface form.
  std::vector<std::string> translate_words(const std::vector<std::string>& words) const;
};

// The top hit's sentence with the largest keyword overlap (earliest on ties),
// or its title when no sentence shares a keyword. nullopt when there are no hits.
std::optional<Answer> filter_answer(const std::vector<Hit>& hits, const DocumentCollection& docs,
                                    const Query& query, const HindiRenderer* renderer = nullptr);

}  // namespace vaani
