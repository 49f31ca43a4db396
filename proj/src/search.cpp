#include "vaani/search.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vaani/text.hpp"

namespace vaani {

DocumentCollection::DocumentCollection(std::vector<Document> docs) : docs_(std::move(docs)) {
  for (size_t i = 0; i < docs_.size(); ++i) {
    if (!by_id_.emplace(docs_[i].id, i).second) throw SearchError("duplicate document id: " + docs_[i].id);
    if (!docs_[i].url.empty()) by_url_.emplace(docs_[i].url, i);
  }
}

const Document* DocumentCollection::by_id(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &docs_[it->second];
}

const Document* DocumentCollection::by_url(std::string_view url) const {
  auto it = by_url_.find(url);
  return it == by_url_.end() ? nullptr : &docs_[it->second];
}

DocumentCollection parse_documents(std::string_view jsonl) {
  std::vector<Document> docs;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Document d;
      d.id = j.at("id").get<std::string>();
      d.url = j.value("url", "");
      d.title = j.value("title", "");
      for (const auto& s : j.at("body")) {
        auto sentence = s.get<std::string>();
        if (trim(sentence).empty()) throw SearchError("empty sentence");
        d.body.push_back(std::move(sentence));
      }
      if (j.contains("links"))
        for (const auto& l : j.at("links")) d.links.push_back({l.at("text").get<std::string>(), l.at("href").get<std::string>()});
      docs.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw SearchError("docs line " + std::to_string(lineno) + ": " + e.what());
    } catch (const SearchError& e) {
      throw SearchError("docs line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return DocumentCollection(std::move(docs));
}

DocumentCollection load_documents(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SearchError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_documents(ss.str());
}

std::vector<std::string> drop_stop_words(const std::vector<std::string>& tokens, const StopWordList& stop) {
  std::vector<std::string> out;
  std::set<std::string, std::less<>> seen;
  for (const auto& tok : tokens) {
    if (is_unknown_marker(tok)) continue;
    std::string w = to_lower(tok);
    if (w.empty() || stop.contains(w)) continue;
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

std::optional<Query> build_query(const std::vector<std::string>& keywords, const std::vector<std::string>& raw) {
  if (keywords.empty()) return std::nullopt;
  return Query{keywords, raw};
}

SearchIndex SearchIndex::build(const DocumentCollection& docs) {
  SearchIndex idx;
  for (uint32_t d = 0; d < docs.size(); ++d) {
    const Document& doc = docs.docs()[d];
    idx.doc_ids_.push_back(doc.id);
    std::map<std::string, uint32_t> counts;
    for (auto& t : alnum_terms(doc.title)) ++counts[t];
    for (const auto& s : doc.body)
      for (auto& t : alnum_terms(s)) ++counts[t];
    for (const auto& [term, n] : counts) idx.postings_[term].push_back({d, n});
  }
  return idx;
}

size_t SearchIndex::df(std::string_view term) const {
  const auto* p = postings(term);
  return p ? p->size() : 0;
}

uint32_t SearchIndex::tf(std::string_view term, std::string_view doc_id) const {
  const auto* p = postings(term);
  if (!p) return 0;
  for (const auto& post : *p)
    if (doc_ids_[post.doc] == doc_id) return post.tf;
  return 0;
}

double SearchIndex::idf(std::string_view term) const {
  return std::log((1.0 + static_cast<double>(num_docs())) / (1.0 + static_cast<double>(df(term))));
}

const std::vector<Posting>* SearchIndex::postings(std::string_view term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? nullptr : &it->second;
}

SearchIndex index_corpus(const DocumentCollection& docs) { return SearchIndex::build(docs); }

ResultPage search(const SearchIndex& index, const DocumentCollection& docs, const Query& query, size_t k) {
  if (k == 0) throw SearchError("k must be at least 1");
  std::map<uint32_t, double> scores;
  std::set<std::string> seen;
  for (const auto& kw : query.keywords) {
    std::string term = to_lower(kw);
    if (!seen.insert(term).second) continue;
    const auto* p = index.postings(term);
    if (!p) continue;
    const double w = index.idf(term);
    for (const auto& post : *p) scores[post.doc] += post.tf * w;
  }
  std::vector<std::pair<uint32_t, double>> ranked(scores.begin(), scores.end());
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return index.doc_id(a.first) < index.doc_id(b.first);
  });
  if (ranked.size() > k) ranked.resize(k);

  ResultPage page;
  for (const auto& [d, score] : ranked) {
    const Document* doc = docs.by_id(index.doc_id(d));
    page.hits.push_back({index.doc_id(d), score, doc ? doc->title : "", doc ? doc->url : ""});
  }
  if (!page.hits.empty())
    if (const Document* top = docs.by_id(page.hits.front().doc_id)) page.numbered_links = number_hyperlinks(*top);
  return page;
}

std::vector<NumberedLink> number_hyperlinks(const Document& doc) {
  std::vector<NumberedLink> out;
  out.reserve(doc.links.size());
  for (size_t i = 0; i < doc.links.size(); ++i) out.push_back({i + 1, doc.links[i].text, doc.links[i].href});
  return out;
}

LocalSearchBackend::LocalSearchBackend(DocumentCollection docs)
    : docs_(std::move(docs)), index_(index_corpus(docs_)) {}

ResultPage LocalSearchBackend::search(const Query& query, size_t k) const {
  return vaani::search(index_, docs_, query, k);
}

std::vector<AnswerTemplate> load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SearchError("cannot open " + path.string());
  std::vector<AnswerTemplate> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto cols = split_char(line, '\t');
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty())
      throw SearchError(path.filename().string() + ":" + std::to_string(lineno) + ": expected 2 columns");
    out.push_back({to_lower(cols[0]), cols[1]});
  }
  return out;
}

namespace {

std::string strip_punct(std::string_view w) {
  size_t b = 0, e = w.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(w[b]))) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(w[e - 1]))) --e;
  return std::string(w.substr(b, e - b));
}

std::vector<std::string> clean_words(const std::string& sentence) {
  std::vector<std::string> out;
  for (const auto& w : split_ws(sentence)) {
    auto c = strip_punct(w);
    if (!c.empty()) out.push_back(std::move(c));
  }
  return out;
}

size_t overlap(const std::string& sentence, const Query& query) {
  auto terms = alnum_terms(sentence);
  std::set<std::string> present(terms.begin(), terms.end());
  size_t n = 0;
  for (const auto& kw : query.keywords) n += present.count(to_lower(kw));
  return n;
}

void replace_all(std::string& s, std::string_view from, const std::string& to) {
  for (size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

}  // namespace

std::vector<std::string> HindiRenderer::translate_words(const std::vector<std::string>& words) const {
  NormalizedInput in;
  for (size_t i = 0; i < words.size(); ++i) {
    in.tokens.push_back(to_lower(words[i]));
    in.positions.push_back(i);
  }
  auto rec = tag(in, *english, *paradigms_en);
  std::vector<std::string> out;
  for (const auto& t : transfer_items(rec.items, *e2h, *paradigms_hi)) {
    if (t.rule) {
      out.insert(out.end(), t.target.begin(), t.target.end());
    } else {
      for (size_t p = t.source.span_begin; p < t.source.span_end; ++p) out.push_back(words[p]);
    }
  }
  return out;
}

std::string HindiRenderer::render(const std::string& sentence, const Query& query) const {
  const auto words = clean_words(sentence);
  auto fallback = [&] { return join(translate_words(words), " "); };
  if (!templates) return fallback();

  const AnswerTemplate* tpl = nullptr;
  for (const auto& kw : query.keywords) {
    for (const auto& t : *templates)
      if (t.pattern_keyword == kw) {
        tpl = &t;
        break;
      }
    if (tpl) break;
  }
  if (!tpl) return fallback();

  std::vector<std::string> lower;
  for (const auto& w : words) lower.push_back(to_lower(w));
  auto anchor = std::find(lower.begin(), lower.end(), tpl->pattern_keyword);
  if (anchor == lower.end()) return fallback();
  auto copula = std::find(anchor, lower.end(), "is");
  if (copula == lower.end() || copula + 1 == lower.end()) return fallback();

  std::optional<size_t> slot1;
  for (const auto& kw : query.keywords) {
    if (kw == tpl->pattern_keyword) continue;
    auto it = std::find(lower.begin(), lower.end(), to_lower(kw));
    if (it != lower.end()) {
      slot1 = static_cast<size_t>(it - lower.begin());
      break;
    }
  }
  if (!slot1) return fallback();

  // A postposition right after {1} puts it in the oblique case.
  bool oblique = false;
  auto tpl_words = split_ws(tpl->hindi_template);
  auto s1 = std::find(tpl_words.begin(), tpl_words.end(), "{1}");
  if (s1 != tpl_words.end() && s1 + 1 != tpl_words.end() && hindi)
    oblique = analyze(*(s1 + 1), *paradigms_hi, *hindi).category == Category::Postposition;

  std::string first = words[*slot1];
  {
    NormalizedInput in{{lower[*slot1]}, {0}, {}};
    auto rec = tag(in, *english, *paradigms_en);
    auto items = transfer_items(rec.items, *e2h, *paradigms_hi);
    if (items.size() == 1 && items[0].rule) {
      const TransferRule& rule = *items[0].rule;
      FeatureSet f = unify(items[0].source.features, rule.constraints).value_or(items[0].source.features);
      if (oblique) f["case"] = "oblique";
      first = generate(rule.target_root, f, *paradigms_hi, rule.category);
    }
  }
  const size_t tail_begin = static_cast<size_t>(copula - lower.begin()) + 1;
  std::vector<std::string> tail(words.begin() + static_cast<std::ptrdiff_t>(tail_begin), words.end());
  std::string second = join(translate_words(tail), " ");

  std::string out = tpl->hindi_template;
  replace_all(out, "{1}", first);
  replace_all(out, "{2}", second);
  return out;
}

std::optional<Answer> filter_answer(const std::vector<Hit>& hits, const DocumentCollection& docs,
                                    const Query& query, const HindiRenderer* renderer) {
  if (hits.empty()) return std::nullopt;
  const Document* doc = docs.by_id(hits.front().doc_id);
  if (!doc) throw SearchError("hit refers to unknown document " + hits.front().doc_id);

  const std::string* best = nullptr;
  size_t best_overlap = 0;
  for (const auto& s : doc->body) {
    size_t n = overlap(s, query);
    if (n > best_overlap) {
      best = &s;
      best_overlap = n;
    }
  }
  Answer a;
  a.source_doc_id = doc->id;
  a.english_sentence = best ? *best : doc->title;
  if (renderer) a.hindi_rendering = renderer->render(a.english_sentence, query);
  return a;
}

}  // namespace vaani
