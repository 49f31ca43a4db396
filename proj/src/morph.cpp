#include "vaani/morph.hpp"

#include <algorithm>
#include <set>

#include "vaani/text.hpp"

namespace vaani {

namespace {

const std::set<std::string, std::less<>> kWhWords{"what", "who", "where", "which", "when", "how", "why"};

FeatureSet without_category(FeatureSet f) {
  f.erase("category");
  return f;
}

}  // namespace

MorphLexicon MorphLexicon::from_source(const SourceLexicon& src) {
  MorphLexicon lex;
  for (const auto& e : src.hindi_root_lexicon) {
    auto& cats = lex.roots_[e.root];
    if (std::find(cats.begin(), cats.end(), e.category) == cats.end()) cats.push_back(e.category);
    lex.max_words_ = std::max(lex.max_words_, split_ws(e.root).size());
  }
  for (const auto& e : src.noun_features) lex.inherent_[{e.root, Category::Noun}] = e.features;
  for (const auto& e : src.hindi_verb_features) lex.inherent_[{e.root, Category::Verb}] = e.features;
  lex.surface_forms_ = src.morphological_lexicon;
  for (const auto& e : src.morphological_lexicon)
    lex.max_words_ = std::max(lex.max_words_, split_ws(e.surface).size());
  lex.auxiliaries_ = src.auxiliaries;
  return lex;
}

MorphLexicon MorphLexicon::from_bilingual(const BilingualLexicon& bl) {
  MorphLexicon lex;
  for (const auto& r : bl.rules) {
    auto& cats = lex.roots_[r.source_root];
    if (std::find(cats.begin(), cats.end(), r.category) == cats.end()) cats.push_back(r.category);
    lex.max_words_ = std::max(lex.max_words_, split_ws(r.source_root).size());
  }
  if (bl.direction == Direction::EnglishToHindi) lex.auxiliaries_ = english_auxiliaries();
  return lex;
}

bool MorphLexicon::has_root(std::string_view root, Category c) const {
  auto it = roots_.find(root);
  return it != roots_.end() && std::find(it->second.begin(), it->second.end(), c) != it->second.end();
}

bool MorphLexicon::has_root(std::string_view root) const { return roots_.find(root) != roots_.end(); }

std::vector<Category> MorphLexicon::categories_of(std::string_view root) const {
  auto it = roots_.find(root);
  return it == roots_.end() ? std::vector<Category>{} : it->second;
}

const MorphEntry* MorphLexicon::surface_form(std::string_view surface) const {
  for (const auto& e : surface_forms_)
    if (e.surface == surface) return &e;
  return nullptr;
}

const FeatureSet* MorphLexicon::inherent_features(std::string_view root, Category c) const {
  auto it = inherent_.find({std::string(root), c});
  return it == inherent_.end() ? nullptr : &it->second;
}

std::vector<AuxiliaryEntry> english_auxiliaries() {
  return {
      {"am", {{"number", "singular"}, {"person", "1"}, {"tense", "present"}}},
      {"is", {{"number", "singular"}, {"tense", "present"}}},
      {"are", {{"number", "plural"}, {"tense", "present"}}},
      {"was", {{"number", "singular"}, {"tense", "past"}}},
      {"were", {{"number", "plural"}, {"tense", "past"}}},
  };
}

NormalizedInput normalize(std::string_view text, const std::vector<AuxiliaryEntry>& aux) {
  NormalizedInput out;
  auto words = split_ws(to_lower(text));
  for (size_t i = 0; i < words.size(); ++i) {
    auto it = std::find_if(aux.begin(), aux.end(), [&](const AuxiliaryEntry& a) { return a.word == words[i]; });
    if (it != aux.end()) {
      out.removed.push_back({words[i], it->attributes, i});
      continue;
    }
    out.tokens.push_back(std::move(words[i]));
    out.positions.push_back(i);
  }
  return out;
}

Analysis analyze(std::string_view word, const ParadigmTable& paradigms, const MorphLexicon& lex) {
  for (const auto& irr : paradigms.irregulars)
    if (irr.surface == word) return {irr.root, irr.category, irr.features};
  if (const MorphEntry* e = lex.surface_form(word)) return {e->root, e->category, e->features};

  const ParadigmRule* best = nullptr;
  std::string best_root;
  for (const auto& rule : paradigms.rules) {
    if (rule.suffix.empty() || word.size() <= rule.suffix.size() || !ends_with(word, rule.suffix)) continue;
    std::string root = std::string(word.substr(0, word.size() - rule.suffix.size())) + rule.root_replacement;
    if (!lex.has_root(root, rule.category)) continue;
    if (!best || rule.suffix.size() > best->suffix.size()) {
      best = &rule;
      best_root = std::move(root);
    }
  }
  if (best) return {best_root, best->category, best->features};

  auto cats = lex.categories_of(word);
  return {std::string(word), cats.empty() ? Category::Other : cats.front(), {}};
}

std::string generate(std::string_view root, const FeatureSet& requested, const ParadigmTable& paradigms,
                     std::optional<Category> category) {
  const FeatureSet want = without_category(requested);
  const IrregularForm* irregular = nullptr;
  for (const auto& irr : paradigms.irregulars) {
    if (irr.root != root || (category && irr.category != *category)) continue;
    if (irr.features.empty() || !subsumes(want, irr.features)) continue;
    if (!irregular || irr.features.size() > irregular->features.size()) irregular = &irr;
  }
  if (irregular) return irregular->surface;

  const ParadigmRule* best = nullptr;
  for (const auto& rule : paradigms.rules) {
    if (category && rule.category != *category) continue;
    if (!ends_with(root, rule.root_replacement) || root.size() < rule.root_replacement.size()) continue;
    if (rule.root_replacement.size() == root.size() && !rule.root_replacement.empty()) continue;
    if (!subsumes(want, rule.features)) continue;
    if (!best || rule.features.size() > best->features.size()) best = &rule;
  }
  if (!best) return std::string(root);
  return std::string(root.substr(0, root.size() - best->root_replacement.size())) + best->suffix;
}

std::string generate(std::string_view root, std::string_view features, const ParadigmTable& paradigms,
                     std::optional<Category> category) {
  return generate(root, parse_features(features), paradigms, category);
}

AnalysisRecord tag(const NormalizedInput& input, const MorphLexicon& lex, const ParadigmTable& paradigms) {
  AnalysisRecord rec;
  rec.removed_auxiliaries = input.removed;
  const auto& toks = input.tokens;
  const size_t window = std::min<size_t>(3, std::max<size_t>(1, lex.max_words()));
  size_t i = 0;
  while (i < toks.size()) {
    bool matched = false;
    for (size_t len = std::min(window, toks.size() - i); len >= 2; --len) {
      // Only tokens that were adjacent in the input can form one item.
      if (input.positions[i + len - 1] - input.positions[i] != len - 1) continue;
      std::vector<std::string> words(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                     toks.begin() + static_cast<std::ptrdiff_t>(i + len));
      std::string surface = join(words, " ");
      LexicalItem item;
      item.surface = surface;
      item.span_begin = input.positions[i];
      item.span_end = input.positions[i + len - 1] + 1;
      if (const MorphEntry* e = lex.surface_form(surface)) {
        item.root = e->root;
        item.category = e->category;
        item.features = e->features;
      } else if (lex.has_root(surface)) {
        item.root = surface;
        item.category = lex.categories_of(surface).front();
      } else {
        continue;
      }
      rec.items.push_back(std::move(item));
      i += len;
      matched = true;
      break;
    }
    if (matched) continue;

    const std::string& word = toks[i];
    Analysis a = analyze(word, paradigms, lex);
    LexicalItem item;
    item.surface = word;
    item.root = a.root;
    item.category = a.category;
    item.features = a.features;
    if (const FeatureSet* inherent = lex.inherent_features(a.root, a.category))
      for (const auto& [k, v] : *inherent) item.features.emplace(k, v);  // analysed values win
    item.span_begin = input.positions[i];
    item.span_end = input.positions[i] + 1;
    rec.items.push_back(std::move(item));
    ++i;
  }
  return rec;
}

std::string unknown_marker(std::string_view word) { return "⟨unk:" + std::string(word) + "⟩"; }

bool is_unknown_marker(std::string_view token) {
  return starts_with(token, "⟨unk:") && ends_with(token, "⟩");
}

std::vector<TransferredItem> transfer_items(const std::vector<LexicalItem>& items, const BilingualLexicon& lexicon,
                                            const ParadigmTable& paradigms_target) {
  std::vector<TransferredItem> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    FeatureSet item_features = item.features;
    item_features["category"] = std::string(category_name(item.category));

    const TransferRule* best = nullptr;
    FeatureSet best_unified;
    size_t best_matches = 0;
    for (const TransferRule* rule : lexicon.rules_for(item.root)) {
      FeatureSet constraints = rule->constraints;
      auto cat_it = constraints.find("category");
      if (cat_it != constraints.end() && cat_it->second != category_name(rule->category)) continue;
      constraints["category"] = std::string(category_name(rule->category));
      auto unified = unify(item_features, constraints);
      if (!unified) continue;  // inconsistent features prune the rule
      size_t matches = count_matches(without_category(item_features), without_category(rule->constraints));
      if (!best || matches > best_matches) {
        best = rule;
        best_unified = std::move(*unified);
        best_matches = matches;
      }
    }
    TransferredItem t{item, {}, best};
    if (!best) {
      t.target.push_back(unknown_marker(item.surface));
    } else {
      std::string surface = generate(best->target_root, best_unified, paradigms_target, best->category);
      t.target = split_ws(surface);
    }
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

struct Phrase {
  std::vector<std::string> head;
  std::vector<std::string> modifier;  // genitive "of" complement
  bool awaiting_head = false;

  std::vector<std::string> render() const {
    std::vector<std::string> out;
    if (modifier.empty()) return head;
    if (head.empty()) {
      out.push_back("of");
    } else {
      out.push_back("the");
      out.insert(out.end(), head.begin(), head.end());
      out.push_back("of");
    }
    out.insert(out.end(), modifier.begin(), modifier.end());
    return out;
  }
};

std::vector<std::string> reorder_to_english(const std::vector<TransferredItem>& items,
                                            const std::vector<TransferredItem>& aux) {
  std::vector<std::string> wh, adverbs, copula;
  std::vector<std::vector<std::string>> phrases, preps;
  std::optional<Phrase> cur;

  auto append = [](std::vector<std::string>& dst, const std::vector<std::string>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
  };

  for (const auto& t : items) {
    const Category c = t.source.category;
    const bool known = t.rule != nullptr;
    if (known && c == Category::Pronoun && t.target.size() == 1 && kWhWords.count(t.target[0])) {
      append(wh, t.target);
    } else if (known && c == Category::Adverb) {
      append(adverbs, t.target);
    } else if (known && c == Category::Postposition) {
      if (t.target.size() == 1 && t.target[0] == "of") {
        Phrase next;
        if (cur) next.modifier = cur->render();
        next.awaiting_head = true;
        cur = std::move(next);
      } else {
        std::vector<std::string> pp = t.target;
        if (cur) append(pp, cur->render());
        preps.push_back(std::move(pp));
        cur.reset();
      }
    } else {
      if (!cur) cur = Phrase{};
      append(cur->head, t.target);
      cur->awaiting_head = false;
    }
  }
  if (cur) phrases.push_back(cur->render());
  for (const auto& a : aux) append(copula, a.target);

  std::vector<std::string> out;
  if (!wh.empty()) {
    append(out, wh);
    append(out, copula);
    for (const auto& p : phrases) append(out, p);
  } else {
    for (const auto& p : phrases) append(out, p);
    append(out, copula);
  }
  for (const auto& p : preps) append(out, p);
  append(out, adverbs);
  return out;
}

}  // namespace

std::vector<std::string> transfer(const AnalysisRecord& record, const BilingualLexicon& lexicon,
                                  const ParadigmTable& paradigms_target) {
  auto items = transfer_items(record.items, lexicon, paradigms_target);

  std::vector<LexicalItem> aux_items;
  for (const auto& a : record.removed_auxiliaries) {
    LexicalItem li;
    li.surface = a.word;
    li.root = a.word;
    li.category = Category::Verb;
    li.features = a.attributes;
    li.span_begin = a.position;
    li.span_end = a.position + 1;
    aux_items.push_back(std::move(li));
  }
  auto aux = transfer_items(aux_items, lexicon, paradigms_target);

  if (lexicon.direction == Direction::HindiToEnglish) return reorder_to_english(items, aux);

  // Source order, auxiliaries back at their input positions.
  std::vector<const TransferredItem*> all;
  for (const auto& t : items) all.push_back(&t);
  for (const auto& t : aux) all.push_back(&t);
  std::stable_sort(all.begin(), all.end(), [](const TransferredItem* a, const TransferredItem* b) {
    return a->source.span_begin < b->source.span_begin;
  });
  std::vector<std::string> out;
  for (const auto* t : all) out.insert(out.end(), t->target.begin(), t->target.end());
  return out;
}

std::string format_analysis(const AnalysisRecord& record) {
  std::vector<std::string> parts;
  for (const auto& item : record.items) {
    parts.push_back(item.surface + "⟶" + item.root + "[" + std::string(category_name(item.category)) + "]{" +
                    format_features(item.features, ",") + "}");
  }
  return join(parts, " ");
}

}  // namespace vaani
