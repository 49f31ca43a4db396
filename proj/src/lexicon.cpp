#include "vaani/lexicon.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vaani/text.hpp"

namespace vaani {

namespace {

constexpr std::array<std::pair<Category, std::string_view>, 8> kCategoryNames{{
    {Category::Noun, "noun"},
    {Category::Verb, "verb"},
    {Category::Adjective, "adjective"},
    {Category::Adverb, "adverb"},
    {Category::Pronoun, "pronoun"},
    {Category::Postposition, "postposition"},
    {Category::Interjection, "interjection"},
    {Category::Other, "other"},
}};

const std::set<std::string, std::less<>> kFeatureAttributes{"gender", "number", "person",
                                                            "case",   "tense",  "aspect"};

struct Row {
  int line;
  std::vector<std::string> fields;
};

// One record per line, tab separated; blank and '#' lines are skipped.
std::vector<Row> read_tsv(const std::filesystem::path& path, const std::string& label) {
  std::ifstream in(path);
  if (!in) throw ResourceError(label, 0, "missing file");
  std::vector<Row> rows;
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    Row r{no, split_char(line, '\t')};
    for (auto& f : r.fields) f = trim(f);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string field(const Row& r, size_t i) { return i < r.fields.size() ? r.fields[i] : std::string(); }

void need_fields(const Row& r, size_t n, const std::string& label) {
  if (r.fields.size() < n)
    throw ResourceError(label, r.line, "expected at least " + std::to_string(n) + " columns");
}

Category need_category(const std::string& s, const Row& r, const std::string& label) {
  auto c = parse_category(s);
  if (!c) throw ResourceError(label, r.line, "unknown category '" + s + "'");
  return *c;
}

FeatureSet need_features(const std::string& s, const Row& r, const std::string& label,
                         bool allow_category = false) {
  FeatureSet f;
  try {
    f = parse_features(s);
  } catch (const InvalidFeatures& e) {
    throw ResourceError(label, r.line, e.what());
  }
  for (const auto& [k, v] : f) {
    if (kFeatureAttributes.count(k)) continue;
    if (allow_category && k == "category") {
      need_category(v, r, label);
      continue;
    }
    throw ResourceError(label, r.line, "unknown attribute '" + k + "'");
  }
  return f;
}

std::string_view kind_name(PhoneKind k) {
  switch (k) {
    case PhoneKind::Vowel: return "vowel";
    case PhoneKind::Consonant: return "consonant";
    case PhoneKind::Closure: return "closure";
    case PhoneKind::Release: return "release";
  }
  return "consonant";
}

// Writes columns joined by tabs with trailing empty columns dropped.
void put_row(std::ostream& os, std::vector<std::string> cols) {
  while (cols.size() > 1 && cols.back().empty()) cols.pop_back();
  os << join(cols, "\t") << "\n";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError(path.string(), 0, "cannot write file");
  out << content;
}

PhoneSet load_phones(const std::filesystem::path& dir) {
  const std::string label = "phones.tsv";
  std::vector<PhoneUnit> units;
  std::set<std::string> seen;
  std::map<std::string, int> lines;
  for (const auto& r : read_tsv(dir / label, label)) {
    need_fields(r, 2, label);
    PhoneUnit u;
    u.id = field(r, 0);
    std::string kind = field(r, 1);
    if (kind == "vowel") u.kind = PhoneKind::Vowel;
    else if (kind == "consonant") u.kind = PhoneKind::Consonant;
    else if (kind == "closure") u.kind = PhoneKind::Closure;
    else if (kind == "release") u.kind = PhoneKind::Release;
    else throw ResourceError(label, r.line, "unknown phone kind '" + kind + "'");
    u.base_plosive = field(r, 2);
    u.origin = field(r, 3);
    if (!seen.insert(u.id).second) throw ResourceError(label, r.line, "duplicate phone '" + u.id + "'");
    if (u.kind == PhoneKind::Release && u.base_plosive.empty())
      throw ResourceError(label, r.line, "release unit '" + u.id + "' names no closure");
    lines[u.id] = r.line;
    units.push_back(std::move(u));
  }
  for (const auto& u : units) {
    if (u.kind != PhoneKind::Release) continue;
    bool ok = false;
    for (const auto& c : units)
      if (c.id == u.base_plosive && c.kind == PhoneKind::Closure) ok = true;
    if (!ok || u.base_plosive == u.id)
      throw ResourceError(label, lines[u.id], "closure '" + u.base_plosive + "' of '" + u.id + "' is not a closure unit");
  }
  if (!seen.count("ae")) throw ResourceError(label, 0, "phone set lacks /ae/");
  return PhoneSet(std::move(units));
}

PronLexicon load_pron(const std::filesystem::path& dir, const PhoneSet& phones) {
  const std::string label = "pron.tsv";
  PronLexicon lex;
  for (const auto& r : read_tsv(dir / label, label)) {
    PronEntry e;
    e.word = field(r, 0);
    e.phones = split_ws(field(r, 1));
    if (e.word != to_lower(e.word)) throw ResourceError(label, r.line, "word '" + e.word + "' not lowercase");
    if (e.phones.empty()) throw ResourceError(label, r.line, "empty pronunciation for '" + e.word + "'");
    for (const auto& p : e.phones)
      if (!phones.contains(p)) throw ResourceError(label, r.line, "unknown phone '" + p + "' in '" + e.word + "'");
    if (lex.contains(e.word)) throw ResourceError(label, r.line, "duplicate word '" + e.word + "'");
    lex.add(std::move(e));
  }
  return lex;
}

BilingualLexicon load_bilingual(const std::filesystem::path& path, Direction dir) {
  const std::string label = path.filename().string();
  BilingualLexicon lex{dir, {}};
  std::set<std::tuple<std::string, Category, std::string>> seen;
  for (const auto& r : read_tsv(path, label)) {
    need_fields(r, 3, label);
    TransferRule rule;
    rule.source_root = field(r, 0);
    rule.target_root = field(r, 1);
    rule.category = need_category(field(r, 2), r, label);
    rule.constraints = need_features(field(r, 3), r, label, true);
    if (rule.source_root.empty() || rule.target_root.empty())
      throw ResourceError(label, r.line, "empty root");
    if (!seen.emplace(rule.source_root, rule.category, format_features(rule.constraints)).second)
      throw ResourceError(label, r.line, "duplicate rule for '" + rule.source_root + "'");
    lex.rules.push_back(std::move(rule));
  }
  return lex;
}

ParadigmTable load_paradigms(const std::filesystem::path& path) {
  const std::string label = path.filename().string();
  ParadigmTable t;
  std::set<std::pair<Category, std::string>> seen, seen_irregular;
  std::set<Category> with_rules, with_identity;
  for (const auto& r : read_tsv(path, label)) {
    need_fields(r, 1, label);
    Category c = need_category(field(r, 0), r, label);
    std::string suffix = field(r, 1);
    if (starts_with(suffix, "*")) {
      IrregularForm f{c, suffix.substr(1), field(r, 2), need_features(field(r, 3), r, label)};
      if (f.surface.empty() || f.root.empty()) throw ResourceError(label, r.line, "irregular needs surface and root");
      if (!seen_irregular.emplace(c, f.surface).second)
        throw ResourceError(label, r.line, "duplicate irregular '" + f.surface + "'");
      t.irregulars.push_back(std::move(f));
      continue;
    }
    ParadigmRule rule{c, suffix, field(r, 2), need_features(field(r, 3), r, label)};
    if (!seen.emplace(c, suffix).second)
      throw ResourceError(label, r.line, "duplicate suffix '" + suffix + "' for " + std::string(category_name(c)));
    with_rules.insert(c);
    if (rule.suffix.empty() && rule.root_replacement.empty() && rule.features.empty()) with_identity.insert(c);
    t.rules.push_back(std::move(rule));
  }
  for (Category c : with_rules)
    if (!with_identity.count(c))
      throw ResourceError(label, 0, "no identity rule for category " + std::string(category_name(c)));
  return t;
}

SourceLexicon load_source(const std::filesystem::path& dir) {
  SourceLexicon s;
  std::set<std::string> roots;
  {
    const std::string label = "source_lexicon/hindi_root_lexicon.tsv";
    std::set<std::pair<std::string, Category>> seen;
    for (const auto& r : read_tsv(dir / "hindi_root_lexicon.tsv", label)) {
      need_fields(r, 2, label);
      RootEntry e{field(r, 0), need_category(field(r, 1), r, label)};
      if (!seen.emplace(e.root, e.category).second)
        throw ResourceError(label, r.line, "duplicate root '" + e.root + "'");
      roots.insert(e.root);
      s.hindi_root_lexicon.push_back(std::move(e));
    }
  }
  auto feature_table = [&](const std::string& file) {
    const std::string label = "source_lexicon/" + file;
    std::vector<FeatureEntry> out;
    for (const auto& r : read_tsv(dir / file, label)) {
      need_fields(r, 1, label);
      FeatureEntry e{field(r, 0), need_features(field(r, 1), r, label)};
      if (!roots.count(e.root)) throw ResourceError(label, r.line, "dangling root '" + e.root + "'");
      out.push_back(std::move(e));
    }
    return out;
  };
  s.hindi_verb_features = feature_table("hindi_verb_features.tsv");
  s.noun_features = feature_table("noun_features.tsv");
  {
    const std::string label = "source_lexicon/morphological_lexicon.tsv";
    for (const auto& r : read_tsv(dir / "morphological_lexicon.tsv", label)) {
      need_fields(r, 3, label);
      MorphEntry e{field(r, 0), field(r, 1), need_category(field(r, 2), r, label),
                   need_features(field(r, 3), r, label)};
      if (!roots.count(e.root)) throw ResourceError(label, r.line, "dangling root '" + e.root + "'");
      s.morphological_lexicon.push_back(std::move(e));
    }
  }
  {
    const std::string label = "source_lexicon/suffixes.tsv";
    for (const auto& r : read_tsv(dir / "suffixes.tsv", label)) {
      need_fields(r, 2, label);
      s.suffixes.push_back({field(r, 0), need_category(field(r, 1), r, label), need_features(field(r, 2), r, label)});
    }
  }
  {
    const std::string label = "source_lexicon/auxiliaries.tsv";
    std::set<std::string> seen;
    for (const auto& r : read_tsv(dir / "auxiliaries.tsv", label)) {
      need_fields(r, 1, label);
      AuxiliaryEntry e{field(r, 0), need_features(field(r, 1), r, label)};
      if (!seen.insert(e.word).second) throw ResourceError(label, r.line, "duplicate auxiliary '" + e.word + "'");
      s.auxiliaries.push_back(std::move(e));
    }
  }
  return s;
}

StopWordList load_stop_words(const std::filesystem::path& path) {
  const std::string label = "stopwords.txt";
  StopWordList list;
  for (const auto& r : read_tsv(path, label)) {
    std::string w = to_lower(field(r, 0));
    if (list.set.insert(w).second) list.words.push_back(w);
  }
  if (list.words.empty()) throw ResourceError(label, 0, "stop word list empty");
  for (const char* must : {"what", "is", "the", "of", "in", "a", "an", "to"})
    if (!list.contains(must)) throw ResourceError(label, 0, std::string("stop word list lacks '") + must + "'");
  return list;
}

QueryCorpus load_corpus(const std::filesystem::path& path) {
  const std::string label = "corpus.jsonl";
  std::ifstream in(path);
  if (!in) throw ResourceError(label, 0, "missing file");
  QueryCorpus corpus;
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (trim(line).empty()) continue;
    CorpusPair p;
    try {
      auto j = nlohmann::json::parse(line);
      p.hindi = j.at("hindi").get<std::vector<std::string>>();
      p.english = j.at("english").get<std::vector<std::string>>();
      for (const auto& a : j.at("alignment")) p.alignment.emplace_back(a.at(0).get<size_t>(), a.at(1).get<size_t>());
    } catch (const nlohmann::json::exception& e) {
      throw ResourceError(label, no, std::string("bad record: ") + e.what());
    }
    if (p.hindi.empty() || p.english.empty()) throw ResourceError(label, no, "empty side");
    for (const auto& [h, e] : p.alignment)
      if (h >= p.hindi.size() || e >= p.english.size())
        throw ResourceError(label, no, "alignment index out of range");
    corpus.pairs.push_back(std::move(p));
  }
  return corpus;
}

}  // namespace

std::string_view category_name(Category c) {
  for (const auto& [cat, name] : kCategoryNames)
    if (cat == c) return name;
  return "other";
}

std::optional<Category> parse_category(std::string_view s) {
  for (const auto& [cat, name] : kCategoryNames)
    if (name == s) return cat;
  return std::nullopt;
}

PhoneSet::PhoneSet(std::vector<PhoneUnit> units) : units_(std::move(units)) {
  for (size_t i = 0; i < units_.size(); ++i) {
    if (!index_.emplace(units_[i].id, i).second)
      throw std::invalid_argument("duplicate phone '" + units_[i].id + "'");
  }
  for (const auto& u : units_)
    if (u.kind == PhoneKind::Release) pairs_[u.id] = {u.base_plosive, u.id};
}

bool PhoneSet::contains(std::string_view id) const { return index_.find(id) != index_.end(); }

const PhoneUnit* PhoneSet::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &units_[it->second];
}

std::vector<std::string> PhoneSet::extra_vowels() const {
  std::vector<std::string> out;
  for (const auto& u : units_)
    if (u.kind == PhoneKind::Vowel && u.origin == "en") out.push_back(u.id);
  return out;
}

void PronLexicon::add(PronEntry e) {
  if (index_.count(e.word)) throw std::invalid_argument("duplicate word '" + e.word + "'");
  index_.emplace(e.word, entries_.size());
  entries_.push_back(std::move(e));
}

const PronEntry* PronLexicon::find(std::string_view word) const {
  auto it = index_.find(word);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

std::vector<const TransferRule*> BilingualLexicon::rules_for(std::string_view source_root) const {
  std::vector<const TransferRule*> out;
  for (const auto& r : rules)
    if (r.source_root == source_root) out.push_back(&r);
  return out;
}

std::vector<Category> SourceLexicon::categories_of(std::string_view root) const {
  std::vector<Category> out;
  for (const auto& e : hindi_root_lexicon)
    if (e.root == root) out.push_back(e.category);
  return out;
}

const FeatureSet* SourceLexicon::inherent_features(std::string_view root, Category c) const {
  const auto& table = c == Category::Verb ? hindi_verb_features : noun_features;
  if (c != Category::Verb && c != Category::Noun) return nullptr;
  for (const auto& e : table)
    if (e.root == root) return &e.features;
  return nullptr;
}

const AuxiliaryEntry* SourceLexicon::auxiliary(std::string_view word) const {
  for (const auto& a : auxiliaries)
    if (a.word == word) return &a;
  return nullptr;
}

ResourceBundle load_resources(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ResourceError(dir.string(), 0, "not a directory");
  ResourceBundle b;
  b.phones = load_phones(dir);
  b.pron = load_pron(dir, b.phones);
  b.h2e = load_bilingual(dir / "lex_h2e.tsv", Direction::HindiToEnglish);
  b.e2h = load_bilingual(dir / "lex_e2h.tsv", Direction::EnglishToHindi);
  b.paradigms_hi = load_paradigms(dir / "paradigms_hi.tsv");
  b.paradigms_en = load_paradigms(dir / "paradigms_en.tsv");
  b.source = load_source(dir / "source_lexicon");
  b.stop_words = load_stop_words(dir / "stopwords.txt");
  b.corpus = load_corpus(dir / "corpus.jsonl");
  return b;
}

void save_resources(const ResourceBundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "source_lexicon");
  {
    std::ostringstream os;
    os << "# id\tkind\tbase_plosive\torigin\n";
    for (const auto& u : b.phones.units()) put_row(os, {u.id, std::string(kind_name(u.kind)), u.base_plosive, u.origin});
    write_file(dir / "phones.tsv", os.str());
  }
  {
    std::ostringstream os;
    os << "# word\tphones\n";
    for (const auto& e : b.pron.entries()) put_row(os, {e.word, join(e.phones, " ")});
    write_file(dir / "pron.tsv", os.str());
  }
  auto bilingual = [&](const BilingualLexicon& lex, const std::string& file) {
    std::ostringstream os;
    os << "# source_root\ttarget_root\tcategory\tconstraints\n";
    for (const auto& r : lex.rules)
      put_row(os, {r.source_root, r.target_root, std::string(category_name(r.category)), format_features(r.constraints)});
    write_file(dir / file, os.str());
  };
  bilingual(b.h2e, "lex_h2e.tsv");
  bilingual(b.e2h, "lex_e2h.tsv");
  auto paradigms = [&](const ParadigmTable& t, const std::string& file) {
    std::ostringstream os;
    os << "# category\tsuffix\troot_replacement\tfeatures\n";
    for (const auto& r : t.rules)
      put_row(os, {std::string(category_name(r.category)), r.suffix, r.root_replacement, format_features(r.features)});
    for (const auto& f : t.irregulars)
      put_row(os, {std::string(category_name(f.category)), "*" + f.surface, f.root, format_features(f.features)});
    write_file(dir / file, os.str());
  };
  paradigms(b.paradigms_hi, "paradigms_hi.tsv");
  paradigms(b.paradigms_en, "paradigms_en.tsv");
  const auto src = dir / "source_lexicon";
  {
    std::ostringstream os;
    os << "# root\tcategory\n";
    for (const auto& e : b.source.hindi_root_lexicon) put_row(os, {e.root, std::string(category_name(e.category))});
    write_file(src / "hindi_root_lexicon.tsv", os.str());
  }
  auto features = [&](const std::vector<FeatureEntry>& t, const std::string& file) {
    std::ostringstream os;
    os << "# root\tfeatures\n";
    for (const auto& e : t) put_row(os, {e.root, format_features(e.features)});
    write_file(src / file, os.str());
  };
  features(b.source.hindi_verb_features, "hindi_verb_features.tsv");
  features(b.source.noun_features, "noun_features.tsv");
  {
    std::ostringstream os;
    os << "# surface\troot\tcategory\tfeatures\n";
    for (const auto& e : b.source.morphological_lexicon)
      put_row(os, {e.surface, e.root, std::string(category_name(e.category)), format_features(e.features)});
    write_file(src / "morphological_lexicon.tsv", os.str());
  }
  {
    std::ostringstream os;
    os << "# suffix\tcategory\tfeatures\n";
    for (const auto& e : b.source.suffixes)
      put_row(os, {e.suffix, std::string(category_name(e.category)), format_features(e.features)});
    write_file(src / "suffixes.tsv", os.str());
  }
  {
    std::ostringstream os;
    os << "# word\tattributes\n";
    for (const auto& e : b.source.auxiliaries) put_row(os, {e.word, format_features(e.attributes)});
    write_file(src / "auxiliaries.tsv", os.str());
  }
  {
    std::ostringstream os;
    os << "# one stop word per line\n";
    for (const auto& w : b.stop_words.words) os << w << "\n";
    write_file(dir / "stopwords.txt", os.str());
  }
  {
    std::ostringstream os;
    for (const auto& p : b.corpus.pairs) {
      nlohmann::json j;
      j["hindi"] = p.hindi;
      j["english"] = p.english;
      j["alignment"] = nlohmann::json::array();
      for (const auto& [h, e] : p.alignment) j["alignment"].push_back({h, e});
      os << j.dump() << "\n";
    }
    write_file(dir / "corpus.jsonl", os.str());
  }
}

std::vector<std::string> oov_report(const ResourceBundle& b) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& p : b.corpus.pairs)
    for (const auto& tok : p.hindi) {
      std::string w = to_lower(tok);
      if (!b.pron.contains(w) && seen.insert(w).second) out.push_back(w);
    }
  return out;
}

std::vector<std::string> pronounce(std::string_view word, const PronLexicon& lex, const PhoneSet& phones) {
  const PronEntry* e = lex.find(word);
  if (!e) throw OovError(std::string(word));
  std::vector<std::string> out;
  for (const auto& p : e->phones) {
    const PhoneUnit* u = phones.find(p);
    if (u && u->kind == PhoneKind::Release) out.push_back(u->base_plosive);
    out.push_back(p);
  }
  return out;
}

}  // namespace vaani
