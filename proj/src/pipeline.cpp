#include "vaani/pipeline.hpp"

#include <cstdlib>

#include "vaani/synthetic.hpp"
#include "vaani/text.hpp"

#ifndef VAANI_DEFAULT_DATA_DIR
#define VAANI_DEFAULT_DATA_DIR "data"
#endif

namespace vaani {

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("VAANI_DATA"); env && *env) return env;
  return VAANI_DEFAULT_DATA_DIR;
}

EngineOptions default_engine_options(const std::filesystem::path& data_dir) {
  EngineOptions o;
  o.resources_dir = data_dir / "resources";
  o.docs_path = data_dir / "docs.jsonl";
  return o;
}

std::shared_ptr<const Engine> Engine::load(const EngineOptions& opts) {
  std::shared_ptr<Engine> e(new Engine());
  e->resources_ = load_resources(opts.resources_dir);
  e->hindi_ = MorphLexicon::from_source(e->resources_.source);
  e->english_ = MorphLexicon::from_bilingual(e->resources_.e2h);
  e->backend_ = std::make_unique<LocalSearchBackend>(load_documents(opts.docs_path));
  e->templates_ =
      load_templates(opts.templates_path.empty() ? opts.resources_dir / "templates.tsv" : opts.templates_path);
  e->features_ = opts.features;
  e->features_.validate();

  AcousticModel am = opts.models_dir.empty()
                         ? make_generator_models(e->resources_.phones, e->features_.dims(), opts.acoustic_seed)
                         : AcousticModel::load(opts.models_dir);
  if (am.dims != e->features_.dims())
    throw RecognizerError("acoustic model dims " + std::to_string(am.dims) + " != feature dims " +
                          std::to_string(e->features_.dims()));
  std::vector<WordModel> words;
  for (const auto& entry : e->resources_.pron.entries())
    words.push_back(compose_word_model(entry.word, e->resources_.pron, e->resources_.phones, am));
  e->grammar_ = build_grammar(std::move(words));
  return e;
}

HindiRenderer Engine::renderer() const {
  return HindiRenderer{&templates_, &resources_.e2h, &resources_.paradigms_en, &resources_.paradigms_hi,
                       &english_, &hindi_};
}

Translation Engine::translate_hindi(const std::string& text) const {
  Translation t;
  t.analysis = tag(normalize(text, hindi_.auxiliaries()), hindi_, resources_.paradigms_hi);
  t.english = transfer(t.analysis, resources_.h2e, resources_.paradigms_en);
  return t;
}

Translation Engine::translate_english(const std::string& text) const {
  Translation t;
  t.analysis = tag(normalize(text, english_.auxiliaries()), english_, resources_.paradigms_en);
  t.english = transfer(t.analysis, resources_.e2h, resources_.paradigms_hi);
  return t;
}

QueryOutcome Engine::run_query(const std::vector<std::string>& hindi_tokens, size_t k) const {
  QueryOutcome out;
  out.translation = translate_hindi(join(hindi_tokens, " "));
  out.keywords = drop_stop_words(out.translation.english, resources_.stop_words);
  out.query = build_query(out.keywords, out.translation.english);
  if (!out.query) return out;
  out.page = backend_->search(*out.query, k);
  HindiRenderer r = renderer();
  out.answer = filter_answer(out.page.hits, documents(), *out.query, &r);
  return out;
}

Hypothesis Engine::recognize(const AudioClip& clip) const {
  return decode(grammar_, extract_features(clip, features_));
}

}  // namespace vaani
