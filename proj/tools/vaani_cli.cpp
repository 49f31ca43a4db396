#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "vaani/audio.hpp"
#include "vaani/eval.hpp"
#include "vaani/http_api.hpp"
#include "vaani/lexicon.hpp"
#include "vaani/morph.hpp"
#include "vaani/pipeline.hpp"
#include "vaani/search.hpp"
#include "vaani/session.hpp"
#include "vaani/synthetic.hpp"
#include "vaani/text.hpp"

using namespace vaani;

namespace {

struct Paths {
  std::string data = default_data_dir().string();
  std::string resources;
  std::string docs;
  std::string models;

  EngineOptions engine_options() const {
    EngineOptions o = default_engine_options(data);
    if (!resources.empty()) o.resources_dir = resources;
    if (!docs.empty()) o.docs_path = docs;
    o.models_dir = models;
    return o;
  }
  std::filesystem::path resources_dir() const {
    return resources.empty() ? std::filesystem::path(data) / "resources" : std::filesystem::path(resources);
  }
  std::filesystem::path docs_path() const {
    return docs.empty() ? std::filesystem::path(data) / "docs.jsonl" : std::filesystem::path(docs);
  }
};

// Positional text if given, otherwise one input per stdin line.
template <typename Fn>
void for_each_input(const std::vector<std::string>& words, Fn&& fn) {
  if (!words.empty()) {
    fn(join(words, " "));
    return;
  }
  std::string line;
  while (std::getline(std::cin, line)) fn(line);
}

void print_outcome(const QueryOutcome& out) {
  std::cout << "english\t" << join(out.translation.english, " ") << "\n";
  std::cout << "keywords\t" << join(out.keywords, " ") << "\n";
  if (!out.query) {
    std::cout << "status\task-again (no keywords)\n";
    return;
  }
  if (out.page.hits.empty()) {
    std::cout << "status\tno results\n";
    return;
  }
  for (size_t i = 0; i < out.page.hits.size(); ++i) {
    const Hit& h = out.page.hits[i];
    std::cout << "hit\t" << i + 1 << "\t" << std::fixed << std::setprecision(4) << h.score << "\t" << h.doc_id << "\t"
              << h.title << "\n";
  }
  for (const auto& l : out.page.numbered_links) std::cout << "link\t[" << l.number << "]\t" << l.anchor_text << "\n";
  if (out.answer) {
    std::cout << "answer_en\t" << out.answer->english_sentence << "\n";
    std::cout << "answer_hi\t" << out.answer->hindi_rendering << "\n";
  }
}

void print_snapshot(const SessionSnapshot& s) {
  std::cout << "[" << state_name(s.state) << "]";
  if (s.message) std::cout << " " << *s.message;
  std::cout << "\n";
  if (s.state == SessionState::Recognized && s.hypothesis) {
    std::cout << "  heard:";
    for (const auto& w : s.hypothesis->per_word)
      std::cout << " " << w.word << "(" << std::setprecision(2) << w.confidence << ")";
    std::cout << "\n  confirm with :y, repeat with :n\n";
  }
  if (s.results && (s.state == SessionState::Results || s.state == SessionState::Navigated)) {
    for (size_t i = 0; i < s.results->hits.size() && s.state == SessionState::Results && s.history.back().kind == "confirm"; ++i)
      std::cout << "  " << i + 1 << ". " << s.results->hits[i].title << "  " << s.results->hits[i].url << "\n";
    std::cout << "  page: " << s.current_doc_id << "\n";
    for (const auto& l : s.results->numbered_links) std::cout << "    [" << l.number << "] " << l.anchor_text << "\n";
  }
  if (s.answer && s.state == SessionState::Results && s.history.back().kind == "confirm") {
    std::cout << "  answer: " << s.answer->english_sentence << "\n";
    std::cout << "  hindi:  " << s.answer->hindi_rendering << "\n";
  }
}

std::function<void()> g_stop;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spoken Hindi query interface for local web search"};
  app.require_subcommand(1);
  Paths paths;
  app.add_option("--data", paths.data, "Data directory holding resources/ and docs.jsonl");
  app.add_option("--resources", paths.resources, "Resource directory");
  app.add_option("--corpus,--docs", paths.docs, "Document collection (docs.jsonl)");

  auto* features = app.add_subcommand("features", "Dump cepstral features of a WAV file");
  std::string wav_path;
  FeatureConfig fcfg;
  features->add_option("wav", wav_path)->required();
  features->add_option("--window-ms", fcfg.window_ms);
  features->add_option("--hop-ms", fcfg.hop_ms);
  features->add_option("--filters", fcfg.num_filters);
  features->add_option("--cepstra", fcfg.num_cepstra);

  auto* analyze_cmd = app.add_subcommand("analyze", "Morphological analysis, one line per input");
  std::string lang = "hi";
  std::vector<std::string> text;
  analyze_cmd->add_option("--lang", lang)->check(CLI::IsMember({"hi", "en"}));
  analyze_cmd->add_option("text", text);

  auto* translate_cmd = app.add_subcommand("translate", "Lexical transfer, one line per input");
  std::string direction = "h2e";
  translate_cmd->add_option("--direction", direction)->check(CLI::IsMember({"h2e", "e2h"}));
  translate_cmd->add_option("text", text);

  auto* index_cmd = app.add_subcommand("index", "Index the document collection and print term statistics");

  auto* search_cmd = app.add_subcommand("search", "Search the local index with English keywords");
  size_t k = 10;
  search_cmd->add_option("--k", k)->check(CLI::PositiveNumber);
  search_cmd->add_option("keywords", text)->required();

  auto* query_cmd = app.add_subcommand("query", "Run a romanized Hindi query through the whole pipeline");
  query_cmd->add_option("--k", k)->check(CLI::PositiveNumber);
  query_cmd->add_option("text", text);

  auto* eval_cmd = app.add_subcommand("eval", "Sentence accuracy report");
  SelfRecognitionConfig scfg;
  std::string refs_path, hyps_path;
  eval_cmd->add_option("--seed", scfg.seed);
  eval_cmd->add_option("--utterances", scfg.num_utterances);
  eval_cmd->add_option("--refs", refs_path, "Reference sentences, one per line");
  eval_cmd->add_option("--hyps", hyps_path, "Hypothesis sentences, one per line");

  auto* serve_cmd = app.add_subcommand("serve", "HTTP session service");
  int port = 8080;
  std::string host = "127.0.0.1", ui_dir;
  SessionConfig session_cfg;
  serve_cmd->add_option("--port", port);
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--ui", ui_dir, "Static files served under /ui/");
  serve_cmd->add_option("--models", paths.models, "Directory of trained phone .hmm files");
  serve_cmd->add_option("--threshold", session_cfg.confidence_threshold);

  auto* demo_cmd = app.add_subcommand("demo", "Terminal dialog loop");
  demo_cmd->add_option("--models", paths.models, "Directory of trained phone .hmm files");
  demo_cmd->add_option("--threshold", session_cfg.confidence_threshold);

  auto* models_cmd = app.add_subcommand("models", "Write seeded phone models");
  std::string out_dir;
  uint64_t model_seed = 42;
  models_cmd->add_option("--out", out_dir)->required();
  models_cmd->add_option("--seed", model_seed);

  auto* canon_cmd = app.add_subcommand("canonicalize", "Load resources and write them back in canonical form");
  canon_cmd->add_option("--out", out_dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*features) {
      std::cout << dump_features(extract_features(load_wav(wav_path), fcfg));
    } else if (*analyze_cmd) {
      ResourceBundle res = load_resources(paths.resources_dir());
      MorphLexicon lex = lang == "hi" ? MorphLexicon::from_source(res.source) : MorphLexicon::from_bilingual(res.e2h);
      const ParadigmTable& par = lang == "hi" ? res.paradigms_hi : res.paradigms_en;
      for_each_input(text, [&](const std::string& line) {
        std::cout << format_analysis(tag(normalize(line, lex.auxiliaries()), lex, par)) << "\n";
      });
    } else if (*translate_cmd) {
      ResourceBundle res = load_resources(paths.resources_dir());
      const bool h2e = direction == "h2e";
      MorphLexicon lex = h2e ? MorphLexicon::from_source(res.source) : MorphLexicon::from_bilingual(res.e2h);
      for_each_input(text, [&](const std::string& line) {
        auto rec = tag(normalize(line, lex.auxiliaries()), lex, h2e ? res.paradigms_hi : res.paradigms_en);
        auto out = h2e ? transfer(rec, res.h2e, res.paradigms_en) : transfer(rec, res.e2h, res.paradigms_hi);
        std::cout << join(out, " ") << "\n";
      });
    } else if (*index_cmd) {
      DocumentCollection docs = load_documents(paths.docs_path());
      SearchIndex idx = index_corpus(docs);
      std::cout << "docs\t" << idx.num_docs() << "\nterms\t" << idx.num_terms() << "\n";
    } else if (*search_cmd) {
      DocumentCollection docs = load_documents(paths.docs_path());
      SearchIndex idx = index_corpus(docs);
      std::vector<std::string> kws;
      for (const auto& t : text)
        for (auto& w : alnum_terms(t)) kws.push_back(std::move(w));
      auto q = build_query(kws, kws);
      if (!q) {
        std::cerr << "no keywords\n";
        return 2;
      }
      ResultPage page = search(idx, docs, *q, k);
      for (size_t i = 0; i < page.hits.size(); ++i)
        std::cout << i + 1 << "\t" << std::fixed << std::setprecision(4) << page.hits[i].score << "\t"
                  << page.hits[i].doc_id << "\t" << page.hits[i].url << "\n";
    } else if (*query_cmd) {
      auto engine = Engine::load(paths.engine_options());
      for_each_input(text, [&](const std::string& line) {
        print_outcome(engine->run_query(split_ws(to_lower(line)), k));
      });
    } else if (*eval_cmd) {
      if (!refs_path.empty() || !hyps_path.empty()) {
        auto read_lines = [](const std::string& p) {
          std::ifstream in(p);
          if (!in) throw std::runtime_error("cannot open " + p);
          std::vector<std::vector<std::string>> out;
          std::string line;
          while (std::getline(in, line)) out.push_back(split_ws(to_lower(line)));
          return out;
        };
        auto sc = score_sentences(read_lines(refs_path), read_lines(hyps_path));
        EvalReport rep;
        rep.groups.push_back({"file", sc.S, sc.E_s, sc.E_d, accuracy(sc.S, sc.E_s, sc.E_d)});
        rep.overall_accuracy_percent = rep.groups.back().accuracy_percent;
        std::cout << rep.to_tsv();
      } else {
        ResourceBundle res = load_resources(paths.resources_dir());
        std::cout << run_self_recognition(res, scfg).report.to_tsv();
      }
    } else if (*serve_cmd) {
      auto store = std::make_shared<SessionStore>(Engine::load(paths.engine_options()), session_cfg);
      ApiServer server(store, ui_dir);
      if (server.bind(host, port) < 0) {
        std::cerr << "cannot bind " << host << ":" << port << "\n";
        return 1;
      }
      g_stop = [&server] { server.stop(); };
      std::signal(SIGINT, [](int) {
        if (g_stop) g_stop();
      });
      std::cerr << "listening on http://" << host << ":" << port << "\n";
      server.listen();
    } else if (*demo_cmd) {
      Session s("demo", Engine::load(paths.engine_options()), session_cfg);
      std::cout << "Type a romanized Hindi query. Commands: :y confirm, :n repeat, :N select link N, :q quit\n";
      std::string line;
      while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
        line = trim(line);
        if (line.empty()) continue;
        try {
          if (line == ":q") break;
          if (line == ":y") {
            s.confirm();
          } else if (line == ":n") {
            s.reject();
          } else if (line[0] == ':') {
            s.select_link(std::stoul(line.substr(1)));
          } else {
            s.submit_text(line);
          }
          print_snapshot(s.snapshot());
        } catch (const SessionError& e) {
          std::cout << "error: " << e.what() << "\n";
        } catch (const std::invalid_argument&) {
          std::cout << "error: unknown command " << line << "\n";
        }
      }
    } else if (*models_cmd) {
      ResourceBundle res = load_resources(paths.resources_dir());
      make_generator_models(res.phones, FeatureConfig{}.dims(), model_seed).save(out_dir);
    } else if (*canon_cmd) {
      save_resources(load_resources(paths.resources_dir()), out_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
