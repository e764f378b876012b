#pragma once

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dative/dative_extract.hpp"
#include "dative/experiments.hpp"
#include "dative/toy_data.hpp"
#include "dative/train.hpp"

namespace dative::cli {

namespace fs = std::filesystem;

inline const char* kDataRootEnv = "DATIVE_DATA_ROOT";

enum class Scale { Paper, Smoke };

inline Scale parse_scale(const std::string& s) {
  if (s == "paper") return Scale::Paper;
  if (s == "smoke") return Scale::Smoke;
  throw Error("unknown scale '" + s + "' (expected paper or smoke)");
}

// Relative input paths are looked up under $DATIVE_DATA_ROOT first, then the working directory.
inline std::string resolve(const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  const char* root = std::getenv(kDataRootEnv);
  if (!root || !*root) return p;
  auto under = fs::path(root) / p;
  return fs::exists(under) ? under.string() : p;
}

inline std::string out_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

inline std::string file_hash(const std::string& path) { return hex64(fnv1a64(read_file(path))); }

// Everything a command can take from --scale and --config.
struct RunConfig {
  Scale scale = Scale::Paper;
  ModelConfig model;
  TrainConfig train;
  LearningConfig learning;
  int vocab_size = 8192;
  std::size_t per_config = 5;  // triples per realizable configuration
  std::size_t max_configs = 0;  // 0 = all
  std::size_t synthetic_per_config = 10;
  std::size_t item_sets = 30;
  std::size_t verbhood_n = 150;
  std::size_t tests_per_verb = 0;  // 0 = all
  std::size_t toy_words = 50000;

  static RunConfig preset(Scale s) {
    RunConfig c;
    c.scale = s;
    if (s == Scale::Smoke) {
      c.model.layers = 2;
      c.model.heads = 2;
      c.model.d_model = 32;
      c.model.d_ff = 64;
      c.model.max_seq_len = 48;
      c.model.init_std = 0.05;
      c.train.epochs = 3;
      c.train.warmup_steps = 100;
      c.train.peak_lr = 0.005;
      c.learning.lr_grid = {0.01, 0.1};
      c.learning.max_epochs = 5;
      c.vocab_size = 500;
      c.max_configs = 3;
      c.synthetic_per_config = 2;
      c.item_sets = 1;
      c.verbhood_n = 20;
      c.tests_per_verb = 10;
    }
    return c;
  }

  void apply(const json& j) {
    if (j.contains("model")) {
      json m = json(model);
      m.update(j["model"]);
      model = m.get<ModelConfig>();
    }
    if (j.contains("train")) {
      json t = json(train);
      t.update(j["train"]);
      train = t.get<TrainConfig>();
    }
    if (j.contains("learning")) {
      learning.lr_grid = j["learning"].value("lr_grid", learning.lr_grid);
      learning.max_epochs = j["learning"].value("max_epochs", learning.max_epochs);
    }
    vocab_size = j.value("vocab_size", vocab_size);
    per_config = j.value("per_config", per_config);
    max_configs = j.value("max_configs", max_configs);
    synthetic_per_config = j.value("synthetic_per_config", synthetic_per_config);
    item_sets = j.value("item_sets", item_sets);
    verbhood_n = j.value("verbhood_n", verbhood_n);
    tests_per_verb = j.value("tests_per_verb", tests_per_verb);
    toy_words = j.value("toy_words", toy_words);
    if (learning.lr_grid.empty() || learning.max_epochs < 1) throw Error("config: empty lr grid or epoch budget");
  }
};

struct CommonOpts {
  std::string config, out, scale = "paper";
  std::vector<std::uint64_t> seeds;

  RunConfig run_config() const {
    auto rc = RunConfig::preset(parse_scale(scale));
    if (!config.empty()) {
      json j;
      try {
        j = json::parse(read_file(resolve(config)));
      } catch (const json::exception& e) {
        throw Error("invalid config " + config + ": " + e.what());
      }
      rc.apply(j);
    }
    return rc;
  }
  std::uint64_t seed() const { return seeds.empty() ? 0 : seeds.front(); }
};

inline void add_common(CLI::App* sub, CommonOpts& o, bool out_required = true) {
  sub->add_option("--config", o.config, "JSON config overriding the scale preset");
  sub->add_option("--seed,--seeds", o.seeds, "seed(s)")->expected(1, -1);
  auto* out = sub->add_option("--out", o.out, "output file or directory");
  if (out_required) out->required();
  sub->add_option("--scale", o.scale, "paper or smoke")->check(CLI::IsMember({"paper", "smoke"}));
}

inline std::set<std::string> lemma_set(const std::string& path) {
  auto v = read_list_file(resolve(path));
  return {v.begin(), v.end()};
}

inline std::vector<ParsedUtterance> load_parses(const std::vector<std::string>& paths) {
  std::vector<ParsedUtterance> all;
  for (const auto& p : paths) {
    auto ps = load_conllu(resolve(p));
    all.insert(all.end(), ps.begin(), ps.end());
  }
  return all;
}

inline std::vector<AlternationProfile> parse_profiles_csv(const std::string& text) {
  std::vector<AlternationProfile> out;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "lemma,do_count,pp_count,class") throw Error("bad profiles header");
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto f = split(trim(line), ',');
    if (f.size() != 4) throw Error("bad profiles row: " + line);
    out.push_back({f[0], static_cast<int>(parse_int(f[1])), static_cast<int>(parse_int(f[2])),
                   parse_alternation_class(f[3])});
  }
  return out;
}

inline SubwordTokenizer load_tokenizer(const std::string& path, const std::string& novel) {
  auto tok = SubwordTokenizer::load(resolve(path));
  install_novel_token(tok, novel);
  return tok;
}

// Selects configurations for stimulus generation. Smoke keeps the first few dual-felicitous ones
// so every downstream set is non-empty.
inline std::vector<FeatureConfig> select_configs(const Lexicon& lex, const RunConfig& rc) {
  auto all = enumerate_feature_configs(lex);
  if (!rc.max_configs || rc.max_configs >= all.size()) return all;
  std::vector<FeatureConfig> out;
  for (const auto& c : all)
    if (dual_felicitous(c) && out.size() < rc.max_configs) out.push_back(c);
  return out;
}

// ---- commands ----

struct ToyOpts {
  CommonOpts c;
  std::string verbs = "data/nabanana_verbs.json", lexicon = "data/lexicon.json";
};

inline int cmd_make_toy_data(const ToyOpts& o, std::ostream& log) {
  auto rc = o.c.run_config();
  ToyDataConfig cfg;
  cfg.seed = o.c.seed();
  cfg.train_words = rc.toy_words;
  cfg.single_construction = known_verbs_from_json(json::parse(read_file(resolve(o.verbs))));
  if (!o.lexicon.empty()) {
    auto lex = Lexicon::load(resolve(o.lexicon));
    for (const auto& e : lex.entries()) cfg.extra_phrases.push_back(e.surface);
  }
  auto ds = make_toy_dataset(cfg);
  fs::create_directories(o.c.out);
  auto lines = [](const std::vector<ParsedUtterance>& ps) {
    std::string s;
    for (const auto& p : ps) s += p.text + "\n";
    return s;
  };
  write_file(out_path(o.c.out, "train.txt"), lines(ds.train));
  write_file(out_path(o.c.out, "validation.txt"), lines(ds.validation));
  write_file(out_path(o.c.out, "test.txt"), lines(ds.test));
  write_file(out_path(o.c.out, "train.conllu"), to_conllu(ds.train));
  write_file(out_path(o.c.out, "heldout.conllu"), to_conllu(ds.heldout()));
  write_file(out_path(o.c.out, "nonverb_ids.txt"), join(ds.nonverb_ids, "\n") + "\n");
  log << "toy data: " << ds.train.size() << " train, " << ds.validation.size() << " validation, " << ds.test.size()
      << " test utterances\n";
  return 0;
}

struct TokOpts {
  CommonOpts c;
  std::string corpus;
  int vocab_size = 0;
};

inline int cmd_train_tokenizer(const TokOpts& o, std::ostream& log) {
  auto rc = o.c.run_config();
  auto corpus = load_corpus(resolve(o.corpus), Split::Train);
  auto tok = SubwordTokenizer::train(corpus, o.vocab_size > 0 ? o.vocab_size : rc.vocab_size);
  tok.save(o.c.out);
  log << "tokenizer: " << tok.size() << " types\n";
  return 0;
}

struct LmOpts {
  CommonOpts c;
  std::string corpus, tokenizer, validation;
};

inline int cmd_train_lm(const LmOpts& o, std::ostream& log) {
  auto rc = o.c.run_config();
  auto tok = SubwordTokenizer::load(resolve(o.tokenizer));
  auto corpus = load_corpus(resolve(o.corpus), Split::Train);
  std::optional<UtteranceCorpus> valid;
  if (!o.validation.empty()) valid = load_corpus(resolve(o.validation), Split::Validation);
  auto mc = rc.model;
  mc.vocab_size = tok.size();
  auto tc = rc.train;
  tc.seed = o.c.seed();
  TrainReport rep;
  auto model = train_lm(corpus, tok, mc, tc, valid ? &*valid : nullptr, &rep, [&](int e, const TrainReport& r) {
    log << "epoch " << e << " loss " << format_double(r.epoch_running_loss.back()) << "\n";
  });
  model.save(o.c.out);
  json j{{"model", mc},
         {"train", tc},
         {"train_eval_loss", rep.train_eval_loss},
         {"valid_eval_loss", rep.valid_eval_loss},
         {"epoch_running_loss", rep.epoch_running_loss},
         {"steps", rep.steps},
         {"truncated", rep.truncated}};
  write_file(o.c.out + ".report.json", j.dump(1) + "\n");
  return 0;
}

struct StimOpts {
  CommonOpts c;
  std::string lexicon = "data/lexicon.json", verbs = "data/nabanana_verbs.json", pools = "data/nabanana_pools.json";
  std::string corpus, novel = kDefaultNovelSurface;
};

inline int cmd_gen_stimuli(const StimOpts& o, std::ostream& log) {
  auto rc = o.c.run_config();
  const auto seed = o.c.seed();
  auto lex = Lexicon::load(resolve(o.lexicon));
  auto configs = select_configs(lex, rc);
  auto exposures = generate_exposures(lex, configs, rc.per_config, derive_seed(seed, "exposures"), o.novel);
  auto givenness = add_givenness(exposures);
  auto synthetic = generate_synthetic_generalization(lex, configs, exposures, rc.synthetic_per_config,
                                                     derive_seed(seed, "synthetic"), o.novel);
  auto aru = build_arunachalam_stimuli(lex, rc.item_sets, derive_seed(seed, "arunachalam"), o.novel);
  std::vector<GeneralizationItem> syn_items;
  for (const auto& p : synthetic) {
    syn_items.push_back(p.do_item);
    syn_items.push_back(p.pp_item);
  }
  std::size_t dual = 0;
  for (const auto& c : configs) dual += dual_felicitous(c);

  fs::create_directories(o.c.out);
  write_jsonl(out_path(o.c.out, "exposures.jsonl"), to_jsonl(exposures));
  write_jsonl(out_path(o.c.out, "givenness.jsonl"), to_jsonl(givenness));
  write_jsonl(out_path(o.c.out, "synthetic.jsonl"), to_jsonl(syn_items));
  write_jsonl(out_path(o.c.out, "arunachalam.jsonl"), to_jsonl(aru));
  json counts{{"theoretical_configs", theoretical_configs().size()},
              {"realizable_configs", configs.size()},
              {"triples", exposures.size() / 2},
              {"exposures", exposures.size()},
              {"givenness", givenness.size()},
              {"dual_felicitous_configs", dual},
              {"synthetic_pairs", synthetic.size()},
              {"arunachalam", aru.size()}};
  json meta{{"scale", o.c.scale}, {"seed", seed}, {"counts", counts}, {"lexicon_hash", file_hash(resolve(o.lexicon))}};
  if (!o.corpus.empty()) {
    auto verbs = known_verbs_from_json(json::parse(read_file(resolve(o.verbs))));
    auto pools = nabanana_pools_from_json(json::parse(read_file(resolve(o.pools))));
    auto tests = build_nabanana_tests(verbs, pools, CorpusNgrams(read_list_file(resolve(o.corpus))),
                                      derive_seed(seed, "nabanana"));
    write_jsonl(out_path(o.c.out, "nabanana.jsonl"), to_jsonl(tests.tests));
    meta["nabanana"] = tests.metadata;
    meta["corpus_hash"] = file_hash(resolve(o.corpus));
  }
  write_file(out_path(o.c.out, "metadata.json"), meta.dump(1) + "\n");
  log << counts.dump() << "\n";
  return 0;
}

struct ExtractOpts {
  CommonOpts c;
  std::vector<std::string> parses;
  std::string lemmas = "data/dative_lemmas.txt", alternating = "data/alternating.txt",
              nonalternating = "data/nonalternating.txt", keep, novel = kDefaultNovelSurface, parser;
  std::size_t sample = 0;
};

inline int cmd_extract_datives(const ExtractOpts& o, std::ostream& log) {
  auto parses = load_parses(o.parses);
  auto found = detect_datives(parses, lemma_set(o.lemmas));
  auto alt = lemma_set(o.alternating);
  auto profiles = profile_alternation(found, alt, lemma_set(o.nonalternating));
  fs::create_directories(o.c.out);
  std::vector<json> rows;
  for (const auto& d : found) rows.push_back(to_json(d));
  write_jsonl(out_path(o.c.out, "datives.jsonl"), rows);
  write_file(out_path(o.c.out, "profiles.csv"), profiles_csv(profiles));

  // Natural generalization items: an explicit keep list, or a seeded sample of alternating-verb detections.
  std::vector<std::string> keep;
  if (!o.keep.empty()) {
    keep = read_list_file(resolve(o.keep));
  } else if (o.sample) {
    std::map<Construction, std::vector<std::string>> ids;
    for (const auto& d : found)
      if (alt.count(d.lemma)) ids[d.construction].push_back(d.id());
    for (auto& [con, v] : ids) {
      Rng rng(derive_seed(o.c.seed(), "natural " + to_string(con)));
      deterministic_shuffle(v, rng);
      v.resize(std::min(v.size(), o.sample));
      keep.insert(keep.end(), v.begin(), v.end());
    }
  }
  if (!keep.empty())
    write_jsonl(out_path(o.c.out, "natural.jsonl"), to_jsonl(assemble_natural_generalization(found, keep, o.novel)));
  std::size_t n_do = 0;
  for (const auto& d : found) n_do += d.construction == Construction::DO;
  std::map<std::string, std::string> hashes;
  for (const auto& p : o.parses) hashes[p] = file_hash(resolve(p));
  auto meta = run_metadata({o.c.seed()}, hashes, o.parser);
  meta["do"] = n_do;
  meta["pp"] = found.size() - n_do;
  meta["natural_items"] = keep.size();
  write_file(out_path(o.c.out, "metadata.json"), meta.dump(1) + "\n");
  log << "datives: " << n_do << " DO, " << found.size() - n_do << " PP\n";
  return 0;
}

struct VerbhoodOpts {
  CommonOpts c;
  std::vector<std::string> parses;
  std::string nonverb_ids;
  std::size_t n = 0;
};

inline int cmd_build_verbhood(const VerbhoodOpts& o, std::ostream& log) {
  auto rc = o.c.run_config();
  auto vs = build_verbhood_set(load_parses(o.parses), read_list_file(resolve(o.nonverb_ids)), o.n ? o.n : rc.verbhood_n,
                               o.c.seed());
  save_verbhood_set(o.c.out, vs);
  log << "verbhood: " << vs.verb_expecting.size() << " + " << vs.nonverb_expecting.size() << "\n";
  return 0;
}

struct RunOpts {
  CommonOpts c;
  std::string experiment, tokenizer, tests, profiles, exposures, verbhood, natural, synthetic;
  std::string novel = kDefaultNovelSurface, gen_source = "natural", parser;
  std::vector<std::string> models;
};

inline std::vector<GeneralizationItem> load_items(const std::string& path) {
  std::vector<GeneralizationItem> out;
  for (const auto& j : read_jsonl(resolve(path))) out.push_back(generalization_from_json(j));
  return out;
}

inline const std::vector<std::string>& default_summary_keys(const std::string& experiment) {
  static const std::vector<std::string> gen{"exposure_construction", "gen_source", "gen_construction"};
  static const std::vector<std::string> aru{"exposure_construction", "anim_theme"};
  return experiment == "arunachalam" ? aru : gen;
}

inline int cmd_run_experiment(const RunOpts& o, std::ostream& log) {
  auto rc = o.c.run_config();
  if (o.models.empty()) throw Error("run-experiment: at least one --model is required");
  std::vector<std::uint64_t> seeds = o.c.seeds;
  if (seeds.empty())
    for (std::size_t i = 0; i < o.models.size(); ++i) seeds.push_back(i);
  if (seeds.size() != o.models.size()) throw Error("run-experiment: need one seed per model");
  auto tok = load_tokenizer(o.tokenizer, o.novel);
  std::vector<LanguageModel> lms;
  std::map<std::string, std::string> hashes{{"tokenizer", file_hash(resolve(o.tokenizer))}};
  for (std::size_t i = 0; i < o.models.size(); ++i) {
    lms.push_back(LanguageModel::load(resolve(o.models[i])));
    hashes["model_" + std::to_string(seeds[i])] = file_hash(resolve(o.models[i]));
  }
  std::vector<SeededModel> sms;
  for (std::size_t i = 0; i < lms.size(); ++i) sms.push_back({seeds[i], &lms[i]});
  fs::create_directories(o.c.out);
  const std::uint64_t summary_seed = seeds.front();

  if (o.experiment == "nabanana") {
    std::vector<KnownVerbTest> tests;
    std::map<std::string, std::size_t> per;
    for (const auto& j : read_jsonl(resolve(o.tests))) {
      auto t = known_verb_test_from_json(j);
      if (rc.tests_per_verb && per[t.verb.lemma]++ >= rc.tests_per_verb) continue;
      tests.push_back(std::move(t));
    }
    hashes["tests"] = file_hash(resolve(o.tests));
    std::vector<AlternationProfile> profiles;
    if (!o.profiles.empty()) profiles = parse_profiles_csv(read_file(resolve(o.profiles)));
    auto res = run_nabanana(sms, tok, tests, profiles, summary_seed);
    write_file(out_path(o.c.out, "deltas.csv"), delta_records_csv(res.records));
    write_file(out_path(o.c.out, "summary.csv"), summary_csv({"class", "observed"}, res.summary));
    auto meta = run_metadata(seeds, hashes, o.parser);
    meta["tests"] = tests.size();
    write_file(out_path(o.c.out, "metadata.json"), meta.dump(1) + "\n");
    log << "nabanana: " << res.records.size() << " verb records\n";
    return 0;
  }

  auto vset = load_verbhood_set(resolve(o.verbhood));
  hashes["verbhood"] = file_hash(resolve(o.verbhood));
  VerbhoodEvaluator ve(tok, vset, lms.front().config());
  std::vector<ExposureStimulus> stim;
  for (const auto& j : read_jsonl(resolve(o.exposures))) stim.push_back(exposure_from_json(j));
  hashes["exposures"] = file_hash(resolve(o.exposures));
  std::vector<GeneralizationItem> items;
  for (const auto* p : {&o.natural, &o.synthetic})
    if (!p->empty()) {
      auto v = load_items(*p);
      items.insert(items.end(), v.begin(), v.end());
      hashes[p == &o.natural ? "natural" : "synthetic"] = file_hash(resolve(*p));
    }
  GeneralizationSets gen(tok, items, lms.front().config());

  ExperimentOutput out;
  if (o.experiment == "asymmetry") out = run_asymmetry(sms, tok, ve, stim, gen, rc.learning);
  else if (o.experiment == "main") out = run_main_simulation(sms, tok, ve, stim, gen, rc.learning);
  else if (o.experiment == "arunachalam") out = run_arunachalam(sms, tok, ve, stim, gen, rc.learning, o.gen_source);
  else throw Error("unknown experiment '" + o.experiment + "'");
  export_csv(out.records, out_path(o.c.out, "results.csv"));
  const auto& keys = default_summary_keys(o.experiment);
  write_file(out_path(o.c.out, "summary.csv"), summary_csv(keys, summarize(out.records, keys, summary_seed)));
  auto meta = run_metadata(seeds, hashes, o.parser, &out);
  meta["learning"] = {{"lr_grid", rc.learning.lr_grid}, {"max_epochs", rc.learning.max_epochs}};
  write_file(out_path(o.c.out, "metadata.json"), meta.dump(1) + "\n");
  log << o.experiment << ": " << out.records.size() << " records, " << out.excluded << " excluded\n";
  return 0;
}

struct ExportOpts {
  CommonOpts c;
  std::vector<std::string> inputs;
  std::string experiment;
};

inline int cmd_export(const ExportOpts& o, std::ostream& log) {
  std::vector<TrialRecord> all;
  for (const auto& p : o.inputs)
    for (auto& r : load_trials_csv(resolve(p)))
      if (o.experiment.empty() || r.experiment == o.experiment) all.push_back(std::move(r));
  export_csv(all, o.c.out);
  log << "exported " << all.size() << " records\n";
  return 0;
}

struct SummarizeOpts {
  CommonOpts c;
  std::string input, by, value = "mean_logprob_per_token";
};

inline int cmd_summarize(const SummarizeOpts& o, std::ostream& log) {
  std::vector<std::string> keys;
  for (const auto& k : split(o.by, ','))
    if (!trim(k).empty()) keys.push_back(trim(k));
  auto rows = summarize(load_trials_csv(resolve(o.input)), keys, o.c.seed(), o.value);
  write_file(o.c.out, summary_csv(keys, rows));
  log << rows.size() << " groups\n";
  return 0;
}

// ---- entry ----

inline int dispatch(int argc, const char* const* argv, std::ostream& log = std::cerr) {
  CLI::App app{"Novel-verb dative alternation pipeline", "dative_cli"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  ToyOpts toy;
  auto* s_toy = app.add_subcommand("make-toy-data", "write the synthetic fixture corpus with gold parses");
  add_common(s_toy, toy.c);
  s_toy->add_option("--verbs", toy.verbs);
  s_toy->add_option("--lexicon", toy.lexicon);

  TokOpts tk;
  auto* s_tok = app.add_subcommand("train-tokenizer", "train the subword tokenizer");
  add_common(s_tok, tk.c);
  s_tok->add_option("--corpus", tk.corpus)->required();
  s_tok->add_option("--vocab-size", tk.vocab_size);

  LmOpts lm;
  auto* s_lm = app.add_subcommand("train-lm", "train the language model from scratch");
  add_common(s_lm, lm.c);
  s_lm->add_option("--corpus", lm.corpus)->required();
  s_lm->add_option("--tokenizer", lm.tokenizer)->required();
  s_lm->add_option("--validation", lm.validation);

  StimOpts st;
  auto* s_st = app.add_subcommand("gen-stimuli", "generate exposure, generalization and known-verb stimuli");
  add_common(s_st, st.c);
  s_st->add_option("--lexicon", st.lexicon);
  s_st->add_option("--verbs", st.verbs);
  s_st->add_option("--pools", st.pools);
  s_st->add_option("--corpus", st.corpus, "training utterances; enables known-verb test sentences");
  s_st->add_option("--novel", st.novel);

  ExtractOpts ex;
  auto* s_ex = app.add_subcommand("extract-datives", "detect datives in dependency parses");
  add_common(s_ex, ex.c);
  s_ex->add_option("--parses", ex.parses)->required()->expected(1, -1);
  s_ex->add_option("--lemmas", ex.lemmas);
  s_ex->add_option("--alternating", ex.alternating);
  s_ex->add_option("--nonalternating", ex.nonalternating);
  s_ex->add_option("--keep", ex.keep, "instance ids kept for the natural generalization set");
  s_ex->add_option("--sample", ex.sample, "sample this many alternating-verb instances per construction instead");
  s_ex->add_option("--novel", ex.novel);
  s_ex->add_option("--parser", ex.parser, "parser name and version, recorded in metadata");

  VerbhoodOpts vb;
  auto* s_vb = app.add_subcommand("build-verbhood", "build the verb/non-verb slot sets");
  add_common(s_vb, vb.c);
  s_vb->add_option("--parses", vb.parses)->required()->expected(1, -1);
  s_vb->add_option("--nonverb-ids", vb.nonverb_ids)->required();
  s_vb->add_option("--n", vb.n);

  RunOpts run;
  auto* s_run = app.add_subcommand("run-experiment", "run one experiment over trained models");
  add_common(s_run, run.c);
  s_run->add_option("experiment", run.experiment)
      ->required()
      ->check(CLI::IsMember({"nabanana", "asymmetry", "arunachalam", "main"}));
  s_run->add_option("--tokenizer", run.tokenizer)->required();
  s_run->add_option("--model,--models", run.models)->required()->expected(1, -1);
  s_run->add_option("--tests", run.tests, "known-verb test sentences (nabanana)");
  s_run->add_option("--profiles", run.profiles, "alternation profiles CSV (nabanana)");
  s_run->add_option("--exposures", run.exposures);
  s_run->add_option("--verbhood", run.verbhood);
  s_run->add_option("--natural", run.natural);
  s_run->add_option("--synthetic", run.synthetic);
  s_run->add_option("--gen-source", run.gen_source);
  s_run->add_option("--novel", run.novel);
  s_run->add_option("--parser", run.parser, "parser name and version, recorded in metadata");

  ExportOpts exo;
  auto* s_exp = app.add_subcommand("export", "merge and validate results CSVs");
  add_common(s_exp, exo.c);
  s_exp->add_option("--in", exo.inputs)->required()->expected(1, -1);
  s_exp->add_option("--experiment", exo.experiment);

  SummarizeOpts su;
  auto* s_su = app.add_subcommand("summarize", "group means with bootstrap intervals");
  add_common(s_su, su.c);
  s_su->add_option("--in", su.input)->required();
  s_su->add_option("--by", su.by);
  s_su->add_option("--value", su.value);

  if (argc > 1 && argv[1][0] != '-') {
    try {
      (void)app.get_subcommand(argv[1]);
    } catch (const CLI::OptionNotFound&) {
      log << "error: unknown command '" << argv[1] << "'\n\n" << app.help();
      return 2;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    log << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (s_run->parsed()) {
      if (run.experiment == "nabanana" && run.tests.empty()) throw Error("nabanana needs --tests");
      if (run.experiment != "nabanana" && (run.exposures.empty() || run.verbhood.empty()))
        throw Error(run.experiment + " needs --exposures and --verbhood");
      return cmd_run_experiment(run, log);
    }
    if (s_toy->parsed()) return cmd_make_toy_data(toy, log);
    if (s_tok->parsed()) return cmd_train_tokenizer(tk, log);
    if (s_lm->parsed()) return cmd_train_lm(lm, log);
    if (s_st->parsed()) return cmd_gen_stimuli(st, log);
    if (s_ex->parsed()) return cmd_extract_datives(ex, log);
    if (s_vb->parsed()) return cmd_build_verbhood(vb, log);
    if (s_exp->parsed()) return cmd_export(exo, log);
    if (s_su->parsed()) return cmd_summarize(su, log);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
  log << app.help();
  return 2;
}

}  // namespace dative::cli
