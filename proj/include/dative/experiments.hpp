#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dative/dative_extract.hpp"
#include "dative/novel_verb.hpp"
#include "dative/scoring.hpp"
#include "dative/stimuli.hpp"
#include "dative/verbhood.hpp"

namespace dative {

// Mean per-token log probability of the alternate form minus that of the observed form.
inline double delta_preference(const LanguageModel& model, const SubwordTokenizer& tok, const std::string& alternate,
                               const std::string& observed) {
  if (split_whitespace(alternate).empty() || split_whitespace(observed).empty())
    throw Error("delta_preference: empty sentence");
  return score_sentence(model, tok, alternate).mean_per_token - score_sentence(model, tok, observed).mean_per_token;
}

// ---- bootstrap ----

constexpr int kBootstrapResamples = 10000;

struct BootstrapCI {
  double mean = 0.0, lo = 0.0, hi = 0.0;
  std::size_t n = 0;
};

namespace detail {
inline double quantile_sorted(const std::vector<double>& s, double q) {
  if (s.size() == 1) return s[0];
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double f = pos - static_cast<double>(i);
  return i + 1 < s.size() ? s[i] + f * (s[i + 1] - s[i]) : s[i];
}
}  // namespace detail

// Percentile bootstrap of the mean. Values are sorted first so the result does not depend on input order.
inline BootstrapCI bootstrap_mean(std::vector<double> values, std::uint64_t seed, int resamples = kBootstrapResamples) {
  if (values.empty()) throw Error("bootstrap of an empty group");
  std::sort(values.begin(), values.end());
  BootstrapCI ci;
  ci.n = values.size();
  ci.mean = mean_of(values);
  Rng rng(seed);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  std::vector<double> draw(values.size());
  for (auto& m : means) {
    for (auto& d : draw) d = values[rng() % values.size()];
    m = mean_of(draw);
  }
  std::sort(means.begin(), means.end());
  ci.lo = std::min(ci.mean, detail::quantile_sorted(means, 0.025));
  ci.hi = std::max(ci.mean, detail::quantile_sorted(means, 0.975));
  return ci;
}

// One-sided bootstrap p-value for mean(a) > mean(b): share of resampled differences that are <= 0.
inline double bootstrap_greater_pvalue(std::vector<double> a, std::vector<double> b, std::uint64_t seed,
                                       int resamples = kBootstrapResamples) {
  if (a.empty() || b.empty()) throw Error("bootstrap comparison with an empty group");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  Rng rng(seed);
  std::vector<double> da(a.size()), db(b.size());
  int not_greater = 0;
  for (int r = 0; r < resamples; ++r) {
    for (auto& x : da) x = a[rng() % a.size()];
    for (auto& x : db) x = b[rng() % b.size()];
    not_greater += mean_of(da) - mean_of(db) <= 0.0;
  }
  return (static_cast<double>(not_greater) + 1.0) / (static_cast<double>(resamples) + 1.0);
}

// ---- known-verb experiment ----

struct DeltaRecord {
  std::uint64_t seed = 0;
  std::string lemma;
  AlternationClass cls = AlternationClass::NABA;
  Construction observed = Construction::DO;
  std::vector<double> deltas;  // one per test pair, in test order
  double mean_delta = 0.0;
};

struct GroupSummary {
  std::vector<std::string> key;
  BootstrapCI ci;
};

struct NabananaResult {
  std::vector<DeltaRecord> records;
  std::vector<GroupSummary> summary;  // key = {class, observed}
};

struct SeededModel {
  std::uint64_t seed = 0;
  LanguageModel* model = nullptr;
};

inline std::vector<GroupSummary> summarize_deltas(const std::vector<DeltaRecord>& records, std::uint64_t seed) {
  std::map<std::vector<std::string>, std::vector<double>> groups;
  for (const auto& r : records)
    for (double d : r.deltas) groups[{to_string(r.cls), to_string(r.observed)}].push_back(d);
  std::vector<GroupSummary> out;
  for (const auto& [k, v] : groups) out.push_back({k, bootstrap_mean(v, derive_seed(seed, "delta " + join(k, "/")))});
  return out;
}

inline NabananaResult run_nabanana(const std::vector<SeededModel>& models, const SubwordTokenizer& tok,
                                   const std::vector<KnownVerbTest>& tests,
                                   const std::vector<AlternationProfile>& profiles, std::uint64_t summary_seed = 0) {
  std::map<std::string, std::vector<const KnownVerbTest*>> by_lemma;
  for (const auto& t : tests) by_lemma[t.verb.lemma].push_back(&t);
  for (const auto& p : profiles)
    if ((p.cls == AlternationClass::NABA || p.cls == AlternationClass::NANA) && !by_lemma.count(p.lemma))
      throw Error("no test sentences for profiled verb '" + p.lemma + "'");
  NabananaResult res;
  for (const auto& sm : models) {
    for (const auto& [lemma, ts] : by_lemma) {
      DeltaRecord r;
      r.seed = sm.seed;
      r.lemma = lemma;
      r.cls = ts.front()->verb.cls;
      r.observed = ts.front()->verb.observed;
      for (const auto* t : ts) r.deltas.push_back(delta_preference(*sm.model, tok, t->alternate_text(), t->observed_text()));
      r.mean_delta = mean_of(r.deltas);
      res.records.push_back(std::move(r));
    }
  }
  res.summary = summarize_deltas(res.records, summary_seed);
  return res;
}

inline std::string delta_records_csv(const std::vector<DeltaRecord>& rs) {
  std::ostringstream os;
  os << "seed,lemma,class,observed,n,mean_delta\n";
  for (const auto& r : rs)
    os << r.seed << ',' << r.lemma << ',' << to_string(r.cls) << ',' << to_string(r.observed) << ',' << r.deltas.size()
       << ',' << format_double(r.mean_delta) << '\n';
  return os.str();
}

// ---- novel-verb trials ----

struct TrialRecord {
  std::uint64_t seed = 0;
  std::string trial_id;
  std::string experiment;
  Construction exposure_construction = Construction::DO;
  Construction gen_construction = Construction::PP;
  std::string gen_source;  // natural | synthetic
  int pron_theme = 0, anim_theme = 0, def_theme = 0, len_theme = 0;
  int pron_recip = 0, anim_recip = 0, def_recip = 0, len_recip = 0;
  int givenness = 0;  // +1 theme given, -1 recipient given, 0 no preamble
  double best_lr = 0.0;
  int best_epoch = 0;
  double verbhood_delta = 0.0;
  double mean_logprob_per_token = 0.0;

  bool operator==(const TrialRecord&) const = default;
};

inline const std::vector<std::string>& trial_csv_columns() {
  static const std::vector<std::string> c{
      "seed",      "trial_id",   "experiment", "exposure_construction", "gen_construction", "gen_source",
      "pron_theme", "anim_theme", "def_theme", "len_theme",             "pron_recip",       "anim_recip",
      "def_recip", "len_recip",  "givenness",  "best_lr",               "best_epoch",       "verbhood_delta",
      "mean_logprob_per_token"};
  return c;
}

inline int code(bool positive) { return positive ? 1 : -1; }

// Pronominal, animate, definite, short and theme-given code +1; their complements -1.
inline void apply_feature_coding(TrialRecord& r, const FeatureConfig& c) {
  r.pron_theme = code(c.theme.pronoun);
  r.anim_theme = code(c.theme.animate);
  r.def_theme = code(c.theme.definite);
  r.len_theme = code(c.theme.is_short);
  r.pron_recip = code(c.recipient.pronoun);
  r.anim_recip = code(c.recipient.animate);
  r.def_recip = code(c.recipient.definite);
  r.len_recip = code(c.recipient.is_short);
  r.givenness = c.givenness == Givenness::Theme ? 1 : c.givenness == Givenness::Recipient ? -1 : 0;
}

struct LearningConfig {
  std::vector<double> lr_grid{0.001, 0.005, 0.01, 0.05, 0.1};
  int max_epochs = 70;
};

// Generalization items pre-encoded per (source, construction).
class GeneralizationSets {
 public:
  GeneralizationSets(const SubwordTokenizer& tok, const std::vector<GeneralizationItem>& items, const ModelConfig& cfg) {
    std::map<std::pair<std::string, Construction>, std::vector<std::string>> texts;
    for (const auto& it : items) {
      if (count_word(it.text, tok.novel_surface()) != 1)
        throw Error("generalization item must contain the novel surface exactly once: " + it.text);
      texts[{it.source, it.construction}].push_back(it.text);
    }
    for (const auto& [k, v] : texts) sets_.emplace(k, EncodedSet(tok, v, cfg));
  }
  bool has(const std::string& source, Construction c) const { return sets_.count({source, c}) > 0; }
  double mean_logprob(const LanguageModel& m, const std::string& source, Construction c) const {
    auto it = sets_.find({source, c});
    if (it == sets_.end()) throw Error("no " + source + " " + to_string(c) + " generalization items");
    return mean_of(it->second.mean_scores(m));
  }

 private:
  std::map<std::pair<std::string, Construction>, EncodedSet> sets_;
};

struct TrialRun {
  ExposureTrial trial;
  LearnedVerbState state;
};

// Initializes the novel row from the embedding Gaussian and learns it from one stimulus.
inline TrialRun run_trial(LanguageModel& model, const SubwordTokenizer& tok, const VerbhoodEvaluator& verbhood,
                          const ExposureStimulus& stim, std::uint64_t seed, const std::string& experiment,
                          const LearningConfig& lc) {
  ExposureTrial t;
  t.trial_id = experiment + ":" + std::to_string(seed) + ":" + stim.id;
  t.stimulus_id = stim.id;
  t.text = stim.text;
  t.lr_grid = lc.lr_grid;
  t.max_epochs = lc.max_epochs;
  t.seed = derive_seed(seed, t.trial_id);
  model.set_embedding_row(SubwordTokenizer::kNovel, init_novel_embedding(model, t.seed));
  auto st = learn_exposure(model, tok, t, verbhood);
  return {t, std::move(st)};
}

struct ExperimentOutput {
  std::vector<TrialRecord> records;
  std::size_t excluded = 0;  // records dropped for non-finite scores
  std::vector<std::string> excluded_ids;
};

namespace detail {
inline void emit(ExperimentOutput& out, TrialRecord r) {
  if (!std::isfinite(r.mean_logprob_per_token) || !std::isfinite(r.verbhood_delta)) {
    ++out.excluded;
    out.excluded_ids.push_back(r.trial_id + "/" + r.gen_source + "/" + to_string(r.gen_construction));
    return;
  }
  out.records.push_back(std::move(r));
}

inline TrialRecord base_record(std::uint64_t seed, const std::string& experiment, const ExposureStimulus& s,
                               const TrialRun& run) {
  TrialRecord r;
  r.seed = seed;
  r.trial_id = run.trial.trial_id;
  r.experiment = experiment;
  r.exposure_construction = s.construction;
  apply_feature_coding(r, s.config);
  r.best_lr = run.state.best_lr;
  r.best_epoch = run.state.best_epoch;
  r.verbhood_delta = run.state.verbhood_delta;
  return r;
}
}  // namespace detail

// Exposure in one construction, generalization measured in the other on each requested source.
inline ExperimentOutput run_generalization_trials(const std::vector<SeededModel>& models, const SubwordTokenizer& tok,
                                                  const VerbhoodEvaluator& verbhood,
                                                  const std::vector<ExposureStimulus>& exposures,
                                                  const GeneralizationSets& gen,
                                                  const std::vector<std::string>& sources,
                                                  const std::string& experiment, const LearningConfig& lc) {
  ExperimentOutput out;
  for (const auto& sm : models) {
    for (const auto& s : exposures) {
      auto run = run_trial(*sm.model, tok, verbhood, s, sm.seed, experiment, lc);
      for (const auto& src : sources) {
        auto r = detail::base_record(sm.seed, experiment, s, run);
        r.gen_construction = other(s.construction);
        r.gen_source = src;
        r.mean_logprob_per_token = gen.mean_logprob(*sm.model, src, r.gen_construction);
        detail::emit(out, std::move(r));
      }
    }
  }
  return out;
}

inline ExperimentOutput run_asymmetry(const std::vector<SeededModel>& models, const SubwordTokenizer& tok,
                                      const VerbhoodEvaluator& verbhood, const std::vector<ExposureStimulus>& exposures,
                                      const GeneralizationSets& gen, const LearningConfig& lc) {
  return run_generalization_trials(models, tok, verbhood, exposures, gen, {"natural", "synthetic"}, "asymmetry", lc);
}

inline ExperimentOutput run_main_simulation(const std::vector<SeededModel>& models, const SubwordTokenizer& tok,
                                            const VerbhoodEvaluator& verbhood,
                                            const std::vector<ExposureStimulus>& exposures,
                                            const GeneralizationSets& gen, const LearningConfig& lc) {
  return run_generalization_trials(models, tok, verbhood, exposures, gen, {"natural"}, "main", lc);
}

// Index of the largest value; the first one wins ties. Non-finite values never win.
inline std::optional<std::size_t> argmax_finite(const std::vector<double>& v) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::isfinite(v[i]) && (!best || v[i] > v[*best])) best = i;
  return best;
}

// One trial per stimulus; within each (item set, construction, mention order) only the preamble
// template with the highest verbhood delta is kept. Generalization is always to DO.
inline ExperimentOutput run_arunachalam(const std::vector<SeededModel>& models, const SubwordTokenizer& tok,
                                        const VerbhoodEvaluator& verbhood, const std::vector<ExposureStimulus>& stimuli,
                                        const GeneralizationSets& gen, const LearningConfig& lc,
                                        const std::string& gen_source = "natural") {
  ExperimentOutput out;
  std::map<std::string, std::vector<std::size_t>> groups;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < stimuli.size(); ++i) {
    const auto& s = stimuli[i];
    auto k = s.base_id + "|" + to_string(s.construction) + "|" + (s.theme_first ? "tr" : "rt");
    if (!groups.count(k)) order.push_back(k);
    groups[k].push_back(i);
  }
  for (const auto& sm : models) {
    for (const auto& k : order) {
      const auto& idx = groups[k];
      std::vector<double> deltas, scores;
      std::vector<TrialRun> runs;
      for (auto i : idx) {
        runs.push_back(run_trial(*sm.model, tok, verbhood, stimuli[i], sm.seed, "arunachalam", lc));
        deltas.push_back(runs.back().state.verbhood_delta);
        scores.push_back(gen.mean_logprob(*sm.model, gen_source, Construction::DO));
      }
      auto best = argmax_finite(deltas);
      if (!best) throw Error("every template variant of " + k + " produced a non-finite verbhood score");
      auto r = detail::base_record(sm.seed, "arunachalam", stimuli[idx[*best]], runs[*best]);
      r.gen_construction = Construction::DO;
      r.gen_source = gen_source;
      r.mean_logprob_per_token = scores[*best];
      detail::emit(out, std::move(r));
    }
  }
  return out;
}

// ---- CSV ----

inline std::string trial_csv_row(const TrialRecord& r) {
  std::vector<std::string> f{std::to_string(r.seed),
                             r.trial_id,
                             r.experiment,
                             to_string(r.exposure_construction),
                             to_string(r.gen_construction),
                             r.gen_source,
                             std::to_string(r.pron_theme),
                             std::to_string(r.anim_theme),
                             std::to_string(r.def_theme),
                             std::to_string(r.len_theme),
                             std::to_string(r.pron_recip),
                             std::to_string(r.anim_recip),
                             std::to_string(r.def_recip),
                             std::to_string(r.len_recip),
                             std::to_string(r.givenness),
                             format_double(r.best_lr),
                             std::to_string(r.best_epoch),
                             format_double(r.verbhood_delta),
                             format_double(r.mean_logprob_per_token)};
  for (const auto& x : f)
    if (x.find(',') != std::string::npos || x.find('\n') != std::string::npos)
      throw Error("CSV field contains a separator: " + x);
  return join(f, ",");
}

inline std::string trials_to_csv(const std::vector<TrialRecord>& rs) {
  std::string s = join(trial_csv_columns(), ",") + "\n";
  for (const auto& r : rs) s += trial_csv_row(r) + "\n";
  return s;
}

inline void export_csv(const std::vector<TrialRecord>& rs, const std::string& path) {
  if (rs.empty()) throw Error("export_csv: no records");
  write_file(path, trials_to_csv(rs));
}

inline std::vector<TrialRecord> parse_trials_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty results CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != join(trial_csv_columns(), ",")) throw Error("results CSV header does not match the expected columns");
  std::vector<TrialRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto c = split(line, ',');
    if (c.size() != trial_csv_columns().size())
      throw Error("results CSV line " + std::to_string(lineno) + ": expected " +
                  std::to_string(trial_csv_columns().size()) + " fields");
    auto coded = [&](std::size_t i) {
      auto v = static_cast<int>(parse_int(c[i]));
      if (v != 1 && v != -1 && !(i == 14 && v == 0))
        throw Error("results CSV line " + std::to_string(lineno) + ": bad feature code in " + trial_csv_columns()[i]);
      return v;
    };
    TrialRecord r;
    r.seed = static_cast<std::uint64_t>(std::stoull(c[0]));
    r.trial_id = c[1];
    r.experiment = c[2];
    r.exposure_construction = parse_construction(c[3]);
    r.gen_construction = parse_construction(c[4]);
    r.gen_source = c[5];
    r.pron_theme = coded(6);
    r.anim_theme = coded(7);
    r.def_theme = coded(8);
    r.len_theme = coded(9);
    r.pron_recip = coded(10);
    r.anim_recip = coded(11);
    r.def_recip = coded(12);
    r.len_recip = coded(13);
    r.givenness = coded(14);
    r.best_lr = parse_double(c[15]);
    r.best_epoch = static_cast<int>(parse_int(c[16]));
    r.verbhood_delta = parse_double(c[17]);
    r.mean_logprob_per_token = parse_double(c[18]);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<TrialRecord> load_trials_csv(const std::string& path) { return parse_trials_csv(read_file(path)); }

// ---- summaries ----

inline std::string field_value(const TrialRecord& r, const std::string& key) {
  const auto& cols = trial_csv_columns();
  auto it = std::find(cols.begin(), cols.end(), key);
  if (it == cols.end()) throw Error("unknown grouping key '" + key + "'");
  return split(trial_csv_row(r), ',')[static_cast<std::size_t>(it - cols.begin())];
}

inline std::vector<GroupSummary> summarize(const std::vector<TrialRecord>& records, const std::vector<std::string>& keys,
                                           std::uint64_t seed = 0,
                                           const std::string& value = "mean_logprob_per_token") {
  if (records.empty()) throw Error("summarize: no records");
  for (const auto& k : keys) field_value(records.front(), k);
  std::map<std::vector<std::string>, std::vector<double>> groups;
  for (const auto& r : records) {
    std::vector<std::string> k;
    for (const auto& key : keys) k.push_back(field_value(r, key));
    groups[k].push_back(parse_double(field_value(r, value)));
  }
  std::vector<GroupSummary> out;
  for (const auto& [k, v] : groups) out.push_back({k, bootstrap_mean(v, derive_seed(seed, "summary " + join(k, "/")))});
  return out;
}

inline std::string summary_csv(const std::vector<std::string>& keys, const std::vector<GroupSummary>& rows) {
  std::string s = join(keys, ",") + (keys.empty() ? "" : ",") + "mean,ci_lo,ci_hi,n\n";
  for (const auto& g : rows) {
    std::vector<std::string> f = g.key;
    f.push_back(format_double(g.ci.mean));
    f.push_back(format_double(g.ci.lo));
    f.push_back(format_double(g.ci.hi));
    f.push_back(std::to_string(g.ci.n));
    s += join(f, ",") + "\n";
  }
  return s;
}

inline json run_metadata(const std::vector<std::uint64_t>& seeds, const std::map<std::string, std::string>& hashes,
                         const std::string& parser, const ExperimentOutput* out = nullptr) {
  json j{{"seeds", seeds}, {"hashes", hashes}, {"parser", parser}};
  if (out) {
    j["records"] = out->records.size();
    j["excluded_records"] = out->excluded;
    j["excluded_ids"] = out->excluded_ids;
  }
  return j;
}

}  // namespace dative
