// SPDX-License-Identifier: Apache-2.0
#include "seqx/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "seqx/dataset.hpp"
#include "seqx/diversity_metrics.hpp"
#include "seqx/evaluation.hpp"
#include "seqx/exact_oracle.hpp"
#include "seqx/model_io.hpp"
#include "seqx/trainer.hpp"

namespace seqx {

namespace {

using nlohmann::json;

void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << doc.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
}

struct CaptionRecord {
  std::string id;
  std::vector<std::string> captions;
};

std::vector<CaptionRecord> read_caption_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  std::vector<CaptionRecord> out;
  std::string text;
  int line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(text);
      out.push_back({j.at("id").get<std::string>(),
                     j.at("captions").get<std::vector<std::string>>()});
    } catch (const json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": malformed caption record: " + e.what());
    }
  }
  return out;
}

/// Tail fraction of the scenes held out for per-epoch greedy evaluation.
constexpr double kHeldoutFraction = 0.1;

int run_gen_data(int scenes, int refs, double noise, std::uint64_t seed,
                 const std::string& out) {
  save_dataset(out, generate_dataset(scenes, refs, noise, seed));
  return 0;
}

int run_train(const std::string& config_path, const std::string& data_path,
              const std::string& out_path, const std::optional<std::string>& objective,
              const std::optional<std::string>& log_path) {
  json cfg = read_json(config_path);
  if (objective) cfg["objective"] = *objective;
  const TrainConfig config = config_from_json(cfg);

  std::vector<Scene> scenes = load_dataset(data_path);
  if (scenes.empty()) throw ValidationError("training data is empty");
  std::size_t n_heldout = scenes.size() >= 10
                              ? static_cast<std::size_t>(std::ceil(kHeldoutFraction * scenes.size()))
                              : 0;
  std::vector<Scene> heldout(scenes.end() - static_cast<std::ptrdiff_t>(n_heldout), scenes.end());
  scenes.resize(scenes.size() - n_heldout);

  const Vocab vocab = vocab_from_scenes(scenes);
  const Corpus train_corpus = encode_scenes(scenes, vocab);
  const Corpus heldout_corpus = encode_scenes(heldout, vocab);

  std::ofstream log_file;
  if (log_path) {
    log_file.open(*log_path);
    if (!log_file) throw ValidationError("cannot write " + *log_path);
  }
  const TrainResult result =
      train(train_corpus, heldout_corpus, vocab.size(), config, [&](const EpochRecord& r) {
        const std::string line = epoch_record_to_json(r).dump();
        std::cout << line << std::endl;
        if (log_file) log_file << line << '\n';
      });
  save_model(out_path, Model{vocab, result.params, config.max_len});
  return 0;
}

int run_eval(const std::string& model_path, const std::string& data_path,
             const std::string& strategy, std::uint64_t seed, int k,
             const std::string& report_path) {
  const Model model = load_model(model_path);
  const Corpus corpus = encode_scenes(load_dataset(data_path), model.vocab);
  const EvalReport report =
      evaluate_model(model.params, corpus, parse_strategy(strategy), k, seed, model.max_len);
  const json doc = report_to_json(report);
  write_json(report_path, doc);
  std::cout << doc.dump() << std::endl;
  return 0;
}

int run_score(const std::string& candidates_path, const std::string& references_path,
              const std::string& report_path) {
  const auto candidates = read_caption_file(candidates_path);
  const auto references = read_caption_file(references_path);

  std::vector<std::string> sentences;
  for (const auto* file : {&candidates, &references}) {
    for (const CaptionRecord& r : *file) {
      sentences.insert(sentences.end(), r.captions.begin(), r.captions.end());
    }
  }
  const Vocab vocab = Vocab::from_sentences(sentences);

  std::map<std::string, std::vector<Caption>> refs_by_id;
  std::vector<std::vector<Caption>> ref_sets;
  for (const CaptionRecord& r : references) {
    std::vector<Caption> set;
    for (const std::string& c : r.captions) set.push_back(vocab.encode(c));
    if (set.empty()) throw ValidationError("reference record " + r.id + " has no captions");
    if (!refs_by_id.emplace(r.id, set).second) {
      throw ValidationError("duplicate reference id " + r.id);
    }
    ref_sets.push_back(std::move(set));
  }
  const DocFreqTable df = build_doc_freq(ref_sets);

  json per_input = json::array();
  double cider_sum = 0.0;
  int diversity_count = 0;
  DiversityReport diversity_sum;
  int n_captions = 0;
  for (const CaptionRecord& r : candidates) {
    auto it = refs_by_id.find(r.id);
    if (it == refs_by_id.end()) throw ValidationError("no references for id " + r.id);
    if (r.captions.empty()) throw ValidationError("candidate record " + r.id + " is empty");
    const CiderReferences scorer(it->second, df);
    std::vector<Caption> set;
    json scores = json::array();
    for (const std::string& c : r.captions) {
      set.push_back(vocab.encode(c));
      const double s = scorer.score(set.back());
      scores.push_back(s);
      cider_sum += s;
      ++n_captions;
    }
    json entry{{"id", r.id}, {"cider", scores}};
    if (set.size() >= 2) {
      const DiversityReport d = diversity_report(set);
      entry["div1"] = d.div1;
      entry["div2"] = d.div2;
      entry["mbleu4"] = d.mbleu4;
      diversity_sum.div1 += d.div1;
      diversity_sum.div2 += d.div2;
      diversity_sum.mbleu4 += d.mbleu4;
      ++diversity_count;
    }
    per_input.push_back(std::move(entry));
  }

  json doc{{"num_inputs", candidates.size()},
           {"mean_cider", n_captions ? cider_sum / n_captions : 0.0},
           {"per_input", std::move(per_input)}};
  if (diversity_count > 0) {
    doc["div1"] = diversity_sum.div1 / diversity_count;
    doc["div2"] = diversity_sum.div2 / diversity_count;
    doc["mbleu4"] = diversity_sum.mbleu4 / diversity_count;
  }
  write_json(report_path, doc);
  return 0;
}

int run_check_exact(int vocab_size, int max_len, std::uint64_t seed, int draws) {
  const ExactCheckReport report = run_exact_checks(vocab_size, max_len, seed, draws);
  std::cout << exact_report_to_json(report).dump(2) << std::endl;
  return report.pass() ? 0 : kExitCheckFailure;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Sequence-level exploration for captioning: data, training, evaluation"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic benchmark");
  int scenes = 0;
  int refs = 4;
  double noise = 0.1;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--scenes", scenes, "Number of scenes")->required();
  gen->add_option("--refs", refs, "References per scene")->capture_default_str();
  gen->add_option("--noise", noise, "Feature noise stddev")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output JSONL")->required();

  auto* tr = app.add_subcommand("train", "Train a model");
  std::string cfg_path, data_path, model_out;
  std::optional<std::string> objective, log_path;
  tr->add_option("--config", cfg_path, "TrainConfig JSON")->required();
  tr->add_option("--data", data_path, "Dataset JSONL")->required();
  tr->add_option("--out", model_out, "Output model JSON")->required();
  tr->add_option("--objective", objective, "xe|sll|sll-me|sll-sle (overrides config)");
  tr->add_option("--log", log_path, "Write the epoch log as JSONL");

  auto* ev = app.add_subcommand("eval", "Evaluate precision and diversity");
  std::string ev_model, ev_data, ev_strategy, ev_report;
  std::uint64_t ev_seed = 0;
  int ev_k = 5;
  ev->add_option("--model", ev_model, "Model JSON")->required();
  ev->add_option("--data", ev_data, "Dataset JSONL")->required();
  ev->add_option("--strategy", ev_strategy, "rs|bs")->required();
  ev->add_option("--seed", ev_seed, "Sampling seed")->capture_default_str();
  ev->add_option("--k", ev_k, "Captions per input")->capture_default_str();
  ev->add_option("--report", ev_report, "Output report JSON")->required();

  auto* sc = app.add_subcommand("score", "Score caption files");
  std::string sc_cand, sc_refs, sc_report;
  sc->add_option("--candidates", sc_cand, "Candidate JSONL")->required();
  sc->add_option("--references", sc_refs, "Reference JSONL")->required();
  sc->add_option("--report", sc_report, "Output report JSON")->required();

  auto* ce = app.add_subcommand("check-exact", "Run the enumeration oracle checks");
  int ce_vocab = 3;
  int ce_len = 3;
  std::uint64_t ce_seed = 0;
  int ce_draws = 10000;
  ce->add_option("--vocab-size", ce_vocab, "Content vocabulary size")->capture_default_str();
  ce->add_option("--max-len", ce_len, "Maximum caption length")->capture_default_str();
  ce->add_option("--seed", ce_seed, "Random seed")->capture_default_str();
  ce->add_option("--draws", ce_draws, "Monte-Carlo draws")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*gen) return run_gen_data(scenes, refs, noise, gen_seed, gen_out);
    if (*tr) return run_train(cfg_path, data_path, model_out, objective, log_path);
    if (*ev) return run_eval(ev_model, ev_data, ev_strategy, ev_seed, ev_k, ev_report);
    if (*sc) return run_score(sc_cand, sc_refs, sc_report);
    if (*ce) return run_check_exact(ce_vocab, ce_len, ce_seed, ce_draws);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace seqx
