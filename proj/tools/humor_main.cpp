// Copyright (c) 2026 The humorlm Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "humor/baseline.hpp"
#include "humor/config.hpp"
#include "humor/corpus.hpp"
#include "humor/error.hpp"
#include "humor/harness/harness.hpp"
#include "humor/harness/metrics.hpp"
#include "humor/harness/synthetic.hpp"
#include "humor/io.hpp"
#include "humor/models.hpp"
#include "humor/nn/checkpoint.hpp"
#include "humor/subword.hpp"
#include "humor/textclean.hpp"

namespace fs = std::filesystem;
using namespace humor;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string checkpoint;
  std::size_t threads = 1;
  std::string out_dir = "out";
  bool synthetic = false;

  Config config;

  std::uint64_t base_seed() const {
    return seed ? *seed : static_cast<std::uint64_t>(config.get_int("seed", 0));
  }
};

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void print_provenance(const Globals& g) {
  if (g.synthetic) std::cout << harness::kSyntheticProvenanceNote << "\n";
}

std::string require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw Error(ErrorKind::ConfigInvalid, flag + " is required");
  return value;
}

subword::BpeModel load_tokenizer(const std::string& flag_value, const nn::ModelCheckpoint* ck) {
  std::string prefix = flag_value;
  if (prefix.empty() && ck != nullptr) {
    const auto it = ck->metadata.find("tokenizer");
    if (it != ck->metadata.end()) prefix = it->second;
  }
  if (prefix.empty()) throw Error(ErrorKind::ConfigInvalid, "--tokenizer is required");
  return subword::BpeModel::load(prefix);
}

std::vector<corpus::LabeledExample> load_rows(const Globals& g, const std::string& path) {
  std::vector<std::string> warnings;
  auto rows = corpus::load_labeled(path, corpus::ColumnMap::from_config(g.config), &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return corpus::fill_missing_scores(std::move(rows));
}

std::vector<std::string> texts_of(const std::vector<corpus::LabeledExample>& rows) {
  std::vector<std::string> out;
  for (const auto& r : rows) out.push_back(r.text);
  return out;
}

std::vector<double> targets_of(const std::vector<corpus::LabeledExample>& rows,
                               models::TaskKind task) {
  std::vector<double> out;
  for (const auto& r : rows) {
    out.push_back(task == models::TaskKind::Classify ? (r.is_humor ? 1.0 : 0.0)
                                                     : r.funniness.value_or(0.0));
  }
  return out;
}

models::TaskKind parse_task(const std::string& name) {
  if (name == "classify") return models::TaskKind::Classify;
  if (name == "regress") return models::TaskKind::Regress;
  throw Error(ErrorKind::ConfigInvalid, "--task must be classify or regress");
}

harness::CvSettings cv_settings(const Globals& g, models::TaskKind task, const std::string& method) {
  harness::CvSettings s;
  s.folds = static_cast<std::size_t>(g.config.get_int("cv.folds", 5));
  s.task = task;
  if (method == "neural") {
    s.method = harness::Method::Neural;
  } else if (method == "nbsvm") {
    s.method = harness::Method::Nbsvm;
  } else {
    throw Error(ErrorKind::ConfigInvalid, "--method must be neural or nbsvm");
  }
  s.head.kind = task;
  s.head.hidden = static_cast<std::size_t>(g.config.get_int("head.hidden", 50));
  s.head.validate();
  s.train = models::HeadTrainConfig::from_config(g.config, "head");
  s.nbsvm.alpha = g.config.get_double("nbsvm.alpha", s.nbsvm.alpha);
  s.nbsvm.beta = g.config.get_double("nbsvm.beta", s.nbsvm.beta);
  s.threads = g.threads;
  return s;
}

// --- clean / bpe --------------------------------------------------------------

int cmd_clean(const Globals&, const std::string& in, const std::string& out, int threshold) {
  const auto raw = corpus::load_raw_corpus(require(in, "--in"));
  textclean::CleanConfig cfg;
  cfg.rep_threshold = threshold;
  cfg.validate();
  textclean::RuleCounts counts;
  std::vector<std::string> cleaned;
  for (const auto& t : raw.tweets) cleaned.push_back(textclean::clean(t, cfg, &counts).text);
  corpus::write_raw_corpus(require(out, "--out"), cleaned);
  std::cerr << "rule=char_rep count=" << counts.char_rep << "\n"
            << "rule=word_rep count=" << counts.word_rep << "\n"
            << "rule=all_caps count=" << counts.all_caps << "\n"
            << "rule=specials count=" << counts.specials << "\n"
            << "rule=newlines count=" << counts.newlines << "\n"
            << "rule=spaces count=" << counts.spaces << "\n";
  return 0;
}

int cmd_bpe_train(const std::string& in, std::size_t vocab_size, const std::string& prefix) {
  const auto corpus = corpus::load_raw_corpus(require(in, "--in"));
  subword::BpeTrainOptions options;
  options.vocab_size = vocab_size;
  const auto bpe = subword::BpeModel::train(std::span<const std::string>(corpus.tweets), options);
  bpe.save(require(prefix, "--out-prefix"));
  std::cout << "vocab_size=" << bpe.size() << " merges=" << bpe.merges().size() << "\n";
  return 0;
}

int cmd_bpe_encode(const std::string& model, const std::string& in, const std::string& out) {
  const auto bpe = subword::BpeModel::load(require(model, "--model"));
  const auto corpus = corpus::load_raw_corpus(require(in, "--in"));
  std::string text;
  for (const auto& t : corpus.tweets) {
    const auto ids = bpe.encode(t);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i > 0) text += ' ';
      text += std::to_string(ids[i]);
    }
    text += '\n';
  }
  write_file(require(out, "--out"), text);
  return 0;
}

// --- language model -----------------------------------------------------------

void report_lm(const models::LmTrainResult& r) {
  for (const auto& e : r.history) {
    std::cout << "phase=" << e.phase << " epoch=" << e.epoch << " train_loss=" << fixed(e.train_loss)
              << " valid_loss=" << fixed(e.valid.loss) << " valid_accuracy=" << fixed(e.valid.accuracy)
              << "\n";
  }
  std::cout << "best valid_loss=" << fixed(r.best.loss) << " valid_accuracy=" << fixed(r.best.accuracy)
            << "\n";
}

void save_lm(const models::LanguageModel& lm, const std::string& path, const std::string& tokenizer) {
  auto ck = lm.to_checkpoint();
  if (!tokenizer.empty()) ck.metadata["tokenizer"] = fs::absolute(tokenizer).string();
  nn::save_checkpoint(path, ck);
  std::cout << "checkpoint=" << path << "\n";
}

int cmd_lm_train(const Globals& g, const std::string& train_path, const std::string& tokenizer) {
  const auto out = g.checkpoint.empty() ? (fs::path(g.out_dir) / "lm.ckpt").string() : g.checkpoint;
  if (g.synthetic) {
    auto p = harness::build_synthetic_pipeline(g.config);
    const auto prefix = (fs::path(g.out_dir) / "tokenizer").string();
    p.bpe.save(prefix);
    report_lm(p.lm_result);
    save_lm(p.lm, out, prefix);
    print_provenance(g);
    return 0;
  }
  const auto bpe = load_tokenizer(tokenizer, nullptr);
  const auto raw = corpus::load_raw_corpus(require(train_path, "--train"));
  corpus::SplitSpec split{g.config.get_double("lm.valid_fraction", 0.1), g.base_seed()};
  const auto [train, valid] = corpus::split_train_valid(raw, split);
  const auto cfg = models::LmConfig::from_config(g.config);
  if (bpe.size() > cfg.vocab_size) {
    throw Error(ErrorKind::ConfigInvalid, "lm.vocab_size is smaller than the tokenizer vocabulary");
  }
  auto lm = models::LanguageModel::build(cfg, g.base_seed());
  const auto tc = models::LmTrainConfig::from_config(g.config, "lm.train", models::pretrain_schedule());
  const auto result = models::train_lm(lm, models::encode_stream(bpe, train.tweets),
                                       models::encode_stream(bpe, valid.tweets), tc, g.base_seed());
  report_lm(result);
  save_lm(lm, out, tokenizer);
  return 0;
}

int cmd_lm_finetune(const Globals& g, const std::vector<std::string>& csvs, const std::string& tokenizer,
                    const std::string& out_path) {
  const auto ck = nn::load_checkpoint(require(g.checkpoint, "--checkpoint"));
  auto lm = models::LanguageModel::from_checkpoint(ck);
  const auto bpe = load_tokenizer(tokenizer, &ck);
  corpus::RawCorpus texts;
  for (const auto& path : csvs) {
    for (const auto& row : load_rows(g, path)) texts.tweets.push_back(row.text);
  }
  corpus::SplitSpec split{g.config.get_double("lm.valid_fraction", 0.1), g.base_seed()};
  const auto [train, valid] = corpus::split_train_valid(texts, split);
  const auto tc = models::LmTrainConfig::from_config(g.config, "finetune", models::finetune_schedule());
  const auto result = models::finetune_lm(lm, models::encode_stream(bpe, train.tweets),
                                          models::encode_stream(bpe, valid.tweets), tc, g.base_seed());
  report_lm(result);
  auto out_ck = lm.to_checkpoint();
  out_ck.metadata["tokenizer"] = ck.metadata.count("tokenizer") ? ck.metadata.at("tokenizer") : tokenizer;
  const auto out = out_path.empty() ? g.checkpoint : out_path;
  nn::save_checkpoint(out, out_ck);
  std::cout << "checkpoint=" << out << "\n";
  return 0;
}

// --- heads --------------------------------------------------------------------

int cmd_head_train(const Globals& g, models::TaskKind task, const std::string& train_path,
                   const std::string& valid_path, const std::string& tokenizer,
                   const std::string& out_path) {
  const auto ck = nn::load_checkpoint(require(g.checkpoint, "--checkpoint"));
  const auto lm = models::LanguageModel::from_checkpoint(ck);
  const auto bpe = load_tokenizer(tokenizer, &ck);
  const auto train_rows = load_rows(g, require(train_path, "--train"));
  std::vector<corpus::LabeledExample> valid_rows;
  if (!valid_path.empty()) valid_rows = load_rows(g, valid_path);
  const auto settings = cv_settings(g, task, "neural");
  auto model = models::HeadModel::build(lm, settings.head, derive_seed(g.base_seed(), "head_init"));
  const models::TaskData train{models::encode_documents(bpe, texts_of(train_rows)),
                               targets_of(train_rows, task)};
  const models::TaskData valid{models::encode_documents(bpe, texts_of(valid_rows)),
                               targets_of(valid_rows, task)};
  const auto result = models::train_head_then_unfreeze(model, train, valid, settings.train,
                                                       derive_seed(g.base_seed(), "head_train"));
  for (const auto& e : result.history) {
    std::cout << "stage=" << e.stage << " epoch=" << e.epoch << " train_loss=" << fixed(e.train_loss)
              << " valid_metric=" << fixed(e.valid_metric) << "\n";
  }
  std::cout << "best " << (task == models::TaskKind::Classify ? "f1" : "mse") << "="
            << fixed(result.best_metric) << " stage=" << result.best_stage
            << " epoch=" << result.best_epoch << "\n";
  auto out_ck = model.to_checkpoint();
  if (ck.metadata.count("tokenizer")) out_ck.metadata["tokenizer"] = ck.metadata.at("tokenizer");
  if (!tokenizer.empty()) out_ck.metadata["tokenizer"] = fs::absolute(tokenizer).string();
  const auto out = out_path.empty()
                       ? (fs::path(g.out_dir) / (task == models::TaskKind::Classify ? "clf.ckpt" : "reg.ckpt")).string()
                       : out_path;
  nn::save_checkpoint(out, out_ck);
  std::cout << "checkpoint=" << out << "\n";
  return 0;
}

int cmd_predict(const Globals& g, const std::string& in, const std::string& tokenizer,
                const std::string& out) {
  const auto ck = nn::load_checkpoint(require(g.checkpoint, "--checkpoint"));
  auto model = models::HeadModel::from_checkpoint(ck);
  const auto bpe = load_tokenizer(tokenizer, &ck);
  const auto rows = load_rows(g, require(in, "--in"));
  const auto preds = model.predict(models::encode_documents(bpe, texts_of(rows)));
  const auto k = model.head_config().outputs();
  std::ostringstream csv;
  csv.precision(9);
  const bool classify = model.head_config().kind == models::TaskKind::Classify;
  csv << (classify ? "id,prob_humor\n" : "id,funniness\n");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv << rows[i].id << "," << (classify ? preds[i * k + 1] : preds[i]) << "\n";
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    write_file(out, csv.str());
  }
  return 0;
}

// --- baseline and evaluation ----------------------------------------------------

int cmd_nbsvm(const Globals& g, const std::string& train_path, const std::string& valid_path,
              std::optional<double> beta, std::optional<double> alpha) {
  std::vector<corpus::LabeledExample> train_rows;
  std::vector<corpus::LabeledExample> valid_rows;
  if (g.synthetic) {
    const auto rows = harness::make_synthetic_labeled(
        static_cast<std::size_t>(g.config.get_int("synthetic.labeled", 200)),
        static_cast<std::uint64_t>(g.config.get_int("synthetic.seed", 1)));
    const auto cut = rows.size() * 4 / 5;
    train_rows.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(cut));
    valid_rows.assign(rows.begin() + static_cast<std::ptrdiff_t>(cut), rows.end());
  } else {
    train_rows = load_rows(g, require(train_path, "--train"));
    valid_rows = load_rows(g, require(valid_path, "--valid"));
  }
  baseline::NbsvmConfig cfg;
  cfg.alpha = alpha.value_or(g.config.get_double("nbsvm.alpha", cfg.alpha));
  cfg.beta = beta.value_or(g.config.get_double("nbsvm.beta", cfg.beta));
  std::vector<baseline::Doc> docs;
  std::vector<int> labels;
  for (const auto& r : train_rows) {
    docs.push_back(baseline::baseline_tokens(r.text));
    labels.push_back(r.is_humor ? 1 : 0);
  }
  const auto model = baseline::train_nbsvm(docs, labels, cfg);
  std::vector<int> pred;
  std::vector<int> truth;
  for (const auto& r : valid_rows) {
    pred.push_back(baseline::nbsvm_predict(model, baseline::baseline_tokens(r.text)) >= 0.5 ? 1 : 0);
    truth.push_back(r.is_humor ? 1 : 0);
  }
  std::cout << harness::compute_metrics(pred, truth).summary() << "\n";
  print_provenance(g);
  return 0;
}

int cmd_evaluate(const Globals& g, const std::string& pred_path, const std::string& gold_path,
                 models::TaskKind task) {
  const auto gold = load_rows(g, require(gold_path, "--gold"));
  // Predictions: header line, then `id,value` rows.
  const auto text = read_file(require(pred_path, "--predictions"));
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  std::map<std::string, double> by_id;
  std::size_t line_no = 1;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line_no) + ": expected id,value");
    }
    try {
      by_id[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line_no) + ": bad value");
    }
  }
  std::vector<double> values;
  for (const auto& r : gold) {
    const auto it = by_id.find(r.id);
    if (it == by_id.end()) throw Error(ErrorKind::MalformedRow, "no prediction for id " + r.id);
    values.push_back(it->second);
  }
  if (task == models::TaskKind::Classify) {
    std::vector<int> pred;
    std::vector<int> truth;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      pred.push_back(values[i] >= 0.5 ? 1 : 0);
      truth.push_back(gold[i].is_humor ? 1 : 0);
    }
    std::cout << harness::compute_metrics(pred, truth).summary() << "\n";
  } else {
    const auto truth = targets_of(gold, task);
    std::cout << "rmse=" << fixed(harness::compute_rmse(harness::clip_scores(values), truth)) << "\n";
  }
  return 0;
}

// --- cross-validation -------------------------------------------------------------

struct CvData {
  harness::CvInput input;
  std::optional<harness::SyntheticPipeline> pipeline;
  std::optional<subword::BpeModel> bpe;
  std::optional<models::LanguageModel> lm;

  harness::NeuralAssets assets() const {
    if (pipeline) return {&pipeline->bpe, &pipeline->lm};
    if (bpe && lm) return {&*bpe, &*lm};
    return {};
  }
};

CvData load_cv_data(const Globals& g, models::TaskKind task, const std::string& method,
                    const std::string& train_path, const std::string& test_path,
                    const std::string& tokenizer) {
  CvData d;
  std::vector<corpus::LabeledExample> rows;
  if (g.synthetic) {
    if (method == "neural") {
      d.pipeline = harness::build_synthetic_pipeline(g.config);
      rows = d.pipeline->labeled;
    } else {
      rows = harness::make_synthetic_labeled(
          static_cast<std::size_t>(g.config.get_int("synthetic.labeled", 200)),
          static_cast<std::uint64_t>(g.config.get_int("synthetic.seed", 1)));
    }
    rows = corpus::fill_missing_scores(std::move(rows));
  } else {
    rows = load_rows(g, require(train_path, "--train"));
    if (!test_path.empty()) d.input.test_texts = texts_of(load_rows(g, test_path));
    if (method == "neural") {
      if (g.checkpoint.empty()) throw Error(ErrorKind::MissingCheckpoint, "--checkpoint is required");
      const auto ck = nn::load_checkpoint(g.checkpoint);
      d.lm = models::LanguageModel::from_checkpoint(ck);
      d.bpe = load_tokenizer(tokenizer, &ck);
    }
  }
  d.input.texts = texts_of(rows);
  d.input.targets = targets_of(rows, task);
  return d;
}

void print_seed(const harness::SeedResult& r) {
  if (r.task == models::TaskKind::Classify) {
    std::cout << "seed=" << r.seed << " f1=" << fixed(r.ensemble_metric) << " | "
              << r.ensemble_report.summary() << "\n";
  } else {
    std::cout << "seed=" << r.seed << " mse=" << fixed(r.ensemble_metric)
              << " rmse=" << fixed(r.ensemble_report.rmse.value_or(0.0)) << "\n";
  }
}

std::optional<std::string> provenance(const Globals& g) {
  if (!g.synthetic) return std::nullopt;
  return std::string(harness::kSyntheticProvenanceNote);
}

int cmd_cv_run(const Globals& g, models::TaskKind task, const std::string& method,
               const std::string& train_path, const std::string& test_path,
               const std::string& tokenizer) {
  const auto data = load_cv_data(g, task, method, train_path, test_path, tokenizer);
  const auto settings = cv_settings(g, task, method);
  const auto result = harness::run_cv(data.input, settings, data.assets(), g.base_seed());
  const auto path = fs::path(g.out_dir) / ("cv_seed" + std::to_string(g.base_seed()) + ".jsonl");
  harness::write_results(path, std::span(&result, 1), provenance(g));
  print_seed(result);
  std::cout << "results=" << path.string() << "\n";
  print_provenance(g);
  return 0;
}

int cmd_seed_search(const Globals& g, models::TaskKind task, const std::string& method,
                    std::size_t n_seeds, const std::string& train_path, const std::string& test_path,
                    const std::string& tokenizer) {
  if (n_seeds == 0) throw Error(ErrorKind::ConfigInvalid, "--seeds must be positive");
  const auto data = load_cv_data(g, task, method, train_path, test_path, tokenizer);
  const auto settings = cv_settings(g, task, method);
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < n_seeds; ++i) seeds.push_back(g.base_seed() + i);
  const auto search = harness::seed_search(data.input, settings, data.assets(), seeds);
  const auto path = fs::path(g.out_dir) / "seed_search.jsonl";
  harness::write_results(path, search.results, provenance(g));
  for (const auto& r : search.results) print_seed(r);
  const auto metric = task == models::TaskKind::Classify ? "f1" : "mse";
  std::cout << "best_seed=" << search.results[search.best].seed << " " << metric << "="
            << fixed(search.results[search.best].ensemble_metric) << "\n"
            << metric << "_min=" << fixed(search.min_metric) << " " << metric
            << "_max=" << fixed(search.max_metric) << " " << metric
            << "_mean=" << fixed(search.mean_metric) << "\n"
            << "results=" << path.string() << "\n";
  print_provenance(g);
  return 0;
}

int cmd_histogram(const std::string& results, std::size_t bins, const std::string& out) {
  std::vector<double> values;
  for (const auto& [seed, metric] : harness::read_seed_metrics(require(results, "--results"))) {
    values.push_back(metric);
  }
  harness::emit_histogram(values, bins, require(out, "--out"));
  std::cout << "histogram=" << out << " values=" << values.size() << "\n";
  return 0;
}

int cmd_make_synthetic(const Globals& g) {
  const auto seed = static_cast<std::uint64_t>(g.config.get_int("synthetic.seed", 1));
  const auto lm_path = fs::path(g.out_dir) / "lm_corpus.txt";
  const auto csv_path = fs::path(g.out_dir) / "labeled.csv";
  corpus::write_raw_corpus(lm_path, harness::make_synthetic_lm_corpus(
                                        static_cast<std::size_t>(g.config.get_int("synthetic.lm_tweets", 200)), seed));
  corpus::write_labeled(csv_path, harness::make_synthetic_labeled(
                                      static_cast<std::size_t>(g.config.get_int("synthetic.labeled", 200)), seed));
  std::cout << "lm_corpus=" << lm_path.string() << "\nlabeled=" << csv_path.string() << "\n";
  std::cout << harness::kSyntheticProvenanceNote << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Humor detection and funniness regression toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed_value = 0;
  app.add_option("--config", g.config_path, "flat key = value configuration file");
  auto* seed_opt = app.add_option("--seed", seed_value, "base seed");
  app.add_option("--checkpoint", g.checkpoint, "model checkpoint path");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_flag("--synthetic", g.synthetic, "use generated desk-scale data");

  std::string in, out, train, valid, test, tokenizer, model, prefix, results, predictions, gold;
  std::string task = "classify", method = "neural";
  std::vector<std::string> texts;
  int rep_threshold = 4;
  std::size_t vocab_size = 30000, n_seeds = 20, bins = 10;
  std::optional<double> beta, alpha;

  auto* clean = app.add_subcommand("clean", "normalize raw tweets");
  clean->add_option("--in", in);
  clean->add_option("--out", out);
  clean->add_option("--rep-threshold", rep_threshold);

  auto* bpe_train = app.add_subcommand("bpe-train", "train the subword tokenizer");
  bpe_train->add_option("--in", in);
  bpe_train->add_option("--vocab-size", vocab_size);
  bpe_train->add_option("--out-prefix", prefix);

  auto* bpe_encode = app.add_subcommand("bpe-encode", "encode cleaned tweets to ids");
  bpe_encode->add_option("--model", model);
  bpe_encode->add_option("--in", in);
  bpe_encode->add_option("--out", out);

  auto* lm_train = app.add_subcommand("lm-train", "pretrain the language model");
  lm_train->add_option("--train", train, "raw tweet corpus");
  lm_train->add_option("--tokenizer", tokenizer, "tokenizer prefix");

  auto* lm_finetune = app.add_subcommand("lm-finetune", "fine-tune the LM on competition text");
  lm_finetune->add_option("--texts", texts, "labeled CSV files whose text column is used")->required();
  lm_finetune->add_option("--tokenizer", tokenizer);
  lm_finetune->add_option("--out", out, "output checkpoint (default: overwrite --checkpoint)");

  auto* clf_train = app.add_subcommand("clf-train", "train the humor classifier");
  auto* reg_train = app.add_subcommand("reg-train", "train the funniness regressor");
  for (auto* sub : {clf_train, reg_train}) {
    sub->add_option("--train", train);
    sub->add_option("--valid", valid);
    sub->add_option("--tokenizer", tokenizer);
    sub->add_option("--out", out);
  }

  auto* predict = app.add_subcommand("predict", "score a labeled or unlabeled CSV");
  predict->add_option("--in", in);
  predict->add_option("--tokenizer", tokenizer);
  predict->add_option("--out", out);

  auto* nbsvm = app.add_subcommand("nbsvm", "NBSVM baseline");
  nbsvm->add_option("--train", train);
  nbsvm->add_option("--valid", valid);
  nbsvm->add_option("--beta", beta);
  nbsvm->add_option("--alpha", alpha);

  auto* evaluate = app.add_subcommand("evaluate", "score predictions against gold labels");
  evaluate->add_option("--predictions", predictions);
  evaluate->add_option("--gold", gold);
  evaluate->add_option("--task", task);

  auto* cv_run = app.add_subcommand("cv-run", "k-fold cross-validation for one seed");
  auto* seed_search = app.add_subcommand("seed-search", "cross-validation over several seeds");
  for (auto* sub : {cv_run, seed_search}) {
    sub->add_option("--train", train);
    sub->add_option("--test", test);
    sub->add_option("--task", task);
    sub->add_option("--method", method);
    sub->add_option("--tokenizer", tokenizer);
  }
  seed_search->add_option("--seeds", n_seeds, "number of seeds (base seed onwards)");

  auto* hist = app.add_subcommand("histogram", "histogram of per-seed ensemble metrics");
  hist->add_option("--results", results);
  hist->add_option("--bins", bins);
  hist->add_option("--out", out);

  auto* make_synthetic = app.add_subcommand("make-synthetic", "write the generated datasets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorKind::ConfigInvalid);
  }

  try {
    if (!g.config_path.empty()) g.config = Config::load(g.config_path);
    if (*seed_opt) g.seed = seed_value;
    if (*clean) return cmd_clean(g, in, out, rep_threshold);
    if (*bpe_train) return cmd_bpe_train(in, vocab_size, prefix);
    if (*bpe_encode) return cmd_bpe_encode(model, in, out);
    if (*lm_train) return cmd_lm_train(g, train, tokenizer);
    if (*lm_finetune) return cmd_lm_finetune(g, texts, tokenizer, out);
    if (*clf_train) return cmd_head_train(g, models::TaskKind::Classify, train, valid, tokenizer, out);
    if (*reg_train) return cmd_head_train(g, models::TaskKind::Regress, train, valid, tokenizer, out);
    if (*predict) return cmd_predict(g, in, tokenizer, out);
    if (*nbsvm) return cmd_nbsvm(g, train, valid, beta, alpha);
    if (*evaluate) return cmd_evaluate(g, predictions, gold, parse_task(task));
    if (*cv_run) return cmd_cv_run(g, parse_task(task), method, train, test, tokenizer);
    if (*seed_search) {
      return cmd_seed_search(g, parse_task(task), method, n_seeds, train, test, tokenizer);
    }
    if (*hist) return cmd_histogram(results, bins, out);
    if (*make_synthetic) return cmd_make_synthetic(g);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(ErrorKind::Io);
  }
  return 0;
}
