#include "musem/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include <CLI11.hpp>
#include <json.hpp>

#include "musem/checkpoint.hpp"
#include "musem/data.hpp"
#include "musem/error.hpp"
#include "musem/gradcheck.hpp"
#include "musem/training.hpp"

namespace musem {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct DataArgs {
  std::string data;
  std::string format = "canonical";
  std::string truth;
};

void add_data_options(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("--data", a.data, "dataset file (JSON lines)")->required();
  cmd->add_option("--format", a.format, "canonical | nela17 | clickbait")
      ->check(CLI::IsMember({"canonical", "nela17", "clickbait"}));
  cmd->add_option("--truth", a.truth, "Clickbait Challenge truth file (with --format clickbait)");
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw InputError(std::string("missing ") + what + " path");
  if (!fs::is_regular_file(path)) throw InputError(std::string(what) + " not found: " + path);
}

void require_provider_file(const std::string& spec) {
  if (spec.starts_with("file:")) require_file(spec.substr(5), "synthetic headline file");
}

std::vector<ExamplePair> load_examples(const DataArgs& a, bool labels_required, std::ostream& err) {
  require_file(a.data, "dataset");
  if (a.format == "clickbait") {
    require_file(a.truth, "truth file");
    auto ingest = ingest_clickbait_challenge(a.data, a.truth);
    if (ingest.missing_truth > 0 || ingest.invalid > 0) {
      err << "warning: dropped " << ingest.missing_truth << " instances without truth and " << ingest.invalid
          << " with empty text\n";
    }
    return std::move(ingest.examples);
  }
  if (a.format == "nela17") return ingest_nela17(a.data, &err);
  return ingest_canonical(a.data, labels_required);
}

std::unordered_set<std::string> collect_vocabulary(const std::vector<ExamplePair>& examples,
                                                   const SyntheticHeadlineSource& source) {
  std::unordered_set<std::string> vocab;
  for (const auto& ex : examples) {
    for (auto& t : tokenize(ex.headline)) vocab.insert(std::move(t));
    for (auto& t : tokenize(resolve_synthetic_headline(ex, source))) vocab.insert(std::move(t));
  }
  return vocab;
}

// Flag values bound before parsing; only flags actually given override the config.
struct ConfigFlags {
  TrainConfig values;
  std::string variant = "diff";
  std::string pooling = "avg";
  std::string config_path;
};

void add_config_options(CLI::App* cmd, ConfigFlags& f) {
  auto& v = f.values;
  cmd->add_option("--config", f.config_path, "JSON file of TrainConfig fields (flags win)");
  cmd->add_option("--learning-rate,--learning_rate", v.learning_rate);
  cmd->add_option("--batch-size,--batch_size", v.batch_size);
  cmd->add_option("--hidden", v.hidden);
  cmd->add_option("--dim", v.dim, "embedding dimension (default: taken from the embeddings file)");
  cmd->add_option("--joint-dim,--joint_dim", v.joint_dim);
  cmd->add_option("--dropout", v.dropout);
  cmd->add_option("--max-len,--max_len", v.max_len);
  cmd->add_option("--epochs", v.epochs);
  cmd->add_option("--seed", v.seed, "all randomness derives from this (fallback: $MUSEM_SEED)");
  cmd->add_option("--variant", f.variant, "diff | dot | concat | clubbed");
  cmd->add_option("--pooling", f.pooling, "avg | max");
  cmd->add_option("--synthetic-first,--synthetic_first", v.synthetic_first);
  cmd->add_option("--beta1", v.beta1);
  cmd->add_option("--beta2", v.beta2);
  cmd->add_option("--epsilon", v.epsilon);
  cmd->add_option("--validation-fraction,--validation_fraction", v.validation_fraction);
  cmd->add_option("--balance-classes,--balance_classes", v.balance_classes);
}

std::uint64_t parse_seed(const std::string& text, const char* origin) {
  std::uint64_t seed = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError(std::string(origin) + ": invalid seed '" + text + "'");
  }
  return seed;
}

struct ResolvedConfig {
  TrainConfig config;
  bool dim_explicit = false;
};

ResolvedConfig resolve_config(const CLI::App* cmd, const ConfigFlags& f) {
  ResolvedConfig r;
  json file_config = json::object();
  if (!f.config_path.empty()) {
    require_file(f.config_path, "config file");
    std::ifstream in(f.config_path);
    try {
      file_config = json::parse(in);
    } catch (const json::parse_error& e) {
      throw InputError(f.config_path + ": invalid JSON (" + e.what() + ")");
    }
    r.config = train_config_from_json(file_config);
    r.dim_explicit = file_config.contains("dim");
  }
  if (!file_config.contains("seed")) {
    if (const char* env = std::getenv("MUSEM_SEED"); env != nullptr && *env != '\0') {
      r.config.seed = parse_seed(env, "MUSEM_SEED");
    }
  }

  const auto& v = f.values;
  auto given = [cmd](const char* flag) { return cmd->count(flag) > 0; };
  if (given("--learning-rate")) r.config.learning_rate = v.learning_rate;
  if (given("--batch-size")) r.config.batch_size = v.batch_size;
  if (given("--hidden")) r.config.hidden = v.hidden;
  if (given("--dim")) {
    r.config.dim = v.dim;
    r.dim_explicit = true;
  }
  if (given("--joint-dim")) r.config.joint_dim = v.joint_dim;
  if (given("--dropout")) r.config.dropout = v.dropout;
  if (given("--max-len")) r.config.max_len = v.max_len;
  if (given("--epochs")) r.config.epochs = v.epochs;
  if (given("--seed")) r.config.seed = v.seed;
  if (given("--variant")) r.config.variant = parse_variant(f.variant);
  if (given("--pooling")) r.config.pooling = parse_pooling(f.pooling);
  if (given("--synthetic-first")) r.config.synthetic_first = v.synthetic_first;
  if (given("--beta1")) r.config.beta1 = v.beta1;
  if (given("--beta2")) r.config.beta2 = v.beta2;
  if (given("--epsilon")) r.config.epsilon = v.epsilon;
  if (given("--validation-fraction")) r.config.validation_fraction = v.validation_fraction;
  if (given("--balance-classes")) r.config.balance_classes = v.balance_classes;
  return r;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string file_stem(std::size_t index, const std::string& id) {
  std::string safe;
  for (char c : id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    safe += ok ? c : '_';
  }
  char prefix[32];
  std::snprintf(prefix, sizeof(prefix), "%06zu", index);
  return std::string(prefix) + "-" + safe;
}

// ---------------------------------------------------------------- commands

struct TrainArgs {
  DataArgs data;
  std::string validation;
  std::string embeddings;
  std::string provider = "lead:1";
  std::string checkpoint;
  std::string best_checkpoint;
  std::string log;
  ConfigFlags flags;
};

int cmd_train(const CLI::App* cmd, TrainArgs& a, std::ostream& out, std::ostream& err) {
  require_file(a.embeddings, "embeddings file");
  if (!a.validation.empty()) require_file(a.validation, "validation file");
  require_provider_file(a.provider);
  auto [config, dim_explicit] = resolve_config(cmd, a.flags);

  const auto source = SyntheticHeadlineSource::parse(a.provider);
  const auto examples = load_examples(a.data, true, err);
  std::vector<ExamplePair> val_examples;
  if (!a.validation.empty()) val_examples = ingest_canonical(a.validation);

  auto vocab = collect_vocabulary(examples, source);
  vocab.merge(collect_vocabulary(val_examples, source));
  const EmbeddingTable table = load_glove(a.embeddings, &vocab);
  if (!dim_explicit) {
    config.dim = table.dim();
  } else if (config.dim != table.dim()) {
    throw InputError("--dim " + std::to_string(config.dim) + " does not match embeddings file " + a.embeddings +
                     " (dimension " + std::to_string(table.dim()) + ")");
  }
  config.validate();

  auto prepared = prepare_examples(examples, source, table, config.max_len);
  std::vector<PreparedExample> train_set;
  std::vector<PreparedExample> validation;
  if (!val_examples.empty()) {
    train_set = std::move(prepared);
    validation = prepare_examples(val_examples, source, table, config.max_len);
  } else {
    std::tie(train_set, validation) =
        split_train_validation(std::move(prepared), config.validation_fraction, SeedStreams::derive(config.seed).split);
  }

  const TrainResult result = train(train_set, validation, table, config);

  const std::string best_path = a.best_checkpoint.empty() ? a.checkpoint + ".best" : a.best_checkpoint;
  const std::string log_path = a.log.empty() ? a.checkpoint + ".log.jsonl" : a.log;
  save_checkpoint(a.checkpoint, config, config.epochs, result.final_params);
  save_checkpoint(best_path, config, result.best_epoch, result.best_params);
  std::string log_text;
  for (const auto& e : result.log) log_text += to_json(e).dump() + "\n";
  write_text(log_path, log_text);

  const json summary = {{"checkpoint", a.checkpoint},
                        {"best_checkpoint", best_path},
                        {"best_epoch", result.best_epoch},
                        {"log", log_path},
                        {"train_examples", train_set.size()},
                        {"validation_examples", validation.size()},
                        {"class_weights", result.class_weights},
                        {"final_train_loss", result.log.back().train_loss}};
  out << summary.dump(2) << '\n';
  return kExitOk;
}

struct ModelArgs {
  DataArgs data;
  std::string checkpoint;
  std::string embeddings;
  std::string provider = "lead:1";
  std::string output;
  std::string variant;
  std::string pooling;
};

void add_model_options(CLI::App* cmd, ModelArgs& a) {
  add_data_options(cmd, a.data);
  cmd->add_option("--checkpoint", a.checkpoint)->required();
  cmd->add_option("--embeddings", a.embeddings)->required();
  cmd->add_option("--provider", a.provider, "lead:K | file:PATH");
  cmd->add_option("--variant", a.variant, "expected variant; a checkpoint trained otherwise is rejected");
  cmd->add_option("--pooling", a.pooling, "expected pooling; a checkpoint trained otherwise is rejected");
}

struct LoadedModel {
  Checkpoint checkpoint;
  EmbeddingTable table;
  std::vector<PreparedExample> examples;
};

LoadedModel load_model(const ModelArgs& a, bool labels_required, std::ostream& err) {
  require_file(a.checkpoint, "checkpoint");
  require_file(a.embeddings, "embeddings file");
  require_provider_file(a.provider);

  std::optional<ModelConfig> expected;
  Checkpoint ckpt = load_checkpoint(a.checkpoint);
  if (!a.variant.empty() || !a.pooling.empty()) {
    ModelConfig want = ckpt.params.config;
    if (!a.variant.empty()) want.variant = parse_variant(a.variant);
    if (!a.pooling.empty()) want.pooling = parse_pooling(a.pooling);
    ckpt = load_checkpoint(a.checkpoint, want);
  }

  const auto source = SyntheticHeadlineSource::parse(a.provider);
  const auto examples = load_examples(a.data, labels_required, err);
  const auto vocab = collect_vocabulary(examples, source);
  EmbeddingTable table = load_glove(a.embeddings, &vocab);
  if (table.dim() != ckpt.params.config.dim) {
    throw InputError("embeddings file " + a.embeddings + " has dimension " + std::to_string(table.dim()) +
                     " but the checkpoint expects " + std::to_string(ckpt.params.config.dim));
  }
  auto prepared = prepare_examples(examples, source, table, ckpt.config.max_len);
  return {std::move(ckpt), std::move(table), std::move(prepared)};
}

int cmd_eval(ModelArgs& a, std::ostream& out, std::ostream& err) {
  const auto model = load_model(a, true, err);
  const MetricsReport report = evaluate(model.checkpoint.params, model.examples, model.table);
  const std::string text = to_json(report).dump(2) + "\n";
  if (!a.output.empty()) write_text(a.output, text);
  out << text;
  return kExitOk;
}

int cmd_predict(ModelArgs& a, std::ostream& out, std::ostream& err) {
  const auto model = load_model(a, false, err);
  std::string text;
  for (const auto& p : predict(model.checkpoint.params, model.examples, model.table)) {
    const json line = {{"id", p.id},
                       {"p_incongruent", p.p_incongruent},
                       {"p_congruent", p.p_congruent},
                       {"predicted_label", p.predicted}};
    text += line.dump() + "\n";
  }
  if (!a.output.empty()) {
    write_text(a.output, text);
  } else {
    out << text;
  }
  return kExitOk;
}

struct GradCheckArgs {
  std::size_t dim = 6;
  std::size_t hidden = 4;
  std::size_t joint_dim = 0;
  std::size_t max_len = 5;
  std::size_t batch = 2;
  std::uint64_t seed = 7;
  double step = 1e-5;
  double tolerance = 1e-4;
  double dropout = 0.2;
  std::string variant = "diff";
  std::string pooling = "avg";
  std::string corrupt;
};

int cmd_gradcheck(const GradCheckArgs& a, std::ostream& out) {
  if (a.dim == 0 || a.dim > 8) throw InputError("gradcheck requires 1 <= dim <= 8");
  ModelGradCheckOptions opts;
  opts.model.variant = parse_variant(a.variant);
  opts.model.pooling = parse_pooling(a.pooling);
  opts.model.dim = a.dim;
  opts.model.hidden = a.hidden;
  opts.model.joint_dim = a.joint_dim == 0 ? a.hidden : a.joint_dim;
  opts.max_len = a.max_len;
  opts.batch = a.batch;
  opts.seed = a.seed;
  opts.step = a.step;
  opts.tolerance = a.tolerance;
  opts.dropout = a.dropout;
  opts.corrupt_tensor = a.corrupt;

  const GradCheckReport report = check_model_gradients(opts);
  out << "gradcheck variant=" << a.variant << " pooling=" << a.pooling << " dim=" << a.dim
      << " hidden=" << a.hidden << " step=" << a.step << " tol=" << a.tolerance << '\n';
  for (const auto& e : report.entries) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-24s %6zu  %.3e  %s\n", e.name.c_str(), e.count, e.max_rel_error,
                  e.passed ? "ok" : "FAIL");
    out << line;
  }
  out << (report.passed() ? "PASS" : "FAIL") << " max_rel_error=" << report.max_rel_error() << '\n';
  return report.passed() ? kExitOk : kExitFailure;
}

struct DumpArgs {
  ModelArgs model;
  std::string out_dir;
  std::size_t limit = 0;
};

int cmd_attention_dump(DumpArgs& a, std::ostream& out, std::ostream& err) {
  const auto model = load_model(a.model, false, err);
  fs::create_directories(a.out_dir);
  const ModelParams& params = model.checkpoint.params;
  const std::size_t n = a.limit == 0 ? model.examples.size() : std::min(a.limit, model.examples.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ex = model.examples[i];
    const auto pair = embed_pair(ex, model.table);
    const auto result = attend(pair.original, pair.synthetic, params.attention, params.config.pooling);

    const std::size_t l = ex.original.declared_length;
    const std::size_t p = ex.synthetic.declared_length;
    json scores = json::array();
    std::string csv;
    for (std::size_t r = 0; r < p; ++r) csv += "," + csv_field(ex.synthetic.tokens[r]);
    csv += "\n";
    for (std::size_t q = 0; q < l; ++q) {
      json row = json::array();
      csv += csv_field(ex.original.tokens[q]);
      for (std::size_t r = 0; r < p; ++r) {
        row.push_back(result.scores(q, r));
        csv += "," + format_double(result.scores(q, r));
      }
      csv += "\n";
      scores.push_back(std::move(row));
    }
    const json record = {
        {"id", ex.id},
        {"variant", std::string(to_string(params.config.variant))},
        {"pooling", std::string(to_string(params.config.pooling))},
        {"original_tokens", ex.original.tokens},
        {"synthetic_tokens", ex.synthetic.tokens},
        {"C", scores},
        {"A_o", Vec(result.weights.original.begin(), result.weights.original.begin() + static_cast<std::ptrdiff_t>(l))},
        {"A_s", Vec(result.weights.synthetic.begin(), result.weights.synthetic.begin() + static_cast<std::ptrdiff_t>(p))}};
    const std::string stem = file_stem(i, ex.id);
    write_text((fs::path(a.out_dir) / (stem + ".json")).string(), record.dump() + "\n");
    write_text((fs::path(a.out_dir) / (stem + ".csv")).string(), csv);
  }
  out << "wrote " << n << " attention dumps to " << a.out_dir << '\n';
  return kExitOk;
}

int cmd_ingest_stats(const DataArgs& a, std::ostream& out, std::ostream& err) {
  require_file(a.data, "dataset");
  json report;
  std::vector<ExamplePair> examples;
  if (a.format == "clickbait") {
    require_file(a.truth, "truth file");
    auto ingest = ingest_clickbait_challenge(a.data, a.truth);
    report["dropped_missing_truth"] = ingest.missing_truth;
    report["dropped_invalid"] = ingest.invalid;
    examples = std::move(ingest.examples);
  } else {
    examples = load_examples(a, false, err);
  }
  const auto counts = count_classes(examples);
  report["total"] = counts.total();
  report["congruent"] = counts.congruent;
  report["incongruent"] = counts.incongruent;
  report["unlabeled"] = counts.unlabeled;
  report["class_weights"] = balanced_class_weights(counts);
  out << report.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inter-mutual attention matcher for incongruent headline detection", "musem"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
  add_data_options(train_cmd, train_args.data);
  train_cmd->add_option("--validation", train_args.validation, "held-out canonical file (default: 90/10 split)");
  train_cmd->add_option("--embeddings", train_args.embeddings, "GloVe text file")->required();
  train_cmd->add_option("--provider", train_args.provider, "lead:K | file:PATH");
  train_cmd->add_option("--checkpoint", train_args.checkpoint, "output checkpoint")->required();
  train_cmd->add_option("--best-checkpoint", train_args.best_checkpoint, "default: <checkpoint>.best");
  train_cmd->add_option("--log", train_args.log, "default: <checkpoint>.log.jsonl");
  add_config_options(train_cmd, train_args.flags);

  ModelArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "score a labelled dataset (Macro F1, AUC)");
  add_model_options(eval_cmd, eval_args);
  eval_cmd->add_option("--output", eval_args.output, "also write the metrics JSON here");

  ModelArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "per-example incongruence probabilities");
  add_model_options(predict_cmd, predict_args);
  predict_cmd->add_option("--output", predict_args.output, "JSON lines output (default: stdout)");

  GradCheckArgs gc;
  auto* gc_cmd = app.add_subcommand("gradcheck", "compare analytic gradients with finite differences");
  gc_cmd->add_option("--dim", gc.dim);
  gc_cmd->add_option("--hidden", gc.hidden);
  gc_cmd->add_option("--joint-dim,--joint_dim", gc.joint_dim, "default: same as --hidden");
  gc_cmd->add_option("--max-len,--max_len", gc.max_len);
  gc_cmd->add_option("--batch", gc.batch);
  gc_cmd->add_option("--seed", gc.seed);
  gc_cmd->add_option("--step", gc.step);
  gc_cmd->add_option("--tol", gc.tolerance);
  gc_cmd->add_option("--dropout", gc.dropout);
  gc_cmd->add_option("--variant", gc.variant);
  gc_cmd->add_option("--pooling", gc.pooling);
  gc_cmd->add_option("--corrupt-grad", gc.corrupt, "test hook: perturb this tensor's analytic gradient");

  DumpArgs dump;
  auto* dump_cmd = app.add_subcommand("attention-dump", "write score matrices and attention weights");
  add_model_options(dump_cmd, dump.model);
  dump_cmd->add_option("--out-dir", dump.out_dir)->required();
  dump_cmd->add_option("--limit", dump.limit, "only the first N examples");

  DataArgs stats_args;
  auto* stats_cmd = app.add_subcommand("ingest-stats", "class counts and weights of a dataset");
  add_data_options(stats_cmd, stats_args);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_cmd, train_args, out, err);
    if (eval_cmd->parsed()) return cmd_eval(eval_args, out, err);
    if (predict_cmd->parsed()) return cmd_predict(predict_args, out, err);
    if (gc_cmd->parsed()) return cmd_gradcheck(gc, out);
    if (dump_cmd->parsed()) return cmd_attention_dump(dump, out, err);
    if (stats_cmd->parsed()) return cmd_ingest_stats(stats_args, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitInput;
}

}  // namespace musem
