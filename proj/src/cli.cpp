#include "dstrc/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "dstrc/error.hpp"
#include "dstrc/examplegen.hpp"
#include "dstrc/external_reader.hpp"
#include "dstrc/ingest.hpp"
#include "dstrc/metrics.hpp"
#include "dstrc/multiwoz.hpp"
#include "dstrc/parallel.hpp"
#include "dstrc/readers.hpp"
#include "dstrc/taxonomy.hpp"
#include "dstrc/tracker.hpp"

namespace dstrc::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kOracleWatermark = "oracle: gold labels read back for verification, not a model result";

struct CorpusArgs {
  std::string dialogues;
  std::string ontology;
  std::string aliases;
  std::string questions;
  std::vector<std::string> domains;
  double fraction = 1.0;
  std::uint64_t seed = 0;
  std::string specs;
  std::size_t num_categorical = 15;
  double extractive_threshold = 0.80;
};

struct ReaderArgs {
  std::string reader = "exact-match";
  std::string endpoint;
  int timeout_ms = 30000;
  std::size_t max_inflight = 16;
  bool allow_oracle = false;
};

struct DecodeArgs {
  std::size_t max_span_len = 10;
  double null_threshold = 0.0;
  double similarity_cutoff = 0.6;
  std::vector<std::string> ablate;
  bool partial = false;
  bool carryover = false;
};

struct Loaded {
  DialogueCorpus corpus;
  std::vector<SlotSpec> specs;
};

void add_corpus_options(CLI::App& app, CorpusArgs& a, bool with_sampling = true) {
  app.add_option("--dialogues", a.dialogues, "Dialogue file (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--ontology", a.ontology, "Ontology file (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--aliases", a.aliases, "Alias map (JSON)")->check(CLI::ExistingFile);
  app.add_option("--questions", a.questions, "Question template table (JSON)")->check(CLI::ExistingFile);
  app.add_option("--domains", a.domains, "Keep dialogues touching these domains; restricts the evaluated slots")
      ->delimiter(',');
  app.add_option("--specs", a.specs, "Slot classification written by `analyze --specs-out`")
      ->check(CLI::ExistingFile);
  app.add_option("--num-categorical", a.num_categorical, "Slots with fewest values treated as categorical");
  app.add_option("--extractive-threshold", a.extractive_threshold, "Exact-match rate marking a slot extractive");
  if (with_sampling) {
    app.add_option("--fraction", a.fraction, "Few-shot fraction of dialogues to keep, in (0, 1]");
    app.add_option("--seed", a.seed, "Seed for sampling and the random reader");
  }
}

void add_reader_options(CLI::App& app, ReaderArgs& r) {
  app.add_option("--reader", r.reader, "oracle | exact-match | random | external")
      ->check(CLI::IsMember({"oracle", "exact-match", "random", "external"}));
  app.add_option("--endpoint", r.endpoint, "exec:<command> or tcp:<host>:<port> (external reader)");
  app.add_option("--timeout-ms", r.timeout_ms, "Per-request timeout for the external reader");
  app.add_option("--max-inflight", r.max_inflight, "Pipelined requests to the external reader");
  app.add_flag("--allow-oracle", r.allow_oracle, "Permit the oracle reader (verification only)");
}

void add_decode_options(CLI::App& app, DecodeArgs& d) {
  app.add_option("--max-span-len", d.max_span_len, "Longest decoded span in tokens");
  app.add_option("--null-threshold", d.null_threshold, "Margin added to the no-answer score");
  app.add_option("--similarity-cutoff", d.similarity_cutoff, "Canonicalization similarity cutoff");
  app.add_option("--ablate", d.ablate, "no-canonicalization | no-categorical-model")
      ->check(CLI::IsMember({"no-canonicalization", "no-categorical-model"}))
      ->delimiter(',');
  app.add_flag("--partial", d.partial, "Tolerate per-slot reader failures");
  app.add_flag("--carryover", d.carryover, "Keep the previous value when a slot decodes to None");
}

std::optional<std::set<std::string>> domain_filter(const CorpusArgs& a) {
  if (a.domains.empty()) return std::nullopt;
  return std::set<std::string>(a.domains.begin(), a.domains.end());
}

Loaded load(const CorpusArgs& a, unsigned jobs) {
  LoadOptions opts;
  opts.filter_domains = domain_filter(a);
  if (!a.aliases.empty()) opts.alias_file = a.aliases;
  Loaded out;
  out.corpus = load_corpus(a.dialogues, a.ontology, opts);

  if (!a.specs.empty()) {
    out.specs = specs_from_json(read_json_file(a.specs));
  } else {
    const QuestionTable questions = a.questions.empty() ? builtin_questions() : load_questions(a.questions);
    const auto stats = compute_slot_stats(out.corpus, jobs);
    out.specs = classify_slots(stats, out.corpus.ontology, questions,
                               ClassifyOptions{a.num_categorical, a.extractive_threshold});
  }
  if (auto filter = domain_filter(a)) {
    std::erase_if(out.specs, [&](const SlotSpec& s) { return !filter->contains(s.slot.domain()); });
  }
  if (a.fraction != 1.0) out.corpus = subsample_fewshot(out.corpus, a.fraction, a.seed);
  out.corpus.slot_specs = out.specs;
  return out;
}

TrackOptions track_options(const DecodeArgs& d, unsigned jobs) {
  TrackOptions t;
  t.decode.max_span_len = d.max_span_len;
  t.decode.null_threshold = d.null_threshold;
  t.decode.similarity_cutoff = d.similarity_cutoff;
  for (const auto& a : d.ablate) {
    if (a == "no-canonicalization") t.decode.canonicalize = false;
    if (a == "no-categorical-model") t.use_categorical_model = false;
  }
  t.decode.validate();
  t.partial = d.partial;
  t.carryover = d.carryover;
  t.jobs = jobs;
  return t;
}

std::unique_ptr<Reader> make_reader(const ReaderArgs& r, const Loaded& loaded, std::uint64_t seed) {
  if ((r.reader == "external") != !r.endpoint.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "--endpoint is required with, and only with, --reader external");
  }
  if (r.reader == "oracle") {
    if (!r.allow_oracle) {
      throw Error(ErrorCode::kInvalidConfig, "the oracle reader reads gold labels; pass --allow-oracle to run it");
    }
    return std::make_unique<OracleReader>(loaded.corpus);
  }
  if (r.reader == "exact-match") return std::make_unique<ExactMatchReader>(loaded.corpus.ontology);
  if (r.reader == "random") return std::make_unique<RandomReader>(seed);
  return std::make_unique<ExternalReader>(
      ExternalReaderOptions{r.endpoint, std::chrono::milliseconds(r.timeout_ms), r.max_inflight});
}

ordered_json run_config(const std::string& command, const CorpusArgs& a, const ReaderArgs* r, const DecodeArgs* d,
                        const TrackOptions* t) {
  ordered_json c;
  c["command"] = command;
  c["dialogues"] = a.dialogues;
  c["ontology"] = a.ontology;
  c["aliases"] = a.aliases;
  c["questions"] = a.questions.empty() ? "builtin" : a.questions;
  c["specs"] = a.specs.empty() ? "computed" : a.specs;
  c["domains"] = a.domains;
  c["fraction"] = a.fraction;
  c["seed"] = a.seed;
  c["num_categorical"] = a.num_categorical;
  c["extractive_threshold"] = a.extractive_threshold;
  if (r) {
    c["reader"] = r->reader;
    c["endpoint"] = r->endpoint;
    if (r->reader == "oracle") c["watermark"] = kOracleWatermark;
  }
  if (d && t) {
    c["decode"] = to_json(t->decode);
    c["ablate"] = d->ablate;
    c["partial"] = d->partial;
    c["carryover"] = d->carryover;
  }
  return c;
}

template <typename Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::kInvalidConfig, "cannot write " + path);
  fn(file);
  if (!file) throw Error(ErrorCode::kInvalidConfig, "write failed for " + path);
}

void configure_logging(std::ostream& err) {
  (void)err;
  auto logger = spdlog::get("dstrc");
  if (!logger) {
    logger = spdlog::stderr_color_mt("dstrc");
    spdlog::set_default_logger(logger);
  }
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("DSTRC_LOG")) level = spdlog::level::from_str(env);
  spdlog::set_level(level);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging(err);
  CLI::App app{"Dialogue state tracking as reading comprehension", "dstrc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dstrc 0.1.0");
  unsigned jobs = default_jobs();

  // convert
  auto* convert = app.add_subcommand("convert", "Convert raw MultiWOZ 2.0/2.1 JSON to the dialogue schema");
  std::string raw_path, convert_out, raw_ontology, ontology_out, include_ids;
  std::vector<std::string> exclude_ids;
  convert->add_option("--raw", raw_path, "Raw MultiWOZ data.json")->required()->check(CLI::ExistingFile);
  convert->add_option("--out", convert_out, "Output dialogue file")->required();
  convert->add_option("--ids", include_ids, "Keep only ids listed in this file")->check(CLI::ExistingFile);
  convert->add_option("--exclude-ids", exclude_ids, "Drop ids listed in these files")->check(CLI::ExistingFile);
  convert->add_option("--raw-ontology", raw_ontology, "Raw MultiWOZ ontology.json")->check(CLI::ExistingFile);
  convert->add_option("--ontology-out", ontology_out,
                      "Write the ontology (from --raw-ontology, else derived from the dialogues)");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Slot statistics and extractive/categorical classification");
  CorpusArgs analyze_args;
  std::string analyze_out, specs_out;
  add_corpus_options(*analyze, analyze_args, false);
  analyze->add_option("--out", analyze_out, "CSV output (default stdout)");
  analyze->add_option("--specs-out", specs_out, "Write the slot classification as JSON");
  analyze->add_option("--jobs", jobs, "Worker threads");

  // sample
  auto* sample = app.add_subcommand("sample", "Print the dialogue ids a few-shot fraction selects");
  CorpusArgs sample_args;
  std::string sample_out;
  add_corpus_options(*sample, sample_args);
  sample->add_option("--out", sample_out, "Id list output (default stdout)");

  // generate
  auto* generate = app.add_subcommand("generate", "Emit span / multiple-choice examples as JSONL");
  CorpusArgs gen_args;
  std::string gen_mode = "both", gen_out, gen_report;
  add_corpus_options(*generate, gen_args);
  generate->add_option("--mode", gen_mode, "span | choice | both")->check(CLI::IsMember({"span", "choice", "both"}));
  generate->add_option("--out", gen_out, "JSONL output (default stdout)");
  generate->add_option("--report", gen_report, "Generation report (JSON)");
  generate->add_option("--jobs", jobs, "Worker threads");

  // track
  auto* track = app.add_subcommand("track", "Predict dialogue states turn by turn");
  CorpusArgs track_args;
  ReaderArgs track_reader;
  DecodeArgs track_decode;
  std::string track_out;
  add_corpus_options(*track, track_args);
  add_reader_options(*track, track_reader);
  add_decode_options(*track, track_decode);
  track->add_option("--out", track_out, "Predictions JSONL (default stdout)");
  track->add_option("--jobs", jobs, "Worker threads");

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions (or track first) and write a report");
  CorpusArgs eval_args;
  ReaderArgs eval_reader;
  DecodeArgs eval_decode;
  std::string eval_predictions, eval_out, eval_csv, eval_slot_csv;
  add_corpus_options(*evaluate_cmd, eval_args);
  add_reader_options(*evaluate_cmd, eval_reader);
  add_decode_options(*evaluate_cmd, eval_decode);
  evaluate_cmd->add_option("--predictions", eval_predictions, "Predictions JSONL from `track`")
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--out", eval_out, "Report JSON (default stdout)");
  evaluate_cmd->add_option("--csv", eval_csv, "Summary CSV");
  evaluate_cmd->add_option("--slot-csv", eval_slot_csv, "Per-slot accuracy CSV");
  evaluate_cmd->add_option("--jobs", jobs, "Worker threads");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? 0 : 2;
  }

  try {
    if (convert->parsed()) {
      json raw;
      {
        std::ifstream in(raw_path, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        const std::string text = buf.str();
        if (text.find_first_not_of(" \t\r\n") != std::string::npos) raw = read_json_file(raw_path);
      }
      ConvertOptions copts;
      if (!include_ids.empty()) copts.include_ids = read_id_list(include_ids);
      for (const auto& f : exclude_ids) {
        auto ids = read_id_list(f);
        copts.exclude_ids.insert(ids.begin(), ids.end());
      }
      const ordered_json dialogues = convert_multiwoz(raw, copts);
      with_output(convert_out, out, [&](std::ostream& o) {
        o << "[";
        for (std::size_t i = 0; i < dialogues.size(); ++i) o << (i ? ",\n" : "\n") << dialogues[i].dump();
        o << (dialogues.empty() ? "]\n" : "\n]\n");
      });
      if (!ontology_out.empty()) {
        const ordered_json ontology = raw_ontology.empty() ? derive_ontology(dialogues)
                                                           : convert_multiwoz_ontology(read_json_file(raw_ontology));
        with_output(ontology_out, out, [&](std::ostream& o) { o << ontology.dump(2) << '\n'; });
      }
      spdlog::info("converted {} dialogues", dialogues.size());
      return 0;
    }

    if (analyze->parsed()) {
      LoadOptions opts;
      opts.filter_domains = domain_filter(analyze_args);
      if (!analyze_args.aliases.empty()) opts.alias_file = analyze_args.aliases;
      const DialogueCorpus corpus = load_corpus(analyze_args.dialogues, analyze_args.ontology, opts);
      const QuestionTable questions =
          analyze_args.questions.empty() ? builtin_questions() : load_questions(analyze_args.questions);
      const auto stats = compute_slot_stats(corpus, jobs);
      const auto specs = classify_slots(stats, corpus.ontology, questions,
                                        ClassifyOptions{analyze_args.num_categorical, analyze_args.extractive_threshold});
      with_output(analyze_out, out, [&](std::ostream& o) { write_stats_csv(o, stats, specs); });
      if (!specs_out.empty()) {
        with_output(specs_out, out, [&](std::ostream& o) { o << specs_to_json(specs).dump(2) << '\n'; });
      }
      return 0;
    }

    if (sample->parsed()) {
      const Loaded loaded = load(sample_args, 1);
      with_output(sample_out, out, [&](std::ostream& o) {
        for (const auto& d : loaded.corpus.dialogues) o << d.id << '\n';
      });
      return 0;
    }

    if (generate->parsed()) {
      const Loaded loaded = load(gen_args, jobs);
      const GenerationMode mode = gen_mode == "span"     ? GenerationMode::kSpan
                                  : gen_mode == "choice" ? GenerationMode::kChoice
                                                         : GenerationMode::kBoth;
      GenerationReport report;
      with_output(gen_out, out, [&](std::ostream& o) {
        report = generate_corpus(
            loaded.corpus, loaded.specs, mode,
            [&](const RCExample& ex) {
              std::visit([&](const auto& e) { o << to_json(e).dump(-1, ' ', false, json::error_handler_t::replace) << '\n'; },
                         ex);
            },
            jobs);
      });
      if (!gen_report.empty()) {
        ordered_json r;
        r["report"] = to_json(report);
        r["config"] = run_config("generate", gen_args, nullptr, nullptr, nullptr);
        r["config"]["mode"] = gen_mode;
        with_output(gen_report, out, [&](std::ostream& o) { o << r.dump(2) << '\n'; });
      }
      spdlog::info("generated {} examples ({} unspannable)", report.total, report.unspannable);
      return 0;
    }

    if (track->parsed()) {
      const Loaded loaded = load(track_args, jobs);
      const TrackOptions topts = track_options(track_decode, jobs);
      auto reader = make_reader(track_reader, loaded, track_args.seed);
      const auto predictions = track_corpus(loaded.corpus, loaded.specs, {reader.get(), reader.get()}, topts);
      with_output(track_out, out, [&](std::ostream& o) {
        for (const auto& p : predictions) {
          json line = to_json(p);
          line["reader"] = track_reader.reader;
          o << line.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
        }
      });
      return 0;
    }

    if (evaluate_cmd->parsed()) {
      const Loaded loaded = load(eval_args, jobs);
      const TrackOptions topts = track_options(eval_decode, jobs);
      std::vector<StatePrediction> predictions;
      bool oracle_predictions = eval_reader.reader == "oracle";
      ordered_json config = run_config("evaluate", eval_args, eval_predictions.empty() ? &eval_reader : nullptr,
                                       &eval_decode, &topts);
      if (!eval_predictions.empty()) {
        std::ifstream in(eval_predictions);
        for (std::string line; std::getline(in, line);) {
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          json doc = json::parse(line, nullptr, false);
          if (doc.is_discarded()) throw Error(ErrorCode::kMalformedCorpus, eval_predictions + ": bad JSONL line");
          predictions.push_back(prediction_from_json(doc));
          if (doc.value("reader", "") == "oracle") oracle_predictions = true;
        }
        config["predictions"] = eval_predictions;
      } else {
        auto reader = make_reader(eval_reader, loaded, eval_args.seed);
        predictions = track_corpus(loaded.corpus, loaded.specs, {reader.get(), reader.get()}, topts);
      }
      EvalReport report = evaluate(predictions, loaded.corpus, loaded.specs, topts);
      ordered_json doc;
      if (oracle_predictions) doc["watermark"] = kOracleWatermark;
      doc.update(to_json(report));
      doc["config"] = config;
      with_output(eval_out, out, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
      if (!eval_csv.empty()) with_output(eval_csv, out, [&](std::ostream& o) { write_summary_csv(o, report); });
      if (!eval_slot_csv.empty()) with_output(eval_slot_csv, out, [&](std::ostream& o) { write_slot_csv(o, report); });
      return 0;
    }
  } catch (const Error& e) {
    err << "dstrc: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "dstrc: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace dstrc::cli
