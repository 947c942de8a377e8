#include "cgec/cli.hpp"

#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "cgec/augment.hpp"
#include "cgec/clue.hpp"
#include "cgec/corpus.hpp"
#include "cgec/edit.hpp"
#include "cgec/error.hpp"
#include "cgec/fileio.hpp"
#include "cgec/instruction.hpp"
#include "cgec/llm.hpp"
#include "cgec/m2.hpp"

namespace cgec::cli {
namespace {

// Every flag of every subcommand. Flags are checked before any work starts.
struct RunConfig {
  std::string config_path;

  std::string pairs_path;
  std::string output_path;
  std::string format;
  std::string input_format;

  std::string rules_path;
  std::string sentences_path;
  std::size_t max_per_rule = std::numeric_limits<std::size_t>::max();

  std::string clues_path;
  std::string error_type;
  std::string clue_a;
  std::string clue_b;
  std::size_t n_samples = 10;
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = std::string(kDefaultModel);
  double temperature = 1.0;
  int max_tokens = 1024;
  std::string cache_dir = ".cgec-cache";
  std::size_t concurrency = 4;
  std::string prompt_template_path;
  int max_attempts = 5;
  long initial_backoff_ms = 500;

  std::string lexicon_path;
  std::size_t factor = 1;
  std::uint64_t seed = kDefaultSeed;

  std::string template_path;

  std::string source_path;
  std::string target_path;
  std::string hypothesis_path;
  std::string gold_path;
  std::string granularity = "char";
  int annotator = 0;
  unsigned threads = 1;
  bool json = false;
};

std::map<std::string, std::string> read_config(const std::string& path) {
  std::map<std::string, std::string> values;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(i + 1, "expected key=value", path);
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    values[std::move(key)] = std::move(value);
  }
  return values;
}

// Appends config defaults for options of the chosen subcommand that are not
// given on the command line. Flags win over the config file.
std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].starts_with("--config=")) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) return args;
  CLI::App* sub = nullptr;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      ++i;
      continue;
    }
    if (!args[i].starts_with("-")) {
      sub = app.get_subcommand_no_throw(args[i]);
      break;
    }
  }
  if (!sub) return args;
  for (const auto& [key, value] : read_config(config_path)) {
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!opt) continue;
    bool present = false;
    for (const auto& a : args) {
      if (a == flag || a.starts_with(flag + "=")) present = true;
    }
    if (present) continue;
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1") args.push_back(flag);
    } else {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

PairFormat resolve_format(const std::string& name, const std::string& path) {
  if (name.empty()) return pair_format_for(path);
  auto format = parse_pair_format(name);
  if (!format) throw ValidationError("unknown pair format '" + name + "'");
  return *format;
}

std::vector<std::string> non_blank_lines(const std::string& path) {
  std::vector<std::string> out;
  for (auto& line : read_lines(path)) {
    if (!trim(line).empty()) out.emplace_back(trim(line));
  }
  return out;
}

Granularity resolve_granularity(const RunConfig& cfg) {
  if (cfg.granularity == "char") return Granularity::chars();
  if (cfg.granularity != "word") {
    throw ValidationError("granularity must be 'char' or 'word'");
  }
  if (cfg.lexicon_path.empty()) return Granularity::presegmented_words();
  return Granularity::words(
      std::make_shared<const Lexicon>(Lexicon::from_file(cfg.lexicon_path)));
}

std::string join_tokens(const std::vector<Token>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t.surface;
  }
  return out;
}

std::string without_spaces(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c != ' ') out.push_back(c);
  }
  return out;
}

int cmd_stats(const RunConfig& cfg, std::ostream& out) {
  const auto pairs = load_pairs(cfg.pairs_path, resolve_format(cfg.format, cfg.pairs_path));
  const auto stats = compute_stats(pairs);
  if (cfg.json) {
    out << stats_to_json(stats).dump(2) << "\n";
  } else {
    out << format_stats_table(stats);
  }
  return kOk;
}

int cmd_synthesize(const RunConfig& cfg, std::ostream& err) {
  const auto rules = load_rules(cfg.rules_path);
  const auto sentences = non_blank_lines(cfg.sentences_path);
  const auto pairs = synthesize_corpus(rules, sentences, cfg.max_per_rule);
  save_pairs(pairs, cfg.output_path, resolve_format(cfg.format, cfg.output_path));
  err << "synthesized " << pairs.size() << " pairs from " << sentences.size()
      << " sentences with " << rules.size() << " rules\n";
  return kOk;
}

struct ClueJob {
  ErrorCode type;
  CluePair clues;
};

std::vector<ClueJob> clue_jobs(const RunConfig& cfg) {
  std::vector<ClueJob> jobs;
  auto add = [&jobs](std::string_view type, std::string a, std::string b) {
    const auto code = parse_error_code(trim(type));
    if (!code) throw ValidationError("unknown error type '" + std::string(type) + "'");
    jobs.push_back({*code, {std::move(a), std::move(b)}});
  };
  if (!cfg.clues_path.empty()) {
    const auto lines = read_lines(cfg.clues_path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (trim(lines[i]).empty()) continue;
      std::vector<std::string> fields;
      std::istringstream in(lines[i]);
      for (std::string f; std::getline(in, f, '\t');) fields.emplace_back(trim(f));
      if (fields.size() != 3) {
        throw ParseError(i + 1, "expected 'TYPE<TAB>clue_a<TAB>clue_b'", cfg.clues_path);
      }
      add(fields[0], fields[1], fields[2]);
    }
  }
  if (!cfg.clue_a.empty() || !cfg.clue_b.empty() || !cfg.error_type.empty()) {
    if (cfg.clue_a.empty() || cfg.clue_b.empty() || cfg.error_type.empty()) {
      throw ValidationError("--error-type, --clue-a and --clue-b go together");
    }
    add(cfg.error_type, cfg.clue_a, cfg.clue_b);
  }
  if (jobs.empty()) throw ValidationError("give --clues or --error-type/--clue-a/--clue-b");
  return jobs;
}

int cmd_generate(const RunConfig& cfg, std::ostream& err) {
  const auto rules = load_rules(cfg.rules_path);
  const auto jobs = clue_jobs(cfg);
  const PromptTemplate prompt_template = cfg.prompt_template_path.empty()
                                             ? PromptTemplate::standard()
                                             : PromptTemplate::from_file(cfg.prompt_template_path);
  std::vector<GenerationRequest> requests;
  for (const auto& job : jobs) {
    if (!find_rule_for_clues(rules, job.clues)) {
      throw ValidationError("no repair rule matches the clue pair (" + job.clues.first +
                            ", " + job.clues.second + ")");
    }
    GenerationRequest request;
    request.prompt = build_prompt(job.type, job.clues, cfg.n_samples, prompt_template);
    request.model_name = cfg.model;
    request.temperature = cfg.temperature;
    request.max_tokens = cfg.max_tokens;
    request.validate();
    requests.push_back(std::move(request));
  }
  ClientOptions options;
  options.retry.max_attempts = cfg.max_attempts;
  options.retry.initial_backoff = std::chrono::milliseconds(cfg.initial_backoff_ms);
  const auto results = generate_batch(requests, cfg.endpoint, Credentials::from_env(),
                                      cfg.cache_dir, cfg.concurrency, options);
  std::vector<ParallelPair> pairs;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].cache_hit) ++hits;
    for (auto& pair : validate_generated(results[i].parsed_sentences, jobs[i].clues, rules)) {
      pair.id = "gen-" + ordinal_id(pairs.size() + 1);
      pairs.push_back(std::move(pair));
    }
  }
  save_pairs(pairs, cfg.output_path, resolve_format(cfg.format, cfg.output_path));
  err << "generated " << pairs.size() << " pairs from " << requests.size()
      << " requests (" << hits << " cache hits)\n";
  return kOk;
}

int cmd_augment(const RunConfig& cfg, std::ostream& err) {
  const auto pairs = load_pairs(cfg.pairs_path,
                                resolve_format(cfg.input_format, cfg.pairs_path));
  const auto lexicon = EntityLexicon::from_file(cfg.lexicon_path);
  const auto augmented = augment_corpus(pairs, lexicon, cfg.factor, cfg.seed);
  save_pairs(augmented, cfg.output_path, resolve_format(cfg.format, cfg.output_path));
  err << "augmented " << pairs.size() << " pairs into " << augmented.size()
      << " variants (seed " << cfg.seed << ")\n";
  return kOk;
}

int cmd_build_instructions(const RunConfig& cfg, std::ostream& err) {
  const auto pairs = load_pairs(cfg.pairs_path,
                                resolve_format(cfg.input_format, cfg.pairs_path));
  const auto format = parse_record_format(cfg.format.empty() ? "prompt_completion_jsonl"
                                                             : cfg.format);
  if (!format) throw ValidationError("unknown record format '" + cfg.format + "'");
  const InstructionTemplate tmpl = cfg.template_path.empty()
                                       ? InstructionTemplate::standard()
                                       : InstructionTemplate::from_file(cfg.template_path);
  const std::size_t written = emit_dataset(pairs, tmpl, cfg.output_path, *format);
  err << "wrote " << written << " instruction records\n";
  return kOk;
}

int cmd_extract_edits(const RunConfig& cfg, std::ostream& out) {
  const Granularity granularity = resolve_granularity(cfg);
  const auto sources = non_blank_lines(cfg.source_path);
  const auto targets = non_blank_lines(cfg.target_path);
  if (sources.size() != targets.size()) {
    throw ValidationError("source and target files differ in length: " +
                          std::to_string(sources.size()) + " vs " +
                          std::to_string(targets.size()));
  }
  std::vector<M2Sentence> sentences;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto tokens = segment(sources[i], granularity);
    M2Sentence sentence;
    sentence.id = sentence_id_for(i);
    sentence.source = granularity.mode == GranularityMode::Char ? sources[i]
                                                                : join_tokens(tokens);
    GoldAnnotation annotation{sentence.id, cfg.annotator, {}};
    for (auto& edit : extract_edits(sources[i], targets[i], granularity)) {
      annotation.edits.push_back({std::move(edit), {}});
    }
    sentence.annotations.push_back(std::move(annotation));
    sentences.push_back(std::move(sentence));
  }
  const std::string m2 = write_m2(sentences);
  if (cfg.output_path.empty()) {
    out << m2;
  } else {
    write_file_atomic(cfg.output_path, m2);
  }
  return kOk;
}

int cmd_score(const RunConfig& cfg, std::ostream& out) {
  const Granularity requested = resolve_granularity(cfg);
  const auto gold = load_m2(cfg.gold_path, requested.mode);
  auto hypotheses = read_lines(cfg.hypothesis_path);
  while (!hypotheses.empty() && hypotheses.back().empty()) hypotheses.pop_back();
  if (hypotheses.size() != gold.size()) {
    throw ValidationError("hypothesis file has " + std::to_string(hypotheses.size()) +
                          " lines but the gold file has " + std::to_string(gold.size()) +
                          " sentences");
  }
  Granularity granularity = requested;
  if (requested.mode == GranularityMode::Word) {
    // Gold S lines are pre-segmented; bring hypotheses to the same form.
    if (requested.lexicon) {
      for (auto& h : hypotheses) h = join_tokens(segment(h, requested));
    }
    granularity = Granularity::presegmented_words();
  }
  if (!cfg.source_path.empty()) {
    auto sources = read_lines(cfg.source_path);
    while (!sources.empty() && sources.back().empty()) sources.pop_back();
    if (sources.size() != gold.size()) {
      throw ValidationError("source file length differs from the gold file");
    }
    for (std::size_t i = 0; i < sources.size(); ++i) {
      const bool same = granularity.mode == GranularityMode::Char
                            ? sources[i] == gold[i].source
                            : without_spaces(sources[i]) == without_spaces(gold[i].source);
      if (!same) {
        throw ValidationError("source line " + std::to_string(i + 1) +
                              " does not match the gold S line");
      }
    }
  }
  ScoreOptions options;
  options.threads = cfg.threads;
  const auto report = score_m2(gold, hypotheses, granularity, options);
  if (cfg.json) {
    out << report_to_json(report).dump(2) << "\n";
  } else {
    out << format_report(report);
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Chinese grammatical error correction data and evaluation toolkit", "cgec"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", cfg.config_path,
                 "Flat key=value file supplying defaults; flags override it");

  auto* stats = app.add_subcommand("stats", "Per-error-type counts and percentages");
  stats->add_option("--pairs", cfg.pairs_path, "Pair file")->required();
  stats->add_option("--format", cfg.format, "jsonl or tsv (default: by extension)");
  stats->add_flag("--json", cfg.json, "Emit JSON");

  auto* synthesize = app.add_subcommand("synthesize", "Corrupt seed sentences with clue rules");
  synthesize->add_option("--rules", cfg.rules_path, "Rule file (JSONL)")->required();
  synthesize->add_option("--sentences", cfg.sentences_path, "Seed sentences, one per line")
      ->required();
  synthesize->add_option("--output", cfg.output_path, "Output pair file")->required();
  synthesize->add_option("--max-per-rule", cfg.max_per_rule, "Cap on pairs per rule");
  synthesize->add_option("--format", cfg.format, "jsonl or tsv (default: by extension)");

  auto* generate = app.add_subcommand("generate", "Clue-guided sentence generation via a chat API");
  generate->add_option("--rules", cfg.rules_path, "Rule file used for repair")->required();
  generate->add_option("--clues", cfg.clues_path, "TSV of TYPE, clue_a, clue_b");
  generate->add_option("--error-type", cfg.error_type, "RC, SC or IC");
  generate->add_option("--clue-a", cfg.clue_a, "First clue");
  generate->add_option("--clue-b", cfg.clue_b, "Second clue");
  generate->add_option("--n", cfg.n_samples, "Sentences requested per prompt")
      ->check(CLI::PositiveNumber);
  generate->add_option("--endpoint", cfg.endpoint, "Chat-completion base URL");
  generate->add_option("--model", cfg.model, "Model name");
  generate->add_option("--temperature", cfg.temperature, "Sampling temperature")
      ->check(CLI::NonNegativeNumber);
  generate->add_option("--max-tokens", cfg.max_tokens, "Reply token limit")
      ->check(CLI::PositiveNumber);
  generate->add_option("--cache-dir", cfg.cache_dir, "Response cache directory");
  generate->add_option("--concurrency", cfg.concurrency, "Maximum requests in flight")
      ->check(CLI::PositiveNumber);
  generate->add_option("--prompt-template", cfg.prompt_template_path,
                       "Prompt template with {clue_a} {clue_b} {error_type} {n}");
  generate->add_option("--max-attempts", cfg.max_attempts, "HTTP attempts per request")
      ->check(CLI::PositiveNumber);
  generate->add_option("--initial-backoff-ms", cfg.initial_backoff_ms,
                       "Delay before the first retry");
  generate->add_option("--output", cfg.output_path, "Output pair file")->required();
  generate->add_option("--format", cfg.format, "jsonl or tsv (default: by extension)");

  auto* augment = app.add_subcommand("augment", "Error-invariant entity substitution");
  augment->add_option("--pairs", cfg.pairs_path, "Input pair file")->required();
  augment->add_option("--lexicon", cfg.lexicon_path, "Entity lexicon (TSV)")->required();
  augment->add_option("--output", cfg.output_path, "Output pair file")->required();
  augment->add_option("--factor", cfg.factor, "Variants per pair")->check(CLI::PositiveNumber);
  augment->add_option("--seed", cfg.seed, "Random seed");
  augment->add_option("--format", cfg.format, "Output format (default: by extension)");
  augment->add_option("--input-format", cfg.input_format, "Input format (default: by extension)");

  auto* build = app.add_subcommand("build-instructions", "Render pairs as instruction records");
  build->add_option("--pairs", cfg.pairs_path, "Input pair file")->required();
  build->add_option("--output", cfg.output_path, "Output JSONL")->required();
  build->add_option("--format", cfg.format, "prompt_completion_jsonl or conversation_jsonl");
  build->add_option("--template", cfg.template_path, "Instruction template (JSON)");
  build->add_option("--input-format", cfg.input_format, "Input format (default: by extension)");

  auto* extract = app.add_subcommand("extract-edits", "Write M2 edits between two aligned files");
  extract->add_option("--source", cfg.source_path, "Source sentences")->required();
  extract->add_option("--target", cfg.target_path, "Target sentences")->required();
  extract->add_option("--granularity", cfg.granularity, "char or word");
  extract->add_option("--lexicon", cfg.lexicon_path, "Word list for word granularity");
  extract->add_option("--annotator", cfg.annotator, "Annotator id for the A lines")
      ->check(CLI::NonNegativeNumber);
  extract->add_option("--output", cfg.output_path, "M2 output (default: stdout)");

  auto* score = app.add_subcommand("score", "MaxMatch precision, recall and F0.5");
  score->add_option("--gold", cfg.gold_path, "Gold M2 file")->required();
  score->add_option("--hypothesis", cfg.hypothesis_path, "System output, one per line")
      ->required();
  score->add_option("--source", cfg.source_path, "Source sentences (checked against S lines)");
  score->add_option("--granularity", cfg.granularity, "char or word");
  score->add_option("--lexicon", cfg.lexicon_path, "Word list for unsegmented hypotheses");
  score->add_option("--threads", cfg.threads, "Extraction threads")->check(CLI::PositiveNumber);
  score->add_flag("--json", cfg.json, "Emit JSON");

  try {
    std::vector<std::string> merged = merge_config(app, args);
    std::reverse(merged.begin(), merged.end());
    app.parse(merged);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kIoOrNetwork;
  }

  try {
    if (*stats) return cmd_stats(cfg, out);
    if (*synthesize) return cmd_synthesize(cfg, err);
    if (*generate) return cmd_generate(cfg, err);
    if (*augment) return cmd_augment(cfg, err);
    if (*build) return cmd_build_instructions(cfg, err);
    if (*extract) return cmd_extract_edits(cfg, out);
    if (*score) return cmd_score(cfg, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kIoOrNetwork;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoOrNetwork;
  }
  return kValidation;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace cgec::cli
