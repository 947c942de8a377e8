#ifndef CGEC_INSTRUCTION_HPP_
#define CGEC_INSTRUCTION_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "cgec/corpus.hpp"
#include "json.hpp"

namespace cgec {

// Four-component instruction: task prefix, task description, input
// (ungrammatical sentence) and output (grammatical sentence), arranged by
// `layout` with {prefix}, {description}, {input} and {output} slots.
struct InstructionTemplate {
  std::string task_prefix;
  std::string task_description;
  std::string layout;

  static const InstructionTemplate& standard();
  // JSON object with the three fields; missing fields keep the defaults.
  static InstructionTemplate from_file(const std::filesystem::path& path);

  // Each slot exactly once and {output} at the very end; throws ConfigError.
  void validate() const;
};

inline constexpr std::string_view kDefaultTaskPrefix =
    "A chat between a curious human and an artificial intelligence assistant. "
    "The assistant gives helpful, detailed, and polite answers to the human's "
    "questions.";
inline constexpr std::string_view kDefaultTaskDescription =
    "Evaluate this sentence for grammar mistake";
inline constexpr std::string_view kDefaultLayout =
    "{prefix}\n\nHuman: {description} {input}\nAssistant: {output}";

struct InstructionRecord {
  std::string id;
  // Everything before the output slot, trailing whitespace removed.
  std::string prompt;
  // The grammatical sentence.
  std::string completion;
  std::string pair_id;

  bool operator==(const InstructionRecord&) const = default;
};

// The fully substituted layout.
std::string render_text(const ParallelPair& pair, const InstructionTemplate& tmpl);

InstructionRecord render_instruction(const ParallelPair& pair,
                                     const InstructionTemplate& tmpl);

enum class RecordFormat { PromptCompletion, Conversation };

// "prompt_completion_jsonl" / "conversation_jsonl" (the "_jsonl" suffix is
// optional).
std::optional<RecordFormat> parse_record_format(std::string_view name);

// PromptCompletion: {id, prompt, completion, meta: {pair_id}}.
// Conversation: {id, messages: [system, user, assistant], meta: {pair_id}}
// where the user turn is "<description> <input>".
nlohmann::ordered_json record_to_json(const ParallelPair& pair,
                                      const InstructionTemplate& tmpl,
                                      RecordFormat format);

std::string serialize_dataset(std::span<const ParallelPair> pairs,
                              const InstructionTemplate& tmpl, RecordFormat format);

// Writes one JSONL record per pair; returns the number written.
std::size_t emit_dataset(std::span<const ParallelPair> pairs,
                         const InstructionTemplate& tmpl,
                         const std::filesystem::path& path, RecordFormat format);

}  // namespace cgec

#endif  // CGEC_INSTRUCTION_HPP_
