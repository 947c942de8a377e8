#include "cgec/instruction.hpp"

#include "cgec/error.hpp"
#include "cgec/fileio.hpp"
#include "cgec/text.hpp"

namespace cgec {
namespace {

constexpr std::string_view kOutputSlot = "{output}";

std::string substitute(std::string_view layout, const ParallelPair& pair,
                       const InstructionTemplate& tmpl) {
  return substitute_placeholders(layout, {{"prefix", tmpl.task_prefix},
                                          {"description", tmpl.task_description},
                                          {"input", pair.ungrammatical},
                                          {"output", pair.grammatical}});
}

std::string rstrip(std::string text) {
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' ||
                           text.back() == '\n' || text.back() == '\r')) {
    text.pop_back();
  }
  return text;
}

}  // namespace

const InstructionTemplate& InstructionTemplate::standard() {
  static const InstructionTemplate instance{std::string(kDefaultTaskPrefix),
                                            std::string(kDefaultTaskDescription),
                                            std::string(kDefaultLayout)};
  return instance;
}

InstructionTemplate InstructionTemplate::from_file(const std::filesystem::path& path) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": invalid template JSON: " + e.what());
  }
  if (!obj.is_object()) throw ConfigError(path.string() + ": template must be a JSON object");
  InstructionTemplate tmpl = standard();
  auto take = [&](const char* key, std::string& field) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_string()) {
      throw ConfigError(path.string() + ": '" + key + "' must be a string");
    }
    field = it->get<std::string>();
  };
  take("task_prefix", tmpl.task_prefix);
  take("task_description", tmpl.task_description);
  take("layout", tmpl.layout);
  tmpl.validate();
  return tmpl;
}

void InstructionTemplate::validate() const {
  for (std::string_view slot : {"{prefix}", "{description}", "{input}", "{output}"}) {
    const std::size_t n = count_occurrences(layout, slot);
    if (n != 1) {
      throw ConfigError("layout must contain " + std::string(slot) +
                        " exactly once (found " + std::to_string(n) + ")");
    }
  }
  if (!layout.ends_with(kOutputSlot)) {
    throw ConfigError("layout must end with {output}");
  }
}

std::string render_text(const ParallelPair& pair, const InstructionTemplate& tmpl) {
  tmpl.validate();
  return substitute(tmpl.layout, pair, tmpl);
}

InstructionRecord render_instruction(const ParallelPair& pair,
                                     const InstructionTemplate& tmpl) {
  tmpl.validate();
  validate_pair(pair);
  const std::string_view layout = tmpl.layout;
  const std::string_view before = layout.substr(0, layout.size() - kOutputSlot.size());
  return InstructionRecord{pair.id, rstrip(substitute(before, pair, tmpl)),
                           pair.grammatical, pair.id};
}

std::optional<RecordFormat> parse_record_format(std::string_view name) {
  if (name == "prompt_completion_jsonl" || name == "prompt_completion") {
    return RecordFormat::PromptCompletion;
  }
  if (name == "conversation_jsonl" || name == "conversation") {
    return RecordFormat::Conversation;
  }
  return std::nullopt;
}

nlohmann::ordered_json record_to_json(const ParallelPair& pair,
                                      const InstructionTemplate& tmpl,
                                      RecordFormat format) {
  const InstructionRecord record = render_instruction(pair, tmpl);
  nlohmann::ordered_json obj;
  obj["id"] = record.id;
  if (format == RecordFormat::PromptCompletion) {
    obj["prompt"] = record.prompt;
    obj["completion"] = record.completion;
  } else {
    nlohmann::ordered_json messages = nlohmann::ordered_json::array();
    messages.push_back({{"role", "system"}, {"content", tmpl.task_prefix}});
    messages.push_back(
        {{"role", "user"}, {"content", tmpl.task_description + " " + pair.ungrammatical}});
    messages.push_back({{"role", "assistant"}, {"content", record.completion}});
    obj["messages"] = std::move(messages);
  }
  obj["meta"] = {{"pair_id", record.pair_id}};
  return obj;
}

std::string serialize_dataset(std::span<const ParallelPair> pairs,
                              const InstructionTemplate& tmpl, RecordFormat format) {
  std::string out;
  for (const auto& pair : pairs) {
    out += record_to_json(pair, tmpl, format).dump();
    out += '\n';
  }
  return out;
}

std::size_t emit_dataset(std::span<const ParallelPair> pairs,
                         const InstructionTemplate& tmpl,
                         const std::filesystem::path& path, RecordFormat format) {
  write_file_atomic(path, serialize_dataset(pairs, tmpl, format));
  return pairs.size();
}

}  // namespace cgec
