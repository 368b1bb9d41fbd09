#include "arground/prompting.hpp"

#include "arground/error.hpp"
#include "arground/io.hpp"
#include "arground/text.hpp"
#include "builtin_templates.hpp"

namespace arground {

const PromptTemplates& PromptTemplates::builtin() {
  static const PromptTemplates templates{
      detail::kTemplateVersion, detail::kDefaultInstruction, detail::kDefaultTemplate,
      detail::kSlotInstruction, detail::kSlotTemplate};
  return templates;
}

std::string PromptTemplates::hash() const {
  std::string blob;
  for (const std::string* part :
       {&version, &instruction, &default_template, &slot_instruction, &slot_template}) {
    blob += *part;
    blob.push_back('\0');
  }
  return sha256_hex(blob);
}

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string, std::less<>>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const auto open = tmpl.find("{{", i);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    out.append(tmpl.substr(i, open - i));
    const std::string_view name = tmpl.substr(open + 2, close - open - 2);
    auto it = values.find(name);
    if (it != values.end()) {
      out += it->second;
    } else {
      out.append(tmpl.substr(open, close + 2 - open));
    }
    i = close + 2;
  }
  return out;
}

namespace {

// Keeps the one-line-per-item layout intact.
std::string single_line(std::string_view s) {
  std::string out(trim(s));
  for (char& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

std::string format_hint(const SlotSpec& slot) {
  switch (slot.kind) {
    case SlotKind::Integer: return "a whole number";
    case SlotKind::Boolean: return "true or false";
    case SlotKind::Categorical: return "exactly one of the allowed values";
    case SlotKind::Date: return "a date such as 2024-03-15, 3/15 or march 15";
    case SlotKind::Time: return "a time such as 3pm, 3:30 pm or 15:30";
    case SlotKind::FreeText: return "short text copied from the dialogue";
  }
  return {};
}

}  // namespace

std::string render_slot_line(const SlotSpec& slot) {
  std::string line = "- " + slot.name + " (" + std::string(to_string(slot.kind)) + "): " +
                     single_line(slot.description);
  if (slot.kind == SlotKind::Categorical) {
    line += " [allowed: ";
    for (std::size_t i = 0; i < slot.allowed_values.size(); ++i) {
      if (i > 0) line += " | ";
      line += slot.allowed_values[i];
    }
    line += "]";
  }
  return line;
}

std::string render_api_block(const ApiSchema& schema) {
  std::string block = "API: " + schema.api_name + "\n";
  block += "Description: " + single_line(schema.description) + "\n";
  block += "Slots:";
  for (const auto& slot : schema.slots) block += "\n" + render_slot_line(slot);
  return block;
}

std::string render_history(const Dialogue& dialogue) {
  std::string history;
  for (std::size_t i = 0; i < dialogue.turns.size(); ++i) {
    const auto& turn = dialogue.turns[i];
    if (i > 0) history += "\n";
    history += turn.speaker == Speaker::User ? "User: " : "Agent: ";
    history += single_line(turn.utterance);
  }
  return history;
}

namespace {

void require_same_api(const ApiSchema& schema, const Dialogue& dialogue) {
  if (dialogue.target_api != schema.api_name) {
    throw Error(ErrorCode::ApiMismatch,
                "dialogue '" + dialogue.id + "' targets '" + dialogue.target_api +
                    "', not '" + schema.api_name + "'",
                dialogue.id);
  }
}

}  // namespace

PromptBundle build_default_prompt(const ApiSchema& schema, const Dialogue& dialogue,
                                  const PromptTemplates& templates) {
  require_same_api(schema, dialogue);
  PromptBundle bundle;
  bundle.text = render_template(templates.default_template,
                                {{"instruction", templates.instruction},
                                 {"api_block", render_api_block(schema)},
                                 {"history", render_history(dialogue)}});
  bundle.schema_ref = schema.api_name;
  bundle.dialogue_ref = dialogue.id;
  bundle.mode = PromptMode::Default;
  return bundle;
}

PromptBundle build_slot_prompt(const ApiSchema& schema, const Dialogue& dialogue,
                               const SlotSpec& slot, const PromptTemplates& templates) {
  const SlotSpec* own = schema.find_slot(slot.name);
  if (own == nullptr || !(*own == slot)) {
    throw Error(ErrorCode::UnknownSlot,
                "slot '" + slot.name + "' is not part of api '" + schema.api_name + "'",
                slot.name);
  }
  require_same_api(schema, dialogue);
  const std::string hint = render_slot_line(slot) + "\n  Format: " + format_hint(slot) +
                           (slot.required ? "" : "\n  Optional: answer NONE if not mentioned");
  PromptBundle bundle;
  bundle.text = render_template(templates.slot_template,
                                {{"instruction", templates.slot_instruction},
                                 {"history", render_history(dialogue)},
                                 {"slot_hint", hint}});
  bundle.schema_ref = schema.api_name;
  bundle.dialogue_ref = dialogue.id;
  bundle.mode = PromptMode::Slot;
  bundle.slot_name = slot.name;
  return bundle;
}

std::optional<std::string> parse_slot_response(std::string_view raw) {
  std::string_view line;
  std::size_t i = 0;
  while (i <= raw.size()) {
    auto nl = raw.find('\n', i);
    if (nl == std::string_view::npos) nl = raw.size();
    const std::string_view candidate = trim(raw.substr(i, nl - i));
    if (!candidate.empty()) {
      line = candidate;
      break;
    }
    i = nl + 1;
  }
  if (line.empty()) throw Error(ErrorCode::EmptySlotResponse, "slot response has no content");

  std::string value = canonicalize_value(line);
  if (value.size() >= 2) {
    const char q = value.front();
    if ((q == '"' || q == '\'') && value.back() == q &&
        value.find(q, 1) == value.size() - 1) {
      value = canonicalize_value(std::string_view(value).substr(1, value.size() - 2));
    }
  }
  if (value.empty() || value == "none") return std::nullopt;
  return value;
}

MultistepResult run_multistep(Backend& backend, const ApiSchema& schema, const Dialogue& dialogue,
                              const PromptTemplates& templates,
                              const GenerationOptions& options) {
  MultistepResult result;
  for (const auto& slot : schema.slots) {
    const PromptBundle prompt = build_slot_prompt(schema, dialogue, slot, templates);
    GenerationRequest request;
    request.prompt = prompt.text;
    request.temperature = options.temperature;
    request.max_tokens = options.max_tokens;
    request.n_samples = 1;
    request.tag = dialogue.id + "/" + slot.name;
    GenerationRecord record;
    try {
      record = backend.generate(request);
    } catch (const Error& e) {
      if (error_category(e.code()) != ErrorCategory::Backend) throw;
      throw Error(ErrorCode::BackendError,
                  "dialogue '" + dialogue.id + "', slot '" + slot.name + "': " + e.what(),
                  slot.name);
    }
    const std::string reply = record.outputs.empty() ? std::string() : record.outputs.front();
    result.transcript.push_back(std::move(record));
    try {
      if (auto value = parse_slot_response(reply)) result.arguments.add(slot.name, *value);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptySlotResponse) throw;
      result.warnings.push_back("empty response for slot '" + slot.name + "'");
    }
  }
  return result;
}

SingleShotResult run_single_shot(Backend& backend, const ApiSchema& schema,
                                 const Dialogue& dialogue, const PromptTemplates& templates,
                                 const GenerationOptions& options) {
  const PromptBundle prompt = build_default_prompt(schema, dialogue, templates);
  GenerationRequest request;
  request.prompt = prompt.text;
  request.temperature = options.temperature;
  request.max_tokens = options.max_tokens;
  request.n_samples = 1;
  request.tag = dialogue.id;

  SingleShotResult result;
  result.record = backend.generate(request);
  const std::string reply =
      result.record.outputs.empty() ? std::string() : result.record.outputs.front();
  try {
    ParseOutcome outcome = extract_argument_map(reply);
    result.arguments = std::move(outcome.map);
    result.warnings = std::move(outcome.warnings);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoArgumentObject && e.code() != ErrorCode::MalformedArguments) {
      throw;
    }
    result.parse_failed = true;
    result.warnings.push_back(std::string("unparseable output: ") + e.what());
  }
  return result;
}

}  // namespace arground
