#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arground/generation.hpp"
#include "arground/output_parser.hpp"
#include "arground/schema.hpp"

namespace arground {

/// Prompt wording. Templates use the placeholders `{{instruction}}`,
/// `{{api_block}}`, `{{history}}` and `{{slot_hint}}`.
struct PromptTemplates {
  std::string version;
  std::string instruction;
  std::string default_template;
  std::string slot_instruction;
  std::string slot_template;

  /// The versioned templates shipped under core/templates.
  static const PromptTemplates& builtin();

  /// SHA-256 over the version and all four texts.
  std::string hash() const;
};

/// Replaces `{{name}}` placeholders; unknown placeholders are left as-is and
/// substituted text is never rescanned.
std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string, std::less<>>& values);

enum class PromptMode { Default, Slot };

struct PromptBundle {
  std::string text;
  std::string schema_ref;
  std::string dialogue_ref;
  PromptMode mode = PromptMode::Default;
  std::optional<std::string> slot_name;  // set iff mode == Slot
};

/// `- name (kind): description [allowed: v1 | v2]`
std::string render_slot_line(const SlotSpec& slot);
std::string render_api_block(const ApiSchema& schema);
/// One `User:` / `Agent:` line per turn.
std::string render_history(const Dialogue& dialogue);

/// Instruction, API block, dialogue history, then the `Arguments:` cue.
/// Throws ApiMismatch when the dialogue targets a different API.
PromptBundle build_default_prompt(const ApiSchema& schema, const Dialogue& dialogue,
                                  const PromptTemplates& templates = PromptTemplates::builtin());

/// Prompt asking for one slot only, ending with `Value (or NONE):`.
/// Throws UnknownSlot when `slot` is not part of `schema`.
PromptBundle build_slot_prompt(const ApiSchema& schema, const Dialogue& dialogue,
                               const SlotSpec& slot,
                               const PromptTemplates& templates = PromptTemplates::builtin());

/// First non-empty line, canonicalized, with fully-enclosing quotes removed.
/// The sentinel `none` yields nullopt. Throws EmptySlotResponse when every
/// line is blank.
std::optional<std::string> parse_slot_response(std::string_view raw);

struct GenerationOptions {
  double temperature = 0.0;
  std::size_t max_tokens = 256;
};

struct MultistepResult {
  ArgumentMap arguments;
  std::vector<GenerationRecord> transcript;
  std::vector<std::string> warnings;
};

/// Prompts for each slot in schema order, one request per slot, and collects
/// the non-NONE answers. Backend failures surface as BackendError with the
/// slot name as subject.
MultistepResult run_multistep(Backend& backend, const ApiSchema& schema, const Dialogue& dialogue,
                              const PromptTemplates& templates = PromptTemplates::builtin(),
                              const GenerationOptions& options = {.temperature = 0.0, .max_tokens = 64});

struct SingleShotResult {
  ArgumentMap arguments;
  GenerationRecord record;
  std::vector<std::string> warnings;
  bool parse_failed = false;
};

/// Default-prompt inference: one request, output parsed with
/// extract_argument_map. An unparseable reply gives an empty map and
/// parse_failed = true.
SingleShotResult run_single_shot(Backend& backend, const ApiSchema& schema,
                                 const Dialogue& dialogue,
                                 const PromptTemplates& templates = PromptTemplates::builtin(),
                                 const GenerationOptions& options = {});

}  // namespace arground
