#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "arground/generation.hpp"
#include "arground/prompting.hpp"
#include "arground/schema.hpp"

namespace arground {

enum class ExampleSource { Gold, Sampled };

std::string_view to_string(ExampleSource source) noexcept;

struct TrainingExample {
  std::string prompt;
  std::string completion;  // serialized ArgumentMap, given order
  ExampleSource source = ExampleSource::Gold;
  double reward = 1.0;
  std::string dialogue_id;

  bool operator==(const TrainingExample&) const = default;
};

/// `{prompt, completion, source, reward, dialogue_id}`
std::string example_to_json_line(const TrainingExample& example);
TrainingExample example_from_json_line(std::string_view line);

/// One gold example per dialogue: default prompt plus the gold arguments in
/// schema order. Throws GoldSchemaMismatch (subject = dialogue id) when a
/// gold key is not in the target schema.
std::vector<TrainingExample> export_sft_dataset(
    std::span<const Dialogue> dialogues, const SchemaCatalog& catalog,
    const PromptTemplates& templates = PromptTemplates::builtin());

struct SamplerConfig {
  std::size_t k = 4;
  double temperature = 0.8;
  std::size_t max_tokens = 256;
  bool strict = false;      // backend failures abort the run
  std::size_t workers = 1;  // dialogues processed concurrently
};

struct SamplerStats {
  std::size_t dialogues = 0;
  std::size_t skipped = 0;  // dialogues dropped after a backend failure
  std::size_t generated = 0;
  std::size_t parse_failed = 0;
  std::size_t rejected = 0;    // reward <= 0
  std::size_t duplicates = 0;  // positive but already kept for the dialogue
  std::size_t kept = 0;
  double mean_kept_reward = 0.0;
};

std::string stats_to_json(const SamplerStats& stats);

struct SamplerResult {
  // Per dialogue in input order: the gold example, then its kept samples.
  std::vector<TrainingExample> examples;
  SamplerStats stats;
  std::vector<std::string> warnings;
};

/// Draws K outputs per dialogue, scores each with classify_errors and keeps
/// the distinct ones whose reward is strictly positive. Gold examples are
/// always emitted.
SamplerResult rejection_sample(Backend& backend, std::span<const Dialogue> dialogues,
                               const SchemaCatalog& catalog, const SamplerConfig& config,
                               const PromptTemplates& templates = PromptTemplates::builtin());

}  // namespace arground
