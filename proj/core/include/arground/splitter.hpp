#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "arground/schema.hpp"

namespace arground {

struct SplitResult {
  std::vector<Dialogue> train;  // input order preserved
  std::vector<Dialogue> test;
  std::vector<std::string> warnings;
};

/// Stratified random split: inside every domain, ceil(test_fraction * n)
/// dialogues go to test, chosen by a shuffle seeded with `seed` over the
/// id-sorted domain members (so input order does not matter). Domains with
/// two or more dialogues land on both sides; singleton domains stay in train
/// with a warning. Throws EmptyDataset, InvalidArgument (fraction outside
/// (0, 1)) or DatasetInvalid (empty domain).
SplitResult split_in_domain(std::span<const Dialogue> dialogues, double test_fraction,
                            std::uint64_t seed);

/// Domain -> related domains. Relations are treated as symmetric.
using SynonymMap = std::map<std::string, std::vector<std::string>, std::less<>>;

/// Every domain reachable from `domains` through the synonym relation.
std::set<std::string> synonym_closure(const std::set<std::string>& domains,
                                      const SynonymMap& synonyms);

/// Test = dialogues whose domain is in the synonym closure of the held-out
/// domains; train = the rest. Throws UnknownDomain for a held-out domain with
/// no dialogues and DegenerateSplit when train would be empty.
SplitResult split_out_of_domain(std::span<const Dialogue> dialogues,
                                const std::set<std::string>& holdout_domains,
                                const SynonymMap& synonyms = {});

/// JSON object mapping a domain to a string or a list of strings.
SynonymMap load_synonym_map(std::istream& source);

/// `{seed, test_fraction, train_ids, test_ids}`
std::string in_domain_manifest(const SplitResult& split, double test_fraction, std::uint64_t seed);
/// `{holdout_domains, synonym_map?, train_ids, test_ids}`
std::string out_of_domain_manifest(const SplitResult& split,
                                   const std::set<std::string>& holdout_domains,
                                   const SynonymMap& synonyms);

enum class DumpFormat { Sgd, Star };

struct IngestResult {
  std::vector<Dialogue> dialogues;
  SchemaCatalog catalog;
  std::vector<std::string> warnings;
};

/// Converts a public dataset dump into dialogues and a schema catalog.
///
/// SGD: `{"schema": [service...], "dialogues": [dialogue...]}`, i.e. the
/// distribution's schema.json list and the concatenated dialogues_*.json
/// lists. Each service becomes an ApiSchema; each frame with a
/// `service_call` becomes a Dialogue cut just before the calling turn.
///
/// STAR: `{"apis": [spec...], "dialogues": [dialogue...]}`. An API spec is
/// `{name, description?, required?: [slot], optional?: [slot],
/// choices?: {slot: [value]}}`; each Wizard `query` event becomes a Dialogue
/// whose gold arguments are the query constraints.
///
/// Throws IngestError naming the first record that does not fit the layout.
IngestResult ingest_external(std::istream& dump, DumpFormat format);

}  // namespace arground
