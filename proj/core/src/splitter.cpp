#include "arground/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <iterator>
#include <random>

#include "arground/error.hpp"
#include "arground/text.hpp"
#include "json.hpp"

namespace arground {

SplitResult split_in_domain(std::span<const Dialogue> dialogues, double test_fraction,
                            std::uint64_t seed) {
  if (dialogues.empty()) throw Error(ErrorCode::EmptyDataset, "no dialogues to split");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "test fraction must lie in (0, 1)");
  }

  std::map<std::string, std::vector<std::string>> ids_by_domain;
  for (const auto& d : dialogues) {
    if (trim(d.domain).empty()) {
      throw Error(ErrorCode::DatasetInvalid, "dialogue '" + d.id + "' has no domain", d.id);
    }
    ids_by_domain[d.domain].push_back(d.id);
  }

  SplitResult result;
  std::set<std::string> test_ids;
  for (auto& [domain, ids] : ids_by_domain) {
    const std::size_t n = ids.size();
    if (n < 2) {
      result.warnings.push_back("domain '" + domain + "' has a single dialogue; kept in train");
      continue;
    }
    std::sort(ids.begin(), ids.end());
    // Each domain gets its own stream so adding a domain does not reshuffle
    // the others.
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(std::hash<std::string>{}(domain))};
    std::mt19937_64 rng(seq);
    std::shuffle(ids.begin(), ids.end(), rng);
    auto n_test = static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(n) - 1e-9));
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
    test_ids.insert(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test));
  }

  for (const auto& d : dialogues) {
    (test_ids.count(d.id) ? result.test : result.train).push_back(d);
  }
  return result;
}

std::set<std::string> synonym_closure(const std::set<std::string>& domains,
                                      const SynonymMap& synonyms) {
  std::map<std::string, std::set<std::string>> adjacency;
  for (const auto& [from, tos] : synonyms) {
    for (const auto& to : tos) {
      adjacency[from].insert(to);
      adjacency[to].insert(from);
    }
  }
  std::set<std::string> closure = domains;
  std::vector<std::string> frontier(domains.begin(), domains.end());
  while (!frontier.empty()) {
    const std::string current = frontier.back();
    frontier.pop_back();
    auto it = adjacency.find(current);
    if (it == adjacency.end()) continue;
    for (const auto& next : it->second) {
      if (closure.insert(next).second) frontier.push_back(next);
    }
  }
  return closure;
}

SplitResult split_out_of_domain(std::span<const Dialogue> dialogues,
                                const std::set<std::string>& holdout_domains,
                                const SynonymMap& synonyms) {
  if (dialogues.empty()) throw Error(ErrorCode::EmptyDataset, "no dialogues to split");
  if (holdout_domains.empty()) {
    throw Error(ErrorCode::InvalidArgument, "at least one held-out domain is required");
  }
  std::set<std::string> present;
  for (const auto& d : dialogues) present.insert(d.domain);
  for (const auto& h : holdout_domains) {
    if (!present.count(h)) {
      throw Error(ErrorCode::UnknownDomain, "held-out domain '" + h + "' has no dialogues", h);
    }
  }

  const std::set<std::string> closure = synonym_closure(holdout_domains, synonyms);
  SplitResult result;
  for (const auto& d : dialogues) {
    (closure.count(d.domain) ? result.test : result.train).push_back(d);
  }
  if (result.train.empty()) {
    throw Error(ErrorCode::DegenerateSplit, "every dialogue falls into the held-out closure");
  }

  std::set<std::string> train_domains;
  for (const auto& d : result.train) train_domains.insert(d.domain);
  std::set<std::string> test_domains;
  for (const auto& d : result.test) test_domains.insert(d.domain);
  for (const auto& domain : synonym_closure(test_domains, synonyms)) {
    if (train_domains.count(domain)) {
      throw Error(ErrorCode::DegenerateSplit,
                  "domain '" + domain + "' overlaps train and test", domain);
    }
  }
  return result;
}

SynonymMap load_synonym_map(std::istream& source) {
  const std::string text((std::istreambuf_iterator<char>(source)), std::istreambuf_iterator<char>());
  SynonymMap map;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::DatasetInvalid, "synonym map must be a JSON object");
    for (const auto& [domain, value] : j.items()) {
      if (value.is_string()) {
        map[domain].push_back(value.get<std::string>());
      } else if (value.is_array()) {
        for (const auto& v : value) map[domain].push_back(v.get<std::string>());
      } else {
        throw Error(ErrorCode::DatasetInvalid, "synonyms of '" + domain + "' must be strings", domain);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::DatasetInvalid, std::string("synonym map: ") + e.what());
  }
  return map;
}

namespace {

nlohmann::ordered_json id_list(const std::vector<Dialogue>& dialogues) {
  nlohmann::ordered_json ids = nlohmann::ordered_json::array();
  for (const auto& d : dialogues) ids.push_back(d.id);
  return ids;
}

}  // namespace

std::string in_domain_manifest(const SplitResult& split, double test_fraction, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["test_fraction"] = test_fraction;
  j["train_ids"] = id_list(split.train);
  j["test_ids"] = id_list(split.test);
  return j.dump(2) + "\n";
}

std::string out_of_domain_manifest(const SplitResult& split,
                                   const std::set<std::string>& holdout_domains,
                                   const SynonymMap& synonyms) {
  nlohmann::ordered_json j;
  j["holdout_domains"] = std::vector<std::string>(holdout_domains.begin(), holdout_domains.end());
  if (!synonyms.empty()) {
    nlohmann::ordered_json s = nlohmann::ordered_json::object();
    for (const auto& [domain, related] : synonyms) s[domain] = related;
    j["synonym_map"] = std::move(s);
  }
  j["train_ids"] = id_list(split.train);
  j["test_ids"] = id_list(split.test);
  return j.dump(2) + "\n";
}

}  // namespace arground
