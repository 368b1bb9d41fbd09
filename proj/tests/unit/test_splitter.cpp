#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "arground/error.hpp"
#include "arground/splitter.hpp"
#include "json.hpp"
#include "support/test_support.hpp"

using namespace arground;

namespace {

std::vector<Dialogue> corpus(const std::vector<std::pair<std::string, int>>& domains) {
  std::vector<Dialogue> out;
  for (const auto& [domain, n] : domains) {
    for (int i = 0; i < n; ++i) {
      out.push_back(testing_support::make_dialogue(domain + "-" + std::to_string(i), domain, "api", {}));
    }
  }
  return out;
}

std::map<std::string, std::size_t> per_domain(const std::vector<Dialogue>& ds) {
  std::map<std::string, std::size_t> counts;
  for (const auto& d : ds) counts[d.domain]++;
  return counts;
}

std::vector<std::string> ids(const std::vector<Dialogue>& ds) {
  std::vector<std::string> out;
  for (const auto& d : ds) out.push_back(d.id);
  return out;
}

std::set<std::string> id_set(const std::vector<Dialogue>& ds) {
  const auto v = ids(ds);
  return {v.begin(), v.end()};
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no arground::Error thrown");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("stratified split takes the ceiling per domain", "[splitter]") {
  const auto ds = corpus({{"banks", 5}, {"travel", 5}});
  const auto split = split_in_domain(ds, 0.2, 7);
  CHECK(per_domain(split.test) == std::map<std::string, std::size_t>{{"banks", 1}, {"travel", 1}});
  CHECK(split.train.size() == 8);

  const auto again = split_in_domain(ds, 0.2, 7);
  CHECK(ids(again.test) == ids(split.test));

  const auto half = split_in_domain(corpus({{"x", 4}}), 0.5, 1);
  CHECK(half.test.size() == 2);
  CHECK(half.train.size() == 2);
}

TEST_CASE("split assignment ignores input order", "[splitter]") {
  auto ds = corpus({{"a", 9}, {"b", 4}, {"c", 13}});
  const auto base = split_in_domain(ds, 0.3, 42);
  const auto base_test = id_set(base.test);
  std::mt19937 rng(1);
  std::shuffle(ds.begin(), ds.end(), rng);
  const auto shuffled = split_in_domain(ds, 0.3, 42);
  const auto shuffled_test = id_set(shuffled.test);
  CHECK(base_test == shuffled_test);
}

TEST_CASE("split properties over random corpora", "[splitter]") {
  std::mt19937 rng(9);
  for (int round = 0; round < 200; ++round) {
    std::vector<std::pair<std::string, int>> spec;
    const int n_domains = 1 + static_cast<int>(rng() % 6);
    for (int d = 0; d < n_domains; ++d) spec.emplace_back("dom" + std::to_string(d), 1 + static_cast<int>(rng() % 30));
    const auto ds = corpus(spec);
    const double fraction = 0.05 + 0.9 * static_cast<double>(rng() % 1000) / 1000.0;
    const auto split = split_in_domain(ds, fraction, rng());

    const auto train_ids = id_set(split.train);
    const auto test_ids = id_set(split.test);
    REQUIRE(train_ids.size() + test_ids.size() == ds.size());
    for (const auto& id : test_ids) REQUIRE_FALSE(train_ids.count(id));

    const auto tests = per_domain(split.test);
    for (const auto& [domain, n] : per_domain(ds)) {
      const double got = tests.count(domain) ? static_cast<double>(tests.at(domain)) : 0.0;
      if (n >= 2) {
        REQUIRE(got >= 1);
        REQUIRE(got <= static_cast<double>(n - 1));
        REQUIRE(std::abs(got / static_cast<double>(n) - fraction) <= 1.0 / static_cast<double>(n) + 1e-12);
      } else {
        REQUIRE(got == 0);
      }
    }
  }
}

TEST_CASE("in-domain split errors and warnings", "[splitter]") {
  CHECK(code_of([] { split_in_domain(std::vector<Dialogue>{}, 0.2, 1); }) == ErrorCode::EmptyDataset);
  CHECK(code_of([] { split_in_domain(corpus({{"a", 3}}), 0.0, 1); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { split_in_domain(corpus({{"a", 3}}), 1.0, 1); }) == ErrorCode::InvalidArgument);
  const auto split = split_in_domain(corpus({{"a", 3}, {"lonely", 1}}), 0.5, 1);
  CHECK(split.warnings.size() == 1);
  CHECK(per_domain(split.train).at("lonely") == 1);
}

TEST_CASE("out-of-domain split holds out whole domains", "[splitter]") {
  const auto ds = corpus({{"banks", 3}, {"travel", 3}, {"weather", 2}, {"flights", 2}});
  const auto split = split_out_of_domain(ds, {"weather"});
  CHECK(per_domain(split.train) == std::map<std::string, std::size_t>{{"banks", 3}, {"flights", 2}, {"travel", 3}});
  CHECK(per_domain(split.test) == std::map<std::string, std::size_t>{{"weather", 2}});

  const SynonymMap synonyms{{"flights", {"travel"}}};
  const auto closed = split_out_of_domain(ds, {"travel"}, synonyms);
  CHECK(per_domain(closed.test) == std::map<std::string, std::size_t>{{"flights", 2}, {"travel", 3}});

  CHECK(code_of([&] { split_out_of_domain(ds, {"banks", "travel", "weather", "flights"}); }) ==
        ErrorCode::DegenerateSplit);
  CHECK(code_of([&] { split_out_of_domain(ds, {"space"}); }) == ErrorCode::UnknownDomain);
}

TEST_CASE("synonym closure is symmetric and transitive", "[splitter]") {
  const SynonymMap synonyms{{"flights", {"travel"}}, {"hotels", {"travel", "lodging"}}};
  CHECK(synonym_closure({"flights"}, synonyms) ==
        std::set<std::string>{"flights", "hotels", "lodging", "travel"});
  CHECK(synonym_closure({"banks"}, synonyms) == std::set<std::string>{"banks"});
}

TEST_CASE("synonym map accepts strings or lists", "[splitter]") {
  std::istringstream in(R"({"flights": "travel", "hotels": ["travel", "lodging"]})");
  const auto map = load_synonym_map(in);
  CHECK(map.at("flights") == std::vector<std::string>{"travel"});
  CHECK(map.at("hotels").size() == 2);
  std::istringstream bad(R"(["flights"])");
  CHECK(code_of([&] { load_synonym_map(bad); }) == ErrorCode::DatasetInvalid);
}

TEST_CASE("manifests list the split", "[splitter]") {
  const auto ds = corpus({{"banks", 4}, {"travel", 4}});
  const auto split = split_in_domain(ds, 0.25, 3);
  const auto m = nlohmann::json::parse(in_domain_manifest(split, 0.25, 3));
  CHECK(m["seed"] == 3);
  CHECK(m["test_fraction"] == 0.25);
  CHECK(m["test_ids"].size() == 2);
  CHECK(m["train_ids"].size() == 6);

  const SynonymMap synonyms{{"banks", {"finance"}}};
  const auto ood = split_out_of_domain(ds, {"banks"}, synonyms);
  const auto om = nlohmann::json::parse(out_of_domain_manifest(ood, {"banks"}, synonyms));
  CHECK(om["holdout_domains"] == nlohmann::json::array({"banks"}));
  CHECK(om["synonym_map"]["banks"][0] == "finance");
}
