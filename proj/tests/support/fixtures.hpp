#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "topiczero/corpus.hpp"
#include "topiczero/entailment.hpp"

namespace topiczero::testing {

// Documents drawn from three disjoint vocabularies (sport, market,
// politics). An optional neutral prefix, shared by all classes and unknown
// to the lexicon, precedes the class words; truncating a document inside
// the prefix removes every discriminative token.
struct FixtureOptions {
  std::size_t docs_per_class = 100;
  std::size_t class_tokens = 24;
  std::size_t neutral_prefix_tokens = 0;
  std::uint64_t seed = 42;
};

struct SyntheticFixture {
  corpus::Corpus corpus;
  corpus::LabelSet labels{{"esporte", "mercado", "poder"}};
  entailment::Lexicon lexicon;
  /// Class index of each document, in corpus order.
  std::vector<std::size_t> classes;
};

const std::vector<std::vector<std::string>>& class_vocabularies();
const std::vector<std::string>& neutral_vocabulary();

SyntheticFixture make_three_topic_fixture(const FixtureOptions& options = {});

/// The fixture used by the end-to-end checks: 300 documents with a
/// 20-token neutral prefix.
SyntheticFixture make_long_fixture();

/// Lexicon JSON text for the fixture vocabularies.
std::string fixture_lexicon_json();

}  // namespace topiczero::testing
