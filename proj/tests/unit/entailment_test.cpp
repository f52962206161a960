#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "temp_dir.hpp"
#include "topiczero/entailment.hpp"
#include "topiczero/error.hpp"

namespace topiczero::entailment {
namespace {

const Lexicon& sport_lexicon() {
  static const Lexicon lex{{"gol", "esporte"}, {"jogo", "esporte"}, {"campeonato", "esporte"},
                           {"banco", "mercado"}, {"juros", "mercado"}};
  return lex;
}

TEST(Template, RendersPerLabelInOrder) {
  const HypothesisTemplate t{std::string(kDocumentTemplate)};
  const auto out = render_hypotheses(t, LabelSet({"esporte"}));
  EXPECT_EQ(out, std::vector<std::string>{"O tema principal desta notícia é esporte"});
  const auto two = render_hypotheses(HypothesisTemplate("é {}."), LabelSet({"b", "a"}));
  EXPECT_EQ(two, (std::vector<std::string>{"é b.", "é a."}));
}

TEST(Template, BareSlotAndInvalidPatterns) {
  EXPECT_EQ(HypothesisTemplate("{}").render("x"), "x");
  EXPECT_THROW(HypothesisTemplate("no slot"), InputError);
  EXPECT_THROW(HypothesisTemplate("{} and {}"), InputError);
}

TEST(Lexical, HandEvaluatedExample) {
  LexicalBackend b(sport_lexicon());
  const LabelSet labels({"esporte", "mercado"});
  const HypothesisTemplate t{std::string(kDocumentTemplate)};
  const auto p = predict("gol jogo campeonato", labels, t, b);
  // (0.01 + 3) / (0.01 + 3 + 0.01) and 0.01 / 3.02.
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p[0], 0.9966887417218542, 1e-12);
  EXPECT_NEAR(p[1], 0.0033112582781456954, 1e-12);
}

TEST(Lexical, RawModeDividesByPremiseLength) {
  LexicalBackend b(sport_lexicon());
  const LabelSet labels({"esporte", "mercado"});
  const HypothesisTemplate t("{}");
  const auto p = predict("gol jogo campeonato", labels, t, b, false);
  EXPECT_NEAR(p[0], 1.0, 1e-12);  // (0.01 + 3) / (0.01 + 3)
  EXPECT_NEAR(p[1], 0.003322259136212625, 1e-12);
}

TEST(Lexical, NoMatchesIsUniformAndSingleLabelIsOne) {
  LexicalBackend b(sport_lexicon());
  const HypothesisTemplate t("{}");
  const auto p = predict("nada aqui", LabelSet({"esporte", "mercado", "poder"}), t, b);
  for (double x : p) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(predict("gol", LabelSet({"mercado"}), t, b), std::vector<double>{1.0});
}

TEST(Lexical, CaseInsensitiveAndPure) {
  LexicalBackend b(sport_lexicon());
  const LabelSet labels({"esporte", "mercado"});
  const HypothesisTemplate t("{}");
  EXPECT_EQ(predict("GOL, Banco!", labels, t, b), predict("gol banco", labels, t, b));
  EXPECT_EQ(predict("gol banco juros", labels, t, b), predict("gol banco juros", labels, t, b));
}

TEST(Lexical, LabelOrderEquivariance) {
  const auto fx = testing::make_three_topic_fixture({.docs_per_class = 5});
  LexicalBackend b(fx.lexicon);
  const HypothesisTemplate t("{}");
  const std::vector<std::string> names{"esporte", "mercado", "poder"};
  std::vector<std::size_t> perm{0, 1, 2};
  for (const auto& d : fx.corpus) {
    const auto base = predict(d.text, LabelSet(names), t, b);
    std::next_permutation(perm.begin(), perm.end());
    std::vector<std::string> permuted;
    for (auto i : perm) permuted.push_back(names[i]);
    const auto p = predict(d.text, LabelSet(permuted), t, b);
    for (std::size_t j = 0; j < perm.size(); ++j) EXPECT_DOUBLE_EQ(p[j], base[perm[j]]);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
  }
}

TEST(Lexicon, ParseAndLoad) {
  const auto lex = parse_lexicon(R"({"Gol": "esporte", "juros": "mercado"})");
  EXPECT_EQ(lex.at("gol"), "esporte");
  EXPECT_THROW(parse_lexicon("[1,2]"), InputError);
  EXPECT_THROW(parse_lexicon(R"({"gol": 3})"), InputError);
  testing::TempDir dir;
  dir.write("lex.json", testing::fixture_lexicon_json());
  EXPECT_FALSE(load_lexicon(dir / "lex.json").empty());
  EXPECT_THROW(load_lexicon(dir / "missing.json"), InputError);
}

struct FixedBackend : EntailmentBackend {
  std::vector<double> out;
  std::vector<double> entail(const EntailmentQuery&) const override { return out; }
};

TEST(Predict, ContractViolations) {
  const LabelSet labels({"a", "b"});
  const HypothesisTemplate t("{}");
  FixedBackend b;
  b.out = {0.5};
  EXPECT_THROW(predict("x", labels, t, b), ContractViolation);
  b.out = {1.2, -0.2};
  EXPECT_THROW(predict("x", labels, t, b), ContractViolation);
  b.out = {0.5, 0.4};
  EXPECT_THROW(predict("x", labels, t, b, true), ContractViolation);
  EXPECT_NO_THROW(predict("x", labels, t, b, false));
  EXPECT_THROW(predict("", labels, t, b), InputError);
}

TEST(Predict, RenormalizesWithinTolerance) {
  FixedBackend b;
  b.out = {0.3, 0.7000004};
  const auto p = predict("x", LabelSet({"a", "b"}), HypothesisTemplate("{}"), b);
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
}

TEST(Premise, JoinsTermsInOrder) {
  topic_model::Topic t;
  t.terms = {{"gol", 0.9}, {"jogo", 0.5}};
  EXPECT_EQ(serialize_topic_premise(t), "gol, jogo");
  t.terms = {{"gol", 0.9}};
  EXPECT_EQ(serialize_topic_premise(t), "gol");
  t.terms.clear();
  for (int i = 0; i < 20; ++i) t.terms.push_back({"w" + std::to_string(i), 1.0 / (i + 1)});
  const auto s = serialize_topic_premise(t);
  std::size_t seps = 0;
  for (std::size_t pos = 0; (pos = s.find(", ", pos)) != std::string::npos; pos += 2) ++seps;
  EXPECT_EQ(seps, 19u);
}

TEST(Table, Invariants) {
  EXPECT_NO_THROW(EntailmentTable(2, 2, {0.9, 0.1, 0.2, 0.8}, true));
  EXPECT_THROW(EntailmentTable(2, 2, {0.9, 0.2, 0.2, 0.8}, true), InputError);
  EXPECT_NO_THROW(EntailmentTable(2, 2, {0.9, 0.2, 0.2, 0.8}, false));
  EXPECT_THROW(EntailmentTable(1, 2, {1.5, 0.0}, false), InputError);
  EXPECT_THROW(EntailmentTable(2, 2, {1.0, 0.0}, false), InputError);
  const EntailmentTable t(2, 3, {0.2, 0.3, 0.5, 0.1, 0.1, 0.8}, true);
  EXPECT_DOUBLE_EQ(t.at(1, 2), 0.8);
  EXPECT_EQ(t.row(0).size(), 3u);
}

}  // namespace
}  // namespace topiczero::entailment
