#include "fixtures.hpp"

#include <random>

#include "json.hpp"

namespace topiczero::testing {

const std::vector<std::vector<std::string>>& class_vocabularies() {
  static const std::vector<std::vector<std::string>> v = {
      {"gol", "jogo", "campeonato", "time", "partida", "técnico", "estádio", "torcida",
       "atacante", "goleiro", "clube", "vitória", "derrota", "rodada", "título", "copa",
       "placar", "artilheiro", "zagueiro", "treino"},
      {"banco", "juros", "inflação", "dólar", "bolsa", "investimento", "empresa", "lucro",
       "ações", "economia", "crédito", "câmbio", "receita", "dívida", "imposto", "preço",
       "exportação", "varejo", "indústria", "consumo"},
      {"governo", "senado", "deputado", "eleição", "ministro", "congresso", "partido",
       "presidente", "votação", "reforma", "câmara", "prefeito", "candidato", "campanha", "lei",
       "tribunal", "oposição", "coalizão", "mandato", "corrupção"},
  };
  return v;
}

const std::vector<std::string>& neutral_vocabulary() {
  static const std::vector<std::string> v = {
      "segundo", "hoje", "ontem", "ainda", "sobre", "entre", "durante", "após", "também",
      "muito", "pessoas", "ano", "semana", "dia", "grande", "novo", "disse", "afirmou",
      "informou", "nesta"};
  return v;
}

SyntheticFixture make_three_topic_fixture(const FixtureOptions& options) {
  SyntheticFixture fx;
  const auto& vocab = class_vocabularies();
  const auto& neutral = neutral_vocabulary();
  for (std::size_t c = 0; c < vocab.size(); ++c) {
    for (const auto& w : vocab[c]) fx.lexicon[w] = fx.labels[c];
  }

  std::mt19937_64 gen(options.seed);
  std::vector<corpus::Document> docs;
  // Interleave classes so cluster ids are not trivially ordered by position.
  for (std::size_t i = 0; i < options.docs_per_class; ++i) {
    for (std::size_t c = 0; c < vocab.size(); ++c) {
      std::string text;
      for (std::size_t t = 0; t < options.neutral_prefix_tokens; ++t) {
        if (!text.empty()) text += ' ';
        text += neutral[gen() % neutral.size()];
      }
      for (std::size_t t = 0; t < options.class_tokens; ++t) {
        if (!text.empty()) text += ' ';
        text += vocab[c][gen() % vocab[c].size()];
      }
      const std::string id = "d" + std::to_string(docs.size());
      docs.push_back({id, text, fx.labels[c]});
      fx.classes.push_back(c);
    }
  }
  fx.corpus = corpus::Corpus(std::move(docs));
  return fx;
}

SyntheticFixture make_long_fixture() {
  FixtureOptions o;
  o.neutral_prefix_tokens = 20;
  return make_three_topic_fixture(o);
}

std::string fixture_lexicon_json() {
  nlohmann::json j = nlohmann::json::object();
  const auto& vocab = class_vocabularies();
  const std::vector<std::string> names{"esporte", "mercado", "poder"};
  for (std::size_t c = 0; c < vocab.size(); ++c) {
    for (const auto& w : vocab[c]) j[w] = names[c];
  }
  return j.dump();
}

}  // namespace topiczero::testing
