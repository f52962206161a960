#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "topiczero/error.hpp"
#include "topiczero/topic_model.hpp"

namespace topiczero::topic_model {
namespace {

using embedding::EmbedderSpec;
using embedding::HashingEmbedder;

std::vector<Embedding> embed_all(const corpus::Corpus& c, std::size_t dim = 512) {
  EmbedderSpec spec;
  spec.dim = dim;
  HashingEmbedder e(spec);
  std::vector<Embedding> out;
  for (const auto& d : c) out.push_back(e.embed_text(d.text));
  return out;
}

Embedding jittered(std::size_t axis, std::size_t dim, std::mt19937_64& gen, double noise) {
  std::normal_distribution<double> n(0.0, noise);
  std::vector<double> v(dim);
  for (auto& x : v) x = n(gen);
  v[axis] += 1.0;
  return embedding::normalized(std::move(v));
}

// Partition as a set of sorted member lists, independent of label numbering.
std::set<std::vector<std::size_t>> partition(const std::vector<int>& labels) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  std::set<std::vector<std::size_t>> out;
  for (auto& [_, g] : groups) out.insert(g);
  return out;
}

// Brute-force average linkage: recompute every cluster-pair mean distance
// from scratch and merge the closest pair while it is below the threshold.
std::vector<int> naive_average_linkage(const std::vector<Embedding>& e, double threshold) {
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < e.size(); ++i) clusters.push_back({i});
  for (;;) {
    double best = 1e300;
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        double s = 0.0;
        for (auto i : clusters[a]) {
          for (auto j : clusters[b]) s += 1.0 - embedding::cosine_similarity(e[i], e[j]);
        }
        s /= double(clusters[a].size() * clusters[b].size());
        if (s < best) {
          best = s;
          ba = a;
          bb = b;
        }
      }
    }
    if (clusters.size() < 2 || !(best < threshold)) break;
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
  }
  std::vector<int> labels(e.size());
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (auto i : clusters[c]) labels[i] = static_cast<int>(c);
  }
  return labels;
}

TEST(Cluster, TwoSeparatedGroups) {
  std::mt19937_64 gen(5);
  std::vector<Embedding> e;
  for (int i = 0; i < 20; ++i) e.push_back(jittered(0, 16, gen, 0.03));
  for (int i = 0; i < 20; ++i) e.push_back(jittered(1, 16, gen, 0.03));
  // Fixture check: every within-group distance is far below the threshold
  // and every cross-group distance far above it.
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      const double d = 1.0 - embedding::cosine_similarity(e[i], e[j]);
      if ((i < 20) == (j < 20)) ASSERT_LT(d, 0.2);
      else ASSERT_GT(d, 0.8);
    }
  }
  TopicModelConfig cfg;
  const auto labels = cluster(e, cfg);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(labels[i], 0);
  for (std::size_t i = 20; i < 40; ++i) EXPECT_EQ(labels[i], 1);
}

TEST(Cluster, IsolatedPointBecomesOutlier) {
  std::vector<Embedding> e(20, Embedding({1.0, 0.0, 0.0}));
  e.push_back(Embedding({0.0, 0.0, 1.0}));
  TopicModelConfig cfg;
  cfg.min_topic_size = 10;
  const auto labels = cluster(e, cfg);
  EXPECT_EQ(labels.back(), kOutlier);
  EXPECT_EQ(std::count(labels.begin(), labels.end(), 0), 20);
}

TEST(Cluster, SingleEmbeddingIsOutlierAndEmptyIsError) {
  TopicModelConfig cfg;
  cfg.min_topic_size = 2;
  std::vector<Embedding> one{Embedding({1.0, 0.0})};
  EXPECT_EQ(cluster(one, cfg), std::vector<int>{kOutlier});
  EXPECT_THROW(cluster(std::vector<Embedding>{}, cfg), InputError);
}

TEST(Cluster, MatchesBruteForceAverageLinkage) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 12; ++trial) {
    std::vector<Embedding> e;
    const std::size_t groups = 2 + gen() % 4;
    const std::size_t n = 15 + gen() % 25;
    for (std::size_t i = 0; i < n; ++i) e.push_back(jittered(gen() % groups, 8, gen, 0.35));
    TopicModelConfig cfg;
    cfg.min_topic_size = 2;
    cfg.distance_threshold = 0.3 + 0.1 * double(trial % 5);
    const auto want = filter_small_clusters(naive_average_linkage(e, cfg.distance_threshold),
                                            cfg.min_topic_size);
    EXPECT_EQ(partition(cluster(e, cfg)), partition(want)) << "trial " << trial;
  }
}

TEST(Cluster, PluggableClusterer) {
  struct Halves : Clusterer {
    std::vector<int> cluster(std::span<const Embedding> e, const TopicModelConfig&) const override {
      std::vector<int> out(e.size());
      for (std::size_t i = 0; i < e.size(); ++i) out[i] = i < e.size() / 2 ? 0 : 1;
      return out;
    }
  };
  register_clusterer("halves", [] { return std::make_unique<Halves>(); });
  TopicModelConfig cfg;
  cfg.clustering = "halves";
  cfg.min_topic_size = 2;
  std::vector<Embedding> e(6, Embedding({1.0, 0.0}));
  EXPECT_EQ(cluster(e, cfg), (std::vector<int>{0, 0, 0, 1, 1, 1}));
  cfg.clustering = "nope";
  EXPECT_THROW(cluster(e, cfg), InputError);
}

TEST(ExtractTopicTerms, HandEvaluatedTwoClusterExample) {
  TopicModelConfig cfg;
  cfg.n_grams_range = {1, 1};
  cfg.top_n_words = 2;
  const std::vector<std::string> a{"gol gol jogo"};
  const std::vector<std::string> all{"gol gol jogo", "banco juros"};
  const auto terms = extract_topic_terms(a, all, cfg);
  ASSERT_EQ(terms.size(), 2u);
  // A = (3 + 2) / 2; W(gol) = 2 ln(1 + 2.5/2), W(jogo) = ln(1 + 2.5/1).
  EXPECT_EQ(terms[0].term, "gol");
  EXPECT_NEAR(terms[0].weight, 1.6218604324326575, 1e-12);
  EXPECT_EQ(terms[1].term, "jogo");
  EXPECT_NEAR(terms[1].weight, 1.252762968495368, 1e-12);
}

TEST(ExtractTopicTerms, WholeCorpusClusterRanksByFrequency) {
  TopicModelConfig cfg;
  cfg.n_grams_range = {1, 1};
  cfg.top_n_words = 10;
  const std::vector<std::string> docs{"a a a b b c", "a b d d d d"};
  const auto terms = extract_topic_terms(docs, docs, cfg);
  std::vector<std::string> order;
  for (const auto& t : terms) order.push_back(t.term);
  // tf: a=4, d=4, b=3, c=1; ties lexicographic.
  EXPECT_EQ(order, (std::vector<std::string>{"a", "d", "b", "c"}));
  for (std::size_t i = 1; i < terms.size(); ++i) EXPECT_GE(terms[i - 1].weight, terms[i].weight);
}

TEST(ExtractTopicTerms, ClampsToVocabularyAndRejectsEmptyVocabulary) {
  TopicModelConfig cfg;
  cfg.n_grams_range = {1, 2};
  cfg.top_n_words = 50;
  const std::vector<std::string> docs{"x y"};
  EXPECT_EQ(extract_topic_terms(docs, docs, cfg).size(), 3u);  // x, y, "x y"
  cfg.stopwords = {"x", "y"};
  EXPECT_THROW(extract_topic_terms(docs, docs, cfg), InputError);
}

TEST(ExtractTopicTerms, ExclusiveTermOutweighsSharedTermOfEqualFrequency) {
  TopicModelConfig cfg;
  cfg.n_grams_range = {1, 1};
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t tf = 1 + gen() % 5;
    std::string cluster_doc, other_doc = "filler";
    for (std::size_t i = 0; i < tf; ++i) cluster_doc += " exclusive shared";
    for (std::size_t i = 0, n = 1 + gen() % 5; i < n; ++i) other_doc += " shared";
    const std::vector<std::string> c{cluster_doc};
    const std::vector<std::string> all{cluster_doc, other_doc};
    double w_excl = 0, w_shared = 0;
    for (const auto& t : extract_topic_terms(c, all, cfg)) {
      if (t.term == "exclusive") w_excl = t.weight;
      if (t.term == "shared") w_shared = t.weight;
    }
    EXPECT_GT(w_excl, w_shared);
  }
}

TEST(ClassTfidf, NGramsStayInsideDocuments) {
  TopicModelConfig cfg;
  cfg.n_grams_range = {2, 2};
  const std::vector<std::vector<std::string_view>> classes{{"a b", "c d"}};
  const auto terms = class_tfidf(classes, cfg);
  ASSERT_EQ(terms[0].size(), 2u);
  for (const auto& t : terms[0]) EXPECT_NE(t.term, "b c");
}

class ThreeTopicFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    fx_ = testing::make_three_topic_fixture();
    embeddings_ = embed_all(fx_.corpus);
  }
  testing::SyntheticFixture fx_;
  std::vector<Embedding> embeddings_;
  EmbedderSpec spec_;
};

TEST_F(ThreeTopicFixture, FixtureIsSeparableAtDefaultThreshold) {
  // Average cross-class distance must clear the threshold by a margin and
  // average within-class distance must stay below it.
  TopicModelConfig cfg;
  double intra = 0, inter = 0;
  std::size_t ni = 0, nx = 0;
  for (std::size_t i = 0; i < embeddings_.size(); ++i) {
    for (std::size_t j = i + 1; j < embeddings_.size(); ++j) {
      const double d = 1.0 - embedding::cosine_similarity(embeddings_[i], embeddings_[j]);
      if (fx_.classes[i] == fx_.classes[j]) {
        intra += d;
        ++ni;
      } else {
        inter += d;
        ++nx;
      }
    }
  }
  EXPECT_LT(intra / double(ni), cfg.distance_threshold - 0.1);
  EXPECT_GT(inter / double(nx), cfg.distance_threshold + 0.1);
}

TEST_F(ThreeTopicFixture, FitFindsThreeTopics) {
  const auto model = fit(fx_.corpus.unlabeled(), embeddings_, TopicModelConfig{}, spec_);
  ASSERT_EQ(model.num_topics(), 3u);
  std::size_t total = model.outlier_count();
  for (const auto& t : model.topics()) {
    EXPECT_NEAR(double(t.size), 100.0, 5.0);
    EXPECT_LE(t.terms.size(), 20u);
    EXPECT_NEAR(t.centroid.norm(), 1.0, 1e-12);
    for (std::size_t i = 1; i < t.terms.size(); ++i) {
      EXPECT_GE(t.terms[i - 1].weight, t.terms[i].weight);
    }
    total += t.size;
  }
  EXPECT_EQ(total, fx_.corpus.size());
  // Topic k's top term comes from one class vocabulary.
  const auto& vocab = testing::class_vocabularies();
  for (const auto& t : model.topics()) {
    std::size_t hits = 0;
    for (const auto& v : vocab) hits += std::count(v.begin(), v.end(), t.terms[0].term);
    EXPECT_EQ(hits, 1u) << t.terms[0].term;
  }
}

TEST_F(ThreeTopicFixture, EncoderAgreesWithClusters) {
  const auto model = fit(fx_.corpus.unlabeled(), embeddings_, TopicModelConfig{}, spec_);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < embeddings_.size(); ++i) {
    const auto omega = model.encode(embeddings_[i]);
    double s = 0;
    for (double w : omega.weights) {
      EXPECT_GE(w, 0.0);
      s += w;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
    const auto best = std::max_element(omega.weights.begin(), omega.weights.end()) -
                      omega.weights.begin();
    if (best == model.assignments()[i]) ++agree;
  }
  EXPECT_GE(double(agree), 0.9 * double(embeddings_.size()));
}

TEST_F(ThreeTopicFixture, CentroidOfTopicTwoEncodesToTopicTwo) {
  const auto model = fit(fx_.corpus.unlabeled(), embeddings_, TopicModelConfig{}, spec_);
  const auto omega = model.encode(model.topics()[2].centroid);
  EXPECT_EQ(std::max_element(omega.weights.begin(), omega.weights.end()) - omega.weights.begin(), 2);

  std::string text;
  for (const auto& t : model.topics()[2].terms) text += t.term + " ";
  HashingEmbedder e(spec_);
  const auto w = topic_encoder("q", text, model, e).weights;
  EXPECT_EQ(std::max_element(w.begin(), w.end()) - w.begin(), 2);
}

TEST_F(ThreeTopicFixture, FitIsDeterministicAndSerializes) {
  const auto a = fit(fx_.corpus.unlabeled(), embeddings_, TopicModelConfig{}, spec_);
  const auto b = fit(fx_.corpus.unlabeled(), embeddings_, TopicModelConfig{}, spec_);
  EXPECT_EQ(a.to_json(), b.to_json());
  const auto back = FittedTopicModel::from_json(a.to_json());
  EXPECT_EQ(back.to_json(), a.to_json());
  EXPECT_EQ(back.num_topics(), 3u);
}

TEST(Fit, CorpusTooSmall) {
  corpus::Corpus c({{"1", "a", {}}, {"2", "b", {}}, {"3", "c", {}}, {"4", "d", {}}, {"5", "e", {}}});
  const auto e = embed_all(c, 16);
  try {
    fit(c.unlabeled(), e, TopicModelConfig{}, EmbedderSpec{});
    FAIL();
  } catch (const InputError& err) {
    EXPECT_NE(std::string(err.what()).find("corpus too small"), std::string::npos);
  }
}

TEST(Fit, IdenticalDocumentsGiveOneTopicWithWarning) {
  std::vector<corpus::Document> docs;
  for (int i = 0; i < 12; ++i) docs.push_back({std::to_string(i), "mesma notícia de sempre", {}});
  corpus::Corpus c(std::move(docs));
  const auto model = fit(c.unlabeled(), embed_all(c, 32), TopicModelConfig{}, EmbedderSpec{});
  ASSERT_EQ(model.num_topics(), 1u);
  EXPECT_EQ(model.topics()[0].size, 12u);
  EXPECT_FALSE(model.warnings().empty());
  EXPECT_EQ(model.encode(model.topics()[0].centroid).weights, std::vector<double>{1.0});
}

TEST(Encode, OrthogonalDocumentFallsBackToUniform) {
  TopicModelConfig cfg;
  std::vector<Topic> topics{{0, {{"a", 1.0}}, Embedding({1.0, 0.0, 0.0}), 10},
                            {1, {{"b", 1.0}}, Embedding({0.0, 1.0, 0.0}), 10}};
  FittedTopicModel model(cfg, EmbedderSpec{}, std::move(topics), 0);
  const auto omega = model.encode(Embedding({0.0, 0.0, 1.0}));
  EXPECT_TRUE(omega.fallback);
  EXPECT_EQ(omega.weights, (std::vector<double>{0.5, 0.5}));
  const auto neg = model.encode(Embedding({-1.0, -1.0, 0.0}));
  EXPECT_TRUE(neg.fallback);
}

TEST(Encode, SharpeningFollowsFormula) {
  TopicModelConfig cfg;
  cfg.sharpening = 4.0;
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<Topic> topics{{0, {{"a", 1.0}}, Embedding({1.0, 0.0}), 10},
                            {1, {{"b", 1.0}}, Embedding({s, s}), 10}};
  FittedTopicModel model(cfg, EmbedderSpec{}, std::move(topics), 0);
  const double c = 0.6;  // doc (0.6, 0.8): cos with e1 = 0.6, with diag = 1.4/sqrt(2)
  const double d = 1.4 * s;
  const auto omega = model.encode(Embedding({0.6, 0.8}));
  const double w0 = std::pow(c, 4), w1 = std::pow(d, 4);
  EXPECT_NEAR(omega.weights[0], w0 / (w0 + w1), 1e-12);
  EXPECT_NEAR(omega.weights[1], w1 / (w0 + w1), 1e-12);
  EXPECT_FALSE(omega.fallback);
}

TEST(Artifact, RejectsUnknownVersion) {
  TopicModelConfig cfg;
  std::vector<Topic> topics{{0, {{"a", 1.0}}, Embedding({1.0, 0.0}), 10}};
  FittedTopicModel model(cfg, EmbedderSpec{}, std::move(topics), 0);
  auto j = model.to_json();
  const auto pos = j.find("\"version\":1");
  ASSERT_NE(pos, std::string::npos);
  j.replace(pos, 11, "\"version\":9");
  EXPECT_THROW(FittedTopicModel::from_json(j), InputError);
}

TEST(Config, Validation) {
  TopicModelConfig c;
  c.n_grams_range = {2, 1};
  EXPECT_THROW(c.validate(), InputError);
  c = {};
  c.min_topic_size = 1;
  EXPECT_THROW(c.validate(), InputError);
  c = {};
  c.top_n_words = 0;
  EXPECT_THROW(c.validate(), InputError);
  EXPECT_NO_THROW(TopicModelConfig{}.validate());
}

}  // namespace
}  // namespace topiczero::topic_model
