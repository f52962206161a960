#include "topiczero/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "topiczero/error.hpp"

namespace topiczero::evaluation {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string_view to_string(ExperimentId id) noexcept {
  switch (id) {
    case ExperimentId::exp1: return "exp1";
    case ExperimentId::exp2: return "exp2";
    case ExperimentId::exp3: return "exp3";
    case ExperimentId::exp4: return "exp4";
  }
  return "exp1";
}

ExperimentId parse_experiment_id(std::string_view name) {
  if (name == "exp1") return ExperimentId::exp1;
  if (name == "exp2") return ExperimentId::exp2;
  if (name == "exp3") return ExperimentId::exp3;
  if (name == "exp4") return ExperimentId::exp4;
  throw InputError("unknown experiment id '" + std::string(name) +
                   "' (expected exp1, exp2, exp3 or exp4)");
}

FoldSets ExperimentSpec::folds_for_rotation(std::size_t r) const {
  if (k < 2) throw InputError("fold count k must be at least 2");
  if (r >= k) throw InputError("rotation index out of range");
  std::set<std::size_t> one{r};
  std::set<std::size_t> rest;
  for (std::size_t f = 0; f < k; ++f) {
    if (f != r) rest.insert(f);
  }
  switch (id) {
    case ExperimentId::exp1: return {rest, rest};
    case ExperimentId::exp2: return {rest, one};
    case ExperimentId::exp3: return {one, one};
    case ExperimentId::exp4: return {one, rest};
  }
  return {};
}

Metrics weighted_metrics(std::span<const std::string> gold, std::span<const std::string> pred,
                         const LabelSet& labels) {
  if (gold.size() != pred.size()) {
    throw InputError("gold and predicted label lists differ in length (" +
                     std::to_string(gold.size()) + " vs " + std::to_string(pred.size()) + ")");
  }
  if (gold.empty()) throw InputError("cannot score an empty prediction list");
  const std::size_t m = labels.size();
  std::vector<std::size_t> tp(m, 0), predicted(m, 0), support(m, 0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto g = labels.index_of(gold[i]);
    if (!g) throw InputError("gold label '" + gold[i] + "' is not in the label set");
    auto p = labels.index_of(pred[i]);
    if (!p) throw InputError("predicted label '" + pred[i] + "' is not in the label set");
    ++support[*g];
    ++predicted[*p];
    if (*g == *p) ++tp[*g];
  }

  Metrics out;
  const double n = static_cast<double>(gold.size());
  for (std::size_t c = 0; c < m; ++c) {
    ClassMetrics cm;
    cm.label = labels[c];
    cm.support = support[c];
    cm.precision = predicted[c] ? static_cast<double>(tp[c]) / static_cast<double>(predicted[c]) : 0.0;
    cm.recall = support[c] ? static_cast<double>(tp[c]) / static_cast<double>(support[c]) : 0.0;
    const double pr = cm.precision + cm.recall;
    cm.f1 = pr > 0.0 ? 2.0 * cm.precision * cm.recall / pr : 0.0;
    const double w = static_cast<double>(support[c]) / n;
    out.weighted_precision += w * cm.precision;
    out.weighted_recall += w * cm.recall;
    out.weighted_f1 += w * cm.f1;
    out.per_class.push_back(std::move(cm));
  }
  return out;
}

namespace {

Seconds since(Clock::time_point t0) { return std::chrono::duration_cast<Seconds>(Clock::now() - t0); }

RotationResult run_rotation(const ExperimentSpec& spec, const corpus::Corpus& corpus,
                            const corpus::FoldPlan& plan, const PipelineConfig& config,
                            bool baseline, std::size_t r) {
  RotationResult result;
  result.rotation = r;
  result.folds = spec.folds_for_rotation(r);
  try {
    const auto train_set = corpus::select_folds(corpus, plan, result.folds.train);
    const auto eval_set = corpus::select_folds(corpus, plan, result.folds.eval);
    for (const auto& d : train_set) result.train_ids.push_back(d.id);
    for (const auto& d : eval_set) result.eval_ids.push_back(d.id);
    if (eval_set.empty()) throw InputError("evaluation folds are empty");

    std::vector<std::string> gold, pred;
    gold.reserve(eval_set.size());
    pred.reserve(eval_set.size());
    for (const auto& d : eval_set) gold.push_back(*d.gold_label);

    if (baseline) {
      const auto t0 = Clock::now();
      for (const auto& d : eval_set) {
        pred.push_back(zeroshot::direct_classify(d.text, config.labels, config.document_template,
                                                 *config.backend, config.max_tokens,
                                                 config.normalize)
                           .label);
      }
      result.inference_time = since(t0);
    } else {
      const auto t0 = Clock::now();
      const auto model =
          zeroshot::train(train_set.unlabeled(), config.labels, config.topic_template,
                          config.topic_model, *config.embedder, *config.backend, config.normalize);
      result.train_time = since(t0);
      result.num_topics = model.topic_model().num_topics();

      const auto t1 = Clock::now();
      std::vector<embedding::EmbedInput> inputs;
      inputs.reserve(eval_set.size());
      for (const auto& d : eval_set) inputs.push_back({d.id, d.text});
      for (const auto& p : zeroshot::predict_batch(model, inputs, *config.embedder)) {
        pred.push_back(p.label);
        if (p.topic_fallback) ++result.fallback_count;
      }
      result.inference_time = since(t1);
    }
    result.metrics = weighted_metrics(gold, pred, config.labels);
  } catch (const std::exception& e) {
    result.error = e.what();
    result.metrics.reset();
  }
  return result;
}

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var = 0.0;
  for (double x : xs) var += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(var / n);
  return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec, const corpus::Corpus& corpus,
                                const PipelineConfig& config, bool baseline,
                                const RunOptions& options) {
  if (spec.k < 2) throw InputError("fold count k must be at least 2");
  if (!config.backend) throw InputError("an entailment backend is required");
  if (!baseline && !config.embedder) throw InputError("an embedder is required");
  const auto plan = corpus::stratified_kfold(corpus, config.labels, spec.k, spec.seed);

  const std::size_t n_rot = options.single_rotation ? 1 : spec.k;
  std::vector<RotationResult> results(n_rot);
  if (options.parallel && n_rot > 1) {
    std::vector<std::future<RotationResult>> futures;
    for (std::size_t r = 0; r < n_rot; ++r) {
      futures.push_back(std::async(std::launch::async, [&, r] {
        return run_rotation(spec, corpus, plan, config, baseline, r);
      }));
    }
    for (std::size_t r = 0; r < n_rot; ++r) results[r] = futures[r].get();
  } else {
    for (std::size_t r = 0; r < n_rot; ++r) {
      results[r] = run_rotation(spec, corpus, plan, config, baseline, r);
    }
  }

  ExperimentReport report;
  report.spec = spec;
  report.baseline = baseline;
  std::vector<double> ps, rs, fs;
  for (const auto& res : results) {
    report.train_time += res.train_time;
    report.inference_time += res.inference_time;
    if (res.error) {
      ++report.failed_rotations;
      std::cerr << "warning: " << to_string(spec.id) << " rotation " << res.rotation
                << " failed: " << *res.error << '\n';
      continue;
    }
    ps.push_back(res.metrics->weighted_precision);
    rs.push_back(res.metrics->weighted_recall);
    fs.push_back(res.metrics->weighted_f1);
  }
  report.precision = mean_std(ps);
  report.recall = mean_std(rs);
  report.f1 = mean_std(fs);
  report.rotations = std::move(results);
  return report;
}

namespace {

json metrics_json(const Metrics& m) {
  json per_class = json::array();
  for (const auto& c : m.per_class) {
    per_class.push_back({{"label", c.label},
                         {"precision", c.precision},
                         {"recall", c.recall},
                         {"f1", c.f1},
                         {"support", c.support}});
  }
  return {{"weighted_precision", m.weighted_precision},
          {"weighted_recall", m.weighted_recall},
          {"weighted_f1", m.weighted_f1},
          {"per_class", std::move(per_class)}};
}

json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string ExperimentReport::to_json() const {
  json rots = json::array();
  for (const auto& r : rotations) {
    json j{{"rotation", r.rotation},
           {"train_folds", r.folds.train},
           {"eval_folds", r.folds.eval},
           {"train_size", r.train_ids.size()},
           {"eval_size", r.eval_ids.size()},
           {"num_topics", r.num_topics},
           {"fallback_count", r.fallback_count},
           {"train_time_s", r.train_time.count()},
           {"inference_time_s", r.inference_time.count()},
           {"total_time_s", r.total_time().count()}};
    if (r.metrics) j["metrics"] = metrics_json(*r.metrics);
    if (r.error) j["error"] = *r.error;
    rots.push_back(std::move(j));
  }
  const json j{{"experiment", std::string(evaluation::to_string(spec.id))},
               {"k", spec.k},
               {"seed", spec.seed},
               {"method", baseline ? "direct" : "topic"},
               {"weighted_precision", mean_std_json(precision)},
               {"weighted_recall", mean_std_json(recall)},
               {"weighted_f1", mean_std_json(f1)},
               {"train_time_s", train_time.count()},
               {"inference_time_s", inference_time.count()},
               {"total_time_s", total_time().count()},
               {"failed_rotations", failed_rotations},
               {"rotations", std::move(rots)}};
  return j.dump(2);
}

std::string ExperimentReport::to_table() const {
  std::ostringstream out;
  char line[160];
  out << to_string(spec.id) << " (" << (baseline ? "direct baseline" : "topic model")
      << ", k=" << spec.k << ", seed=" << spec.seed << ")\n";
  std::snprintf(line, sizeof line, "%-8s %8s %8s %8s %8s %10s %10s\n", "rotation", "P", "R",
                "F1", "topics", "train_s", "infer_s");
  out << line;
  for (const auto& r : rotations) {
    if (r.metrics) {
      std::snprintf(line, sizeof line, "%-8zu %8.4f %8.4f %8.4f %8zu %10.3f %10.3f\n", r.rotation,
                    r.metrics->weighted_precision, r.metrics->weighted_recall,
                    r.metrics->weighted_f1, r.num_topics, r.train_time.count(),
                    r.inference_time.count());
    } else {
      std::snprintf(line, sizeof line, "%-8zu FAILED: %.120s\n", r.rotation,
                    r.error ? r.error->c_str() : "");
    }
    out << line;
  }
  std::snprintf(line, sizeof line, "mean+-std P=%.4f+-%.4f R=%.4f+-%.4f F1=%.4f+-%.4f\n",
                precision.mean, precision.std, recall.mean, recall.std, f1.mean, f1.std);
  out << line;
  std::snprintf(line, sizeof line, "time: train %.3fs + inference %.3fs = %.3fs\n",
                train_time.count(), inference_time.count(), total_time().count());
  out << line;
  if (failed_rotations) out << failed_rotations << " rotation(s) failed\n";
  return out.str();
}

std::string export_entailment_matrix(const zeroshot::TrainedModel& model, std::size_t top_n) {
  const auto& topics = model.topic_model().topics();
  const auto& table = model.entailment_table();
  std::vector<std::size_t> order(topics.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return topics[a].size > topics[b].size;
  });
  order.resize(std::min(top_n, order.size()));

  std::string out = "topic";
  for (const auto& l : model.labels().names()) out += "," + csv_field(l);
  out += '\n';
  for (auto k : order) {
    std::string name = std::to_string(k);
    for (std::size_t t = 0; t < std::min<std::size_t>(3, topics[k].terms.size()); ++t) {
      name += "_" + topics[k].terms[t].term;
    }
    out += csv_field(name);
    for (double p : table.row(k)) out += "," + format_double(p);
    out += '\n';
  }
  return out;
}

void export_entailment_matrix(const zeroshot::TrainedModel& model, std::size_t top_n,
                              const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write matrix file '" + path.string() + "'");
  f << export_entailment_matrix(model, top_n);
  if (!f) throw InputError("failed writing matrix file '" + path.string() + "'");
}

}  // namespace topiczero::evaluation
