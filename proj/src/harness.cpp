#include "biascal/harness.hpp"

#include <algorithm>
#include <cmath>

#include "biascal/error.hpp"
#include "biascal/parallel.hpp"
#include "biascal/rng.hpp"
#include <spdlog/spdlog.h>

namespace biascal {

void RunSpec::validate() const {
  if (seeds.empty()) throw ConfigError("run needs at least one seed");
  if (methods.empty()) throw ConfigError("run needs at least one method");
  if (eval_cap == 0) throw ConfigError("eval_cap must be >= 1");
  if (m_samples == 0) throw ConfigError("m_samples must be >= 1");
  if (bias_samples == 0) throw ConfigError("bias_samples must be >= 1");
  if (bag_cap && *bag_cap == 0) throw ConfigError("corpus size cap must be >= 1");
  if (cal_length && *cal_length == 0) throw ConfigError("calibration length must be >= 1");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (methods[i] == methods[j]) throw ConfigError("method '" + to_string(methods[i]) + "' listed twice");
    }
  }
  method(CalibrationVariant::cc).validate();
}

CalibrationMethod RunSpec::method(CalibrationVariant v) const {
  CalibrationMethod m;
  m.variant = v;
  m.content_free_token = cc_token;
  m.m_samples = v == CalibrationVariant::cc ? 1 : m_samples;
  m.length_override = cal_length;
  return m;
}

bool EvalReport::has_errors() const {
  return std::any_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.error.has_value(); }) ||
         std::any_of(bias.begin(), bias.end(), [](const BiasCell& c) { return c.error.has_value(); });
}

bool BiasScanResult::has_errors() const {
  return std::any_of(cells.begin(), cells.end(), [](const BiasCell& c) { return c.error.has_value(); });
}

std::pair<double, double> mean_std(std::span<const double> xs) {
  if (xs.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  if (xs.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

namespace {

// Uniform subset of `count` positions out of [0, n), ascending.
std::vector<std::size_t> draw_subset(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct DatasetInputs {
  const Dataset* dataset = nullptr;
  std::vector<std::size_t> eval_idx;
  std::vector<std::string> corpus;  // unlabeled texts for the bag
  std::size_t length = 1;           // dataset average length
};

DatasetInputs prepare(const Dataset& ds, std::size_t eval_cap) {
  DatasetInputs in;
  in.dataset = &ds;
  in.eval_idx = evaluation_indices(ds, eval_cap);
  in.corpus = ds.texts();
  in.length = avg_length(in.corpus);
  return in;
}

struct CellOutput {
  std::vector<CellResult> cells;
  std::vector<ExampleRecord> records;
};

CellOutput run_cell(const RunSpec& spec, const DatasetInputs& in, const Backend& backend, const WordList& words,
                    std::uint64_t seed) {
  const Dataset& ds = *in.dataset;
  CellOutput out;
  try {
    if (in.eval_idx.empty()) throw EmptyDatasetError("dataset '" + ds.id + "' has no labeled evaluation examples");

    std::vector<std::string> bag_texts;
    if (spec.bag_cap && *spec.bag_cap < in.corpus.size()) {
      Rng bag_rng = make_rng(seed, "bag/" + ds.id);
      for (std::size_t i : draw_subset(in.corpus.size(), *spec.bag_cap, bag_rng)) bag_texts.push_back(in.corpus[i]);
    } else {
      bag_texts = in.corpus;
    }
    const BagOfWords bag = build_bag(bag_texts, ds.id);
    const ContextPrompt context = build_context(ds, spec.k, seed);

    std::vector<LabelScores> scores(in.eval_idx.size());
    parallel_for(in.eval_idx.size(), backend.max_parallel(), [&](std::size_t i) {
      const Example& ex = ds.examples[in.eval_idx[i]];
      scores[i] = score_labels(backend, render_prompt(ds.prompt_template, context, ds.label_set, ex.text),
                               ds.label_set);
    });

    std::vector<std::size_t> golds;
    golds.reserve(in.eval_idx.size());
    for (std::size_t i : in.eval_idx) golds.push_back(*ds.examples[i].gold);

    for (CalibrationVariant v : spec.methods) {
      CellResult cell;
      cell.dataset_id = ds.id;
      cell.method = v;
      cell.seed = seed;
      cell.k = spec.k;
      cell.context_seed = context.seed;
      cell.n_examples = in.eval_idx.size();

      std::optional<PriorEstimate> prior;
      if (v != CalibrationVariant::none) {
        Rng rng = make_rng(seed, "prior/" + ds.id + "/" + to_string(v));
        const WordSource source = v == CalibrationVariant::dc_indomain ? WordSource(std::cref(bag))
                                                                        : WordSource(std::cref(words));
        prior = estimate_prior(backend, ds.prompt_template, context, ds.label_set, spec.method(v), source,
                               in.length, rng);
        cell.prior = prior->prior;
      }
      std::vector<std::size_t> preds(scores.size());
      for (std::size_t i = 0; i < scores.size(); ++i) {
        preds[i] = prior ? calibrated_predict(scores[i], *prior) : predict_uncalibrated(scores[i]);
      }
      cell.macro_f1 = macro_f1(preds, golds, ds.label_set.size());
      cell.distribution = prediction_distribution(preds, ds.label_set.size());
      for (std::size_t i = 0; i < scores.size(); ++i) {
        out.records.push_back(ExampleRecord{ds.id, seed, v, in.eval_idx[i], scores[i].probs, cell.prior, preds[i],
                                            golds[i]});
      }
      out.cells.push_back(std::move(cell));
    }
  } catch (const std::exception& e) {
    spdlog::error("dataset '{}' seed {}: {}", ds.id, seed, e.what());
    out.records.clear();
    out.cells.clear();
    for (CalibrationVariant v : spec.methods) {
      CellResult cell;
      cell.dataset_id = ds.id;
      cell.method = v;
      cell.seed = seed;
      cell.k = spec.k;
      cell.context_seed = seed;
      cell.error = e.what();
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

Dataset relabeled(const Dataset& ds, const RunSpec& spec) {
  return spec.label_override ? ds.with_label_names(*spec.label_override) : ds;
}

}  // namespace

std::vector<std::size_t> evaluation_indices(const Dataset& dataset, std::size_t cap) {
  std::vector<std::size_t> labeled;
  for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
    if (dataset.examples[i].gold) labeled.push_back(i);
  }
  if (labeled.size() <= cap) return labeled;
  Rng rng = make_rng(kSubsampleSeed, "subsample/" + dataset.id);
  std::vector<std::size_t> out;
  out.reserve(cap);
  for (std::size_t pos : draw_subset(labeled.size(), cap, rng)) out.push_back(labeled[pos]);
  return out;
}

EvalReport run_eval(const RunSpec& spec, const std::vector<Dataset>& datasets, const Backend& backend,
                    const WordList& words) {
  spec.validate();
  EvalReport report;
  std::vector<Dataset> effective;
  effective.reserve(datasets.size());

  for (const Dataset& original : datasets) {
    std::optional<DatasetInputs> inputs;
    std::string setup_error;
    try {
      effective.push_back(relabeled(original, spec));
      inputs = prepare(effective.back(), spec.eval_cap);
    } catch (const std::exception& e) {
      setup_error = e.what();
      spdlog::error("dataset '{}': {}", original.id, setup_error);
    }
    for (std::uint64_t seed : spec.seeds) {
      if (!inputs) {
        for (CalibrationVariant v : spec.methods) {
          CellResult cell;
          cell.dataset_id = original.id;
          cell.method = v;
          cell.seed = seed;
          cell.k = spec.k;
          cell.error = setup_error;
          report.cells.push_back(std::move(cell));
        }
        continue;
      }
      spdlog::info("dataset '{}' seed {}: scoring {} examples", original.id, seed, inputs->eval_idx.size());
      auto out = run_cell(spec, *inputs, backend, words, seed);
      std::move(out.cells.begin(), out.cells.end(), std::back_inserter(report.cells));
      std::move(out.records.begin(), out.records.end(), std::back_inserter(report.examples));
    }

    for (CalibrationVariant v : spec.methods) {
      std::vector<double> f1s;
      for (const CellResult& c : report.cells) {
        if (c.dataset_id == original.id && c.method == v && !c.error) f1s.push_back(c.macro_f1);
      }
      const auto [mean, sd] = mean_std(f1s);
      report.aggregates.push_back(Aggregate{original.id, v, f1s.size(), mean, sd});
    }
  }

  if (spec.bias_tiers && !effective.empty()) {
    const auto scan = run_bias_scan(effective, {&backend}, words, spec.bias_samples, spec.bias_seed);
    report.bias = scan.cells;
    report.tier_of = scan.tier_of;
    for (BiasTier tier : {BiasTier::small, BiasTier::medium, BiasTier::large}) {
      for (CalibrationVariant v : spec.methods) {
        TierMean tm{tier, v, 0, 0.0};
        double sum = 0.0;
        for (const Aggregate& a : report.aggregates) {
          auto it = report.tier_of.find(a.dataset_id);
          if (a.method != v || a.n_seeds == 0 || it == report.tier_of.end() || it->second != tier) continue;
          sum += a.mean_f1;
          ++tm.n_datasets;
        }
        if (tm.n_datasets) tm.mean_f1 = sum / static_cast<double>(tm.n_datasets);
        report.tier_means.push_back(tm);
      }
    }
  }
  return report;
}

BiasScanResult run_bias_scan(const std::vector<Dataset>& datasets, const std::vector<const Backend*>& backends,
                             const WordList& words, std::size_t n_samples, std::uint64_t seed) {
  if (datasets.empty()) throw ConfigError("bias scan needs at least one dataset");
  if (backends.empty()) throw ConfigError("bias scan needs at least one backend");
  BiasScanResult result;
  for (const Backend* b : backends) result.model_ids.push_back(b->model_id());

  for (const Dataset& ds : datasets) {
    for (const Backend* b : backends) {
      BiasCell cell{ds.id, b->model_id(), std::nullopt, std::nullopt};
      try {
        // Same random texts for every model, so models are compared on
        // identical inputs.
        Rng rng = make_rng(seed, "bias/" + ds.id);
        cell.score = domain_label_bias(*b, ds, words, n_samples, rng);
      } catch (const std::exception& e) {
        spdlog::error("bias scan '{}' / '{}': {}", ds.id, b->model_id(), e.what());
        cell.error = e.what();
      }
      result.cells.push_back(std::move(cell));
    }
  }

  const std::size_t n_models = backends.size();
  auto column = [&](std::size_t m) {
    std::vector<const BiasCell*> out;
    for (std::size_t i = m; i < result.cells.size(); i += n_models) out.push_back(&result.cells[i]);
    return out;
  };

  std::vector<BiasScore> first;
  for (const BiasCell* c : column(0)) {
    if (c->score) first.push_back(*c->score);
  }
  if (!first.empty()) {
    const Tiers tiers = stratify(first);
    for (const auto& s : tiers.small) result.tier_of[s.dataset_id] = BiasTier::small;
    for (const auto& s : tiers.medium) result.tier_of[s.dataset_id] = BiasTier::medium;
    for (const auto& s : tiers.large) result.tier_of[s.dataset_id] = BiasTier::large;
  }

  result.correlation.assign(n_models, std::vector<std::optional<double>>(n_models));
  for (std::size_t a = 0; a < n_models; ++a) {
    for (std::size_t b = 0; b < n_models; ++b) {
      const auto ca = column(a);
      const auto cb = column(b);
      std::vector<BiasScore> sa, sb;
      for (std::size_t i = 0; i < ca.size(); ++i) {
        if (ca[i]->score && cb[i]->score) {
          sa.push_back(*ca[i]->score);
          sb.push_back(*cb[i]->score);
        }
      }
      try {
        result.correlation[a][b] = bias_correlation(sa, sb);
      } catch (const MetricError&) {
        result.correlation[a][b] = std::nullopt;
      }
    }
  }
  return result;
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::m_samples: return "m_samples";
    case SweepAxis::corpus_size: return "corpus_size";
    case SweepAxis::cal_length: return "cal_length";
  }
  return "?";
}

SweepAxis parse_sweep_axis(const std::string& s) {
  if (s == "m_samples" || s == "m-samples") return SweepAxis::m_samples;
  if (s == "corpus_size" || s == "corpus-size") return SweepAxis::corpus_size;
  if (s == "cal_length" || s == "cal-length") return SweepAxis::cal_length;
  throw ConfigError("unknown sweep axis '" + s + "' (expected m_samples, corpus_size or cal_length)");
}

std::vector<SweepPoint> run_sensitivity(const Dataset& dataset, const Backend& backend, const WordList& words,
                                        const RunSpec& base, SweepAxis axis, const std::vector<std::size_t>& grid) {
  if (grid.empty()) throw ConfigError("sensitivity grid is empty");
  const Dataset ds = relabeled(dataset, base);
  const DatasetInputs inputs = prepare(ds, base.eval_cap);
  const CalibrationVariant method =
      axis == SweepAxis::cal_length ? CalibrationVariant::dc_english : CalibrationVariant::dc_indomain;

  std::vector<SweepPoint> points;
  for (std::size_t value : grid) {
    RunSpec spec = base;
    spec.methods = {method};
    spec.bias_tiers = false;
    switch (axis) {
      case SweepAxis::m_samples: spec.m_samples = value; break;
      case SweepAxis::corpus_size: spec.bag_cap = value == 0 ? std::nullopt : std::optional<std::size_t>(value); break;
      case SweepAxis::cal_length: spec.cal_length = value; break;
    }
    spec.validate();

    SweepPoint pt;
    pt.value = value;
    pt.method = method;
    for (std::uint64_t seed : spec.seeds) {
      const auto out = run_cell(spec, inputs, backend, words, seed);
      const CellResult& cell = out.cells.front();
      if (cell.error) {
        ++pt.n_errors;
        continue;
      }
      pt.f1_per_seed.push_back(cell.macro_f1);
      pt.prior_per_seed.push_back(*cell.prior);
    }
    std::tie(pt.mean_f1, pt.std_f1) = mean_std(pt.f1_per_seed);
    if (pt.prior_per_seed.size() >= 2) {
      for (std::size_t y = 0; y < ds.label_set.size(); ++y) {
        std::vector<double> col;
        for (const auto& p : pt.prior_per_seed) col.push_back(p[y]);
        const double sd = mean_std(col).second;
        pt.prior_variance += sd * sd;
      }
    }
    points.push_back(std::move(pt));
  }
  return points;
}

}  // namespace biascal
