#include "biascal/report.hpp"

#include <fstream>

#include <fmt/format.h>

#include "biascal/error.hpp"

namespace biascal {
namespace fs = std::filesystem;

std::string format_double(double x) { return fmt::format("{}", x); }

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write report file: " + path.string());
  return out;
}

// CSV field quoting for free text (error messages).
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + "\"";
}

std::string join(const std::vector<double>& xs, char sep = ';') {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += format_double(xs[i]);
  }
  return out;
}

std::string join_counts(const std::vector<std::size_t>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(xs[i]);
  }
  return out;
}

std::string tier_name(const std::map<std::string, BiasTier>& tiers, const std::string& id) {
  auto it = tiers.find(id);
  return it == tiers.end() ? "" : to_string(it->second);
}

void write_bias_rows(std::ofstream& out, const std::vector<BiasCell>& cells,
                     const std::map<std::string, BiasTier>& tiers) {
  out << "dataset_id,model_id,bias,tier,length,n_samples,error\n";
  for (const BiasCell& c : cells) {
    out << csv_field(c.dataset_id) << ',' << csv_field(c.model_id) << ',';
    if (c.score) {
      out << format_double(c.score->value) << ',' << tier_name(tiers, c.dataset_id) << ',' << c.score->length << ','
          << c.score->n_samples << ',';
    } else {
      out << ",,,,";
    }
    out << csv_field(c.error.value_or("")) << '\n';
  }
}

}  // namespace

void write_eval_report(const EvalReport& report, const nlohmann::ordered_json& header, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  {
    auto out = open_out(out_dir / kExamplesFile);
    nlohmann::ordered_json head = {{"record", "header"}, {"config", header}};
    out << head.dump() << '\n';
    for (const ExampleRecord& r : report.examples) {
      nlohmann::ordered_json j;
      j["record"] = "example";
      j["dataset"] = r.dataset_id;
      j["seed"] = r.seed;
      j["method"] = to_string(r.method);
      j["index"] = r.index;
      j["scores"] = r.scores;
      j["prior"] = r.prior ? nlohmann::ordered_json(*r.prior) : nlohmann::ordered_json(nullptr);
      j["prediction"] = r.prediction;
      j["gold"] = r.gold;
      out << j.dump() << '\n';
    }
  }
  {
    auto out = open_out(out_dir / kCellsFile);
    out << "dataset_id,method,seed,k,n_examples,macro_f1,pred_counts,prior,error\n";
    for (const CellResult& c : report.cells) {
      out << csv_field(c.dataset_id) << ',' << to_string(c.method) << ',' << c.seed << ',' << c.k << ',';
      if (c.error) {
        out << ",,,," << csv_field(*c.error) << '\n';
        continue;
      }
      out << c.n_examples << ',' << format_double(c.macro_f1) << ',' << join_counts(c.distribution.counts) << ','
          << (c.prior ? join(*c.prior) : "") << ",\n";
    }
  }
  {
    auto out = open_out(out_dir / kAggregatesFile);
    out << "dataset_id,method,n_seeds,mean_macro_f1,std_macro_f1,tier\n";
    for (const Aggregate& a : report.aggregates) {
      out << csv_field(a.dataset_id) << ',' << to_string(a.method) << ',' << a.n_seeds << ','
          << format_double(a.mean_f1) << ',' << format_double(a.std_f1) << ','
          << tier_name(report.tier_of, a.dataset_id) << '\n';
    }
  }
  if (!report.bias.empty()) {
    auto out = open_out(out_dir / kBiasFile);
    write_bias_rows(out, report.bias, report.tier_of);
  }
  if (!report.tier_means.empty()) {
    auto out = open_out(out_dir / kTiersFile);
    out << "tier,method,n_datasets,mean_macro_f1\n";
    for (const TierMean& t : report.tier_means) {
      out << to_string(t.tier) << ',' << to_string(t.method) << ',' << t.n_datasets << ','
          << format_double(t.mean_f1) << '\n';
    }
  }
}

void write_bias_scan(const BiasScanResult& result, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  {
    auto out = open_out(out_dir / kBiasFile);
    write_bias_rows(out, result.cells, result.tier_of);
  }
  if (result.model_ids.size() > 1) {
    auto out = open_out(out_dir / kCorrelationFile);
    out << "model_a,model_b,pearson_r\n";
    for (std::size_t a = 0; a < result.model_ids.size(); ++a) {
      for (std::size_t b = 0; b < result.model_ids.size(); ++b) {
        out << csv_field(result.model_ids[a]) << ',' << csv_field(result.model_ids[b]) << ','
            << (result.correlation[a][b] ? format_double(*result.correlation[a][b]) : "") << '\n';
      }
    }
  }
}

void write_sweep(const std::vector<SweepPoint>& points, SweepAxis axis, const std::string& dataset_id,
                 const fs::path& out_dir) {
  fs::create_directories(out_dir);
  auto out = open_out(out_dir / kSweepFile);
  out << "dataset_id,axis,value,method,n_seeds,n_errors,mean_macro_f1,std_macro_f1,prior_variance,f1_per_seed\n";
  for (const SweepPoint& p : points) {
    out << csv_field(dataset_id) << ',' << to_string(axis) << ',' << p.value << ',' << to_string(p.method) << ','
        << p.f1_per_seed.size() << ',' << p.n_errors << ',' << format_double(p.mean_f1) << ','
        << format_double(p.std_f1) << ',' << format_double(p.prior_variance) << ',' << join(p.f1_per_seed) << '\n';
  }
}

}  // namespace biascal
