#include "tsgraph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tsgraph {

using nlohmann::json;

namespace {

MetricsBlock block_for(const std::vector<int>& pred, const std::vector<int>& truth,
                       int positive) {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == positive;
    const bool t = truth[i] == positive;
    if (p && t) ++tp;
    else if (p && !t) ++fp;
    else if (!p && t) ++fn;
    else ++tn;
  }
  MetricsBlock b;
  if (tp + fp == 0) {
    b.zero_division = true;
  } else {
    b.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (tp + fn == 0) {
    b.zero_division = true;
  } else {
    b.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  b.accuracy = static_cast<double>(tp + tn) / static_cast<double>(pred.size());
  return b;
}

AggregateStat stat_of(const std::vector<double>& xs) {
  AggregateStat s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  var /= static_cast<double>(xs.size());
  s.stddev = std::sqrt(var);
  return s;
}

json block_to_json(const MetricsBlock& b) {
  return json{{"precision", b.precision},
              {"recall", b.recall},
              {"accuracy", b.accuracy},
              {"zero_division", b.zero_division}};
}

MetricsBlock block_from_json(const json& j) {
  MetricsBlock b;
  b.precision = j.at("precision").get<double>();
  b.recall = j.at("recall").get<double>();
  b.accuracy = j.at("accuracy").get<double>();
  b.zero_division = j.value("zero_division", false);
  return b;
}

}  // namespace

Metrics evaluate_binary(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.empty() || pred.size() != truth.size()) {
    throw std::invalid_argument("evaluate_binary: prediction/truth size mismatch");
  }
  Metrics m;
  m.positive1 = block_for(pred, truth, 1);
  m.positive0 = block_for(pred, truth, 0);
  return m;
}

Report aggregate_runs(const std::vector<Metrics>& runs) {
  return aggregate_runs(runs, runs.size() == 10);
}

Report aggregate_runs(const std::vector<Metrics>& runs, bool drop_extremes) {
  if (runs.empty()) throw std::invalid_argument("aggregate_runs: no runs");
  if (drop_extremes && runs.size() < 3) {
    throw std::invalid_argument("aggregate_runs: dropping extremes needs at least 3 runs");
  }
  std::vector<std::size_t> keep(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) keep[i] = i;
  if (drop_extremes) {
    std::size_t best = 0, worst = 0;
    for (std::size_t i = 1; i < runs.size(); ++i) {
      if (runs[i].positive1.accuracy > runs[best].positive1.accuracy) best = i;
      if (runs[i].positive1.accuracy < runs[worst].positive1.accuracy) worst = i;
    }
    keep.erase(std::remove_if(keep.begin(), keep.end(),
                              [&](std::size_t i) { return i == best || i == worst; }),
               keep.end());
  }

  auto gather = [&](auto&& get) {
    std::vector<double> xs;
    xs.reserve(keep.size());
    for (std::size_t i : keep) xs.push_back(get(runs[i]));
    return stat_of(xs);
  };

  Report r;
  r.runs_total = runs.size();
  r.runs_used = keep.size();
  r.extremes_dropped = drop_extremes;
  r.positive1.precision = gather([](const Metrics& m) { return m.positive1.precision; });
  r.positive1.recall = gather([](const Metrics& m) { return m.positive1.recall; });
  r.positive1.accuracy = gather([](const Metrics& m) { return m.positive1.accuracy; });
  r.positive0.precision = gather([](const Metrics& m) { return m.positive0.precision; });
  r.positive0.recall = gather([](const Metrics& m) { return m.positive0.recall; });
  r.positive0.accuracy = gather([](const Metrics& m) { return m.positive0.accuracy; });
  return r;
}

std::string render_metrics(const Metrics& m, const std::string& title) {
  std::ostringstream os;
  os.precision(3);
  os << std::fixed;
  os << title << '\n';
  os << "                    Precision  Recall  Accuracy\n";
  os << "Positive class = 1    " << m.positive1.precision << "    " << m.positive1.recall
     << "   " << m.positive1.accuracy << '\n';
  os << "Positive class = 0    " << m.positive0.precision << "    " << m.positive0.recall
     << "   " << m.positive0.accuracy << '\n';
  return os.str();
}

std::string render_report(const Report& r, const std::string& title) {
  auto cell = [](const AggregateStat& s) {
    std::ostringstream os;
    os.precision(3);
    os << std::fixed << s.mean << " +/- " << s.stddev;
    return os.str();
  };
  std::ostringstream os;
  os << title << '\n';
  os << "runs: " << r.runs_total << ", used: " << r.runs_used
     << (r.extremes_dropped ? " (best and worst dropped)" : "") << '\n';
  os << "                    Precision          Recall             Accuracy\n";
  os << "Positive class = 1  " << cell(r.positive1.precision) << "    "
     << cell(r.positive1.recall) << "    " << cell(r.positive1.accuracy) << '\n';
  os << "Positive class = 0  " << cell(r.positive0.precision) << "    "
     << cell(r.positive0.recall) << "    " << cell(r.positive0.accuracy) << '\n';
  return os.str();
}

void save_metrics_json(const Metrics& m, const std::filesystem::path& path) {
  json doc{{"positive1", block_to_json(m.positive1)},
           {"positive0", block_to_json(m.positive0)}};
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("save_metrics_json: cannot open " + path.string());
  os << doc.dump(2) << '\n';
}

Metrics load_metrics_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_metrics_json: cannot open " + path.string());
  json doc = json::parse(is);
  Metrics m;
  m.positive1 = block_from_json(doc.at("positive1"));
  m.positive0 = block_from_json(doc.at("positive0"));
  return m;
}

void save_report_json(const Report& r, const std::filesystem::path& path) {
  auto stat = [](const AggregateStat& s) {
    return json{{"mean", s.mean}, {"std", s.stddev}};
  };
  json doc{{"runs_total", r.runs_total},
           {"runs_used", r.runs_used},
           {"extremes_dropped", r.extremes_dropped},
           {"positive1",
            {{"precision", stat(r.positive1.precision)},
             {"recall", stat(r.positive1.recall)},
             {"accuracy", stat(r.positive1.accuracy)}}},
           {"positive0",
            {{"precision", stat(r.positive0.precision)},
             {"recall", stat(r.positive0.recall)},
             {"accuracy", stat(r.positive0.accuracy)}}}};
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("save_report_json: cannot open " + path.string());
  os << doc.dump(2) << '\n';
}

}  // namespace tsgraph
