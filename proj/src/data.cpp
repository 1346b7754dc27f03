#include "tsgraph/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tsgraph {

using nlohmann::json;

namespace {

std::string recording_file_name(std::size_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "rec_%04zu.csv", id);
  return buf;
}

constexpr std::size_t kSmoothWindow = 20;
constexpr std::size_t kDownsampleRatio = 4;
constexpr std::size_t kUnsupervisedLookback = 25;

}  // namespace

void save_dataset(const std::vector<Record>& records,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream labels(dir / "labels.csv", std::ios::trunc);
  if (!labels) throw std::runtime_error("save_dataset: cannot open labels.csv");
  labels << "recording_id,slice_index,label\n";
  for (const Record& rec : records) {
    std::ofstream os(dir / recording_file_name(rec.recording_id), std::ios::trunc);
    if (!os) throw std::runtime_error("save_dataset: cannot open recording file");
    os.precision(17);
    os << "t,value\n";
    for (std::size_t i = 0; i < rec.samples.size(); ++i) {
      os << static_cast<double>(i) / rec.sample_rate_hz << ',' << rec.samples[i] << '\n';
    }
    for (std::size_t s = 0; s < rec.slice_labels.size(); ++s) {
      labels << rec.recording_id << ',' << s << ',' << rec.slice_labels[s] << '\n';
    }
  }
  json meta{{"sample_rate_hz", records.empty() ? 512.0 : records[0].sample_rate_hz},
            {"recordings", records.size()}};
  std::ofstream ms(dir / "meta.json", std::ios::trunc);
  ms << meta.dump(2) << '\n';
}

std::vector<Record> load_dataset(const std::filesystem::path& dir) {
  std::ifstream labels(dir / "labels.csv");
  if (!labels) throw std::runtime_error("load_dataset: missing labels.csv in " + dir.string());
  double sample_rate = 512.0;
  {
    std::ifstream ms(dir / "meta.json");
    if (ms) {
      json meta = json::parse(ms);
      sample_rate = meta.value("sample_rate_hz", 512.0);
    }
  }

  std::map<std::size_t, std::vector<std::pair<std::size_t, int>>> label_map;
  std::string line;
  std::getline(labels, line);  // header
  while (std::getline(labels, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t rec_id = 0, slice = 0;
    int label = 0;
    char comma;
    if (!(ls >> rec_id >> comma >> slice >> comma >> label)) {
      throw std::runtime_error("load_dataset: malformed label line: " + line);
    }
    label_map[rec_id].emplace_back(slice, label);
  }

  std::vector<Record> records;
  for (auto& [rec_id, slice_labels] : label_map) {
    std::ifstream is(dir / recording_file_name(rec_id));
    if (!is) {
      throw std::runtime_error("load_dataset: missing recording file for id " +
                               std::to_string(rec_id));
    }
    Record rec;
    rec.recording_id = rec_id;
    rec.sample_rate_hz = sample_rate;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const auto comma_pos = line.find(',');
      if (comma_pos == std::string::npos) {
        throw std::runtime_error("load_dataset: malformed sample line: " + line);
      }
      rec.samples.push_back(std::stod(line.substr(comma_pos + 1)));
    }
    std::sort(slice_labels.begin(), slice_labels.end());
    rec.slice_labels.reserve(slice_labels.size());
    for (const auto& [slice, label] : slice_labels) rec.slice_labels.push_back(label);
    records.push_back(std::move(rec));
  }
  return records;
}

SplitResult split_by_recording(const std::vector<Record>& records,
                               std::array<double, 3> weights, std::uint64_t seed) {
  if (records.size() < 3) {
    throw std::invalid_argument("split_by_recording: need at least 3 recordings");
  }
  double wsum = weights[0] + weights[1] + weights[2];
  if (wsum <= 0.0 || weights[0] <= 0.0 || weights[1] <= 0.0 || weights[2] <= 0.0) {
    throw std::invalid_argument("split_by_recording: weights must be positive");
  }

  std::size_t total_slices = 0;
  for (const Record& r : records) total_slices += r.slice_labels.size();

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  // fill the split with the largest remaining slice deficit
  std::array<double, 3> target;
  for (int s = 0; s < 3; ++s) {
    target[static_cast<std::size_t>(s)] =
        weights[static_cast<std::size_t>(s)] / wsum * static_cast<double>(total_slices);
  }
  std::array<double, 3> assigned = {0.0, 0.0, 0.0};
  std::array<std::vector<std::size_t>, 3> buckets;
  for (std::size_t rec : order) {
    int best = 0;
    for (int s = 1; s < 3; ++s) {
      const auto si = static_cast<std::size_t>(s);
      const auto bi = static_cast<std::size_t>(best);
      if (target[si] - assigned[si] > target[bi] - assigned[bi]) best = s;
    }
    buckets[static_cast<std::size_t>(best)].push_back(rec);
    assigned[static_cast<std::size_t>(best)] +=
        static_cast<double>(records[rec].slice_labels.size());
  }
  for (auto& b : buckets) std::sort(b.begin(), b.end());
  return {buckets[0], buckets[1], buckets[2]};
}

std::vector<double> moving_average(const std::vector<double>& x, std::size_t window) {
  if (window < 1) throw std::invalid_argument("moving_average: window must be positive");
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t lo = -static_cast<std::ptrdiff_t>(window / 2);
  const std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(window - window / 2);  // exclusive
  std::vector<double> out(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t a = std::max<std::ptrdiff_t>(0, i + lo);
    const std::ptrdiff_t b = std::min<std::ptrdiff_t>(n, i + hi);
    double acc = 0.0;
    for (std::ptrdiff_t j = a; j < b; ++j) acc += x[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = acc / static_cast<double>(b - a);
  }
  return out;
}

std::vector<double> downsample_keep_every(const std::vector<double>& x,
                                          std::size_t ratio) {
  if (ratio < 1) throw std::invalid_argument("downsample: ratio must be positive");
  std::vector<double> out;
  out.reserve(x.size() / ratio + 1);
  for (std::size_t i = 0; i < x.size(); i += ratio) out.push_back(x[i]);
  return out;
}

void min_max_scale(std::vector<double>& x) {
  if (x.empty()) return;
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  const double span = *mx - *mn;
  if (span <= 0.0) {
    std::fill(x.begin(), x.end(), 0.0);  // constant slices scale to zeros
    return;
  }
  for (double& v : x) v = (v - *mn) / span;
}

PreprocessedSet preprocess(const std::vector<Record>& records,
                           const std::vector<std::size_t>& recording_indices,
                           Task task, std::size_t stride_d) {
  PreprocessedSet set;
  set.channels = 1;
  if (task == Task::Supervised) {
    set.window_len = 640;  // 5 s at 128 Hz
    set.graph.stride = 4;
    set.graph.count_bound = 32;  // lookback window 128
    set.graph.include_adjacent = true;
  } else {
    set.window_len = 128;  // 1 s at 128 Hz
    set.graph.stride = stride_d;
    set.graph.count_bound = (kUnsupervisedLookback + stride_d - 1) / stride_d;
    set.graph.include_adjacent = true;
  }

  std::size_t next_slice_id = 0;
  for (std::size_t rec_idx : recording_indices) {
    if (rec_idx >= records.size()) {
      throw std::invalid_argument("preprocess: recording index out of range");
    }
    const Record& rec = records[rec_idx];
    const std::size_t slice_raw = static_cast<std::size_t>(5.0 * rec.sample_rate_hz);
    if (rec.samples.size() < slice_raw) {
      throw std::invalid_argument("preprocess: recording shorter than one slice");
    }
    std::vector<double> smooth = moving_average(rec.samples, kSmoothWindow);
    std::vector<double> down = downsample_keep_every(smooth, kDownsampleRatio);
    const std::size_t slice_len = slice_raw / kDownsampleRatio;  // 640
    const std::size_t slices = std::min(down.size() / slice_len, rec.slice_labels.size());

    for (std::size_t s = 0; s < slices; ++s) {
      const std::size_t slice_id = next_slice_id++;
      const int label = binary_label(rec.slice_labels[s]);
      if (task == Task::Supervised) {
        Window w;
        w.values.assign(down.begin() + static_cast<std::ptrdiff_t>(s * slice_len),
                        down.begin() + static_cast<std::ptrdiff_t>((s + 1) * slice_len));
        min_max_scale(w.values);
        w.label = label;
        w.group_id = slice_id;
        w.recording_id = rec.recording_id;
        set.windows.push_back(std::move(w));
      } else {
        const std::size_t pieces = slice_len / set.window_len;  // 5 per slice
        for (std::size_t p = 0; p < pieces; ++p) {
          Window w;
          const std::size_t start = s * slice_len + p * set.window_len;
          w.values.assign(down.begin() + static_cast<std::ptrdiff_t>(start),
                          down.begin() + static_cast<std::ptrdiff_t>(start + set.window_len));
          min_max_scale(w.values);
          w.label = label;
          w.group_id = slice_id;
          w.recording_id = rec.recording_id;
          set.windows.push_back(std::move(w));
        }
      }
    }
  }
  return set;
}

std::vector<FeaturedDigraph> to_featured_digraphs(const PreprocessedSet& set) {
  Digraph graph = build_series_digraph(set.window_len, set.graph);
  std::vector<FeaturedDigraph> out;
  out.reserve(set.windows.size());
  for (const Window& w : set.windows) {
    out.push_back({graph, Tensor({set.window_len, set.channels}, w.values)});
  }
  return out;
}

void export_digraph(const Digraph& g, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("export_digraph: cannot open " + path.string());
  g.write_edge_list(os);
}

}  // namespace tsgraph
