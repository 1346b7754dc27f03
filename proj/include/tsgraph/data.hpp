#pragma once

#include <array>
#include <filesystem>

#include "tsgraph/digraph.hpp"
#include "tsgraph/synth.hpp"
#include "tsgraph/train.hpp"

namespace tsgraph {

/// Per-recording `t,value` CSVs plus a `recording_id,slice_index,label`
/// sidecar and a small meta document.
void save_dataset(const std::vector<Record>& records,
                  const std::filesystem::path& dir);
std::vector<Record> load_dataset(const std::filesystem::path& dir);

/// Recording-level partition; no recording contributes to two splits and
/// slice-count proportions follow the weights as closely as achievable.
struct SplitResult {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;
};
SplitResult split_by_recording(const std::vector<Record>& records,
                               std::array<double, 3> weights, std::uint64_t seed);

enum class Task { Supervised, Unsupervised };

/// Smoothing (centered moving average, window 20) -> keep every 4th sample
/// -> non-overlapping slices (5 s supervised, 1 s unsupervised) -> per-slice
/// min-max scaling to [0,1] (constant slices become zeros). Windows carry
/// the binary label and the id of their 5-second slice.
struct PreprocessedSet {
  std::vector<Window> windows;
  TimeDigraphSpec graph;
  std::size_t window_len = 0;
  std::size_t channels = 1;
};

PreprocessedSet preprocess(const std::vector<Record>& records,
                           const std::vector<std::size_t>& recording_indices,
                           Task task, std::size_t stride_d = 4);

/// The spec-level view: one featured series digraph per window (all windows
/// share the same topology).
std::vector<FeaturedDigraph> to_featured_digraphs(const PreprocessedSet& set);

std::vector<double> moving_average(const std::vector<double>& x, std::size_t window);
std::vector<double> downsample_keep_every(const std::vector<double>& x, std::size_t ratio);
void min_max_scale(std::vector<double>& x);

void export_digraph(const Digraph& g, const std::filesystem::path& path);

}  // namespace tsgraph
