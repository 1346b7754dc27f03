#pragma once

#include <cstdint>
#include <vector>

namespace tsgraph {

/// One recording sampled at 512 Hz with a quality label per 5-second slice:
/// 1 unreadable, 2 medium, 3 good. The binary task maps 1 -> 0 and
/// {2,3} -> 1.
struct Record {
  std::size_t recording_id = 0;
  std::vector<double> samples;
  std::vector<int> slice_labels;
  double sample_rate_hz = 512.0;
};

inline int binary_label(int raw_label) { return raw_label == 1 ? 0 : 1; }

/// Quasi-periodic pulse trains (Gaussian P/Q/R/S/T complexes at 50-90 bpm
/// with baseline wander and mild noise); each 5-second slice is independently
/// corrupted with probability anomaly_rate by a heavy noise burst, a
/// flatline, or an amplitude dropout and labeled unreadable. Deterministic
/// per seed. seconds_each is rounded down to a multiple of 5.
std::vector<Record> synth_ecg(std::size_t n_recordings, double seconds_each,
                              double anomaly_rate, std::uint64_t seed);

}  // namespace tsgraph
