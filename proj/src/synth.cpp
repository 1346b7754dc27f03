#include "tsgraph/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace tsgraph {

namespace {

constexpr double kSampleRate = 512.0;
constexpr double kPi = 3.14159265358979323846;

struct Bump {
  double amplitude;
  double center;  // seconds relative to the R peak
  double width;
};

// P, Q, R, S, T morphology
constexpr Bump kBeatShape[] = {
    {0.15, -0.20, 0.025}, {-0.10, -0.035, 0.010}, {1.00, 0.0, 0.012},
    {-0.20, 0.035, 0.012}, {0.30, 0.22, 0.045}};

}  // namespace

std::vector<Record> synth_ecg(std::size_t n_recordings, double seconds_each,
                              double anomaly_rate, std::uint64_t seed) {
  if (n_recordings == 0 || seconds_each < 5.0) {
    throw std::invalid_argument("synth_ecg: need recordings of at least 5 seconds");
  }
  if (anomaly_rate < 0.0 || anomaly_rate > 1.0) {
    throw std::invalid_argument("synth_ecg: anomaly rate must lie in [0,1]");
  }
  const std::size_t slices = static_cast<std::size_t>(seconds_each / 5.0);
  const std::size_t slice_samples = static_cast<std::size_t>(5.0 * kSampleRate);
  const std::size_t total = slices * slice_samples;

  std::mt19937_64 master(seed);
  std::vector<Record> records;
  records.reserve(n_recordings);

  for (std::size_t r = 0; r < n_recordings; ++r) {
    std::mt19937_64 rng(master());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Record rec;
    rec.recording_id = r;
    rec.sample_rate_hz = kSampleRate;
    rec.samples.assign(total, 0.0);
    rec.slice_labels.assign(slices, 3);

    const double bpm = 50.0 + 40.0 * unit(rng);
    const double period = 60.0 / bpm;
    const double wander_freq = 0.15 + 0.25 * unit(rng);
    const double wander_phase = 2.0 * kPi * unit(rng);
    const double wander_amp = 0.05 + 0.05 * unit(rng);

    // R-peak times with beat-to-beat jitter
    std::vector<double> peaks;
    double t = 0.3 + 0.2 * unit(rng);
    const double duration = static_cast<double>(total) / kSampleRate;
    while (t < duration + period) {
      peaks.push_back(t);
      t += period * (1.0 + 0.04 * gauss(rng));
    }

    std::size_t next_peak = 0;
    for (std::size_t i = 0; i < total; ++i) {
      const double ti = static_cast<double>(i) / kSampleRate;
      while (next_peak + 1 < peaks.size() && peaks[next_peak + 1] < ti) ++next_peak;
      double v = 0.0;
      // only the two nearest beats contribute measurably
      for (std::size_t p = next_peak >= 1 ? next_peak - 1 : 0;
           p < peaks.size() && p <= next_peak + 1; ++p) {
        const double dt = ti - peaks[p];
        for (const Bump& b : kBeatShape) {
          const double z = (dt - b.center) / b.width;
          if (std::abs(z) < 6.0) v += b.amplitude * std::exp(-0.5 * z * z);
        }
      }
      v += wander_amp * std::sin(2.0 * kPi * wander_freq * ti + wander_phase);
      v += 0.02 * gauss(rng);
      rec.samples[i] = v;
    }

    for (std::size_t s = 0; s < slices; ++s) {
      double* slice = rec.samples.data() + s * slice_samples;
      if (unit(rng) < anomaly_rate) {
        rec.slice_labels[s] = 1;
        const int kind = static_cast<int>(unit(rng) * 3.0);
        if (kind == 0) {
          // heavy noise burst swamping the morphology
          const double sigma = 0.4 + 0.4 * unit(rng);
          for (std::size_t i = 0; i < slice_samples; ++i) slice[i] += sigma * gauss(rng);
        } else if (kind == 1) {
          // flatline at the local mean with sensor-floor noise
          double level = 0.0;
          for (std::size_t i = 0; i < slice_samples; ++i) level += slice[i];
          level /= static_cast<double>(slice_samples);
          for (std::size_t i = 0; i < slice_samples; ++i) {
            slice[i] = level + 0.004 * gauss(rng);
          }
        } else {
          // amplitude dropout: electrode barely coupled
          const double scale = 0.03 + 0.1 * unit(rng);
          for (std::size_t i = 0; i < slice_samples; ++i) {
            slice[i] = slice[i] * scale + 0.05 * gauss(rng);
          }
        }
      } else if (unit(rng) < 0.25) {
        rec.slice_labels[s] = 2;  // medium quality: readable but noisier
        for (std::size_t i = 0; i < slice_samples; ++i) slice[i] += 0.05 * gauss(rng);
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace tsgraph
