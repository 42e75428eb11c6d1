#include "synclab/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace synclab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::vector<double>> per_neuron_times(const std::vector<SpikeRecord>& spikes, int n,
                                                  double t0, double t1) {
  if (n < 1) throw std::invalid_argument("need at least one neuron");
  if (!(t1 >= t0)) throw std::invalid_argument("statistics window is empty");
  std::vector<std::vector<double>> times(n);
  for (const SpikeRecord& s : spikes) {
    if (s.neuron < 0 || s.neuron >= n) throw std::invalid_argument("spike neuron out of range");
    if (s.time >= t0 && s.time <= t1) times[s.neuron].push_back(s.time);
  }
  return times;
}

}  // namespace

Eigen::VectorXd firing_rates(const std::vector<SpikeRecord>& spikes, int n, double t0, double t1) {
  auto times = per_neuron_times(spikes, n, t0, t1);
  Eigen::VectorXd nu = Eigen::VectorXd::Constant(n, kNaN);
  for (int i = 0; i < n; ++i) {
    const auto& ts = times[i];
    if (ts.size() < 2) continue;
    double mean_isi = (ts.back() - ts.front()) / static_cast<double>(ts.size() - 1);
    nu[i] = 1.0 / mean_isi;
  }
  return nu;
}

Eigen::VectorXd coefficient_of_variation(const std::vector<SpikeRecord>& spikes, int n, double t0,
                                         double t1) {
  auto times = per_neuron_times(spikes, n, t0, t1);
  Eigen::VectorXd cv = Eigen::VectorXd::Constant(n, kNaN);
  for (int i = 0; i < n; ++i) {
    const auto& ts = times[i];
    if (ts.size() < 2) continue;
    // two-pass variance: the one-pass moment form loses ~sqrt(ulp) on regular trains
    double m1 = 0.0;
    const int isis = static_cast<int>(ts.size()) - 1;
    for (int k = 0; k < isis; ++k) m1 += ts[k + 1] - ts[k];
    m1 /= isis;
    double var = 0.0;
    for (int k = 0; k < isis; ++k) {
      double d = ts[k + 1] - ts[k] - m1;
      var += d * d;
    }
    var /= isis;
    cv[i] = std::sqrt(var) / m1;
  }
  return cv;
}

std::vector<FiringRound> spike_rounds(const std::vector<SpikeRecord>& spikes, int n) {
  if (n < 1) throw std::invalid_argument("need at least one neuron");
  std::vector<FiringRound> rounds;
  std::vector<int> hits(n);
  for (size_t base = 0; base + n <= spikes.size(); base += n) {
    std::fill(hits.begin(), hits.end(), 0);
    bool complete = true;
    double lo = spikes[base].time, hi = spikes[base].time;
    for (size_t k = base; k < base + n; ++k) {
      const SpikeRecord& s = spikes[k];
      if (s.neuron < 0 || s.neuron >= n) throw std::invalid_argument("spike neuron out of range");
      if (++hits[s.neuron] > 1) complete = false;
      lo = std::min(lo, s.time);
      hi = std::max(hi, s.time);
    }
    rounds.push_back({lo, hi, complete});
  }
  return rounds;
}

double spike_spread(const std::vector<SpikeRecord>& spikes, int n, int round) {
  auto rounds = spike_rounds(spikes, n);
  if (round < 0 || round >= static_cast<int>(rounds.size()) || !rounds[round].complete) {
    return kNaN;
  }
  return rounds[round].t_last - rounds[round].t_first;
}

}  // namespace synclab
