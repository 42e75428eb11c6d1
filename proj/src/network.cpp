#include "synclab/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "synclab/rng.hpp"

namespace synclab {

namespace {

[[noreturn]] void reject(int row, const std::string& what) {
  std::ostringstream os;
  os << "network row " << row << ": " << what;
  throw std::invalid_argument(os.str());
}

}  // namespace

DirectedNetwork::DirectedNetwork(int n, std::vector<std::vector<int>> pre,
                                 std::vector<std::vector<double>> weights, double eps_total)
    : n_(n), eps_total_(eps_total), pre_(std::move(pre)), w_(std::move(weights)) {
  if (n_ < 2) {
    throw std::invalid_argument("network needs at least two oscillators");
  }
  if (!std::isfinite(eps_total_)) {
    throw std::invalid_argument("total coupling strength must be finite");
  }
  if (pre_.size() != static_cast<size_t>(n_) || w_.size() != static_cast<size_t>(n_)) {
    throw std::invalid_argument("adjacency arrays do not match network size");
  }
  std::vector<char> seen(n_);
  for (int i = 0; i < n_; ++i) {
    if (pre_[i].empty()) reject(i, "in-degree zero (every oscillator needs input)");
    if (pre_[i].size() != w_[i].size()) reject(i, "weight count does not match source count");
    std::fill(seen.begin(), seen.end(), 0);
    double sum = 0.0;
    for (size_t m = 0; m < pre_[i].size(); ++m) {
      int j = pre_[i][m];
      double w = w_[i][m];
      if (j < 0 || j >= n_) reject(i, "source index out of range");
      if (j == i) reject(i, "self-loop");
      if (seen[j]) reject(i, "duplicate edge from source " + std::to_string(j));
      seen[j] = 1;
      if (!std::isfinite(w) || w == 0.0) reject(i, "edge weights must be finite and nonzero");
      sum += w;
    }
    if (std::abs(sum - eps_total_) > 1e-12) {
      std::ostringstream os;
      os << "row sum " << sum << " deviates from eps_total " << eps_total_;
      reject(i, os.str());
    }
  }
  post_.assign(n_, {});
  for (int i = 0; i < n_; ++i) {
    for (size_t m = 0; m < pre_[i].size(); ++m) {
      post_[pre_[i][m]].push_back({i, w_[i][m]});
    }
  }
}

DirectedNetwork random_network(int n, double p, double eps, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("random_network: n must be at least 2");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("random_network: p must be in (0, 1]");
  if (eps == 0.0 || !std::isfinite(eps)) {
    throw std::invalid_argument("random_network: eps must be nonzero and finite");
  }
  Rng rng(seed);
  std::vector<std::vector<int>> pre(n);
  // Fixed row-major draw order keeps the construction reproducible.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (rng.uniform01() < p) pre[i].push_back(j);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (pre[i].empty()) {
      int j = static_cast<int>(rng.uniform_index(n - 1));
      if (j >= i) ++j;
      pre[i].push_back(j);
    }
  }
  std::vector<std::vector<double>> w(n);
  for (int i = 0; i < n; ++i) {
    w[i].assign(pre[i].size(), eps / static_cast<double>(pre[i].size()));
  }
  return DirectedNetwork(n, std::move(pre), std::move(w), eps);
}

namespace {

// Breadth-first sweep along pre edges (who can reach the start) or post edges.
int count_reach(const DirectedNetwork& net, int start, bool along_pre,
                std::vector<int>* dist = nullptr) {
  const int n = net.size();
  std::vector<int> d(n, -1);
  std::deque<int> queue{start};
  d[start] = 0;
  int visited = 1;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    if (along_pre) {
      for (int j : net.pre(v)) {
        if (d[j] < 0) {
          d[j] = d[v] + 1;
          ++visited;
          queue.push_back(j);
        }
      }
    } else {
      for (const auto& [j, w] : net.post(v)) {
        (void)w;
        if (d[j] < 0) {
          d[j] = d[v] + 1;
          ++visited;
          queue.push_back(j);
        }
      }
    }
  }
  if (dist) *dist = std::move(d);
  return visited;
}

}  // namespace

bool is_strongly_connected(const DirectedNetwork& net) {
  const int n = net.size();
  return count_reach(net, 0, true) == n && count_reach(net, 0, false) == n;
}

int diameter(const DirectedNetwork& net) {
  const int n = net.size();
  int ecc_max = 0;
  std::vector<int> dist;
  for (int i = 0; i < n; ++i) {
    if (count_reach(net, i, true, &dist) != n) {
      throw std::invalid_argument("diameter requires a strongly connected network");
    }
    ecc_max = std::max(ecc_max, *std::max_element(dist.begin(), dist.end()));
  }
  return ecc_max;
}

CouplingSign coupling_sign(const DirectedNetwork& net) {
  bool any_pos = false, any_neg = false;
  for (int i = 0; i < net.size(); ++i) {
    for (double w : net.weights(i)) {
      (w > 0.0 ? any_pos : any_neg) = true;
    }
  }
  if (any_pos && any_neg) return CouplingSign::mixed;
  return any_pos ? CouplingSign::excitatory : CouplingSign::inhibitory;
}

}  // namespace synclab
