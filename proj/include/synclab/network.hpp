#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace synclab {

// Static directed coupling topology with per-edge strengths.  An edge j -> i makes j
// presynaptic to i with strength eps_ij.  Invariants, enforced on construction:
//   no self-loops, every in-degree k_i >= 1, every weight nonzero and finite,
//   every row sum over Pre(i) equals eps_total within 1e-12 (homogeneous drive).
// Instances are immutable after construction and safe to share across threads.
class DirectedNetwork {
 public:
  DirectedNetwork(int n, std::vector<std::vector<int>> pre,
                  std::vector<std::vector<double>> weights, double eps_total);

  int size() const { return n_; }
  double eps_total() const { return eps_total_; }
  int in_degree(int i) const { return static_cast<int>(pre_[i].size()); }

  // Presynaptic sources of i and the matching strengths, index-aligned.
  const std::vector<int>& pre(int i) const { return pre_[i]; }
  const std::vector<double>& weights(int i) const { return w_[i]; }

  // Postsynaptic fan-out of j as (target, strength) pairs, ascending target order.
  const std::vector<std::pair<int, double>>& post(int j) const { return post_[j]; }

 private:
  int n_;
  double eps_total_;
  std::vector<std::vector<int>> pre_;
  std::vector<std::vector<double>> w_;
  std::vector<std::vector<std::pair<int, double>>> post_;
};

// Erdos-Renyi style draw: each ordered pair j -> i (i != j) is an edge with probability p,
// rows left empty get one uniformly chosen presynaptic neuron, weights are eps / k_i so
// each row sums to eps.  Same seed, same network, bit for bit, on every platform.
DirectedNetwork random_network(int n, double p, double eps, std::uint64_t seed);

// True iff every vertex reaches every other along directed edges.
bool is_strongly_connected(const DirectedNetwork& net);

// Largest presynaptic eccentricity: the smallest l such that iterating Pre l times from any
// vertex covers the whole network.  Requires strong connectivity.
int diameter(const DirectedNetwork& net);

enum class CouplingSign { inhibitory, excitatory, mixed };

CouplingSign coupling_sign(const DirectedNetwork& net);

}  // namespace synclab
