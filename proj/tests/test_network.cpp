#include <cmath>
#include <doctest.h>
#include <queue>
#include <stdexcept>
#include <vector>

#include "synclab/network.hpp"

using namespace synclab;

namespace {

DirectedNetwork mutual_pair(double eps) {
  return DirectedNetwork(2, {{1}, {0}}, {{eps}, {eps}}, eps);
}

DirectedNetwork ring(int n, double eps) {
  std::vector<std::vector<int>> pre(n);
  std::vector<std::vector<double>> w(n);
  for (int i = 0; i < n; ++i) {
    pre[i] = {(i + n - 1) % n};
    w[i] = {eps};
  }
  return DirectedNetwork(n, std::move(pre), std::move(w), eps);
}

DirectedNetwork all_to_all(int n, double eps) {
  std::vector<std::vector<int>> pre(n);
  std::vector<std::vector<double>> w(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      pre[i].push_back(j);
      w[i].push_back(eps / (n - 1));
    }
  }
  return DirectedNetwork(n, std::move(pre), std::move(w), eps);
}

// Independent oracle for the diameter: longest shortest path on the edge-reversed graph
// (edges i -> j for j in Pre(i)), all-pairs BFS.
int bfs_diameter(const DirectedNetwork& net) {
  const int n = net.size();
  std::vector<std::vector<int>> fwd(n);
  for (int i = 0; i < n; ++i) {
    for (int j : net.pre(i)) fwd[j].push_back(i);  // reversed: source -> target
  }
  // Pre-expansion distance from i counts hops along presynaptic links, i.e. shortest
  // paths TO i in the forward graph; BFS the forward graph from every source and take
  // the global max.
  int best = 0;
  for (int s = 0; s < n; ++s) {
    std::vector<int> dist(n, -1);
    std::queue<int> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int t : fwd[v]) {
        if (dist[t] < 0) {
          dist[t] = dist[v] + 1;
          q.push(t);
        }
      }
    }
    for (int v = 0; v < n; ++v) {
      if (dist[v] < 0) return -1;  // not strongly connected
      best = std::max(best, dist[v]);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("construction enforces the structural invariants") {
  CHECK_NOTHROW(mutual_pair(-0.2));
  // self-loop
  CHECK_THROWS_AS(DirectedNetwork(2, {{0}, {0}}, {{-0.2}, {-0.2}}, -0.2), std::invalid_argument);
  // empty presynaptic set
  CHECK_THROWS_AS(DirectedNetwork(2, {{1}, {}}, {{-0.2}, {}}, -0.2), std::invalid_argument);
  // duplicate edge
  CHECK_THROWS_AS(DirectedNetwork(2, {{1, 1}, {0}}, {{-0.1, -0.1}, {-0.2}}, -0.2),
                  std::invalid_argument);
  // zero weight (an absent connection must be absent, not zero)
  CHECK_THROWS_AS(DirectedNetwork(2, {{1}, {0}}, {{0.0}, {-0.2}}, -0.2), std::invalid_argument);
  // row sum off by more than 1e-12
  CHECK_THROWS_AS(DirectedNetwork(2, {{1}, {0}}, {{-0.2}, {-0.3}}, -0.2), std::invalid_argument);
  // too small
  CHECK_THROWS_AS(DirectedNetwork(1, {{}}, {{}}, -0.2), std::invalid_argument);
  // shape mismatch
  CHECK_THROWS_AS(DirectedNetwork(3, {{1}, {0}}, {{-0.2}, {-0.2}}, -0.2), std::invalid_argument);
}

TEST_CASE("postsynaptic fan-out mirrors the presynaptic lists") {
  DirectedNetwork net(3, {{1, 2}, {0}, {0, 1}}, {{-0.1, -0.1}, {-0.2}, {-0.15, -0.05}}, -0.2);
  REQUIRE(net.post(0).size() == 2);
  CHECK(net.post(0)[0].first == 1);
  CHECK(net.post(0)[0].second == -0.2);
  CHECK(net.post(0)[1].first == 2);
  CHECK(net.post(0)[1].second == -0.15);
  REQUIRE(net.post(1).size() == 2);
  CHECK(net.post(1)[0].first == 0);
  CHECK(net.post(1)[1].first == 2);
  CHECK(net.post(1)[1].second == -0.05);
  REQUIRE(net.post(2).size() == 1);
  CHECK(net.post(2)[0].first == 0);
}

TEST_CASE("random generation: determinism, repair, and normalization") {
  DirectedNetwork a = random_network(16, 0.25, -0.2, 42);
  DirectedNetwork b = random_network(16, 0.25, -0.2, 42);
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) {
    REQUIRE(a.pre(i) == b.pre(i));
    for (size_t k = 0; k < a.weights(i).size(); ++k) {
      CHECK(a.weights(i)[k] == b.weights(i)[k]);
    }
  }
  DirectedNetwork c = random_network(16, 0.25, -0.2, 43);
  bool same = true;
  for (int i = 0; i < 16 && same; ++i) same = a.pre(i) == c.pre(i);
  CHECK_FALSE(same);

  // forced topology for n=2, p=1
  DirectedNetwork d = random_network(2, 1.0, -0.2, 7);
  CHECK(d.pre(0) == std::vector<int>{1});
  CHECK(d.pre(1) == std::vector<int>{0});
  CHECK(d.weights(0)[0] == -0.2);

  // low p exercises the empty-row repair; row sums stay exact
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    DirectedNetwork net = random_network(12, 0.02, -0.5, seed);
    for (int i = 0; i < net.size(); ++i) {
      REQUIRE(net.in_degree(i) >= 1);
      double sum = 0.0;
      for (double w : net.weights(i)) sum += w;
      CHECK(std::abs(sum - (-0.5)) <= 1e-12);
    }
  }

  // mean in-degree tracks n p at scale
  DirectedNetwork big = random_network(400, 0.2, -16.0, 1);
  double mean_k = 0.0;
  for (int i = 0; i < 400; ++i) mean_k += big.in_degree(i);
  mean_k /= 400.0;
  CHECK(mean_k == doctest::Approx(0.2 * 399).epsilon(0.05));
  CHECK_THROWS_AS(random_network(1, 0.5, -0.2, 0), std::invalid_argument);
  CHECK_THROWS_AS(random_network(4, 0.0, -0.2, 0), std::invalid_argument);
  CHECK_THROWS_AS(random_network(4, 1.5, -0.2, 0), std::invalid_argument);
}

TEST_CASE("strong connectivity") {
  CHECK(is_strongly_connected(ring(6, -0.2)));
  CHECK(is_strongly_connected(all_to_all(4, -0.2)));
  CHECK(is_strongly_connected(random_network(400, 0.2, -16.0, 3)));

  // two all-to-all blocks joined one-way only
  std::vector<std::vector<int>> pre(4);
  std::vector<std::vector<double>> w(4);
  pre[0] = {1};      w[0] = {-0.2};
  pre[1] = {0};      w[1] = {-0.2};
  pre[2] = {3, 0};   w[2] = {-0.1, -0.1};  // block {2,3} listens to block {0,1}
  pre[3] = {2};      w[3] = {-0.2};
  DirectedNetwork oneway(4, pre, w, -0.2);
  CHECK_FALSE(is_strongly_connected(oneway));
  CHECK_THROWS_AS(diameter(oneway), std::invalid_argument);
}

TEST_CASE("diameter under presynaptic expansion") {
  for (int n : {3, 5, 9}) {
    CHECK(diameter(ring(n, -0.2)) == n - 1);
  }
  CHECK(diameter(all_to_all(5, -0.2)) == 1);
  CHECK(diameter(mutual_pair(-0.2)) == 1);

  // against the independent all-pairs BFS oracle on random instances
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 20 && seed < 200; ++seed) {
    DirectedNetwork net = random_network(30, 0.15, -0.3, seed);
    if (!is_strongly_connected(net)) continue;
    CHECK(diameter(net) == bfs_diameter(net));
    ++checked;
  }
  REQUIRE(checked == 20);
}

TEST_CASE("coupling sign classification") {
  CHECK(coupling_sign(mutual_pair(-0.2)) == CouplingSign::inhibitory);
  CHECK(coupling_sign(mutual_pair(0.3)) == CouplingSign::excitatory);
  DirectedNetwork mixed(3, {{1, 2}, {2}, {0}}, {{-0.3, 0.4}, {0.1}, {0.1}}, 0.1);
  CHECK(coupling_sign(mixed) == CouplingSign::mixed);
}
