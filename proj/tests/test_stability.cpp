#include <cmath>
#include <stdexcept>
#include <doctest.h>
#include <vector>

#include "oracles.hpp"
#include "sim_probe.hpp"
#include "synclab/errors.hpp"
#include "synclab/network.hpp"
#include "synclab/potential.hpp"
#include "synclab/rng.hpp"
#include "synclab/stability.hpp"

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

Eigen::VectorXd random_delta(Rng& rng, int n, double spread) {
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = rng.uniform(0.0, spread);
  return d;
}

// Concave rise function whose U'(U^-1(u)) is exponential in u (the integrate-and-fire
// family has an affine one, which makes every rank order produce the same operator; this
// family makes the operators genuinely order-dependent).
class LogRise : public Potential {
 public:
  explicit LogRise(double a) : a_(a), log1a_(std::log1p(a)) {}
  double eval(double phi) const override { return std::log1p(a_ * phi) / log1a_; }
  double deriv(double phi) const override { return a_ / ((1.0 + a_ * phi) * log1a_); }
  double inv(double u) const override { return std::expm1(u * log1a_) / a_; }
  double phi_min() const override { return -1.0 / a_ + 1e-12; }

 private:
  double a_;
  double log1a_;
};

}  // namespace

TEST_CASE("synchronous orbit constants at the working points") {
  IntegrateAndFire u(4.0);
  CHECK(post_input_phase(u, 0.15, -0.2) == doctest::Approx(oracle::kAlphaWeak).epsilon(1e-14));
  CHECK(synchronous_period(u, 0.15, -0.2) == doctest::Approx(oracle::kPeriodWeak).epsilon(1e-14));
  CHECK(post_input_phase(u, 0.035, -16.0) ==
        doctest::Approx(oracle::kAlphaStrong).epsilon(1e-14));
  CHECK(synchronous_period(u, 0.035, -16.0) ==
        doctest::Approx(oracle::kPeriodStrong).epsilon(1e-14));
  CHECK(post_input_phase(u, 0.14, -16.0) == doctest::Approx(oracle::kAlphaSwitch).epsilon(1e-14));
  // supra-threshold total input has no synchronous orbit
  CHECK_THROWS_AS(post_input_phase(u, 0.5, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(synchronous_period(u, 0.15, 2.0), std::invalid_argument);
}

TEST_CASE("common diagonal closed form") {
  IntegrateAndFire u(4.0);
  CHECK(common_diagonal(u, 0.15, -0.2) == doctest::Approx(oracle::kDiagWeak).epsilon(1e-14));
  CHECK(common_diagonal(u, 0.14, -16.0) == doctest::Approx(oracle::kDiagSwitch).epsilon(1e-14));
  // U'(tau)/U'(alpha) collapses to exp(-T_if (tau - alpha)) for this family
  double alpha = post_input_phase(u, 0.15, -0.2);
  CHECK(common_diagonal(u, 0.15, -0.2) ==
        doctest::Approx(std::exp(-oracle::kFreePeriodI4 * (0.15 - alpha))).epsilon(1e-13));
  // inhibition contracts, excitation expands, vanishing coupling is neutral
  CHECK(common_diagonal(u, 0.15, -0.2) < 1.0);
  CHECK(common_diagonal(u, 0.15, -0.2) > 0.0);
  CHECK(common_diagonal(u, 0.15, 0.2) > 1.0);
  CHECK(common_diagonal(u, 0.15, -1e-9) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("rank order: descending perturbation, ties by index") {
  DirectedNetwork net(4, {{1, 2, 3}, {0}, {0}, {0}},
                      {{-0.1, -0.1, -0.1}, {-0.3}, {-0.3}, {-0.3}}, -0.3);
  Eigen::VectorXd delta(4);
  delta << 0.0, 0.1, 0.3, 0.1;
  RankOrder order = rank_order(net, delta);
  // row 0 sees sources {1, 2, 3}: 2 first (0.3), then the 0.1 tie in index order
  REQUIRE(order.pos[0].size() == 3);
  CHECK(net.pre(0)[order.pos[0][0]] == 2);
  CHECK(net.pre(0)[order.pos[0][1]] == 1);
  CHECK(net.pre(0)[order.pos[0][2]] == 3);

  // ranked perturbations are non-increasing along every row, for random draws
  Rng rng(7);
  DirectedNetwork rnd = random_network(12, 0.4, -0.3, 8);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd d = random_delta(rng, 12, 0.1);
    RankOrder o = rank_order(rnd, d);
    for (int i = 0; i < 12; ++i) {
      for (size_t m = 1; m < o.pos[i].size(); ++m) {
        CHECK(d[rnd.pre(i)[o.pos[i][m - 1]]] >= d[rnd.pre(i)[o.pos[i][m]]]);
      }
    }
  }

  // priority-driven construction matches delta-driven construction
  Eigen::VectorXd strict(4);
  strict << 0.4, 0.3, 0.2, 0.1;
  RankOrder by_delta = rank_order(net, strict);
  RankOrder by_priority = rank_order_from_priority(net, {0, 1, 2, 3});
  CHECK(by_delta.flat_key() == by_priority.flat_key());
  CHECK_THROWS_AS(rank_order_from_priority(net, {0, 1, 2, 2}), std::invalid_argument);
}

TEST_CASE("exact period map fixed points and invariances") {
  IntegrateAndFire u(4.0);
  DirectedNetwork net = random_network(16, 0.25, -0.2, 5);

  SUBCASE("zero perturbation is a fixed point") {
    Eigen::VectorXd out = exact_map(net, u, 0.15, Eigen::VectorXd::Zero(16));
    CHECK(out.cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("uniform shifts ride the time-translation mode") {
    Eigen::VectorXd c = Eigen::VectorXd::Constant(16, 0.03);
    Eigen::VectorXd out = exact_map(net, u, 0.15, c);
    CHECK((out - c).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("inadmissible spread is rejected") {
    Eigen::VectorXd wide = Eigen::VectorXd::Zero(16);
    wide[0] = 0.15;
    CHECK_THROWS_AS(exact_map(net, u, 0.15, wide), std::invalid_argument);
  }

  SUBCASE("threshold crossing mid-volley leaves the validity regime") {
    // tau = 0.8 puts the post-volley phase close to threshold; a receiver whose own
    // perturbation leads its sources by enough crosses threshold before the volley lands
    DirectedNetwork pair = mutual_pair(0.05);
    Eigen::VectorXd d(2);
    d << 0.3, 0.0;
    CHECK_THROWS_AS(exact_map(pair, u, 0.8, d), RegimeError);
  }
}

TEST_CASE("exact map agrees with the event simulator over one period") {
  IntegrateAndFire u(4.0);
  Rng rng(21);
  for (int instance = 0; instance < 5; ++instance) {
    DirectedNetwork net = random_network(12, 0.3, rng.uniform(-0.6, -0.1), 300 + instance);
    for (int trial = 0; trial < 4; ++trial) {
      Eigen::VectorXd delta = random_delta(rng, 12, 0.8 * 0.15);
      Eigen::VectorXd mapped = exact_map(net, u, 0.15, delta);
      Eigen::VectorXd simulated = simulated_period_map(net, u, 0.15, delta);
      CHECK((mapped - simulated).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("derivative ladder") {
  IntegrateAndFire u(4.0);

  SUBCASE("single-input rows carry the full coupling") {
    DirectedNetwork net = ring(5, -0.2);
    RankOrder order = rank_order(net, Eigen::VectorXd::Zero(5));
    Eigen::VectorXd p = p_coefficients(net, u, 0.15, order, 0);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == doctest::Approx(common_diagonal(u, 0.15, -0.2)).epsilon(1e-14));
    CHECK(p[1] == 1.0);  // telescoped normalization is exact
  }

  SUBCASE("inhibitory ladders increase toward 1, excitatory decrease toward 1") {
    Rng rng(13);
    for (double eps : {-0.4, 0.3}) {
      DirectedNetwork net = random_network(10, 0.6, eps, 91);
      RankOrder order = rank_order(net, random_delta(rng, 10, 0.05));
      for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd p = p_coefficients(net, u, 0.15, order, i);
        CHECK(p[p.size() - 1] == 1.0);
        for (int m = 1; m < p.size(); ++m) {
          if (eps < 0) {
            CHECK(p[m] > p[m - 1]);
          } else {
            CHECK(p[m] < p[m - 1]);
            CHECK(p[m] >= 1.0);
          }
        }
      }
    }
  }
}

TEST_CASE("operator structure") {
  IntegrateAndFire u(4.0);

  SUBCASE("mutual pair has the closed-form operator and spectrum") {
    DirectedNetwork net = mutual_pair(-0.2);
    double a0 = common_diagonal(u, 0.15, -0.2);
    StabilityOperator op = build_operator(net, u, 0.15, rank_order(net, Eigen::VectorXd::Zero(2)));
    CHECK(op.matrix(0, 0) == doctest::Approx(a0).epsilon(1e-14));
    CHECK(op.matrix(1, 1) == doctest::Approx(a0).epsilon(1e-14));
    CHECK(op.matrix(0, 1) == doctest::Approx(1.0 - a0).epsilon(1e-12));
    CHECK(op.matrix(1, 0) == doctest::Approx(1.0 - a0).epsilon(1e-12));
    SpectrumResult spec = spectrum(op.matrix);
    std::vector<double> re{spec.values[0].real(), spec.values[1].real()};
    std::sort(re.begin(), re.end());
    CHECK(spec.values.imag().cwiseAbs().maxCoeff() < 1e-12);
    CHECK(re[0] == doctest::Approx(2.0 * a0 - 1.0).epsilon(1e-10));
    CHECK(re[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(spec.unit_residual < 1e-12);
  }

  SUBCASE("row sums, constant diagonal, zero pattern, sign pattern") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      int n = 3 + static_cast<int>(rng.uniform_index(14));
      double eps = (trial % 2 == 0 ? -1.0 : 1.0) * rng.uniform(0.05, 0.45);
      DirectedNetwork net = random_network(n, rng.uniform(0.2, 0.9), eps, 900 + trial);
      double tau = rng.uniform(0.05, 0.25);
      StabilityOperator op = build_operator(net, u, tau, rank_order(net, random_delta(rng, n, 0.02)));
      double a0 = common_diagonal(u, tau, eps);
      for (int i = 0; i < n; ++i) {
        CHECK(std::abs(op.matrix.row(i).sum() - 1.0) <= 1e-12);
        CHECK(std::abs(op.matrix(i, i) - a0) <= 1e-12);
        std::vector<char> allowed(n, 0);
        allowed[i] = 1;
        for (int j : net.pre(i)) allowed[j] = 1;
        for (int j = 0; j < n; ++j) {
          if (!allowed[j]) CHECK(op.matrix(i, j) == 0.0);
          if (j == i) continue;
          if (eps < 0) {
            CHECK(op.matrix(i, j) >= 0.0);
          } else {
            CHECK(op.matrix(i, j) <= 0.0);
          }
        }
      }
      // the uniform vector is an exact unit eigenvector
      Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
      CHECK((op.matrix * ones - ones).cwiseAbs().maxCoeff() < 1e-12);
      // inhibitory operators never expand the max norm
      if (eps < 0) {
        for (int probe = 0; probe < 5; ++probe) {
          Eigen::VectorXd x(n);
          for (int q = 0; q < n; ++q) x[q] = rng.uniform(-1.0, 1.0);
          CHECK((op.matrix * x).lpNorm<Eigen::Infinity>() <=
                x.lpNorm<Eigen::Infinity>() * (1.0 + 1e-12));
        }
      }
    }
  }

  SUBCASE("adjacent orders act identically on the tie that separates them") {
    // needs a curved family: with integrate-and-fire both branches are one matrix
    LogRise lr(2.5);
    DirectedNetwork net(3, {{1, 2}, {2}, {0}}, {{-0.1, -0.2}, {-0.3}, {-0.3}}, -0.3);
    StabilityOperator a = build_operator(net, lr, 0.15, rank_order_from_priority(net, {0, 1, 2}));
    StabilityOperator b = build_operator(net, lr, 0.15, rank_order_from_priority(net, {0, 2, 1}));
    CHECK((a.matrix - b.matrix).cwiseAbs().maxCoeff() > 1e-6);  // genuinely different branches
    Eigen::VectorXd tie(3);
    tie << 0.05, 0.02, 0.02;  // sources 1 and 2 tied at receiver 0
    CHECK(((a.matrix - b.matrix) * tie).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("the integrate-and-fire family collapses every order to one operator") {
    // U'(U^-1(u)) is affine in u for this family, so the ladder differences telescope to
    // -eps_ij / (I - U(tau) - eps) independently of the arrival order.
    DirectedNetwork net(3, {{1, 2}, {2}, {0}}, {{-0.1, -0.2}, {-0.3}, {-0.3}}, -0.3);
    StabilityOperator a = build_operator(net, u, 0.15, rank_order_from_priority(net, {0, 1, 2}));
    StabilityOperator b = build_operator(net, u, 0.15, rank_order_from_priority(net, {0, 2, 1}));
    CHECK((a.matrix.array() == b.matrix.array()).all());
    const double denom = 4.0 - u.eval(0.15) - (-0.3);
    for (int i = 0; i < 3; ++i) {
      CHECK(a.matrix(i, i) == doctest::Approx((4.0 - u.eval(0.15)) / denom).epsilon(1e-14));
      for (size_t m = 0; m < net.pre(i).size(); ++m) {
        CHECK(a.matrix(i, net.pre(i)[m]) ==
              doctest::Approx(-net.weights(i)[m] / denom).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("disk bounds") {
  IntegrateAndFire u(4.0);
  Rng rng(17);

  SUBCASE("inhibitory disk touches the unit circle from inside and holds the spectrum") {
    DirectedNetwork net = random_network(16, 0.25, -0.2, 44);
    StabilityOperator op = build_operator(net, u, 0.15, rank_order(net, random_delta(rng, 16, 0.05)));
    GershgorinReport g = gershgorin_check(op, CouplingSign::inhibitory);
    CHECK(g.center == doctest::Approx(oracle::kDiagWeak).epsilon(1e-13));
    CHECK(g.radius == doctest::Approx(1.0 - oracle::kDiagWeak).epsilon(1e-10));
    CHECK(g.unit_tangent);
    CHECK(g.all_contained);
  }

  SUBCASE("excitatory disk touches from outside") {
    DirectedNetwork net = random_network(16, 0.25, 0.2, 44);
    StabilityOperator op = build_operator(net, u, 0.15, rank_order(net, random_delta(rng, 16, 0.05)));
    GershgorinReport g = gershgorin_check(op, CouplingSign::excitatory);
    CHECK(g.center > 1.0);
    CHECK(g.radius == doctest::Approx(g.center - 1.0).epsilon(1e-10));
    CHECK(g.unit_tangent);
    CHECK(g.all_contained);
  }

  SUBCASE("radius shrinks to zero with the coupling") {
    double prev = 1e9;
    for (double eps : {-0.4, -0.2, -0.1, -0.02, -1e-4}) {
      DirectedNetwork net = random_network(8, 0.5, eps, 9);
      StabilityOperator op =
          build_operator(net, u, 0.15, rank_order(net, Eigen::VectorXd::Zero(8)));
      GershgorinReport g = gershgorin_check(op, CouplingSign::inhibitory);
      CHECK(g.radius < prev);
      prev = g.radius;
    }
    CHECK(prev < 1e-4);
  }

  SUBCASE("mixed-sign coupling is refused") {
    DirectedNetwork net(3, {{1, 2}, {2}, {0}}, {{-0.3, 0.4}, {0.1}, {0.1}}, 0.1);
    StabilityOperator op = build_operator(net, u, 0.15, rank_order(net, Eigen::VectorXd::Zero(3)));
    CHECK_THROWS_AS(gershgorin_check(op, CouplingSign::mixed), std::invalid_argument);
    // declaring the wrong pure sign trips the pattern check
    CHECK_THROWS_AS(gershgorin_check(op, CouplingSign::inhibitory), std::invalid_argument);
  }
}

TEST_CASE("unit eigenvalue simplicity") {
  IntegrateAndFire u(4.0);
  Rng rng(29);

  SUBCASE("strongly connected inhibitory operators have a simple unit eigenvalue") {
    int done = 0;
    for (std::uint64_t seed = 0; done < 10 && seed < 100; ++seed) {
      DirectedNetwork net = random_network(16, 0.25, -0.2, seed);
      if (!is_strongly_connected(net)) continue;
      StabilityOperator op =
          build_operator(net, u, 0.15, rank_order(net, random_delta(rng, 16, 0.05)));
      PerronReport report = perron_check(op);
      CHECK(report.unit_simple);
      CHECK(report.gap > 0.0);
      ++done;
    }
    REQUIRE(done == 10);
  }

  SUBCASE("mutual pair gap is twice the disk radius") {
    StabilityOperator op = build_operator(mutual_pair(-0.2), u, 0.15,
                                          rank_order(mutual_pair(-0.2), Eigen::VectorXd::Zero(2)));
    PerronReport report = perron_check(op);
    CHECK(report.unit_simple);
    CHECK(report.gap == doctest::Approx(2.0 * (1.0 - oracle::kDiagWeak)).epsilon(1e-9));
  }

  SUBCASE("two disconnected blocks double the unit eigenvalue") {
    DirectedNetwork net(4, {{1}, {0}, {3}, {2}}, {{-0.2}, {-0.2}, {-0.2}, {-0.2}}, -0.2);
    StabilityOperator op = build_operator(net, u, 0.15, rank_order(net, Eigen::VectorXd::Zero(4)));
    PerronReport report = perron_check(op);
    CHECK_FALSE(report.unit_simple);
    CHECK(report.gap < 1e-10);
  }

  SUBCASE("negative entries are refused") {
    DirectedNetwork net = random_network(6, 0.5, 0.2, 2);  // excitatory: off-diagonals < 0
    StabilityOperator op = build_operator(net, u, 0.15, rank_order(net, Eigen::VectorXd::Zero(6)));
    CHECK_THROWS_AS(perron_check(op), std::invalid_argument);
  }
}

TEST_CASE("first-order residual vanishes on symmetry directions and shrinks quadratically") {
  IntegrateAndFire u(4.0);
  DirectedNetwork net = random_network(16, 0.25, -0.2, 61);
  Rng rng(62);

  CHECK(linearization_residual(net, u, 0.15, Eigen::VectorXd::Zero(16), 1e-3) < 1e-14);
  CHECK(linearization_residual(net, u, 0.15, Eigen::VectorXd::Ones(16), 1e-3) < 1e-13);

  Eigen::VectorXd delta = random_delta(rng, 16, 1.0);
  double r1 = linearization_residual(net, u, 0.15, delta, 1e-3);
  double r2 = linearization_residual(net, u, 0.15, delta, 5e-4);
  CHECK(r1 > 0.0);
  CHECK(r2 / r1 > 0.2);
  CHECK(r2 / r1 < 0.35);
}

TEST_CASE("operator cache deduplicates by rank-order signature") {
  IntegrateAndFire u(4.0);
  DirectedNetwork net = random_network(8, 0.5, -0.3, 71);
  OperatorCache cache(net, u, 0.15);
  Rng rng(72);
  Eigen::VectorXd d1 = random_delta(rng, 8, 0.05);
  RankOrder o1 = rank_order(net, d1);
  const StabilityOperator& a = cache.get(o1);
  const StabilityOperator& b = cache.get(o1);
  CHECK(&a == &b);
  CHECK(cache.size() == 1);
  RankOrder o2 = rank_order(net, Eigen::VectorXd::Constant(8, 0.01) - d1);
  cache.get(o2);
  CHECK(cache.size() == 2);
}

TEST_CASE("contraction traces") {
  IntegrateAndFire u(4.0);

  SUBCASE("uniform perturbations collapse to the shift mode immediately") {
    DirectedNetwork net = random_network(10, 0.4, -0.3, 81);
    auto trace = contraction_trace(net, u, 0.15, Eigen::VectorXd::Constant(10, 0.02), 5,
                                   TraceMode::linear);
    for (const TraceStep& s : trace) {
      CHECK(s.norm == 0.0);  // min-shift removes the uniform part exactly
      CHECK(s.spread == 0.0);
    }
  }

  SUBCASE("directed ring plateaus for diameter-1 periods, drops at the diameter") {
    DirectedNetwork net = ring(5, -0.2);
    REQUIRE(diameter(net) == 4);
    Eigen::VectorXd worst = Eigen::VectorXd::Constant(5, 0.05);
    worst[4] = 0.0;
    for (TraceMode mode : {TraceMode::linear, TraceMode::exact}) {
      auto trace = contraction_trace(net, u, 0.15, worst, 6, mode);
      for (int l = 1; l <= 3; ++l) {
        CHECK(trace[l].norm == doctest::Approx(trace[0].norm).epsilon(1e-12));
      }
      CHECK(trace[4].norm < trace[0].norm * (1.0 - 1e-6));
      CHECK(trace[5].norm < trace[4].norm);
    }
  }

  SUBCASE("strongly connected networks contract to a uniform vector") {
    DirectedNetwork net = random_network(30, 0.3, -0.4, 83);
    REQUIRE(is_strongly_connected(net));
    Rng rng(84);
    auto trace =
        contraction_trace(net, u, 0.15, random_delta(rng, 30, 0.06), 400, TraceMode::linear);
    for (size_t l = 1; l < trace.size(); ++l) {
      CHECK(trace[l].norm <= trace[l - 1].norm * (1.0 + 1e-12));
    }
    CHECK(trace.back().spread < 1e-10);
  }

  SUBCASE("exact and linear traces agree for small perturbations") {
    DirectedNetwork net = random_network(12, 0.4, -0.3, 85);
    Rng rng(86);
    Eigen::VectorXd d = random_delta(rng, 12, 1e-5);
    auto lin = contraction_trace(net, u, 0.15, d, 10, TraceMode::linear);
    auto ex = contraction_trace(net, u, 0.15, d, 10, TraceMode::exact);
    for (size_t l = 0; l < lin.size(); ++l) {
      CHECK(std::abs(lin[l].norm - ex[l].norm) < 1e-9);
    }
  }
}

TEST_CASE("operator enumeration") {
  IntegrateAndFire u(4.0);

  SUBCASE("heterogeneous all-to-all exceeds the factorial ceiling") {
    // cyclically symmetric weights: w(i <- i+1) = -0.1, w(i <- i+2) = -0.2.  A curved rise
    // function keeps the per-row branches distinct; the integrate-and-fire family would
    // collapse them (see below).
    LogRise lr(2.5);
    std::vector<std::vector<int>> pre(3);
    std::vector<std::vector<double>> w(3);
    for (int i = 0; i < 3; ++i) {
      pre[i] = {(i + 1) % 3, (i + 2) % 3};
      w[i] = {-0.1, -0.2};
    }
    DirectedNetwork net(3, pre, w, -0.3);
    EnumerationReport report = enumerate_operators(net, lr, 0.15);
    CHECK(report.orderings == 6);
    CHECK(report.distinct == 6);
    CHECK(report.bound_lower == 2);
    CHECK(report.bound_upper == 2);  // the naive count exceeds it; reported, not asserted
    CHECK(report.similarity_classes >= 1);
    CHECK(report.similarity_classes <= report.distinct);

    // the cyclic relabeling maps every operator to another member of the set, bit-exactly
    const int rot[3] = {1, 2, 0};
    for (const Eigen::MatrixXd& A : report.matrices) {
      Eigen::MatrixXd conj(3, 3);
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) conj(r, c) = A(rot[r], rot[c]);
      }
      bool found = false;
      for (const Eigen::MatrixXd& B : report.matrices) {
        if ((conj.array() == B.array()).all()) found = true;
      }
      CHECK(found);
    }
  }

  SUBCASE("homogeneous all-to-all collapses to a single operator") {
    std::vector<std::vector<int>> pre(4);
    std::vector<std::vector<double>> w(4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        if (j == i) continue;
        pre[i].push_back(j);
        w[i].push_back(-0.3 / 3.0);
      }
    }
    DirectedNetwork net(4, pre, w, -0.3);
    EnumerationReport report = enumerate_operators(net, u, 0.15);
    CHECK(report.orderings == 24);
    CHECK(report.distinct == 1);
    CHECK(report.similarity_classes == 1);
  }

  SUBCASE("a single wide row pins the lower bound") {
    LogRise lr(2.5);
    DirectedNetwork net(3, {{1, 2}, {2}, {0}}, {{-0.1, -0.2}, {-0.3}, {-0.3}}, -0.3);
    EnumerationReport report = enumerate_operators(net, lr, 0.15);
    CHECK(report.row_bound[0] == 2);
    CHECK(report.row_distinct[0] == 2);
    CHECK(report.row_distinct[1] == 1);
    CHECK(report.row_distinct[2] == 1);
    CHECK(report.distinct == 2);
    CHECK(report.bound_lower == 2);
  }

  SUBCASE("integrate-and-fire collapses even heterogeneous weights to one operator") {
    // U'(U^-1(u)) is affine in u, so every ordering telescopes to the same matrix
    std::vector<std::vector<int>> pre(3);
    std::vector<std::vector<double>> w(3);
    for (int i = 0; i < 3; ++i) {
      pre[i] = {(i + 1) % 3, (i + 2) % 3};
      w[i] = {-0.1, -0.2};
    }
    DirectedNetwork net(3, pre, w, -0.3);
    EnumerationReport report = enumerate_operators(net, u, 0.15);
    CHECK(report.orderings == 6);
    CHECK(report.distinct == 1);
    CHECK(report.similarity_classes == 1);
  }

  SUBCASE("enumeration is capped") {
    DirectedNetwork net = random_network(9, 0.5, -0.2, 1);
    CHECK_THROWS_AS(enumerate_operators(net, u, 0.15), std::invalid_argument);
  }
}

TEST_CASE("generalized expansion") {
  IntegrateAndFire u(4.0);
  Rng rng(91);
  DirectedNetwork net = random_network(10, 0.6, -0.4, 92);
  RankOrder order = rank_order(net, random_delta(rng, 10, 0.05));

  SUBCASE("chain identity for the derivative ratios") {
    for (int i = 0; i < 10; ++i) {
      int k = net.in_degree(i);
      for (int a = 0; a <= k; ++a) {
        for (int b = a; b <= k; ++b) {
          for (int c = b; c <= k; ++c) {
            double lhs = p_ratio(net, u, 0.15, order, i, a, b) * p_ratio(net, u, 0.15, order, i, b, c);
            double rhs = p_ratio(net, u, 0.15, order, i, a, c);
            CHECK(std::abs(lhs - rhs) <= 1e-14);
          }
        }
      }
    }
  }

  SUBCASE("full-depth ratios reproduce the ladder") {
    for (int i = 0; i < 10; ++i) {
      int k = net.in_degree(i);
      Eigen::VectorXd p = p_coefficients(net, u, 0.15, order, i);
      for (int m = 0; m <= k; ++m) {
        CHECK(p_ratio(net, u, 0.15, order, i, m, k) == doctest::Approx(p[m]).epsilon(1e-13));
      }
    }
  }

  SUBCASE("vanishing gaps make the truncation exact") {
    RankOrder flat = rank_order(net, Eigen::VectorXd::Zero(10));
    for (int i = 0; i < 10; ++i) {
      for (int m = 1; m <= net.in_degree(i); ++m) {
        TruncationCheck chk = truncation_check(net, u, 0.15, flat, i, m, Eigen::VectorXd::Zero(10));
        double anchor = partial_phase(net, u, 0.15, flat, i, m);
        CHECK(chk.exact == doctest::Approx(anchor).epsilon(1e-13));
        CHECK(chk.first_order == doctest::Approx(anchor).epsilon(1e-13));
      }
    }
  }

  SUBCASE("first-order error is quadratic in the perturbation scale") {
    Eigen::VectorXd delta = random_delta(rng, 10, 1.0);
    for (int i = 0; i < 10; ++i) {
      RankOrder o = rank_order(net, delta);  // scaling preserves the order
      for (int m = 1; m <= net.in_degree(i); ++m) {
        TruncationCheck big = truncation_check(net, u, 0.15, o, i, m, 1e-3 * delta);
        TruncationCheck small = truncation_check(net, u, 0.15, o, i, m, 5e-4 * delta);
        double e1 = std::abs(big.exact - big.first_order);
        double e2 = std::abs(small.exact - small.first_order);
        if (e2 < 1e-13) continue;  // degenerate gap pattern, nothing to resolve
        CHECK(e1 / e2 > 3.4);
        CHECK(e1 / e2 < 4.6);
      }
    }
  }
}
