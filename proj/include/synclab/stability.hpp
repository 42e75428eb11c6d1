#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "synclab/network.hpp"
#include "synclab/potential.hpp"

namespace synclab {

// Phase of every oscillator right after the synchronous pulse volley lands,
// U^{-1}(U(tau) + eps).  Requires the sub-threshold condition U(tau) + eps < 1.
double post_input_phase(const Potential& U, double tau, double eps);

// Period of the synchronous orbit, tau + 1 - post_input_phase.
double synchronous_period(const Potential& U, double tau, double eps);

// Common diagonal entry of every first-order operator, U'(tau) / U'(post_input_phase).
// Tends to 1 as eps -> 0: stability degrades toward neutral for vanishing coupling.
double common_diagonal(const Potential& U, double tau, double eps);

// Reception order of the perturbed pulse volley.  pos[i][m] indexes into pre(i)/weights(i)
// and names the (m+1)-th pulse to arrive at i: sources sorted by descending delta (largest
// perturbation fires, hence arrives, first), equal deltas by ascending neuron index.
struct RankOrder {
  std::vector<std::vector<int>> pos;

  // Flat per-row signature, rows separated by -1.  Cache and dedup key.
  std::vector<int> flat_key() const;
};

RankOrder rank_order(const DirectedNetwork& net, const Eigen::VectorXd& delta);

// Rank order induced by a strict global ordering: priority[r] is the neuron holding the
// r-th largest delta.  Used to enumerate all orderings without materializing deltas.
RankOrder rank_order_from_priority(const DirectedNetwork& net, const std::vector<int>& priority);

// One period of the exact perturbation return map on the synchronous orbit.  delta must be
// admissible (spread below tau).  Raises RegimeError when an intermediate phase reaches
// threshold or an arrival is supra-threshold; the event simulator covers those regimes.
Eigen::VectorXd exact_map(const DirectedNetwork& net, const Potential& U, double tau,
                          const Eigen::VectorXd& delta);

// Derivative ladder for row i under the given rank order: entry m is the sensitivity of
// the post-volley phase to arrivals from position m onward.  Length k_i + 1, entry 0 is
// the common diagonal, entry k_i is exactly 1 (telescoped row normalization).
Eigen::VectorXd p_coefficients(const DirectedNetwork& net, const Potential& U, double tau,
                               const RankOrder& order, int i);

// First-order return map for one rank order.  Row i carries the common diagonal on the
// diagonal, successive differences of the derivative ladder on Pre(i), zeros elsewhere;
// every row sums to 1.
struct StabilityOperator {
  Eigen::MatrixXd matrix;
  RankOrder order;
  double diag;
};

StabilityOperator build_operator(const DirectedNetwork& net, const Potential& U, double tau,
                                 const RankOrder& order);

// Full eigenvalue set of a dense non-symmetric operator plus a residual diagnostic
// ||A v - lambda v||_inf for the eigenpair closest to 1.
struct SpectrumResult {
  Eigen::VectorXcd values;
  double unit_residual;
};

SpectrumResult spectrum(const Eigen::MatrixXd& A);

// Disk geometry for pure-sign coupling.  center is the common diagonal; radius is the
// largest off-diagonal absolute row sum.  Inhibition: disk inside the unit circle, tangent
// at 1 (center + radius = 1).  Excitation: tangent from outside (center - radius = 1).
struct GershgorinReport {
  double center;
  double radius;
  bool all_contained;
  bool unit_tangent;
};

GershgorinReport gershgorin_check(const StabilityOperator& op, CouplingSign sign);

// For nonnegative (inhibitory) operators: is the unit eigenvalue simple with every other
// eigenvalue strictly inside the unit circle?  gap is 1 minus the second largest modulus.
struct PerronReport {
  bool unit_simple;
  double gap;
};

PerronReport perron_check(const StabilityOperator& op);

// ||exact_map(s * delta) - A(s * delta) . (s * delta)||_inf, the nonlinearity left over
// after the first-order operator.  Scales quadratically in s.
double linearization_residual(const DirectedNetwork& net, const Potential& U, double tau,
                              const Eigen::VectorXd& delta, double s);

// Lazily built operators keyed by rank-order signature.  Not thread safe; use one cache
// per worker.  The referenced network and potential must outlive the cache.
class OperatorCache {
 public:
  OperatorCache(const DirectedNetwork& net, const Potential& U, double tau)
      : net_(net), u_(U), tau_(tau) {}

  const StabilityOperator& get(const RankOrder& order);
  size_t size() const { return cache_.size(); }

 private:
  const DirectedNetwork& net_;
  const Potential& u_;
  double tau_;
  std::map<std::vector<int>, StabilityOperator> cache_;
};

enum class TraceMode { exact, linear };

struct TraceStep {
  double norm;    // ||delta||_inf after this many periods
  double spread;  // max - min
};

// Iterate the period map from delta0 (shifted so min = 0 first) and record the max norm
// and spread after every period.  TraceMode::exact runs the nonlinear map, TraceMode::linear
// multiplies by the operator matching each iterate's rank order (built lazily, cached).
std::vector<TraceStep> contraction_trace(const DirectedNetwork& net, const Potential& U,
                                         double tau, const Eigen::VectorXd& delta0, int periods,
                                         TraceMode mode);

// Exhaustive walk over all N! strict perturbation orderings (N <= 8).  Counts bit-exact
// distinct operators, per-row distinct rows against the k_i! ceiling, and (for N <= 6)
// classes under simultaneous row/column permutation.  The factorial bounds are reported,
// never asserted: the naive distinct count can exceed (N-1)!.
struct EnumerationReport {
  std::vector<Eigen::MatrixXd> matrices;
  long long orderings;
  long long distinct;
  std::vector<long long> row_distinct;
  std::vector<long long> row_bound;
  long long bound_lower;          // (max_i k_i)!
  long long bound_upper;          // (N - 1)!
  long long similarity_classes;   // -1 when skipped
};

EnumerationReport enumerate_operators(const DirectedNetwork& net, const Potential& U, double tau);

// Phase after the first m arrivals of the unperturbed volley at row i,
// U^{-1}(U(tau) + sum of the first m weights in rank order).
double partial_phase(const DirectedNetwork& net, const Potential& U, double tau,
                     const RankOrder& order, int i, int m);

// Generalized derivative ratio U'(partial_phase(n)) / U'(partial_phase(m)).  Satisfies the
// chain identity p(n,l) * p(l,m) = p(n,m).
double p_ratio(const DirectedNetwork& net, const Potential& U, double tau,
               const RankOrder& order, int i, int n, int m);

// Truncated volley at row i: phase after the first m perturbed arrivals, exactly and to
// first order in the inter-arrival gaps.  The first-order error is quadratic in the gaps;
// m = k_i reproduces the full-row expansion behind the operator entries.
struct TruncationCheck {
  double exact;
  double first_order;
};

TruncationCheck truncation_check(const DirectedNetwork& net, const Potential& U, double tau,
                                 const RankOrder& order, int i, int m,
                                 const Eigen::VectorXd& delta);

}  // namespace synclab
