#include "synclab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "synclab/errors.hpp"

namespace synclab {

namespace {

void check_delay(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("delay tau must lie in (0, 1)");
}

double spread_of(const Eigen::VectorXd& delta) {
  return delta.maxCoeff() - delta.minCoeff();
}

std::string matrix_bytes(const Eigen::MatrixXd& A) {
  return std::string(reinterpret_cast<const char*>(A.data()), sizeof(double) * A.size());
}

long long factorial(long long k) {
  long long f = 1;
  for (long long x = 2; x <= k; ++x) f *= x;
  return f;
}

}  // namespace

double post_input_phase(const Potential& U, double tau, double eps) {
  check_delay(tau);
  double u = U.eval(tau) + eps;
  if (u >= 1.0) {
    throw std::invalid_argument("synchronous volley is supra-threshold (U(tau) + eps >= 1)");
  }
  return U.inv(u);
}

double synchronous_period(const Potential& U, double tau, double eps) {
  return tau + 1.0 - post_input_phase(U, tau, eps);
}

double common_diagonal(const Potential& U, double tau, double eps) {
  return U.deriv(tau) / U.deriv(post_input_phase(U, tau, eps));
}

std::vector<int> RankOrder::flat_key() const {
  std::vector<int> key;
  for (const auto& row : pos) {
    key.insert(key.end(), row.begin(), row.end());
    key.push_back(-1);
  }
  return key;
}

RankOrder rank_order(const DirectedNetwork& net, const Eigen::VectorXd& delta) {
  if (delta.size() != net.size()) {
    throw std::invalid_argument("perturbation has wrong dimension");
  }
  RankOrder order;
  order.pos.resize(net.size());
  for (int i = 0; i < net.size(); ++i) {
    const auto& sources = net.pre(i);
    auto& row = order.pos[i];
    row.resize(sources.size());
    std::iota(row.begin(), row.end(), 0);
    // Largest delta fires first and therefore arrives first; ties break toward the lower
    // neuron index (the two adjacent orders give identical images at the tie).
    std::sort(row.begin(), row.end(), [&](int a, int b) {
      double da = delta[sources[a]], db = delta[sources[b]];
      if (da != db) return da > db;
      return sources[a] < sources[b];
    });
  }
  return order;
}

RankOrder rank_order_from_priority(const DirectedNetwork& net, const std::vector<int>& priority) {
  const int n = net.size();
  if (static_cast<int>(priority.size()) != n) {
    throw std::invalid_argument("priority list has wrong length");
  }
  std::vector<int> rank(n, -1);
  for (int r = 0; r < n; ++r) {
    int v = priority[r];
    if (v < 0 || v >= n || rank[v] >= 0) {
      throw std::invalid_argument("priority list is not a permutation");
    }
    rank[v] = r;
  }
  RankOrder order;
  order.pos.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& sources = net.pre(i);
    auto& row = order.pos[i];
    row.resize(sources.size());
    std::iota(row.begin(), row.end(), 0);
    std::sort(row.begin(), row.end(),
              [&](int a, int b) { return rank[sources[a]] < rank[sources[b]]; });
  }
  return order;
}

Eigen::VectorXd exact_map(const DirectedNetwork& net, const Potential& U, double tau,
                          const Eigen::VectorXd& delta) {
  if (delta.size() != net.size()) {
    throw std::invalid_argument("perturbation has wrong dimension");
  }
  if (!(spread_of(delta) < tau)) {
    throw std::invalid_argument("perturbation spread must stay below the delay");
  }
  const double alpha = post_input_phase(U, tau, net.eps_total());
  const RankOrder order = rank_order(net, delta);
  Eigen::VectorXd out(net.size());
  for (int i = 0; i < net.size(); ++i) {
    const auto& sources = net.pre(i);
    const auto& w = net.weights(i);
    double gap_ref = delta[i];  // reception gaps are successive differences, first one
    double beta = tau;          // measured against the receiver's own firing advance
    for (int pos : order.pos[i]) {
      double d = delta[sources[pos]];
      double arg = beta + (gap_ref - d);
      if (arg >= 1.0) {
        throw RegimeError("oscillator reaches threshold before its next arrival");
      }
      double u = U.eval(arg) + w[pos];
      if (u >= 1.0) {
        throw RegimeError("supra-threshold arrival inside the exact map");
      }
      beta = U.inv(u);
      gap_ref = d;
    }
    out[i] = beta - alpha + gap_ref;
  }
  return out;
}

double partial_phase(const DirectedNetwork& net, const Potential& U, double tau,
                     const RankOrder& order, int i, int m) {
  const int k = net.in_degree(i);
  if (i < 0 || i >= net.size() || m < 0 || m > k) {
    throw std::invalid_argument("partial_phase: row or depth out of range");
  }
  if (m == 0) return tau;
  double s = 0.0;
  for (int x = 0; x < m; ++x) s += net.weights(i)[order.pos[i][x]];
  // The row-sum invariant makes the full partial sum the network total; substituting it
  // pins the telescoped normalization to 1 exactly.
  if (m == k) s = net.eps_total();
  double u = U.eval(tau) + s;
  if (u >= 1.0) {
    throw RegimeError("ordered partial volley is supra-threshold; expansion undefined");
  }
  return U.inv(u);
}

double p_ratio(const DirectedNetwork& net, const Potential& U, double tau,
               const RankOrder& order, int i, int n, int m) {
  return U.deriv(partial_phase(net, U, tau, order, i, n)) /
         U.deriv(partial_phase(net, U, tau, order, i, m));
}

Eigen::VectorXd p_coefficients(const DirectedNetwork& net, const Potential& U, double tau,
                               const RankOrder& order, int i) {
  if (i < 0 || i >= net.size()) throw std::invalid_argument("row index out of range");
  const int k = net.in_degree(i);
  if (order.pos.size() != static_cast<size_t>(net.size()) ||
      order.pos[i].size() != static_cast<size_t>(k)) {
    throw std::invalid_argument("rank order does not match the network");
  }
  const double u_tau = U.eval(tau);
  const double d_alpha = U.deriv(post_input_phase(U, tau, net.eps_total()));
  Eigen::VectorXd p(k + 1);
  p[0] = U.deriv(tau) / d_alpha;
  double s = 0.0;
  for (int m = 1; m <= k; ++m) {
    s += net.weights(i)[order.pos[i][m - 1]];
    double sm = (m == k) ? net.eps_total() : s;
    double u = u_tau + sm;
    if (u >= 1.0) {
      throw RegimeError("ordered partial volley is supra-threshold; expansion undefined");
    }
    p[m] = U.deriv(U.inv(u)) / d_alpha;
  }
  return p;
}

StabilityOperator build_operator(const DirectedNetwork& net, const Potential& U, double tau,
                                 const RankOrder& order) {
  const int n = net.size();
  StabilityOperator op;
  op.matrix = Eigen::MatrixXd::Zero(n, n);
  op.order = order;
  op.diag = common_diagonal(U, tau, net.eps_total());
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd p = p_coefficients(net, U, tau, order, i);
    op.matrix(i, i) = p[0];
    for (int m = 1; m <= net.in_degree(i); ++m) {
      op.matrix(i, net.pre(i)[order.pos[i][m - 1]]) = p[m] - p[m - 1];
    }
  }
  return op;
}

SpectrumResult spectrum(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw std::invalid_argument("spectrum needs a square matrix");
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(A);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("dense eigensolver failed to converge");
  }
  SpectrumResult result;
  result.values = solver.eigenvalues();
  Eigen::Index unit = 0;
  (result.values.array() - std::complex<double>(1.0, 0.0)).abs().minCoeff(&unit);
  Eigen::VectorXcd v = solver.eigenvectors().col(unit);
  Eigen::MatrixXcd Ac = A.cast<std::complex<double>>();
  result.unit_residual = (Ac * v - result.values[unit] * v).cwiseAbs().maxCoeff();
  return result;
}

GershgorinReport gershgorin_check(const StabilityOperator& op, CouplingSign sign) {
  if (sign == CouplingSign::mixed) {
    throw std::invalid_argument("disk bounds are only defined for pure-sign coupling");
  }
  const auto& A = op.matrix;
  const int n = static_cast<int>(A.rows());
  double radius = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double a = A(i, j);
      if (sign == CouplingSign::inhibitory ? a < -1e-12 : a > 1e-12) {
        throw std::invalid_argument("operator sign pattern contradicts the declared coupling sign");
      }
      row += std::abs(a);
    }
    radius = std::max(radius, row);
  }
  GershgorinReport report;
  report.center = op.diag;
  report.radius = radius;
  double tangent_point =
      sign == CouplingSign::inhibitory ? report.center + radius : report.center - radius;
  report.unit_tangent = std::abs(tangent_point - 1.0) <= 1e-10;
  report.all_contained = true;
  for (const auto& lambda : spectrum(A).values) {
    if (std::abs(lambda - std::complex<double>(report.center, 0.0)) > radius + 1e-8) {
      report.all_contained = false;
    }
  }
  return report;
}

PerronReport perron_check(const StabilityOperator& op) {
  const auto& A = op.matrix;
  if ((A.array() < -1e-12).any()) {
    throw std::invalid_argument("unit-eigenvalue simplicity check needs a nonnegative operator");
  }
  Eigen::VectorXd moduli = spectrum(A).values.cwiseAbs();
  std::sort(moduli.data(), moduli.data() + moduli.size(), std::greater<double>());
  int near_unit = 0;
  for (double m : moduli) {
    if (std::abs(m - 1.0) <= 1e-8) ++near_unit;
  }
  PerronReport report;
  report.gap = moduli.size() > 1 ? 1.0 - moduli[1] : 1.0;
  report.unit_simple = near_unit == 1 && (moduli.size() < 2 || moduli[1] < 1.0);
  return report;
}

double linearization_residual(const DirectedNetwork& net, const Potential& U, double tau,
                              const Eigen::VectorXd& delta, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("scale must be positive");
  Eigen::VectorXd sd = s * delta;
  StabilityOperator op = build_operator(net, U, tau, rank_order(net, sd));
  Eigen::VectorXd exact = exact_map(net, U, tau, sd);
  return (exact - op.matrix * sd).lpNorm<Eigen::Infinity>();
}

const StabilityOperator& OperatorCache::get(const RankOrder& order) {
  auto key = order.flat_key();
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(std::move(key), build_operator(net_, u_, tau_, order)).first;
  }
  return it->second;
}

std::vector<TraceStep> contraction_trace(const DirectedNetwork& net, const Potential& U,
                                         double tau, const Eigen::VectorXd& delta0, int periods,
                                         TraceMode mode) {
  if (delta0.size() != net.size()) {
    throw std::invalid_argument("perturbation has wrong dimension");
  }
  if (periods < 0) throw std::invalid_argument("negative period count");
  Eigen::VectorXd delta = delta0.array() - delta0.minCoeff();
  if (!(spread_of(delta) < tau)) {
    throw std::invalid_argument("perturbation spread must stay below the delay");
  }
  std::vector<TraceStep> trace;
  trace.reserve(periods + 1);
  trace.push_back({delta.lpNorm<Eigen::Infinity>(), spread_of(delta)});
  OperatorCache cache(net, U, tau);
  for (int l = 0; l < periods; ++l) {
    if (mode == TraceMode::exact) {
      delta = exact_map(net, U, tau, delta);
    } else {
      delta = cache.get(rank_order(net, delta)).matrix * delta;
    }
    trace.push_back({delta.lpNorm<Eigen::Infinity>(), spread_of(delta)});
  }
  return trace;
}

EnumerationReport enumerate_operators(const DirectedNetwork& net, const Potential& U,
                                      double tau) {
  const int n = net.size();
  if (n > 8) {
    throw std::invalid_argument("operator enumeration is exhaustive and capped at N = 8");
  }
  EnumerationReport report;
  report.orderings = factorial(n);
  int k_max = 0;
  for (int i = 0; i < n; ++i) {
    report.row_bound.push_back(factorial(net.in_degree(i)));
    k_max = std::max(k_max, net.in_degree(i));
  }
  report.bound_lower = factorial(k_max);
  report.bound_upper = factorial(n - 1);

  std::set<std::string> seen;
  std::vector<std::set<std::string>> row_seen(n);
  std::vector<int> priority(n);
  std::iota(priority.begin(), priority.end(), 0);
  do {
    RankOrder order = rank_order_from_priority(net, priority);
    StabilityOperator op = build_operator(net, U, tau, order);
    if (seen.insert(matrix_bytes(op.matrix)).second) {
      report.matrices.push_back(op.matrix);
    }
    for (int i = 0; i < n; ++i) {
      Eigen::RowVectorXd row = op.matrix.row(i);
      row_seen[i].insert(
          std::string(reinterpret_cast<const char*>(row.data()), sizeof(double) * row.size()));
    }
  } while (std::next_permutation(priority.begin(), priority.end()));
  report.distinct = static_cast<long long>(report.matrices.size());
  for (int i = 0; i < n; ++i) {
    report.row_distinct.push_back(static_cast<long long>(row_seen[i].size()));
  }

  report.similarity_classes = -1;
  if (n <= 6) {
    std::set<std::string> canon;
    std::vector<int> sigma(n);
    Eigen::MatrixXd B(n, n);
    for (const Eigen::MatrixXd& A : report.matrices) {
      std::iota(sigma.begin(), sigma.end(), 0);
      std::string best;
      do {
        for (int r = 0; r < n; ++r) {
          for (int c = 0; c < n; ++c) B(r, c) = A(sigma[r], sigma[c]);
        }
        std::string bytes = matrix_bytes(B);
        if (best.empty() || bytes < best) best = std::move(bytes);
      } while (std::next_permutation(sigma.begin(), sigma.end()));
      canon.insert(best);
    }
    report.similarity_classes = static_cast<long long>(canon.size());
  }
  return report;
}

TruncationCheck truncation_check(const DirectedNetwork& net, const Potential& U, double tau,
                                 const RankOrder& order, int i, int m,
                                 const Eigen::VectorXd& delta) {
  const int k = net.in_degree(i);
  if (i < 0 || i >= net.size() || m < 1 || m > k) {
    throw std::invalid_argument("truncation_check: row or depth out of range");
  }
  if (delta.size() != net.size()) {
    throw std::invalid_argument("perturbation has wrong dimension");
  }
  if (!(spread_of(delta) < tau)) {
    throw std::invalid_argument("perturbation spread must stay below the delay");
  }
  TruncationCheck result;
  double beta = tau;
  double gap_ref = delta[i];
  std::vector<double> gaps(m);
  for (int x = 0; x < m; ++x) {
    int pos = order.pos[i][x];
    double d = delta[net.pre(i)[pos]];
    gaps[x] = gap_ref - d;
    double arg = beta + gaps[x];
    if (arg >= 1.0) throw RegimeError("oscillator reaches threshold before its next arrival");
    double u = U.eval(arg) + net.weights(i)[pos];
    if (u >= 1.0) throw RegimeError("supra-threshold arrival inside the truncated volley");
    beta = U.inv(u);
    gap_ref = d;
  }
  result.exact = beta;
  double first = partial_phase(net, U, tau, order, i, m);
  for (int x = 1; x <= m; ++x) {
    first += p_ratio(net, U, tau, order, i, x - 1, m) * gaps[x - 1];
  }
  result.first_order = first;
  return result;
}

}  // namespace synclab
