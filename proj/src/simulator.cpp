#include "synclab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "synclab/errors.hpp"

namespace synclab {

namespace {

// Events closer than this are one instant; phases advance at unit rate, so the same value
// separates "at threshold" from "almost there".
constexpr double kTieEps = 1e-12;

// Runaway inhibition guard: a phase this low means the configuration cannot sustain
// activity and further integration only loses precision.
constexpr double kPhaseFloor = -1e3;

void check_shapes(const SimulatorState& state, const DirectedNetwork& net) {
  if (state.phi.size() != net.size()) {
    throw std::invalid_argument("state and network disagree on oscillator count");
  }
  if (!(state.tau > 0.0 && state.tau < 1.0)) {
    throw std::invalid_argument("delay tau must lie in (0, 1)");
  }
  if (state.tau <= 10 * kTieEps) {
    throw std::invalid_argument("delay tau is below the event tie resolution");
  }
}

double next_event_time(const SimulatorState& state) {
  double t_next = state.t + 1.0 - state.phi.maxCoeff();
  if (!state.in_flight.empty()) {
    t_next = std::min(t_next, state.in_flight.front().arrival);
  }
  // Overshot phases (possible right after a large perturbation) fire immediately rather
  // than in the past.
  return std::max(t_next, state.t);
}

void fire(SimulatorState& state, int i, std::vector<SpikeRecord>& emitted) {
  emitted.push_back({state.t, i});
  state.phi[i] = 0.0;
  // Arrival times are nondecreasing in emission order, so push_back keeps the queue sorted.
  state.in_flight.push_back({state.t + state.tau, i, 1.0});
}

// Deliver everything that happens at one instant: threshold crossings first (an oscillator
// that reached threshold has fired; a pulse arriving at the same instant acts on its reset
// phase), then the accumulated arrivals as one transfer per receiver.  Delay > 0 keeps new
// pulses out of the current instant, so the sweep terminates; the cap guards against a
// broken Potential.
void settle_instant(SimulatorState& state, const DirectedNetwork& net, const Potential& U,
                    Eigen::VectorXd& pending, std::vector<SpikeRecord>& emitted) {
  const int n = net.size();
  const long long cap = static_cast<long long>(n) * n + 2;
  for (long long sweep = 0;; ++sweep) {
    if (sweep > cap) {
      throw NumericalError("event cascade failed to settle within the sweep cap");
    }
    bool active = false;
    for (int i = 0; i < n; ++i) {
      if (state.phi[i] >= 1.0 - kTieEps) {
        fire(state, i, emitted);
        active = true;
      }
    }
    while (!state.in_flight.empty() && state.in_flight.front().arrival <= state.t + kTieEps) {
      const InFlight s = state.in_flight.front();
      state.in_flight.pop_front();
      for (const auto& [target, w] : net.post(s.source)) {
        pending[target] += s.scale * w;
      }
      active = true;
    }
    for (int i = 0; i < n; ++i) {
      if (pending[i] == 0.0) continue;
      double u = U.eval(state.phi[i]) + pending[i];
      pending[i] = 0.0;
      if (u >= 1.0) {
        fire(state, i, emitted);
      } else {
        state.phi[i] = U.inv(u);
      }
    }
    if (!active) break;
  }
  if (state.phi.minCoeff() < kPhaseFloor) {
    throw NumericalError("phase fell below the configured floor (runaway inhibition)");
  }
}

}  // namespace

SimulatorState make_uniform_state(int n, double phase, double tau) {
  if (n < 1) throw std::invalid_argument("state needs at least one oscillator");
  if (phase > 1.0) throw std::invalid_argument("initial phase above threshold");
  SimulatorState state;
  state.t = 0.0;
  state.phi = Eigen::VectorXd::Constant(n, phase);
  state.tau = tau;
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("delay tau must lie in (0, 1)");
  return state;
}

void validate_state(const SimulatorState& state, int n) {
  if (state.phi.size() != n) throw std::invalid_argument("state has wrong oscillator count");
  if (!(state.tau > 0.0 && state.tau < 1.0)) {
    throw std::invalid_argument("delay tau must lie in (0, 1)");
  }
  if (!std::isfinite(state.t)) throw std::invalid_argument("non-finite clock");
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(state.phi[i]) || state.phi[i] > 1.0 + 1e-9) {
      throw std::invalid_argument("phase above threshold or non-finite");
    }
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (const InFlight& s : state.in_flight) {
    if (s.source < 0 || s.source >= n) throw std::invalid_argument("in-flight source out of range");
    if (!std::isfinite(s.scale)) throw std::invalid_argument("non-finite in-flight scale");
    if (s.arrival < prev) throw std::invalid_argument("in-flight queue not sorted by arrival");
    if (s.arrival < state.t - 1e-9 || s.arrival > state.t + state.tau + 1e-9) {
      throw std::invalid_argument("in-flight arrival outside (t, t + tau]");
    }
    prev = s.arrival;
  }
}

double step(SimulatorState& state, const DirectedNetwork& net, const Potential& U,
            std::vector<SpikeRecord>& emitted) {
  check_shapes(state, net);
  const double t_next = next_event_time(state);
  state.phi.array() += t_next - state.t;
  state.t = t_next;
  Eigen::VectorXd pending = Eigen::VectorXd::Zero(net.size());
  settle_instant(state, net, U, pending, emitted);
  return t_next;
}

void run(SimulatorState& state, const DirectedNetwork& net, const Potential& U, double t_end,
         std::vector<SpikeRecord>& emitted) {
  check_shapes(state, net);
  if (t_end < state.t) throw std::invalid_argument("run target time precedes the clock");
  Eigen::VectorXd pending = Eigen::VectorXd::Zero(net.size());
  while (true) {
    const double t_next = next_event_time(state);
    if (t_next >= t_end) break;
    state.phi.array() += t_next - state.t;
    state.t = t_next;
    settle_instant(state, net, U, pending, emitted);
  }
  state.phi.array() += t_end - state.t;
  state.t = t_end;
}

bool perturb(SimulatorState& state, const Eigen::VectorXd& delta) {
  if (delta.size() != state.phi.size()) {
    throw std::invalid_argument("perturbation has wrong dimension");
  }
  if (!state.in_flight.empty()) {
    throw std::invalid_argument("perturb requires an empty in-flight queue");
  }
  state.phi += delta;
  return delta.maxCoeff() - delta.minCoeff() < state.tau;
}

void inject_pulse(SimulatorState& state, const DirectedNetwork& net, const Potential& U,
                  double strength, std::vector<SpikeRecord>& emitted) {
  check_shapes(state, net);
  if (!std::isfinite(strength)) throw std::invalid_argument("pulse strength must be finite");
  if (strength == 0.0) return;
  for (int i = 0; i < net.size(); ++i) {
    double u = U.eval(state.phi[i]) + strength;
    if (u >= 1.0) {
      fire(state, i, emitted);
    } else {
      state.phi[i] = U.inv(u);
    }
  }
  if (state.phi.minCoeff() < kPhaseFloor) {
    throw NumericalError("phase fell below the configured floor (runaway inhibition)");
  }
}

bool drain_in_flight(SimulatorState& state, const DirectedNetwork& net, const Potential& U,
                     double t_max, std::vector<SpikeRecord>& emitted) {
  while (!state.in_flight.empty()) {
    if (next_event_time(state) >= t_max) return false;
    step(state, net, U, emitted);
  }
  return true;
}

}  // namespace synclab
