#include "synclab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "synclab/errors.hpp"

namespace synclab {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NumericalError("cannot open " + path + " for writing");
  out << body;
  if (!out) throw NumericalError("write failed for " + path);
}

// nlohmann reports parse errors by byte offset; humans want a line number.
json parse_with_lines(const std::string& path, const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    size_t line = 1;
    for (size_t b = 0; b + 1 < e.byte && b < text.size(); ++b) {
      if (text[b] == '\n') ++line;
    }
    std::ostringstream os;
    os << path << ":" << line << ": " << e.what();
    throw std::invalid_argument(os.str());
  }
}

std::string provenance_line(const Provenance& prov) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "# config_hash=%016llx seed=%llu version=%s\n",
                static_cast<unsigned long long>(prov.config_hash),
                static_cast<unsigned long long>(prov.seed), kArtifactVersion);
  return buf;
}

std::string fmt(double x, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, x);
  return buf;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

DirectedNetwork load_network(const std::string& path) {
  json j = parse_with_lines(path, read_file(path));
  auto fail = [&](const std::string& what) -> void {
    throw std::invalid_argument(path + ": " + what);
  };
  if (!j.is_object() || !j.contains("n") || !j.contains("eps_total") || !j.contains("edges")) {
    fail("expected an object with keys n, eps_total, edges");
  }
  if (!j["n"].is_number_integer()) fail("n must be an integer");
  const int n = j["n"].get<int>();
  if (n < 2) fail("n must be at least 2");
  if (!j["eps_total"].is_number()) fail("eps_total must be a number");
  const double eps_total = j["eps_total"].get<double>();
  if (!j["edges"].is_array()) fail("edges must be an array");

  std::vector<std::vector<int>> pre(n);
  std::vector<std::vector<double>> w(n);
  size_t idx = 0;
  for (const auto& e : j["edges"]) {
    std::string where = "edges[" + std::to_string(idx) + "]";
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
        !e[1].is_number_integer() || !e[2].is_number()) {
      fail(where + ": expected [target, source, weight]");
    }
    int i = e[0].get<int>(), src = e[1].get<int>();
    double weight = e[2].get<double>();
    if (i < 0 || i >= n || src < 0 || src >= n) fail(where + ": index out of range");
    if (i == src) fail(where + ": self-loop");
    if (weight == 0.0 || !std::isfinite(weight)) fail(where + ": weight must be finite, nonzero");
    for (int prev : pre[i]) {
      if (prev == src) fail(where + ": duplicate edge");
    }
    pre[i].push_back(src);
    w[i].push_back(weight);
    ++idx;
  }
  try {
    return DirectedNetwork(n, std::move(pre), std::move(w), eps_total);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void save_network(const DirectedNetwork& net, const std::string& path) {
  json j;
  j["n"] = net.size();
  j["eps_total"] = net.eps_total();
  json edges = json::array();
  for (int i = 0; i < net.size(); ++i) {
    for (size_t m = 0; m < net.pre(i).size(); ++m) {
      edges.push_back(json::array({i, net.pre(i)[m], net.weights(i)[m]}));
    }
  }
  j["edges"] = std::move(edges);
  write_file(path, j.dump() + "\n");
}

void write_spikes_csv(const std::string& path, const std::vector<SpikeRecord>& spikes,
                      const Provenance& prov) {
  std::string body = provenance_line(prov);
  body += "time,neuron\n";
  for (const SpikeRecord& s : spikes) {
    body += fmt(s.time, "%.12g");
    body += ',';
    body += std::to_string(s.neuron);
    body += '\n';
  }
  write_file(path, body);
}

void save_snapshot(const SimulatorState& state, const std::string& path) {
  json j;
  j["t"] = state.t;
  j["tau"] = state.tau;
  j["phases"] = std::vector<double>(state.phi.data(), state.phi.data() + state.phi.size());
  json flights = json::array();
  for (const InFlight& s : state.in_flight) {
    flights.push_back(json::array({s.arrival, s.source, s.scale}));
  }
  j["in_flight"] = std::move(flights);
  write_file(path, j.dump() + "\n");
}

SimulatorState load_snapshot(const std::string& path, int n) {
  json j = parse_with_lines(path, read_file(path));
  auto fail = [&](const std::string& what) -> void {
    throw std::invalid_argument(path + ": " + what);
  };
  if (!j.is_object() || !j.contains("t") || !j.contains("tau") || !j.contains("phases") ||
      !j.contains("in_flight")) {
    fail("expected an object with keys t, tau, phases, in_flight");
  }
  SimulatorState state;
  state.t = j["t"].get<double>();
  state.tau = j["tau"].get<double>();
  const auto& phases = j["phases"];
  if (!phases.is_array() || static_cast<int>(phases.size()) != n) {
    fail("phases must be an array of length " + std::to_string(n));
  }
  state.phi.resize(n);
  for (int i = 0; i < n; ++i) state.phi[i] = phases[i].get<double>();
  for (const auto& f : j["in_flight"]) {
    if (!f.is_array() || f.size() != 3) fail("in_flight entries must be [arrival, source, scale]");
    state.in_flight.push_back({f[0].get<double>(), f[1].get<int>(), f[2].get<double>()});
  }
  std::stable_sort(state.in_flight.begin(), state.in_flight.end(),
                   [](const InFlight& a, const InFlight& b) { return a.arrival < b.arrival; });
  try {
    validate_state(state, n);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return state;
}

void write_spectrum_csv(const std::string& path,
                        const std::vector<std::pair<int, Eigen::VectorXcd>>& spectra,
                        const Provenance& prov) {
  std::string body = provenance_line(prov);
  body += "operator_id,re,im\n";
  for (const auto& [id, values] : spectra) {
    for (Eigen::Index k = 0; k < values.size(); ++k) {
      body += std::to_string(id);
      body += ',';
      body += fmt(values[k].real());
      body += ',';
      body += fmt(values[k].imag());
      body += '\n';
    }
  }
  write_file(path, body);
}

void write_operator_csv(const std::string& path, const StabilityOperator& op,
                        const Provenance& prov) {
  std::string body = provenance_line(prov);
  const Eigen::Index n = op.matrix.rows();
  body += "# n=" + std::to_string(n) + " diag=" + fmt(op.diag) + " rank=";
  for (size_t i = 0; i < op.order.pos.size(); ++i) {
    if (i) body += '|';
    for (size_t m = 0; m < op.order.pos[i].size(); ++m) {
      if (m) body += ',';
      body += std::to_string(op.order.pos[i][m]);
    }
  }
  body += '\n';
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      if (c) body += ',';
      body += fmt(op.matrix(r, c));
    }
    body += '\n';
  }
  write_file(path, body);
}

void write_trace_csv(const std::string& path, const std::vector<TraceStep>& trace,
                     const Provenance& prov) {
  std::string body = provenance_line(prov);
  body += "period,max_norm,spread\n";
  for (size_t l = 0; l < trace.size(); ++l) {
    body += std::to_string(l);
    body += ',';
    body += fmt(trace[l].norm);
    body += ',';
    body += fmt(trace[l].spread);
    body += '\n';
  }
  write_file(path, body);
}

Histogram histogram(const Eigen::VectorXd& values, int bins) {
  if (bins < 1) throw std::invalid_argument("histogram needs at least one bin");
  Histogram h;
  h.counts.assign(bins, 0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::isfinite(values[i])) {
      lo = std::min(lo, values[i]);
      hi = std::max(hi, values[i]);
    }
  }
  if (!(lo <= hi)) return h;  // nothing finite
  h.lo = lo;
  h.hi = hi;
  const double width = hi - lo;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    int b = width > 0.0 ? static_cast<int>((values[i] - lo) / width * bins) : 0;
    if (b >= bins) b = bins - 1;
    ++h.counts[b];
    ++h.total;
  }
  return h;
}

void write_histogram_csv(const std::string& path, const Histogram& hist, const Provenance& prov) {
  std::string body = provenance_line(prov);
  body += "bin_lo,bin_hi,count,density\n";
  const int bins = static_cast<int>(hist.counts.size());
  const double width = (hist.hi - hist.lo) / bins;
  for (int b = 0; b < bins; ++b) {
    double blo = hist.lo + b * width;
    double bhi = b + 1 == bins ? hist.hi : hist.lo + (b + 1) * width;
    double density = hist.total > 0 && width > 0.0
                         ? static_cast<double>(hist.counts[b]) / (hist.total * width)
                         : 0.0;
    body += fmt(blo) + "," + fmt(bhi) + "," + std::to_string(hist.counts[b]) + "," +
            fmt(density) + "\n";
  }
  write_file(path, body);
}

}  // namespace synclab
