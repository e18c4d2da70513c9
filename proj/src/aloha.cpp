#include "gfra/aloha.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace gfra {

GrantBasedOutcome simulate_grant_based(int k_active, int n_preambles, CaptureMode mode,
                                       RandomStream& stream) {
  if (k_active < 0 || n_preambles < 1)
    throw ConfigError("grant-based simulation requires K >= 0 and L >= 1");
  std::vector<int> claims(static_cast<size_t>(n_preambles), 0);
  for (int k = 0; k < k_active; ++k)
    ++claims[stream.uniform_int(static_cast<std::uint64_t>(n_preambles))];
  GrantBasedOutcome out;
  out.capture_mode = mode;
  for (int c : claims) {
    if (c >= 2) ++out.collided;
    if (mode == CaptureMode::kNone) {
      if (c == 1) ++out.granted;
    } else {
      if (c >= 1) ++out.granted;  // capture grants one claimant per occupied preamble
    }
  }
  return out;
}

double grant_based_mean_analytic(int k_active, int n_preambles, CaptureMode mode) {
  const double k = k_active;
  const double l = n_preambles;
  if (k_active == 0) return 0.0;
  if (mode == CaptureMode::kNone) return k * std::pow(1.0 - 1.0 / l, k - 1.0);
  return l * (1.0 - std::pow(1.0 - 1.0 / l, k));
}

PeelingInstance make_peeling_instance(const PilotMatrix& sparse_matrix, const CVec& x) {
  if (sparse_matrix.kind != PilotKind::kSparseBinary)
    throw ConfigError("peeling requires a sparse binary matrix");
  if (x.size() != sparse_matrix.entries.cols())
    throw ConfigError("signal length does not match matrix columns");
  PeelingInstance inst;
  inst.matrix = sparse_matrix;
  inst.truth = x;
  inst.observed = sparse_matrix.entries * x;
  return inst;
}

PeelResult peel(const PeelingInstance& instance, int max_rounds) {
  const auto& a = instance.matrix.entries;
  const int rows = static_cast<int>(a.rows());
  const int cols = static_cast<int>(a.cols());

  // Packet-level abstraction: the decoder sees, per measurement, how many
  // unresolved nonzeros it touches (the degree oracle), and peels values
  // from measurements touching exactly one.
  std::vector<std::vector<int>> row_active(static_cast<size_t>(rows));
  std::vector<std::vector<int>> col_rows(static_cast<size_t>(cols));
  std::vector<int> unresolved_count(static_cast<size_t>(rows), 0);
  CVec residual = instance.observed;

  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (a(r, c) != Complex(0.0, 0.0)) {
        if (instance.truth[c] != Complex(0.0, 0.0)) {
          row_active[static_cast<size_t>(r)].push_back(c);
          ++unresolved_count[static_cast<size_t>(r)];
        }
        col_rows[static_cast<size_t>(c)].push_back(r);
      }

  std::vector<std::uint8_t> resolved(static_cast<size_t>(cols), 0);
  std::deque<int> singles;
  for (int r = 0; r < rows; ++r)
    if (unresolved_count[static_cast<size_t>(r)] == 1) singles.push_back(r);

  PeelResult result;
  int total_active = 0;
  for (int c = 0; c < cols; ++c)
    if (instance.truth[c] != Complex(0.0, 0.0)) ++total_active;

  while (!singles.empty()) {
    if (max_rounds >= 0 && result.peels >= max_rounds) break;
    const int r = singles.front();
    singles.pop_front();
    if (unresolved_count[static_cast<size_t>(r)] != 1) continue;  // stale entry
    int idx = -1;
    for (int c : row_active[static_cast<size_t>(r)])
      if (!resolved[static_cast<size_t>(c)]) {
        idx = c;
        break;
      }
    if (idx < 0) continue;
    const Complex value = residual[r];
    result.recovered.emplace(idx, value);
    resolved[static_cast<size_t>(idx)] = 1;
    ++result.peels;
    for (int r2 : col_rows[static_cast<size_t>(idx)]) {
      residual[r2] -= value;
      if (--unresolved_count[static_cast<size_t>(r2)] == 1) singles.push_back(r2);
    }
  }

  for (int c = 0; c < cols; ++c)
    if (instance.truth[c] != Complex(0.0, 0.0) && !resolved[static_cast<size_t>(c)])
      result.unresolved.push_back(c);
  result.complete = static_cast<int>(result.recovered.size()) == total_active;
  return result;
}

void DegreeDistribution::validate() const {
  if (probs.empty()) throw ConfigError("degree distribution must not be empty");
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw ConfigError("degree probabilities must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw ConfigError("degree probabilities must sum to 1");
}

double DegreeDistribution::node_avg_degree() const {
  double s = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) s += static_cast<double>(i + 1) * probs[i];
  return s;
}

double DegreeDistribution::node_poly(double x) const {
  double s = 0.0;
  double xp = x;
  for (size_t i = 0; i < probs.size(); ++i, xp *= x) s += probs[i] * xp;
  return s;
}

double DegreeDistribution::edge_poly(double x) const {
  const double avg = node_avg_degree();
  double s = 0.0;
  double xp = 1.0;
  for (size_t i = 0; i < probs.size(); ++i, xp *= x) s += static_cast<double>(i + 1) * probs[i] * xp;
  return s / avg;
}

int DegreeDistribution::sample(RandomStream& stream) const {
  const double u = stream.uniform();
  double acc = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i + 1);
  }
  return static_cast<int>(probs.size());
}

DegreeDistribution DegreeDistribution::regular(int degree) {
  if (degree < 1) throw ConfigError("degree must be >= 1");
  DegreeDistribution d;
  d.probs.assign(static_cast<size_t>(degree), 0.0);
  d.probs.back() = 1.0;
  return d;
}

CsaOutcome simulate_csa(int frame_slots, int num_active, const DegreeDistribution& degrees,
                        int max_sic_rounds, RandomStream& stream) {
  if (frame_slots < 1) throw ConfigError("frame_slots must be >= 1");
  if (num_active < 0) throw ConfigError("num_active must be >= 0");
  degrees.validate();

  CsaOutcome out;
  out.active = num_active;
  if (num_active == 0) return out;

  std::vector<std::vector<int>> user_slots(static_cast<size_t>(num_active));
  std::vector<std::vector<int>> slot_users(static_cast<size_t>(frame_slots));
  for (int u = 0; u < num_active; ++u) {
    const int d = std::min(degrees.sample(stream), frame_slots);
    std::set<int> chosen;  // replicas land in distinct slots
    while (static_cast<int>(chosen.size()) < d)
      chosen.insert(static_cast<int>(stream.uniform_int(static_cast<std::uint64_t>(frame_slots))));
    for (int s : chosen) {
      user_slots[static_cast<size_t>(u)].push_back(s);
      slot_users[static_cast<size_t>(s)].push_back(u);
    }
  }

  std::vector<int> slot_load(static_cast<size_t>(frame_slots), 0);
  for (int s = 0; s < frame_slots; ++s)
    slot_load[static_cast<size_t>(s)] = static_cast<int>(slot_users[static_cast<size_t>(s)].size());

  std::vector<std::uint8_t> resolved(static_cast<size_t>(num_active), 0);
  std::vector<int> wave;
  for (int s = 0; s < frame_slots; ++s)
    if (slot_load[static_cast<size_t>(s)] == 1) wave.push_back(s);

  // SIC proceeds in waves so max_sic_rounds bounds the cascade depth.
  while (!wave.empty() && out.sic_rounds < max_sic_rounds) {
    ++out.sic_rounds;
    std::vector<int> next_wave;
    for (int s : wave) {
      if (slot_load[static_cast<size_t>(s)] != 1) continue;
      int user = -1;
      for (int u : slot_users[static_cast<size_t>(s)])
        if (!resolved[static_cast<size_t>(u)]) {
          user = u;
          break;
        }
      if (user < 0) continue;
      resolved[static_cast<size_t>(user)] = 1;
      ++out.resolved;
      // A resolved user's replicas are removed from every slot exactly once.
      for (int s2 : user_slots[static_cast<size_t>(user)]) {
        if (--slot_load[static_cast<size_t>(s2)] == 1) next_wave.push_back(s2);
        if (slot_load[static_cast<size_t>(s2)] < 0)
          throw NumericError("CSA slot occupancy went negative");
      }
    }
    wave.swap(next_wave);
  }
  return out;
}

DensityEvolutionTrace density_evolution(const DegreeDistribution& degrees, double load, int iters,
                                        double tol) {
  degrees.validate();
  if (load < 0.0) throw ConfigError("load must be >= 0");
  DensityEvolutionTrace trace;
  const double m = load * degrees.node_avg_degree();  // mean slot degree
  double q = 1.0;
  double p = 1.0;
  for (int t = 0; t < iters; ++t) {
    p = 1.0 - std::exp(-m * q);
    trace.erasure.push_back(p);
    const double q_next = degrees.edge_poly(p);
    if (p < tol || std::abs(q_next - q) < 1e-12 * std::max(q, 1e-300)) {
      q = q_next;
      trace.converged = true;
      break;
    }
    q = q_next;
  }
  trace.x_infinity = p;
  trace.unresolved_fraction = degrees.node_poly(p);
  return trace;
}

double density_evolution_threshold(const DegreeDistribution& degrees, double tol, int iters,
                                   double g_lo, double g_hi, double g_resolution) {
  auto decoded = [&](double g) { return density_evolution(degrees, g, iters, tol).x_infinity < tol; };
  if (!decoded(g_lo)) return 0.0;
  if (decoded(g_hi)) return g_hi;
  double lo = g_lo, hi = g_hi;
  while (hi - lo > g_resolution) {
    const double mid = 0.5 * (lo + hi);
    if (decoded(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace gfra
