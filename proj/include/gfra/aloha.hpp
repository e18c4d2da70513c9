// Random-access protocol layer: grant-based baseline, sparse-graph peeling,
// coded slotted ALOHA with successive interference cancellation, and
// density evolution.
#pragma once

#include <unordered_map>
#include <vector>

#include "gfra/pilots.hpp"
#include "gfra/random.hpp"
#include "gfra/types.hpp"

namespace gfra {

enum class CaptureMode { kNone, kCaptureOne };

struct GrantBasedOutcome {
  int granted = 0;
  int collided = 0;  // preambles with >= 2 claimants
  CaptureMode capture_mode = CaptureMode::kNone;
};

/// K active devices each pick one of n_preambles uniformly at random.
/// Without capture only singleton preambles grant access; with capture each
/// occupied preamble grants exactly one claimant.
GrantBasedOutcome simulate_grant_based(int k_active, int n_preambles, CaptureMode mode,
                                       RandomStream& stream);

/// E[granted]: K (1 - 1/L)^(K-1) without capture, L (1 - (1 - 1/L)^K) with.
double grant_based_mean_analytic(int k_active, int n_preambles, CaptureMode mode);

/// Noiseless linear peeling instance: y = A x with a binary A. The decoder
/// is granted the packet-level degree oracle, i.e. it can see how many
/// unresolved nonzeros each measurement touches.
struct PeelingInstance {
  PilotMatrix matrix;  // sparse binary, L x N
  CVec truth;          // x, mostly zero
  CVec observed;       // y = A x
};

PeelingInstance make_peeling_instance(const PilotMatrix& sparse_matrix, const CVec& x);

struct PeelResult {
  std::unordered_map<int, Complex> recovered;  // index -> value
  int peels = 0;       // variables resolved
  bool complete = false;
  std::vector<int> unresolved;  // active indices left when stalled
};

/// Repeatedly resolves measurements whose unresolved active support has size
/// one and subtracts them from every incident measurement. A stall returns
/// the partial result with complete = false. max_rounds < 0 means unbounded.
PeelResult peel(const PeelingInstance& instance, int max_rounds = -1);

/// Probability vector over repetition degrees 1..size().
struct DegreeDistribution {
  std::vector<double> probs;

  void validate() const;
  double node_avg_degree() const;              // Lambda'(1)
  double node_poly(double x) const;            // Lambda(x)
  double edge_poly(double x) const;            // lambda(x) = Lambda'(x)/Lambda'(1)
  int sample(RandomStream& stream) const;      // degree >= 1
  static DegreeDistribution regular(int degree);
};

struct CsaOutcome {
  int resolved = 0;
  int active = 0;
  int sic_rounds = 0;
  double resolved_fraction() const { return active == 0 ? 1.0 : double(resolved) / active; }
};

/// Each active user places d ~ Lambda replicas in distinct uniform slots;
/// SIC resolves any slot holding exactly one unresolved replica and removes
/// that user's replicas everywhere, until no singleton slot remains.
CsaOutcome simulate_csa(int frame_slots, int num_active, const DegreeDistribution& degrees,
                        int max_sic_rounds, RandomStream& stream);

struct DensityEvolutionTrace {
  std::vector<double> erasure;  // slot-to-user erasure probability p_t
  double x_infinity = 1.0;
  double unresolved_fraction = 1.0;  // Lambda(p_inf)
  bool converged = false;
};

/// And-or tree recursion for irregular-repetition slotted ALOHA at load G
/// (users per slot): q_{t+1} = lambda(p_t), p_t = 1 - exp(-G Lambda'(1) q_t).
DensityEvolutionTrace density_evolution(const DegreeDistribution& degrees, double load,
                                        int iters = 5000, double tol = 1e-4);

/// Largest load with p_inf < tol, found by bisection on [g_lo, g_hi].
double density_evolution_threshold(const DegreeDistribution& degrees, double tol = 1e-4,
                                   int iters = 5000, double g_lo = 0.01, double g_hi = 1.0,
                                   double g_resolution = 1e-4);

}  // namespace gfra
