#ifndef KEMMER_GUIDANCE_HPP
#define KEMMER_GUIDANCE_HPP

// Bohmian trajectory integration: velocity fields v = j/j0 from the various
// currents, fixed-step RK4 integration, ensemble sampling and causality
// audits.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "kemmer/currents.hpp"
#include "kemmer/fields.hpp"

namespace kemmer {

enum class CurrentSource { kemmer_energy_momentum, kemmer_charge_demo, nr_spin0, nr_spin1 };

bool is_relativistic(CurrentSource s);

struct GuidanceConfig {
  CurrentSource source = CurrentSource::kemmer_energy_momentum;
  Observer observer = rest_observer();
  double dt = 1e-3;
  long max_steps = 1000000;
  double node_eps = 1e-12;  // absolute density floor
  std::optional<std::pair<Vec3, double>> coupling;  // (V, e) for NR sources

  void validate() const;
};

/// Raised when the guiding density falls to or below the node floor.
class NodeError : public std::runtime_error {
 public:
  explicit NodeError(const Event& where);
  Event where;
};

struct Flow {
  double density = 0.0;
  std::vector<Vec3> v;  // per particle
};

/// Thread-safe evaluator of (density, velocities) at equal-time configuration
/// (t, x_1..x_N). Throws NodeError below the density floor.
using FlowFn = std::function<Flow(double, const std::vector<Vec3>&)>;

FlowFn make_flow(const KemmerField& field, const GuidanceConfig& cfg);
FlowFn make_flow(const NrField& field, const GuidanceConfig& cfg);
FlowFn make_flow_many(const KemmerFieldN& field, const GuidanceConfig& cfg);

/// v^i = j^i / j^0 at one event (single particle).
Vec3 velocity_at(const KemmerField& field, const GuidanceConfig& cfg, const Event& e);
Vec3 velocity_at(const NrField& field, const GuidanceConfig& cfg, const Event& e);
std::vector<Vec3> velocity_many(const KemmerFieldN& field, const GuidanceConfig& cfg, double t,
                                const std::vector<Vec3>& xs);

enum class Termination { completed, node_abort, domain_exit };

struct TrajectorySample {
  double t = 0.0;
  std::vector<Vec3> pos;
  std::vector<Vec3> vel;
  double density = 0.0;
  std::vector<double> speed;  // Euclidean |v| per particle
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  Termination status = Termination::completed;
};

/// Classical fixed-step RK4 on dx/dt = v(x,t); deterministic for fixed
/// inputs. A node encountered at any stage terminates the trajectory with
/// node_abort at the last completed sample.
Trajectory integrate_flow(const FlowFn& flow, int nparticles, const std::vector<Vec3>& x0, double t0, double t1,
                          const GuidanceConfig& cfg);

Trajectory integrate(const KemmerField& field, const GuidanceConfig& cfg, const Vec3& x0, double t0, double t1);
Trajectory integrate(const NrField& field, const GuidanceConfig& cfg, const Vec3& x0, double t0, double t1);
Trajectory integrate_many(const KemmerFieldN& field, const GuidanceConfig& cfg, const std::vector<Vec3>& x0, double t0,
                          double t1);

/// Ensemble trajectories computed in a worker pool (workers = 0 picks the
/// hardware count); per-trajectory results are independent of scheduling.
std::vector<Trajectory> integrate_ensemble(const FlowFn& flow, int nparticles, const std::vector<std::vector<Vec3>>& x0,
                                           double t0, double t1, const GuidanceConfig& cfg, int workers = 0);

struct Box {
  Vec3 lo, hi;
};

struct Ensemble {
  std::uint64_t seed = 0;
  Box box;
  std::vector<Vec3> positions;
};

using DensityFn = std::function<double(const Vec3&)>;

/// Rejection sampling against 1.1x the grid-scan supremum of the density over
/// the box; reproducible from the seed. Throws on a degenerate density.
Ensemble sample_ensemble(const DensityFn& density, const Box& box, int n, std::uint64_t seed);

struct CausalityReport {
  bool applicable = true;  // relativistic sources only
  double max_speed = 0.0;
  long over_light_count = 0;  // samples with speed > 1 + 1e-9
  bool pass = true;
};

CausalityReport causality_audit(const Trajectory& traj, CurrentSource source);

/// Deterministic per-index substream seed (splitmix64 over seed ^ index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace kemmer

#endif  // KEMMER_GUIDANCE_HPP
