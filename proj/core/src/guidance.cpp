#include "kemmer/guidance.hpp"

#include <atomic>
#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>
#include <thread>

namespace kemmer {

bool is_relativistic(CurrentSource s) {
  return s == CurrentSource::kemmer_energy_momentum || s == CurrentSource::kemmer_charge_demo;
}

void GuidanceConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("GuidanceConfig: dt must be positive");
  if (!(node_eps > 0.0)) throw std::invalid_argument("GuidanceConfig: node_eps must be positive");
  if (max_steps < 1) throw std::invalid_argument("GuidanceConfig: max_steps must be >= 1");
}

NodeError::NodeError(const Event& w)
    : std::runtime_error("guidance: density at or below the node floor"), where(w) {}

namespace {

Flow kemmer_flow_at(const KemmerField& field, const GuidanceConfig& cfg, const Event& e) {
  const DkpRep& rep = representation(field.kind());
  const ComplexVector psi = field.psi(e);
  FourVector j;
  if (cfg.source == CurrentSource::kemmer_energy_momentum) {
    j = observer_current(energy_momentum(rep, psi), cfg.observer);
  } else {
    j = charge_current(rep, psi, field.mass());
  }
  if (!(j[0] > cfg.node_eps)) throw NodeError(e);
  Flow f;
  f.density = j[0];
  f.v = {Vec3{j[1] / j[0], j[2] / j[0], j[3] / j[0]}};
  return f;
}

Flow nr_flow_at(const NrField& field, const GuidanceConfig& cfg, const Event& e) {
  NrCurrent c;
  const Vec3 v_pot = cfg.coupling ? cfg.coupling->first : Vec3{};
  const double charge = cfg.coupling ? cfg.coupling->second : 0.0;
  if (cfg.source == CurrentSource::nr_spin1) {
    c = nr_current_spin1(field.vector_sample(e), field.mass(), v_pot, charge);
  } else {
    c = nr_current_spin0(field.scalar_sample(e), field.mass(), v_pot, charge);
  }
  if (!(c.rho > cfg.node_eps)) throw NodeError(e);
  Flow f;
  f.density = c.rho;
  f.v = {c.j / c.rho};
  return f;
}

}  // namespace

FlowFn make_flow(const KemmerField& field, const GuidanceConfig& cfg) {
  if (!is_relativistic(cfg.source)) throw std::invalid_argument("make_flow: Kemmer field needs a kemmer source");
  cfg.validate();
  return [field, cfg](double t, const std::vector<Vec3>& xs) {
    if (xs.size() != 1) throw std::invalid_argument("flow: single-particle field");
    return kemmer_flow_at(field, cfg, Event{t, xs[0]});
  };
}

FlowFn make_flow(const NrField& field, const GuidanceConfig& cfg) {
  if (is_relativistic(cfg.source)) throw std::invalid_argument("make_flow: NR field needs an nr source");
  if (cfg.source == CurrentSource::nr_spin1 && field.kind() != Spin::spin1)
    throw std::invalid_argument("make_flow: nr-spin1 source needs a spin-1 field");
  cfg.validate();
  return [field, cfg](double t, const std::vector<Vec3>& xs) {
    if (xs.size() != 1) throw std::invalid_argument("flow: single-particle field");
    return nr_flow_at(field, cfg, Event{t, xs[0]});
  };
}

FlowFn make_flow_many(const KemmerFieldN& field, const GuidanceConfig& cfg) {
  if (cfg.source != CurrentSource::kemmer_energy_momentum)
    throw std::invalid_argument("make_flow_many: only the energy-momentum source is defined for N particles");
  // Equal-time N-particle dynamics is defined in the observer's rest frame;
  // boosted observers are a single-particle feature.
  if (cfg.observer.a[0] != 1.0 || cfg.observer.a[1] != 0.0 || cfg.observer.a[2] != 0.0 || cfg.observer.a[3] != 0.0)
    throw std::invalid_argument("make_flow_many: N-particle guidance uses the rest observer");
  cfg.validate();
  auto ctx = std::make_shared<MultiContext>(field.kinds(), cfg.observer);
  return [field, cfg, ctx](double t, const std::vector<Vec3>& xs) {
    const MultiCurrent mc = ctx->evaluate(field.psi(t, xs));
    if (!(mc.density > cfg.node_eps)) throw NodeError(Event{t, xs.empty() ? Vec3{} : xs[0]});
    Flow f;
    f.density = mc.density;
    f.v.reserve(mc.per_particle.size());
    for (const auto& j : mc.per_particle) f.v.push_back(Vec3{j[1] / j[0], j[2] / j[0], j[3] / j[0]});
    return f;
  };
}

Vec3 velocity_at(const KemmerField& field, const GuidanceConfig& cfg, const Event& e) {
  return kemmer_flow_at(field, cfg, e).v[0];
}

Vec3 velocity_at(const NrField& field, const GuidanceConfig& cfg, const Event& e) {
  return nr_flow_at(field, cfg, e).v[0];
}

std::vector<Vec3> velocity_many(const KemmerFieldN& field, const GuidanceConfig& cfg, double t,
                                const std::vector<Vec3>& xs) {
  return make_flow_many(field, cfg)(t, xs).v;
}

namespace {

std::vector<Vec3> axpy(const std::vector<Vec3>& x, const std::vector<Vec3>& d, double s) {
  std::vector<Vec3> r = x;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += d[i] * s;
  return r;
}

TrajectorySample make_sample(double t, const std::vector<Vec3>& pos, const Flow& f) {
  TrajectorySample s;
  s.t = t;
  s.pos = pos;
  s.vel = f.v;
  s.density = f.density;
  s.speed.reserve(f.v.size());
  for (const auto& v : f.v) s.speed.push_back(v.norm());
  return s;
}

}  // namespace

Trajectory integrate_flow(const FlowFn& flow, int nparticles, const std::vector<Vec3>& x0, double t0, double t1,
                          const GuidanceConfig& cfg) {
  cfg.validate();
  if (!(t1 >= t0)) throw std::invalid_argument("integrate: t1 must be >= t0");
  if (static_cast<int>(x0.size()) != nparticles) throw std::invalid_argument("integrate: start position count");
  const double span = t1 - t0;
  const long nsteps = (span == 0.0) ? 0 : static_cast<long>(std::ceil(span / cfg.dt - 1e-12));
  if (nsteps > cfg.max_steps) throw std::invalid_argument("integrate: step count exceeds max_steps");

  Trajectory traj;
  std::vector<Vec3> x = x0;
  double t = t0;
  try {
    Flow f = flow(t, x);
    traj.samples.push_back(make_sample(t, x, f));
    for (long s = 0; s < nsteps; ++s) {
      const double hstep = std::min(cfg.dt, t1 - t);
      const std::vector<Vec3>& k1 = f.v;
      const Flow f2 = flow(t + 0.5 * hstep, axpy(x, k1, 0.5 * hstep));
      const Flow f3 = flow(t + 0.5 * hstep, axpy(x, f2.v, 0.5 * hstep));
      const Flow f4 = flow(t + hstep, axpy(x, f3.v, hstep));
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] += (k1[i] + 2.0 * f2.v[i] + 2.0 * f3.v[i] + f4.v[i]) * (hstep / 6.0);
      t += hstep;
      if (s + 1 == nsteps) t = t1;  // absorb rounding drift on the final step
      f = flow(t, x);
      traj.samples.push_back(make_sample(t, x, f));
    }
    traj.status = Termination::completed;
  } catch (const NodeError&) {
    traj.status = Termination::node_abort;
  } catch (const std::domain_error&) {
    traj.status = Termination::domain_exit;
  }
  return traj;
}

Trajectory integrate(const KemmerField& field, const GuidanceConfig& cfg, const Vec3& x0, double t0, double t1) {
  return integrate_flow(make_flow(field, cfg), 1, {x0}, t0, t1, cfg);
}

Trajectory integrate(const NrField& field, const GuidanceConfig& cfg, const Vec3& x0, double t0, double t1) {
  return integrate_flow(make_flow(field, cfg), 1, {x0}, t0, t1, cfg);
}

Trajectory integrate_many(const KemmerFieldN& field, const GuidanceConfig& cfg, const std::vector<Vec3>& x0, double t0,
                          double t1) {
  return integrate_flow(make_flow_many(field, cfg), field.particles(), x0, t0, t1, cfg);
}

std::vector<Trajectory> integrate_ensemble(const FlowFn& flow, int nparticles, const std::vector<std::vector<Vec3>>& x0,
                                           double t0, double t1, const GuidanceConfig& cfg, int workers) {
  std::vector<Trajectory> out(x0.size());
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min<int>(workers, static_cast<int>(x0.size()) > 0 ? static_cast<int>(x0.size()) : 1);

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= x0.size()) return;
      out[i] = integrate_flow(flow, nparticles, x0[i], t0, t1, cfg);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 step
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Ensemble sample_ensemble(const DensityFn& density, const Box& box, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_ensemble: n must be >= 1");
  const Vec3 span = box.hi - box.lo;
  if (span.x < 0 || span.y < 0 || span.z < 0) throw std::invalid_argument("sample_ensemble: malformed box");

  // Grid scan for the supremum (33 nodes per active dimension).
  const int nscan = 33;
  double sup = 0.0;
  const int sx = span.x > 0 ? nscan : 1, sy = span.y > 0 ? nscan : 1, sz = span.z > 0 ? nscan : 1;
  for (int ix = 0; ix < sx; ++ix) {
    for (int iy = 0; iy < sy; ++iy) {
      for (int iz = 0; iz < sz; ++iz) {
        const Vec3 p{box.lo.x + (sx > 1 ? span.x * ix / (sx - 1) : 0.0),
                     box.lo.y + (sy > 1 ? span.y * iy / (sy - 1) : 0.0),
                     box.lo.z + (sz > 1 ? span.z * iz / (sz - 1) : 0.0)};
        sup = std::max(sup, density(p));
      }
    }
  }
  if (!(sup > 0.0)) throw std::invalid_argument("sample_ensemble: density is degenerate on the box");
  const double cap = 1.1 * sup;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Ensemble ens;
  ens.seed = seed;
  ens.box = box;
  ens.positions.reserve(static_cast<std::size_t>(n));
  long attempts = 0;
  const long max_attempts = 10000L * static_cast<long>(n) + 100000L;
  while (static_cast<int>(ens.positions.size()) < n) {
    if (++attempts > max_attempts)
      throw std::runtime_error("sample_ensemble: acceptance rate too low (density nearly degenerate)");
    const Vec3 p{box.lo.x + span.x * u01(rng), box.lo.y + span.y * u01(rng), box.lo.z + span.z * u01(rng)};
    if (cap * u01(rng) < density(p)) ens.positions.push_back(p);
  }
  return ens;
}

CausalityReport causality_audit(const Trajectory& traj, CurrentSource source) {
  CausalityReport rep;
  rep.applicable = is_relativistic(source);
  if (!rep.applicable) return rep;
  for (const auto& s : traj.samples) {
    for (double v : s.speed) {
      rep.max_speed = std::max(rep.max_speed, v);
      if (v > 1.0 + 1e-9) ++rep.over_light_count;
    }
  }
  rep.pass = rep.max_speed <= 1.0 + 1e-9;
  return rep;
}

}  // namespace kemmer
