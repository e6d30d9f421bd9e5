#include "kemmer/currents.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kemmer {

namespace {

const Complex kI{0.0, 1.0};

double real_checked(const Complex& z, double scale, const char* what) {
  if (std::abs(z.imag()) > 1e-10 * std::max(1.0, scale))
    throw std::runtime_error(std::string("consistency: ") + what + " has a non-negligible imaginary part");
  return z.real();
}

int eps3(int i, int j, int k) {  // 0-based
  if (i == j || j == k || i == k) return 0;
  if ((i == 0 && j == 1 && k == 2) || (i == 1 && j == 2 && k == 0) || (i == 2 && j == 0 && k == 1)) return 1;
  return -1;
}

}  // namespace

Observer make_observer(const FourVector& a) {
  if (!(a[0] > 0.0)) throw std::invalid_argument("Observer: a^0 must be positive");
  if (std::abs(minkowski_dot(a, a) - 1.0) > 1e-12) throw std::invalid_argument("Observer: a.a must equal 1");
  return Observer{a};
}

Observer rest_observer() { return Observer{FourVector{1.0, 0.0, 0.0, 0.0}}; }

Observer boosted_observer(const Vec3& beta) {
  const double b2 = beta.norm2();
  if (b2 >= 1.0) throw std::invalid_argument("Observer: |beta| must be < 1");
  const double gamma = 1.0 / std::sqrt(1.0 - b2);
  return Observer{FourVector{gamma, beta * gamma}};
}

Tensor2 energy_momentum(const DkpRep& rep, const ComplexVector& psi) {
  if (psi.size() != rep.dim) throw std::invalid_argument("energy_momentum: psi dimension mismatch");
  const double scale = psi.squaredNorm();
  Tensor2 th;
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = mu; nu < 4; ++nu) {
      const Complex v = psi.dot(rep.theta_upper(mu, nu) * psi);  // dot conjugates the left argument
      const double r = real_checked(v, scale, "Theta^{mu nu}");
      th(mu, nu) = r;
      th(nu, mu) = r;
    }
  }
  return th;
}

FourVector charge_current(const DkpRep& rep, const ComplexVector& psi, double mass) {
  if (psi.size() != rep.dim) throw std::invalid_argument("charge_current: psi dimension mismatch");
  if (!(mass > 0.0)) throw std::invalid_argument("charge_current: mass must be positive");
  const double scale = psi.squaredNorm();
  FourVector s;
  for (int mu = 0; mu < 4; ++mu) {
    const Complex v = psi.dot(rep.eta0 * (rep.beta_upper(mu) * psi));
    s[mu] = real_checked(v, scale, "s^mu") / mass;
  }
  return s;
}

FourVector observer_current(const Tensor2& theta, const Observer& obs) { return theta.contract_right(obs.a); }

AmbiguityTensor make_ambiguity(const std::array<double, 6>& upper) {
  Tensor2 a;
  const int idx[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  for (int c = 0; c < 6; ++c) {
    a(idx[c][0], idx[c][1]) = upper[static_cast<std::size_t>(c)];
    a(idx[c][1], idx[c][0]) = -upper[static_cast<std::size_t>(c)];
  }
  return AmbiguityTensor{a};
}

Tensor2 perturbed_tensor(const Tensor2& theta, const AmbiguityTensor& a) { return theta + a.a; }

// ---------------------------------------------------------------------------
// N-particle currents

MultiContext::MultiContext(std::vector<Spin> kinds, const Observer& obs, long cap) : kinds_(std::move(kinds)), obs_(obs) {
  if (kinds_.empty()) throw std::invalid_argument("MultiContext: empty particle list");
  const int n = static_cast<int>(kinds_.size());

  std::vector<const DkpRep*> reps;
  reps.reserve(kinds_.size());
  for (Spin k : kinds_) reps.push_back(&representation(k));

  dim_ = 1;
  for (const auto* r : reps) {
    dim_ *= r->dim;
    if (dim_ > cap) throw std::length_error("MultiContext: tensor-product dimension exceeds cap");
  }

  // Per-factor single-particle operators: L = Gamma_{0 nu} a^nu (positive) and
  // M^mu = g^{mu mu} Gamma_{mu nu} a^nu (upper-index current slice).
  std::vector<ComplexMatrix> l_ops;
  std::vector<std::array<ComplexMatrix, 4>> m_ops;
  for (const auto* r : reps) {
    std::array<ComplexMatrix, 4> m;
    for (int mu = 0; mu < 4; ++mu) {
      ComplexMatrix acc = ComplexMatrix::Zero(r->dim, r->dim);
      for (int nu = 0; nu < 4; ++nu) acc += obs_.a[nu] * r->gamma_lower(mu, nu);
      m[static_cast<std::size_t>(mu)] = kMetric[static_cast<std::size_t>(mu)] * acc;
    }
    l_ops.push_back(m[0]);
    m_ops.push_back(std::move(m));
  }

  density_op_ = ComplexMatrix::Identity(1, 1);
  for (int f = 0; f < n; ++f) density_op_ = kronecker(density_op_, l_ops[static_cast<std::size_t>(f)]);

  current_ops_.resize(kinds_.size());
  for (int al = 0; al < n; ++al) {
    for (int mu = 0; mu < 4; ++mu) {
      ComplexMatrix acc = ComplexMatrix::Identity(1, 1);
      for (int f = 0; f < n; ++f)
        acc = kronecker(acc, f == al ? m_ops[static_cast<std::size_t>(f)][static_cast<std::size_t>(mu)]
                                     : l_ops[static_cast<std::size_t>(f)]);
      current_ops_[static_cast<std::size_t>(al)][static_cast<std::size_t>(mu)] = std::move(acc);
    }
  }
}

MultiCurrent MultiContext::evaluate(const ComplexVector& psi) const {
  if (psi.size() != dim_) throw std::invalid_argument("MultiContext: psi dimension mismatch");
  const double scale = psi.squaredNorm();

  MultiCurrent out;
  out.density = real_checked(psi.dot(density_op_ * psi), scale, "j^{0...0}");
  out.per_particle.resize(kinds_.size());
  for (std::size_t al = 0; al < kinds_.size(); ++al) {
    FourVector j;
    for (int mu = 1; mu < 4; ++mu)
      j[mu] = real_checked(psi.dot(current_ops_[al][static_cast<std::size_t>(mu)] * psi), scale, "j^{0..mu..0}");
    const double j0 = real_checked(psi.dot(current_ops_[al][0] * psi), scale, "j^{0..0..0}");
    if (std::abs(j0 - out.density) > 1e-10 * std::max(1.0, scale))
      throw std::runtime_error("consistency: per-particle time components disagree with the density");
    j[0] = out.density;
    out.per_particle[al] = j;
  }
  return out;
}

MultiCurrent multi_current(const std::vector<Spin>& kinds, const ComplexVector& psi, const Observer& obs) {
  return MultiContext(kinds, obs).evaluate(psi);
}

// ---------------------------------------------------------------------------
// Nonrelativistic currents

NrCurrent nr_current_spin0(const NrScalarSample& s, double mass) { return nr_current_spin0(s, mass, Vec3{}, 0.0); }

NrCurrent nr_current_spin0(const NrScalarSample& s, double mass, const Vec3& v_pot, double e) {
  if (!(mass > 0.0)) throw std::invalid_argument("nr_current_spin0: mass must be positive");
  NrCurrent c;
  c.rho = std::norm(s.value);
  const double vv[3] = {v_pot.x, v_pot.y, v_pot.z};
  double j[3];
  for (int i = 0; i < 3; ++i)
    j[i] = (std::imag(std::conj(s.value) * s.grad[static_cast<std::size_t>(i)]) - e * vv[i] * c.rho) / mass;
  c.j = Vec3{j[0], j[1], j[2]};
  return c;
}

Vec3 spin_density(const NrVectorSample& s) {
  // (Phi^dag S Phi)_j = Im[(Phi* x Phi)_j]; the real part of the cross product
  // cancels exactly in the pairwise difference.
  double out[3];
  for (int j = 0; j < 3; ++j) {
    const int k = (j + 1) % 3, l = (j + 2) % 3;
    const Complex z = std::conj(s.value[static_cast<std::size_t>(k)]) * s.value[static_cast<std::size_t>(l)] -
                      std::conj(s.value[static_cast<std::size_t>(l)]) * s.value[static_cast<std::size_t>(k)];
    out[j] = z.imag();
  }
  return Vec3{out[0], out[1], out[2]};
}

NrCurrent nr_current_spin1(const NrVectorSample& s, double mass) { return nr_current_spin1(s, mass, Vec3{}, 0.0); }

NrCurrent nr_current_spin1(const NrVectorSample& s, double mass, const Vec3& v_pot, double e) {
  if (!(mass > 0.0)) throw std::invalid_argument("nr_current_spin1: mass must be positive");
  NrCurrent c;
  c.rho = 0.0;
  for (const auto& v : s.value) c.rho += std::norm(v);

  const double vv[3] = {v_pot.x, v_pot.y, v_pot.z};
  double j[3];
  for (int i = 0; i < 3; ++i) {
    double im = 0.0;
    for (int comp = 0; comp < 3; ++comp)
      im += std::imag(std::conj(s.value[static_cast<std::size_t>(comp)]) *
                      s.grad[static_cast<std::size_t>(i)][static_cast<std::size_t>(comp)]);
    j[i] = (im - e * vv[i] * c.rho) / mass;
  }

  // Spin term: curl(Phi^dag S Phi) / 2m with
  // d_i S_j = Im[(d_i Phi)* x Phi + Phi* x d_i Phi]_j.
  double ds[3][3];  // ds[i][j] = d_i S_j
  for (int i = 0; i < 3; ++i) {
    for (int j2 = 0; j2 < 3; ++j2) {
      const int k = (j2 + 1) % 3, l = (j2 + 2) % 3;
      const Complex z =
          std::conj(s.grad[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]) * s.value[static_cast<std::size_t>(l)] -
          std::conj(s.grad[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)]) * s.value[static_cast<std::size_t>(k)] +
          std::conj(s.value[static_cast<std::size_t>(k)]) * s.grad[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] -
          std::conj(s.value[static_cast<std::size_t>(l)]) * s.grad[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      ds[i][j2] = z.imag();
    }
  }
  for (int i = 0; i < 3; ++i) {
    double curl = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (int sgn = eps3(i, a, b); sgn != 0) curl += sgn * ds[a][b];
    j[i] += curl / (2.0 * mass);
  }
  c.j = Vec3{j[0], j[1], j[2]};
  return c;
}

// ---------------------------------------------------------------------------
// Reduction formulas

namespace {

Tensor2 kg_tensor_from_cov(const Complex& phi, const std::array<Complex, 4>& dcov, double mass) {
  // dcov[mu] = D_mu phi (lower index). Raise with the metric.
  std::array<Complex, 4> dup;
  for (int mu = 0; mu < 4; ++mu)
    dup[static_cast<std::size_t>(mu)] = kMetric[static_cast<std::size_t>(mu)] * dcov[static_cast<std::size_t>(mu)];
  Complex lag{0.0, 0.0};
  for (int al = 0; al < 4; ++al) lag += dcov[static_cast<std::size_t>(al)] * std::conj(dup[static_cast<std::size_t>(al)]);
  const double lag_r = lag.real() - mass * mass * std::norm(phi);

  Tensor2 th;
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = mu; nu < 4; ++nu) {
      const Complex v = dup[static_cast<std::size_t>(mu)] * std::conj(dup[static_cast<std::size_t>(nu)]) +
                        std::conj(dup[static_cast<std::size_t>(mu)]) * dup[static_cast<std::size_t>(nu)];
      const double g = (mu == nu) ? kMetric[static_cast<std::size_t>(mu)] : 0.0;
      const double r = v.real() - g * lag_r;
      th(mu, nu) = r;
      th(nu, mu) = r;
    }
  }
  return th;
}

FourVector kg_current_from_cov(const Complex& phi, const std::array<Complex, 4>& dcov) {
  FourVector s;
  for (int mu = 0; mu < 4; ++mu) {
    const Complex dup = kMetric[static_cast<std::size_t>(mu)] * dcov[static_cast<std::size_t>(mu)];
    s[mu] = (kI * (std::conj(phi) * dup - phi * std::conj(dup))).real();
  }
  return s;
}

}  // namespace

Tensor2 kg_energy_momentum(const Complex& phi, const std::array<Complex, 4>& dphi, double mass) {
  return kg_tensor_from_cov(phi, dphi, mass);
}

FourVector kg_charge_current(const Complex& phi, const std::array<Complex, 4>& dphi) {
  return kg_current_from_cov(phi, dphi);
}

Tensor2 kg_energy_momentum_coupled(const Complex& phi, const std::array<Complex, 4>& dphi, double mass,
                                   const FourVector& v_pot, double e) {
  std::array<Complex, 4> dcov;
  for (int mu = 0; mu < 4; ++mu)
    dcov[static_cast<std::size_t>(mu)] = dphi[static_cast<std::size_t>(mu)] + kI * e * v_pot.lower(mu) * phi;
  return kg_tensor_from_cov(phi, dcov, mass);
}

FourVector kg_charge_current_coupled(const Complex& phi, const std::array<Complex, 4>& dphi, const FourVector& v_pot,
                                     double e) {
  std::array<Complex, 4> dcov;
  for (int mu = 0; mu < 4; ++mu)
    dcov[static_cast<std::size_t>(mu)] = dphi[static_cast<std::size_t>(mu)] + kI * e * v_pot.lower(mu) * phi;
  return kg_current_from_cov(phi, dcov);
}

Tensor2 proca_energy_momentum(const std::array<Complex, 4>& a, const std::array<std::array<Complex, 4>, 4>& da,
                              double mass) {
  // G^{mu nu} = d^mu A^nu - d^nu A^mu from da[nu][mu] = d_nu A^mu.
  Complex g[4][4];
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu)
      g[mu][nu] = kMetric[static_cast<std::size_t>(mu)] * da[static_cast<std::size_t>(mu)][static_cast<std::size_t>(nu)] -
                  kMetric[static_cast<std::size_t>(nu)] * da[static_cast<std::size_t>(nu)][static_cast<std::size_t>(mu)];

  // Lagrangian: -1/2 G*_{mu nu} G^{mu nu} + m^2 A*_mu A^mu.
  Complex gg{0.0, 0.0};
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu)
      gg += kMetric[static_cast<std::size_t>(mu)] * kMetric[static_cast<std::size_t>(nu)] * std::conj(g[mu][nu]) * g[mu][nu];
  Complex aa{0.0, 0.0};
  for (int mu = 0; mu < 4; ++mu) aa += kMetric[static_cast<std::size_t>(mu)] * std::conj(a[static_cast<std::size_t>(mu)]) * a[static_cast<std::size_t>(mu)];
  const double lag = -0.5 * gg.real() + mass * mass * aa.real();

  Tensor2 th;
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = mu; nu < 4; ++nu) {
      Complex v{0.0, 0.0};
      for (int al = 0; al < 4; ++al) {
        const double low = kMetric[static_cast<std::size_t>(al)];
        v += -std::conj(g[mu][al]) * low * g[nu][al] - g[mu][al] * low * std::conj(g[nu][al]);
      }
      v += mass * mass * (a[static_cast<std::size_t>(mu)] * std::conj(a[static_cast<std::size_t>(nu)]) +
                          std::conj(a[static_cast<std::size_t>(mu)]) * a[static_cast<std::size_t>(nu)]);
      const double gmn = (mu == nu) ? kMetric[static_cast<std::size_t>(mu)] : 0.0;
      const double r = v.real() - gmn * lag;
      th(mu, nu) = r;
      th(nu, mu) = r;
    }
  }
  return th;
}

FourVector proca_charge_current(const std::array<Complex, 4>& a, const std::array<std::array<Complex, 4>, 4>& da) {
  // s^mu = i (A_nu G^{* mu nu} - G^{mu nu} A*_nu).
  Complex g[4][4];
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu)
      g[mu][nu] = kMetric[static_cast<std::size_t>(mu)] * da[static_cast<std::size_t>(mu)][static_cast<std::size_t>(nu)] -
                  kMetric[static_cast<std::size_t>(nu)] * da[static_cast<std::size_t>(nu)][static_cast<std::size_t>(mu)];
  FourVector s;
  for (int mu = 0; mu < 4; ++mu) {
    Complex v{0.0, 0.0};
    for (int nu = 0; nu < 4; ++nu) {
      const Complex a_low = kMetric[static_cast<std::size_t>(nu)] * a[static_cast<std::size_t>(nu)];
      v += a_low * std::conj(g[mu][nu]) - g[mu][nu] * std::conj(a_low);
    }
    s[mu] = (kI * v).real();
  }
  return s;
}

// ---------------------------------------------------------------------------
// Lorentz force and audits

FourVector lorentz_force_density(const Tensor2& f, const FourVector& s, double e) {
  if (f.symmetric_part().max_abs() > 1e-12 * std::max(1.0, f.max_abs()))
    throw std::invalid_argument("lorentz_force_density: field tensor is not antisymmetric");
  FourVector out;
  for (int nu = 0; nu < 4; ++nu) {
    double v = 0.0;
    for (int mu = 0; mu < 4; ++mu) v += f(nu, mu) * s.lower(mu);
    out[nu] = e * v;
  }
  return out;
}

Tensor2 constant_efield_tensor(double efield) {
  Tensor2 f;
  f(1, 0) = efield;
  f(0, 1) = -efield;
  return f;
}

double DivergenceReport::worst() const {
  double w = 0.0;
  for (double r : residual) w = std::max(w, std::abs(r));
  return w;
}

double DivergenceReport::worst_half() const {
  double w = 0.0;
  if (residual_half)
    for (double r : *residual_half) w = std::max(w, std::abs(r));
  return w;
}

std::string DivergenceReport::serialize() const {
  std::ostringstream os;
  os.precision(12);
  os << "event " << event.t << " " << event.x.x << " " << event.x.y << " " << event.x.z << " | h " << h << " | residual";
  for (double r : residual) os << " " << r;
  if (residual_half) {
    os << " | residual_half";
    for (double r : *residual_half) os << " " << r;
  }
  if (ratio) os << " | ratio " << *ratio;
  return os.str();
}

namespace {

double current_divergence(const CurrentFn& current, const Event& e, double h) {
  // d_mu j^mu = d_t j^0 + div j
  double div = 0.0;
  {
    Event p = e, m = e;
    p.t += h;
    m.t -= h;
    div += (current(p)[0] - current(m)[0]) / (2.0 * h);
  }
  for (int i = 0; i < 3; ++i) {
    Event p = e, m = e;
    (i == 0 ? p.x.x : i == 1 ? p.x.y : p.x.z) += h;
    (i == 0 ? m.x.x : i == 1 ? m.x.y : m.x.z) -= h;
    div += (current(p)[i + 1] - current(m)[i + 1]) / (2.0 * h);
  }
  return div;
}

double multi_divergence(const MultiFn& current, double t, const std::vector<Vec3>& xs, double h) {
  double div = (current(t + h, xs).density - current(t - h, xs).density) / (2.0 * h);
  for (std::size_t al = 0; al < xs.size(); ++al) {
    for (int i = 0; i < 3; ++i) {
      std::vector<Vec3> p = xs, m = xs;
      (i == 0 ? p[al].x : i == 1 ? p[al].y : p[al].z) += h;
      (i == 0 ? m[al].x : i == 1 ? m[al].y : m[al].z) -= h;
      div += (current(t, p).per_particle[al][i + 1] - current(t, m).per_particle[al][i + 1]) / (2.0 * h);
    }
  }
  return div;
}

}  // namespace

DivergenceReport divergence_audit(const CurrentFn& current, const Event& e, double h, bool refine) {
  if (!(h > 0.0)) throw std::invalid_argument("divergence_audit: h must be positive");
  DivergenceReport rep;
  rep.event = e;
  rep.h = h;
  rep.residual = {current_divergence(current, e, h)};
  if (refine) {
    rep.residual_half = std::vector<double>{current_divergence(current, e, 0.5 * h)};
    rep.ratio = rep.worst() / std::max(rep.worst_half(), 1e-300);
  }
  return rep;
}

DivergenceReport divergence_audit_multi(const MultiFn& current, double t, const std::vector<Vec3>& xs, double h,
                                        bool refine) {
  if (!(h > 0.0)) throw std::invalid_argument("divergence_audit_multi: h must be positive");
  DivergenceReport rep;
  rep.event = Event{t, xs.empty() ? Vec3{} : xs[0]};
  rep.h = h;
  rep.residual = {multi_divergence(current, t, xs, h)};
  if (refine) {
    rep.residual_half = std::vector<double>{multi_divergence(current, t, xs, 0.5 * h)};
    rep.ratio = rep.worst() / std::max(rep.worst_half(), 1e-300);
  }
  return rep;
}

FourVector theta_divergence(const TensorFn& theta, const Event& e, double h) {
  FourVector out;
  for (int nu = 0; nu < 4; ++nu) {
    double div = 0.0;
    {
      Event p = e, m = e;
      p.t += h;
      m.t -= h;
      div += (theta(p)(0, nu) - theta(m)(0, nu)) / (2.0 * h);
    }
    for (int i = 0; i < 3; ++i) {
      Event p = e, m = e;
      (i == 0 ? p.x.x : i == 1 ? p.x.y : p.x.z) += h;
      (i == 0 ? m.x.x : i == 1 ? m.x.y : m.x.z) -= h;
      div += (theta(p)(i + 1, nu) - theta(m)(i + 1, nu)) / (2.0 * h);
    }
    out[nu] = div;
  }
  return out;
}

DivergenceReport coupled_divergence_audit(const TensorFn& theta, const CurrentFn& s, const Tensor2& f, double e_charge,
                                          const Event& e, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("coupled_divergence_audit: h must be positive");
  const FourVector div = theta_divergence(theta, e, h);
  const FourVector force = lorentz_force_density(f, s(e), e_charge);
  DivergenceReport rep;
  rep.event = e;
  rep.h = h;
  rep.residual = {div[0] - force[0], div[1] - force[1], div[2] - force[2], div[3] - force[3]};
  return rep;
}

}  // namespace kemmer
