#include "kemmer/fields.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kemmer/grid.hpp"

namespace kemmer {

namespace {

const Complex kI{0.0, 1.0};
constexpr double kPi = 3.14159265358979323846;

double mode_scale(double amp_sum, double mass) { return std::max(amp_sum * mass * mass, 1e-300); }

int eps_index(int i, int j, int k) {  // 0-based spatial
  if (i == j || j == k || i == k) return 0;
  if ((i == 0 && j == 1 && k == 2) || (i == 1 && j == 2 && k == 0) || (i == 2 && j == 0 && k == 1)) return 1;
  return -1;
}

}  // namespace

// ---------------------------------------------------------------------------
// ScalarField

KgMode kg_mode(Complex amplitude, const Vec3& k, double mass) {
  const double energy = std::sqrt(k.norm2() + mass * mass);
  return KgMode{amplitude, FourVector{energy, k}};
}

ScalarField ScalarField::superposition(std::vector<KgMode> modes, double mass) {
  if (modes.empty()) throw std::invalid_argument("ScalarField: needs at least one mode");
  if (!(mass > 0.0)) throw std::invalid_argument("ScalarField: mass must be positive");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double shell = minkowski_dot(modes[i].p, modes[i].p) - mass * mass;
    if (std::abs(shell) > 1e-10 * mass * mass)
      throw std::invalid_argument("ScalarField: mode " + std::to_string(i) + " is off the mass shell");
  }
  ScalarField f;
  f.modes_ = std::move(modes);
  f.mass_ = mass;
  return f;
}

Complex ScalarField::value(const Event& e) const {
  const FourVector x{e.t, e.x};
  Complex v{0.0, 0.0};
  for (const auto& m : modes_) v += m.amplitude * std::exp(-kI * minkowski_dot(m.p, x));
  return v;
}

std::array<Complex, 4> ScalarField::d1(const Event& e) const {
  const FourVector x{e.t, e.x};
  std::array<Complex, 4> d{};
  for (const auto& m : modes_) {
    const Complex ph = m.amplitude * std::exp(-kI * minkowski_dot(m.p, x));
    for (int mu = 0; mu < 4; ++mu) d[static_cast<std::size_t>(mu)] += -kI * m.p.lower(mu) * ph;
  }
  return d;
}

std::array<std::array<Complex, 4>, 4> ScalarField::d2(const Event& e) const {
  const FourVector x{e.t, e.x};
  std::array<std::array<Complex, 4>, 4> d{};
  for (const auto& m : modes_) {
    const Complex ph = m.amplitude * std::exp(-kI * minkowski_dot(m.p, x));
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = 0; nu < 4; ++nu)
        d[static_cast<std::size_t>(mu)][static_cast<std::size_t>(nu)] += -m.p.lower(mu) * m.p.lower(nu) * ph;
  }
  return d;
}

double ScalarField::kg_residual(const Event& e) const {
  const FourVector x{e.t, e.x};
  Complex r{0.0, 0.0};
  double amp = 0.0;
  for (const auto& m : modes_) {
    const Complex ph = m.amplitude * std::exp(-kI * minkowski_dot(m.p, x));
    r += (mass_ * mass_ - minkowski_dot(m.p, m.p)) * ph;
    amp += std::abs(m.amplitude);
  }
  return std::abs(r) / mode_scale(amp, mass_);
}

// ---------------------------------------------------------------------------
// ProcaField

ProcaMode proca_mode(Complex amplitude, const Vec3& k, double mass, const std::array<Complex, 3>& eps_spatial) {
  const double energy = std::sqrt(k.norm2() + mass * mass);
  const Complex eps0 = (k.x * eps_spatial[0] + k.y * eps_spatial[1] + k.z * eps_spatial[2]) / energy;
  return ProcaMode{amplitude, FourVector{energy, k}, {eps0, eps_spatial[0], eps_spatial[1], eps_spatial[2]}};
}

namespace {

Complex mode_p_dot_eps(const ProcaMode& m) {
  Complex s{0.0, 0.0};
  for (int mu = 0; mu < 4; ++mu) s += m.p.lower(mu) * m.eps[static_cast<std::size_t>(mu)];
  return s;
}

double eps_norm(const ProcaMode& m) {
  double s = 0.0;
  for (const auto& c : m.eps) s += std::norm(c);
  return std::sqrt(s);
}

}  // namespace

ProcaField ProcaField::superposition(std::vector<ProcaMode> modes, double mass) {
  if (modes.empty()) throw std::invalid_argument("ProcaField: needs at least one mode");
  if (!(mass > 0.0)) throw std::invalid_argument("ProcaField: mass must be positive");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto& m = modes[i];
    const double shell = minkowski_dot(m.p, m.p) - mass * mass;
    if (std::abs(shell) > 1e-10 * mass * mass)
      throw std::invalid_argument("ProcaField: mode " + std::to_string(i) + " is off the mass shell");
    const double scale = std::max(1.0, std::sqrt(std::abs(minkowski_dot(m.p, m.p))) * eps_norm(m));
    if (std::abs(mode_p_dot_eps(m)) > 1e-10 * scale)
      throw std::invalid_argument("ProcaField: mode " + std::to_string(i) + " violates p.eps = 0");
  }
  ProcaField f;
  f.modes_ = std::move(modes);
  f.mass_ = mass;
  return f;
}

std::array<Complex, 4> ProcaField::value(const Event& e) const {
  const FourVector x{e.t, e.x};
  std::array<Complex, 4> a{};
  for (const auto& m : modes_) {
    const Complex ph = m.amplitude * std::exp(-kI * minkowski_dot(m.p, x));
    for (int mu = 0; mu < 4; ++mu) a[static_cast<std::size_t>(mu)] += m.eps[static_cast<std::size_t>(mu)] * ph;
  }
  return a;
}

std::array<std::array<Complex, 4>, 4> ProcaField::d1(const Event& e) const {
  const FourVector x{e.t, e.x};
  std::array<std::array<Complex, 4>, 4> d{};
  for (const auto& m : modes_) {
    const Complex ph = m.amplitude * std::exp(-kI * minkowski_dot(m.p, x));
    for (int nu = 0; nu < 4; ++nu)
      for (int mu = 0; mu < 4; ++mu)
        d[static_cast<std::size_t>(nu)][static_cast<std::size_t>(mu)] +=
            -kI * m.p.lower(nu) * m.eps[static_cast<std::size_t>(mu)] * ph;
  }
  return d;
}

std::array<std::array<std::array<Complex, 4>, 4>, 4> ProcaField::d2(const Event& e) const {
  const FourVector x{e.t, e.x};
  std::array<std::array<std::array<Complex, 4>, 4>, 4> d{};
  for (const auto& m : modes_) {
    const Complex ph = m.amplitude * std::exp(-kI * minkowski_dot(m.p, x));
    for (int la = 0; la < 4; ++la)
      for (int nu = 0; nu < 4; ++nu)
        for (int mu = 0; mu < 4; ++mu)
          d[static_cast<std::size_t>(la)][static_cast<std::size_t>(nu)][static_cast<std::size_t>(mu)] +=
              -m.p.lower(la) * m.p.lower(nu) * m.eps[static_cast<std::size_t>(mu)] * ph;
  }
  return d;
}

double ProcaField::lorenz_residual(const Event& e) const {
  const auto d = d1(e);
  Complex s{0.0, 0.0};
  for (int mu = 0; mu < 4; ++mu) s += d[static_cast<std::size_t>(mu)][static_cast<std::size_t>(mu)];
  double amp = 0.0;
  for (const auto& m : modes_) amp += std::abs(m.amplitude) * eps_norm(m);
  return std::abs(s) / std::max(amp * mass_, 1e-300);
}

double ProcaField::kg_residual(const Event& e) const {
  const FourVector x{e.t, e.x};
  double worst = 0.0;
  double amp = 0.0;
  std::array<Complex, 4> r{};
  for (const auto& m : modes_) {
    const Complex ph = m.amplitude * std::exp(-kI * minkowski_dot(m.p, x));
    const double off = mass_ * mass_ - minkowski_dot(m.p, m.p);
    for (int mu = 0; mu < 4; ++mu) r[static_cast<std::size_t>(mu)] += off * m.eps[static_cast<std::size_t>(mu)] * ph;
    amp += std::abs(m.amplitude) * eps_norm(m);
  }
  for (const auto& c : r) worst = std::max(worst, std::abs(c));
  return worst / mode_scale(amp, mass_);
}

double ProcaField::relations_residual(const Event& e) const {
  const auto a = value(e);
  const auto da = d1(e);
  const auto dda = d2(e);

  auto dE = [&](int nu, int j) {
    return -dda[static_cast<std::size_t>(nu)][static_cast<std::size_t>(j + 1)][0] -
           dda[static_cast<std::size_t>(nu)][0][static_cast<std::size_t>(j + 1)];
  };
  auto dB = [&](int nu, int j) {
    Complex s{0.0, 0.0};
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        if (int s3 = eps_index(j, k, l); s3 != 0)
          s += static_cast<double>(s3) *
               dda[static_cast<std::size_t>(nu)][static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(l + 1)];
    return s;
  };

  double worst = 0.0;
  // div E = -m^2 A0
  {
    Complex div{0.0, 0.0};
    for (int j = 0; j < 3; ++j) div += dE(j + 1, j);
    worst = std::max(worst, std::abs(div + mass_ * mass_ * a[0]));
  }
  for (int j = 0; j < 3; ++j) {
    // d0 E = curl B + m^2 A
    Complex curlB{0.0, 0.0};
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        if (int s3 = eps_index(j, k, l); s3 != 0) curlB += static_cast<double>(s3) * dB(k + 1, l);
    worst = std::max(worst, std::abs(dE(0, j) - curlB - mass_ * mass_ * a[static_cast<std::size_t>(j + 1)]));
    // d0 B = -curl E
    Complex curlE{0.0, 0.0};
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        if (int s3 = eps_index(j, k, l); s3 != 0) curlE += static_cast<double>(s3) * dE(k + 1, l);
    worst = std::max(worst, std::abs(dB(0, j) + curlE));
  }
  {
    Complex lorenz{0.0, 0.0};
    for (int mu = 0; mu < 4; ++mu) lorenz += da[static_cast<std::size_t>(mu)][static_cast<std::size_t>(mu)];
    worst = std::max(worst, mass_ * std::abs(lorenz));
  }

  double amp = 0.0;
  for (const auto& m : modes_) amp += std::abs(m.amplitude) * eps_norm(m);
  return worst / mode_scale(amp, mass_);
}

// ---------------------------------------------------------------------------
// NrField

namespace {

struct AxisSample {
  Complex value;
  Complex dlog_x;
  Complex d2log_xx;
  Complex dlog_t;
};

// Freely spreading 1D Gaussian with complex width s = sigma + i t / (2 m sigma):
//   g = (2 pi)^{-1/4} s^{-1/2} exp(-u^2/(4 sigma s) + i k xi - i k^2 t / 2m),
//   u = xi - k t / m.
// Solves i dt g = -g''/2m exactly.
AxisSample gaussian_axis(double xi, double k, double t, double m, double sigma) {
  const Complex s = sigma + kI * t / (2.0 * m * sigma);
  const double v = k / m;
  const Complex u = xi - v * t;
  const Complex exponent = -u * u / (4.0 * sigma * s) + kI * k * xi - kI * k * k * t / (2.0 * m);
  const Complex value = std::pow(2.0 * kPi, -0.25) / std::sqrt(s) * std::exp(exponent);
  AxisSample a;
  a.value = value;
  a.dlog_x = -u / (2.0 * sigma * s) + kI * k;
  a.d2log_xx = -1.0 / (2.0 * sigma * s);
  a.dlog_t = -kI / (4.0 * m * sigma * s) + u * v / (2.0 * sigma * s) + kI * u * u / (8.0 * m * sigma * sigma * s * s) -
             kI * k * k / (2.0 * m);
  return a;
}

NrScalarSample packet_sample(const Vec3& r, const Vec3& k, double t, double m, double sigma) {
  const AxisSample ax = gaussian_axis(r.x, k.x, t, m, sigma);
  const AxisSample ay = gaussian_axis(r.y, k.y, t, m, sigma);
  const AxisSample az = gaussian_axis(r.z, k.z, t, m, sigma);
  NrScalarSample s;
  s.value = ax.value * ay.value * az.value;
  s.grad = {s.value * ax.dlog_x, s.value * ay.dlog_x, s.value * az.dlog_x};
  s.dt = s.value * (ax.dlog_t + ay.dlog_t + az.dlog_t);
  s.laplacian = s.value * (ax.dlog_x * ax.dlog_x + ax.d2log_xx + ay.dlog_x * ay.dlog_x + ay.d2log_xx +
                           az.dlog_x * az.dlog_x + az.d2log_xx);
  return s;
}

void accumulate(NrScalarSample& acc, const NrScalarSample& s) {
  acc.value += s.value;
  for (int i = 0; i < 3; ++i) acc.grad[static_cast<std::size_t>(i)] += s.grad[static_cast<std::size_t>(i)];
  acc.dt += s.dt;
  acc.laplacian += s.laplacian;
}

}  // namespace

NrField NrField::gaussian(Spin kind, double mass, double sigma, const Vec3& center, const Vec3& k,
                          std::optional<std::array<Complex, 3>> eps) {
  if (!(sigma > 0.0)) throw std::invalid_argument("NrField::gaussian: sigma must be positive");
  if (!(mass > 0.0)) throw std::invalid_argument("NrField::gaussian: mass must be positive");
  NrField f;
  f.shape_ = Shape::gaussian;
  f.kind_ = kind;
  f.mass_ = mass;
  f.sigma_ = sigma;
  f.center_ = center;
  f.k_ = k;
  if (kind == Spin::spin1) {
    if (!eps) throw std::invalid_argument("NrField: spin1 requires a polarization");
    const double n2 = std::norm((*eps)[0]) + std::norm((*eps)[1]) + std::norm((*eps)[2]);
    if (std::abs(n2 - 1.0) > 1e-12) throw std::invalid_argument("NrField: polarization must satisfy eps^dag eps = 1");
    f.eps_ = *eps;
  }
  return f;
}

NrField NrField::two_slit(Spin kind, double mass, double separation, double sigma, double speed,
                          std::optional<std::array<Complex, 3>> eps) {
  if (!(separation > 0.0)) throw std::invalid_argument("NrField::two_slit: separation must be positive");
  NrField f = gaussian(kind, mass, sigma, Vec3{0.0, 0.0, 0.0}, Vec3{mass * speed, 0.0, 0.0}, eps);
  f.shape_ = Shape::two_slit;
  f.separation_ = separation;
  return f;
}

NrField NrField::plane_waves(Spin kind, double mass, std::vector<NrMode> modes,
                             std::optional<std::array<Complex, 3>> eps) {
  if (modes.empty()) throw std::invalid_argument("NrField::plane_waves: needs at least one mode");
  NrField f = gaussian(kind, mass, 1.0, Vec3{}, Vec3{}, kind == Spin::spin1 ? eps : std::nullopt);
  f.shape_ = Shape::plane_waves;
  f.modes_ = std::move(modes);
  return f;
}

NrScalarSample NrField::scalar_sample(const Event& e) const {
  switch (shape_) {
    case Shape::gaussian:
      return packet_sample(e.x - center_, k_, e.t, mass_, sigma_);
    case Shape::two_slit: {
      NrScalarSample s = packet_sample(e.x - Vec3{0.0, 0.5 * separation_, 0.0}, k_, e.t, mass_, sigma_);
      accumulate(s, packet_sample(e.x - Vec3{0.0, -0.5 * separation_, 0.0}, k_, e.t, mass_, sigma_));
      return s;
    }
    case Shape::plane_waves: {
      NrScalarSample s;
      for (const auto& m : modes_) {
        const double omega = m.k.norm2() / (2.0 * mass_);
        const Complex ph = m.amplitude * std::exp(kI * (dot(m.k, e.x) - omega * e.t));
        s.value += ph;
        s.grad[0] += kI * m.k.x * ph;
        s.grad[1] += kI * m.k.y * ph;
        s.grad[2] += kI * m.k.z * ph;
        s.dt += -kI * omega * ph;
        s.laplacian += -m.k.norm2() * ph;
      }
      return s;
    }
  }
  throw std::logic_error("unreachable");
}

NrVectorSample NrField::vector_sample(const Event& e) const {
  if (kind_ != Spin::spin1) throw std::logic_error("NrField::vector_sample: spin-0 field");
  const NrScalarSample s = scalar_sample(e);
  NrVectorSample v;
  for (int c = 0; c < 3; ++c) {
    v.value[static_cast<std::size_t>(c)] = s.value * eps_[static_cast<std::size_t>(c)];
    v.dt[static_cast<std::size_t>(c)] = s.dt * eps_[static_cast<std::size_t>(c)];
    for (int i = 0; i < 3; ++i)
      v.grad[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] =
          s.grad[static_cast<std::size_t>(i)] * eps_[static_cast<std::size_t>(c)];
  }
  return v;
}

double NrField::schrodinger_residual(const Event& e) const {
  const NrScalarSample s = scalar_sample(e);
  const Complex r = kI * s.dt + s.laplacian / (2.0 * mass_);
  const double denom = mass_ * std::abs(s.value) + std::abs(s.laplacian) / (2.0 * mass_) + 1e-300;
  return std::abs(r) / denom;
}

// ---------------------------------------------------------------------------
// Kemmer fields

KemmerField embed_spin0(ScalarField phi) {
  KemmerField f;
  f.kind_ = Spin::spin0;
  f.prov_ = Provenance::embedded_scalar;
  f.mass_ = phi.mass();
  f.scalar_ = std::move(phi);
  return f;
}

KemmerField embed_spin1(ProcaField a) {
  KemmerField f;
  f.kind_ = Spin::spin1;
  f.prov_ = Provenance::embedded_proca;
  f.mass_ = a.mass();
  f.proca_ = std::move(a);
  return f;
}

KemmerField grid_kemmer_field(std::shared_ptr<const GridField> g) {
  if (!g) throw std::invalid_argument("grid_kemmer_field: null grid");
  KemmerField f;
  f.kind_ = Spin::spin0;
  f.prov_ = Provenance::grid;
  f.mass_ = g->mass();
  f.grid_ = std::move(g);
  return f;
}

namespace {

ComplexVector spin0_psi(double mass, const Complex& phi, const std::array<Complex, 4>& dphi) {
  ComplexVector psi(5);
  for (int mu = 0; mu < 4; ++mu) psi(mu) = dphi[static_cast<std::size_t>(mu)];
  psi(4) = mass * phi;
  return psi;
}

ComplexVector spin1_psi(double mass, const std::array<Complex, 4>& a, const std::array<std::array<Complex, 4>, 4>& da) {
  ComplexVector psi(10);
  for (int j = 0; j < 3; ++j) {
    // -E_j = d_j A^0 + d_0 A^j
    psi(j) = da[static_cast<std::size_t>(j + 1)][0] + da[0][static_cast<std::size_t>(j + 1)];
    Complex b{0.0, 0.0};
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        if (int s3 = eps_index(j, k, l); s3 != 0)
          b += static_cast<double>(s3) * da[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(l + 1)];
    psi(3 + j) = b;
    psi(6 + j) = mass * a[static_cast<std::size_t>(j + 1)];
  }
  psi(9) = -mass * a[0];
  return psi;
}

}  // namespace

ComplexVector KemmerField::psi(const Event& e) const {
  switch (prov_) {
    case Provenance::embedded_scalar:
      return spin0_psi(mass_, scalar_->value(e), scalar_->d1(e));
    case Provenance::embedded_proca:
      return spin1_psi(mass_, proca_->value(e), proca_->d1(e));
    case Provenance::grid: {
      const GridSample s = grid_->sample(e);
      ComplexVector psi(5);
      const double eq = grid_->coupling();
      psi(0) = s.d1[0] + kI * eq * grid_->v_mu(0, e.t, e.x.x) * s.phi;
      psi(1) = s.d1[1] + kI * eq * grid_->v_mu(1, e.t, e.x.x) * s.phi;
      psi(2) = Complex{0.0, 0.0};
      psi(3) = Complex{0.0, 0.0};
      psi(4) = mass_ * s.phi;
      return psi;
    }
  }
  throw std::logic_error("unreachable");
}

KemmerSample KemmerField::sample(const Event& e) const {
  KemmerSample out;
  switch (prov_) {
    case Provenance::embedded_scalar: {
      const auto dd = scalar_->d2(e);
      out.psi = spin0_psi(mass_, scalar_->value(e), scalar_->d1(e));
      const auto d = scalar_->d1(e);
      for (int mu = 0; mu < 4; ++mu) {
        ComplexVector dp(5);
        for (int nu = 0; nu < 4; ++nu) dp(nu) = dd[static_cast<std::size_t>(mu)][static_cast<std::size_t>(nu)];
        dp(4) = mass_ * d[static_cast<std::size_t>(mu)];
        out.dpsi[static_cast<std::size_t>(mu)] = std::move(dp);
      }
      out.method = DerivMethod::analytic;
      return out;
    }
    case Provenance::embedded_proca: {
      out.psi = spin1_psi(mass_, proca_->value(e), proca_->d1(e));
      const auto da = proca_->d1(e);
      const auto dda = proca_->d2(e);
      for (int mu = 0; mu < 4; ++mu) {
        // d_mu of the embedded components: shift every A-derivative one order up.
        std::array<Complex, 4> a_mu{};
        for (int c = 0; c < 4; ++c)
          a_mu[static_cast<std::size_t>(c)] = da[static_cast<std::size_t>(mu)][static_cast<std::size_t>(c)];
        std::array<std::array<Complex, 4>, 4> da_mu{};
        for (int nu = 0; nu < 4; ++nu)
          for (int c = 0; c < 4; ++c)
            da_mu[static_cast<std::size_t>(nu)][static_cast<std::size_t>(c)] =
                dda[static_cast<std::size_t>(mu)][static_cast<std::size_t>(nu)][static_cast<std::size_t>(c)];
        out.dpsi[static_cast<std::size_t>(mu)] = spin1_psi(mass_, a_mu, da_mu);
      }
      out.method = DerivMethod::analytic;
      return out;
    }
    case Provenance::grid: {
      out.psi = psi(e);
      const double ht = grid_->spec().dt();
      const double hx = grid_->spec().h();
      auto shifted = [&](double dtv, double dxv) { return psi(Event{e.t + dtv, Vec3{e.x.x + dxv, e.x.y, e.x.z}}); };
      out.dpsi[0] = (shifted(ht, 0.0) - shifted(-ht, 0.0)) / (2.0 * ht);
      out.dpsi[1] = (shifted(0.0, hx) - shifted(0.0, -hx)) / (2.0 * hx);
      out.dpsi[2] = ComplexVector::Zero(5);
      out.dpsi[3] = ComplexVector::Zero(5);
      out.method = DerivMethod::centered_fd;
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

bool KemmerField::in_domain(const Event& e, double margin_nodes) const {
  if (prov_ != Provenance::grid) return true;
  return grid_->in_domain(e, margin_nodes);
}

KemmerFieldN KemmerFieldN::product_sum(std::vector<ProductTerm> terms, long cap) {
  if (terms.empty()) throw std::invalid_argument("KemmerFieldN: needs at least one term");
  const std::size_t n = terms[0].factors.size();
  if (n == 0) throw std::invalid_argument("KemmerFieldN: terms need at least one factor");
  KemmerFieldN f;
  for (const auto& fct : terms[0].factors) f.kinds_.push_back(fct.kind());
  for (const auto& t : terms) {
    if (t.factors.size() != n) throw std::invalid_argument("KemmerFieldN: inconsistent particle counts");
    for (std::size_t a = 0; a < n; ++a)
      if (t.factors[a].kind() != f.kinds_[a]) throw std::invalid_argument("KemmerFieldN: inconsistent spin kinds");
  }
  f.dim_ = 1;
  for (Spin k : f.kinds_) {
    f.dim_ *= spin_dimension(k);
    if (f.dim_ > cap) throw std::length_error("KemmerFieldN: tensor-product dimension exceeds cap");
  }
  f.terms_ = std::move(terms);
  return f;
}

ComplexVector KemmerFieldN::psi(double t, const std::vector<Vec3>& xs) const {
  if (static_cast<int>(xs.size()) != particles())
    throw std::invalid_argument("KemmerFieldN: position count does not match particle count");
  ComplexVector acc = ComplexVector::Zero(dim_);
  for (const auto& term : terms_) {
    ComplexVector prod = ComplexVector::Ones(1);
    for (std::size_t a = 0; a < term.factors.size(); ++a)
      prod = kronecker(prod, term.factors[a].psi(Event{t, xs[a]}));
    acc += term.coeff * prod;
  }
  return acc;
}

KemmerResidual kemmer_residual(const DkpRep& rep, const KemmerField& field, const Event& e) {
  if (rep.kind != field.kind()) throw std::invalid_argument("kemmer_residual: representation/field spin mismatch");
  const KemmerSample s = field.sample(e);
  const double m = field.mass();
  const Complex i{0.0, 1.0};

  double denom = m * s.psi.cwiseAbs().maxCoeff();
  for (const auto& dp : s.dpsi) denom += dp.cwiseAbs().maxCoeff();
  denom = std::max(denom, 1e-300);

  ComplexVector cov = -m * s.psi;
  for (int mu = 0; mu < 4; ++mu) cov += i * rep.beta_upper(mu) * s.dpsi[static_cast<std::size_t>(mu)];

  ComplexVector schro = i * s.dpsi[0] - m * (rep.beta[0] * s.psi);
  for (int k = 0; k < 3; ++k) schro -= i * (rep.beta_tilde[static_cast<std::size_t>(k)] * s.dpsi[static_cast<std::size_t>(k + 1)]);

  const ComplexMatrix b0sq = rep.beta[0] * rep.beta[0];
  const ComplexMatrix proj = ComplexMatrix::Identity(rep.dim, rep.dim) - b0sq;
  ComplexVector cons = -m * (proj * s.psi);
  for (int k = 0; k < 3; ++k) cons += i * (rep.beta_upper(k + 1) * (b0sq * s.dpsi[static_cast<std::size_t>(k + 1)]));

  KemmerResidual r;
  r.covariant = cov.cwiseAbs().maxCoeff() / denom;
  r.schrodinger = schro.cwiseAbs().maxCoeff() / denom;
  r.constraint = cons.cwiseAbs().maxCoeff() / denom;
  return r;
}

}  // namespace kemmer
