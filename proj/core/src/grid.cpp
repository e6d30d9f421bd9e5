#include "kemmer/grid.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace kemmer {

namespace {
const Complex kI{0.0, 1.0};
}

Potential1p1 Potential1p1::free() {
  return {[](double, double) { return 0.0; }, [](double, double) { return 0.0; }, "free"};
}

Potential1p1 Potential1p1::constant_v0(double v0) {
  return {[v0](double, double) { return v0; }, [](double, double) { return 0.0; },
          "constant V0=" + std::to_string(v0)};
}

Potential1p1 Potential1p1::linear_efield(double efield) {
  return {[efield](double, double x) { return -efield * x; }, [](double, double) { return 0.0; },
          "linear V0=-E*x, E=" + std::to_string(efield)};
}

double GridField::v_mu(int mu, double t, double x) const {
  if (mu == 0) return v_.v0(t, x);
  if (mu == 1) return v_.v1(t, x);
  return 0.0;
}

GridField GridField::solve_coupled_kg(const GridSpec& spec, GridBoundary bc, Potential1p1 v, double e, double mass,
                                      const std::function<Complex(double)>& phi0,
                                      const std::function<Complex(double)>& dtphi0) {
  if (spec.nx < 5 || spec.nt < 3) throw std::invalid_argument("GridField: lattice too small");
  if (!(mass > 0.0)) throw std::invalid_argument("GridField: mass must be positive");

  const double h = spec.h();
  const double dt = spec.dt();

  double vmax = 0.0;
  for (int n = 0; n < spec.nt; ++n) {
    const double t = spec.t0 + n * dt;
    for (int j = 0; j < spec.nx; ++j) {
      const double x = spec.x0 + j * h;
      vmax = std::max(vmax, std::max(std::abs(v.v0(t, x)), std::abs(v.v1(t, x))));
    }
  }
  const double bound = 0.9 * h / (1.0 + std::abs(e) * vmax * h);
  if (dt > bound)
    throw std::invalid_argument("GridField: stability bound violated (dt=" + std::to_string(dt) +
                                " > " + std::to_string(bound) + ")");

  GridField g;
  g.spec_ = spec;
  g.bc_ = bc;
  g.v_ = std::move(v);
  g.e_ = e;
  g.mass_ = mass;
  g.data_.assign(static_cast<std::size_t>(spec.nt) * static_cast<std::size_t>(spec.nx), Complex{0.0, 0.0});

  const int nx = spec.nx;
  auto at = [&](int n, int j) -> Complex& {
    return g.data_[static_cast<std::size_t>(n) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(j)];
  };
  auto wrap = [&](int j) {
    if (bc == GridBoundary::periodic) return (j % (nx - 1) + (nx - 1)) % (nx - 1);
    return j;  // callers guard the range for Dirichlet
  };
  auto xof = [&](int j) { return spec.x0 + j * h; };
  auto tof = [&](int n) { return spec.t0 + n * dt; };

  for (int j = 0; j < nx; ++j) {
    const Complex p = phi0(xof(j));
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
      throw std::invalid_argument("GridField: initial data not finite");
    at(0, j) = p;
  }
  if (bc == GridBoundary::periodic) at(0, nx - 1) = at(0, 0);

  // Spatial part of D_mu D^mu phi + interaction terms, with the second time
  // derivative isolated:
  //   phi_tt = phi_xx + 2 i e V1 phi_x + i e (dx V1) phi - e^2 V1^2 phi
  //            - m^2 phi - 2 i e V0 phi_t - i e (dt V0) phi + e^2 V0^2 phi
  auto dx_v = [&](int mu, double t, double x) { return (g.v_mu(mu, t, x + h) - g.v_mu(mu, t, x - h)) / (2.0 * h); };
  auto dt_v = [&](int mu, double t, double x) { return (g.v_mu(mu, t + dt, x) - g.v_mu(mu, t - dt, x)) / (2.0 * dt); };

  // First step by Taylor expansion; spatial derivatives of the initial data
  // are centered differences of the supplied functions (exact h^2 accuracy).
  {
    const double t = spec.t0;
    const int jlo = (bc == GridBoundary::periodic) ? 0 : 1;
    const int jhi = (bc == GridBoundary::periodic) ? nx - 1 : nx - 1;
    for (int j = jlo; j < jhi; ++j) {
      const double x = xof(j);
      const Complex p = phi0(x);
      const Complex pt = dtphi0(x);
      const Complex pxx = (phi0(x + h) - 2.0 * p + phi0(x - h)) / (h * h);
      const Complex px = (phi0(x + h) - phi0(x - h)) / (2.0 * h);
      const double v0 = g.v_mu(0, t, x), v1 = g.v_mu(1, t, x);
      const Complex ptt = pxx + 2.0 * kI * e * v1 * px + kI * e * dx_v(1, t, x) * p - e * e * v1 * v1 * p -
                          mass * mass * p - 2.0 * kI * e * v0 * pt - kI * e * dt_v(0, t, x) * p + e * e * v0 * v0 * p;
      at(1, j) = p + dt * pt + 0.5 * dt * dt * ptt;
    }
    if (bc == GridBoundary::periodic) at(1, nx - 1) = at(1, 0);
  }

  for (int n = 1; n + 1 < spec.nt; ++n) {
    const double t = tof(n);
    const int jlo = (bc == GridBoundary::periodic) ? 0 : 1;
    const int jhi = (bc == GridBoundary::periodic) ? nx - 1 : nx - 1;
    for (int j = jlo; j < jhi; ++j) {
      const double x = xof(j);
      const double v0 = g.v_mu(0, t, x), v1 = g.v_mu(1, t, x);
      const Complex pc = at(n, j);
      const Complex pm = at(n - 1, j);
      const Complex pl = at(n, j == 0 ? wrap(-1) : j - 1);
      const Complex pr = at(n, wrap(j + 1));
      const Complex pxx = (pr - 2.0 * pc + pl) / (h * h);
      const Complex px = (pr - pl) / (2.0 * h);

      const Complex rhs = 2.0 * pc / (dt * dt) - pm / (dt * dt) + kI * e * v0 * pm / dt + pxx +
                          2.0 * kI * e * v1 * px + kI * e * dx_v(1, t, x) * pc - e * e * v1 * v1 * pc -
                          mass * mass * pc - kI * e * dt_v(0, t, x) * pc + e * e * v0 * v0 * pc;
      const Complex lhs_coeff = 1.0 / (dt * dt) + kI * e * v0 / dt;
      at(n + 1, j) = rhs / lhs_coeff;
    }
    if (bc == GridBoundary::periodic) at(n + 1, nx - 1) = at(n + 1, 0);
  }
  return g;
}

int GridField::node_x(double x) const {
  const double h = spec_.h();
  const double f = (x - spec_.x0) / h;
  const int j = static_cast<int>(std::lround(f));
  if (j < 0 || j >= spec_.nx || std::abs(f - j) > 1e-6)
    throw std::domain_error("GridField: event is not lattice-aligned in x");
  return j;
}

int GridField::node_t(double t) const {
  const double dt = spec_.dt();
  const double f = (t - spec_.t0) / dt;
  const int n = static_cast<int>(std::lround(f));
  if (n < 0 || n >= spec_.nt || std::abs(f - n) > 1e-6)
    throw std::domain_error("GridField: event is not lattice-aligned in t");
  return n;
}

bool GridField::in_domain(const Event& e, double margin_nodes) const {
  // The solution is independent of y and z; the lattice constrains t and x only.
  const double mh = margin_nodes * spec_.h();
  const double mt = margin_nodes * spec_.dt();
  const double tol = 1e-9;
  return e.t >= spec_.t0 + mt - tol && e.t <= spec_.t1 - mt + tol && e.x.x >= spec_.x0 + mh - tol &&
         e.x.x <= spec_.x1 - mh + tol;
}

GridSample GridField::sample(const Event& e) const {
  if (!in_domain(e, 0.0)) throw std::domain_error("GridField: event outside the lattice");
  const int n = node_t(e.t);
  const int j = node_x(e.x.x);
  const double h = spec_.h();
  const double dt = spec_.dt();

  GridSample s;
  s.n = n;
  s.j = j;
  s.phi = phi(n, j);

  auto d_time = [&](int nn, int jj) {
    if (nn == 0) return (-3.0 * phi(0, jj) + 4.0 * phi(1, jj) - phi(2, jj)) / (2.0 * dt);
    if (nn == spec_.nt - 1)
      return (3.0 * phi(nn, jj) - 4.0 * phi(nn - 1, jj) + phi(nn - 2, jj)) / (2.0 * dt);
    return (phi(nn + 1, jj) - phi(nn - 1, jj)) / (2.0 * dt);
  };
  auto d_space = [&](int nn, int jj) {
    if (bc_ == GridBoundary::periodic) {
      const int l = (jj == 0) ? spec_.nx - 2 : jj - 1;
      const int r = (jj == spec_.nx - 1) ? 1 : jj + 1;
      return (phi(nn, r) - phi(nn, l)) / (2.0 * h);
    }
    if (jj == 0) return (-3.0 * phi(nn, 0) + 4.0 * phi(nn, 1) - phi(nn, 2)) / (2.0 * h);
    if (jj == spec_.nx - 1)
      return (3.0 * phi(nn, jj) - 4.0 * phi(nn, jj - 1) + phi(nn, jj - 2)) / (2.0 * h);
    return (phi(nn, jj + 1) - phi(nn, jj - 1)) / (2.0 * h);
  };

  s.d1[0] = d_time(n, j);
  s.d1[1] = d_space(n, j);
  s.d1[2] = Complex{0.0, 0.0};
  s.d1[3] = Complex{0.0, 0.0};
  return s;
}

double GridField::charge(int n) const {
  // s^0 = -2 Im(phi^* d_0 phi) - 2 e V^0 |phi|^2, trapezoid in x.
  const double h = spec_.h();
  const double dt = spec_.dt();
  const double t = spec_.t0 + n * dt;
  double q = 0.0;
  for (int j = 0; j < spec_.nx; ++j) {
    const double x = spec_.x0 + j * h;
    Complex dphi_t;
    if (n == 0)
      dphi_t = (-3.0 * phi(0, j) + 4.0 * phi(1, j) - phi(2, j)) / (2.0 * dt);
    else if (n == spec_.nt - 1)
      dphi_t = (3.0 * phi(n, j) - 4.0 * phi(n - 1, j) + phi(n - 2, j)) / (2.0 * dt);
    else
      dphi_t = (phi(n + 1, j) - phi(n - 1, j)) / (2.0 * dt);
    const double s0 = -2.0 * std::imag(std::conj(phi(n, j)) * dphi_t) - 2.0 * e_ * v_.v0(t, x) * std::norm(phi(n, j));
    const double w = (j == 0 || j == spec_.nx - 1) ? 0.5 : 1.0;
    q += w * s0 * h;
  }
  return q;
}

void GridField::export_table(std::ostream& os, int stride_t, int stride_x) const {
  os << "# t x re_phi im_phi\n";
  for (int n = 0; n < spec_.nt; n += stride_t) {
    const double t = spec_.t0 + n * spec_.dt();
    for (int j = 0; j < spec_.nx; j += stride_x) {
      const double x = spec_.x0 + j * spec_.h();
      const Complex p = phi(n, j);
      os << t << " " << x << " " << p.real() << " " << p.imag() << "\n";
    }
  }
}

void GridField::export_metadata(std::ostream& os) const {
  os << "h " << spec_.h() << "\n"
     << "dt " << spec_.dt() << "\n"
     << "nx " << spec_.nx << "\n"
     << "nt " << spec_.nt << "\n"
     << "x0 " << spec_.x0 << "\n"
     << "x1 " << spec_.x1 << "\n"
     << "t0 " << spec_.t0 << "\n"
     << "t1 " << spec_.t1 << "\n"
     << "e " << e_ << "\n"
     << "m " << mass_ << "\n"
     << "potential " << v_.description << "\n"
     << "boundary " << (bc_ == GridBoundary::periodic ? "periodic" : "dirichlet_zero") << "\n";
}

}  // namespace kemmer
