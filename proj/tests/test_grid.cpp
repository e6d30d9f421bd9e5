#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "kemmer/currents.hpp"
#include "kemmer/grid.hpp"

using namespace kemmer;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("free plane wave reproduces the analytic solution at O(h^2)") {
  const double m = 1.0, p = 1.0;
  const double energy = std::sqrt(m * m + p * p);
  auto exact = [&](double t, double x) { return std::exp(Complex{0, -1.0} * (energy * t - p * x)); };

  auto err = [&](const GridSpec& spec) {
    const GridField g = GridField::solve_coupled_kg(
        spec, GridBoundary::periodic, Potential1p1::free(), 0.0, m, [&](double x) { return exact(0, x); },
        [&](double x) { return Complex{0, -energy} * exact(0, x); });
    double e = 0.0;
    for (int j = 0; j < spec.nx; ++j) e = std::max(e, std::abs(g.phi(spec.nt - 1, j) - exact(spec.t1, spec.x0 + j * spec.h())));
    return e;
  };

  const GridSpec coarse{0.0, 8 * kPi, 161, 0.0, 2.0, 41};
  const double e1 = err(coarse);
  const double e2 = err(coarse.refined());
  CHECK(e1 / e2 > 3.5);
}

TEST_CASE("constant V0 is a pure phase (gauge-trivial check)") {
  const double m = 1.0, p = 1.0, v0 = 0.5, e = 1.0;
  const double energy = std::sqrt(m * m + p * p);
  auto exact = [&](double t, double x) { return std::exp(Complex{0, -1.0} * (energy * t - p * x)); };
  const GridSpec spec{0.0, 8 * kPi, 321, 0.0, 1.0, 81};
  const GridField g = GridField::solve_coupled_kg(
      spec, GridBoundary::periodic, Potential1p1::constant_v0(v0), e, m, [&](double x) { return exact(0, x); },
      [&](double x) { return Complex{0, -(energy + e * v0)} * exact(0, x); });
  double worst = 0.0;
  for (int j = 0; j < spec.nx; ++j) {
    const Complex want = exact(spec.t1, spec.x0 + j * spec.h()) * std::exp(Complex{0, -e * v0 * spec.t1});
    worst = std::max(worst, std::abs(g.phi(spec.nt - 1, j) - want));
  }
  CHECK(worst < 4.0 * spec.h() * spec.h());
}

TEST_CASE("discrete charge is conserved at O(h^2) in a constant electric field") {
  const double m = 1.0;
  auto phi0 = [&](double x) { return std::exp(Complex{-(x + 4.0) * (x + 4.0) / 4.0, 0.5 * x}); };
  auto dt0 = [&](double x) { return Complex{0, -std::sqrt(1.25)} * phi0(x); };
  auto drift = [&](const GridSpec& spec) {
    const GridField g =
        GridField::solve_coupled_kg(spec, GridBoundary::dirichlet_zero, Potential1p1::linear_efield(0.4), 0.5, m, phi0, dt0);
    const double q1 = g.charge(1);
    CHECK(q1 > 0.0);
    double d = 0.0;
    for (int n = 2; n + 1 < spec.nt; n += 3) d = std::max(d, std::abs(g.charge(n) - q1));
    return d;
  };
  const GridSpec spec{-16.0, 16.0, 321, 0.0, 1.5, 61};
  CHECK(drift(spec) / drift(spec.refined()) > 3.5);
}

TEST_CASE("stability bound is enforced before stepping") {
  const GridSpec bad{0.0, 10.0, 51, 0.0, 1.0, 3};  // dt = 0.5 >> 0.9 h
  CHECK_THROWS_AS(GridField::solve_coupled_kg(bad, GridBoundary::periodic, Potential1p1::free(), 0.0, 1.0,
                                              [](double) { return Complex{1, 0}; }, [](double) { return Complex{}; }),
                  std::invalid_argument);
}

TEST_CASE("export table and metadata") {
  const GridSpec spec{0.0, 2.0, 21, 0.0, 0.2, 11};
  const GridField g = GridField::solve_coupled_kg(
      spec, GridBoundary::dirichlet_zero, Potential1p1::free(), 0.0, 1.0,
      [](double x) { return Complex{std::exp(-(x - 1.0) * (x - 1.0)), 0.0}; }, [](double) { return Complex{}; });
  std::ostringstream table, meta;
  g.export_table(table, 5, 10);
  g.export_metadata(meta);
  CHECK(table.str().find("# t x re_phi im_phi") == 0);
  CHECK(meta.str().find("potential free") != std::string::npos);
  CHECK(meta.str().find("boundary dirichlet_zero") != std::string::npos);
}

TEST_CASE("coupled grid: kemmer-route tensor equals the direct reduction formula") {
  const double m = 1.0, e = 0.5, ef = 0.4;
  const GridSpec spec{-12.0, 12.0, 241, 0.0, 1.0, 81};
  auto g = std::make_shared<GridField>(GridField::solve_coupled_kg(
      spec, GridBoundary::dirichlet_zero, Potential1p1::linear_efield(ef), e, m,
      [](double x) { return std::exp(Complex{-(x + 2.0) * (x + 2.0) / 4.0, 0.5 * x}); },
      [](double x) { return Complex{0, -1.1} * std::exp(Complex{-(x + 2.0) * (x + 2.0) / 4.0, 0.5 * x}); }));
  const KemmerField kf = grid_kemmer_field(g);
  const DkpRep& rep = representation(Spin::spin0);
  for (double x : {-2.5, -2.0, -1.0}) {
    const Event ev{0.5, Vec3{x, 0, 0}};
    const GridSample s = g->sample(ev);
    const FourVector vpot{g->v_mu(0, ev.t, x), g->v_mu(1, ev.t, x), 0.0, 0.0};
    const Tensor2 direct = kg_energy_momentum_coupled(s.phi, s.d1, m, vpot, e);
    const Tensor2 via_dkp = energy_momentum(rep, kf.psi(ev));
    CHECK((direct - via_dkp).max_abs() < 1e-11 * std::max(1.0, direct.max_abs()));
    const FourVector s_direct = kg_charge_current_coupled(s.phi, s.d1, vpot, e);
    const FourVector s_dkp = charge_current(rep, kf.psi(ev), m);
    for (int mu = 0; mu < 4; ++mu) CHECK(std::abs(s_direct[mu] - s_dkp[mu]) < 1e-11);
  }
}

TEST_CASE("grid kemmer residual shrinks under refinement") {
  const double m = 1.0;
  auto make = [&](const GridSpec& spec) {
    return std::make_shared<GridField>(GridField::solve_coupled_kg(
        spec, GridBoundary::periodic, Potential1p1::free(), 0.0, m,
        [](double x) { return std::exp(Complex{0, 1.0} * x); },
        [](double x) { return Complex{0, -std::sqrt(2.0)} * std::exp(Complex{0, 1.0} * x); }));
  };
  const GridSpec spec{0.0, 8 * kPi, 161, 0.0, 1.0, 41};
  auto res = [&](const std::shared_ptr<GridField>& g) {
    const KemmerField kf = grid_kemmer_field(g);
    const double t = 0.5, x = 4.0 * kPi;
    const double ta = g->spec().t0 + g->spec().dt() * std::round((t - g->spec().t0) / g->spec().dt());
    const double xa = g->spec().x0 + g->spec().h() * std::round((x - g->spec().x0) / g->spec().h());
    return kemmer_residual(representation(Spin::spin0), kf, Event{ta, Vec3{xa, 0, 0}}).worst();
  };
  const double r1 = res(make(spec));
  const double r2 = res(make(spec.refined()));
  CHECK(r1 / r2 > 3.0);
}
