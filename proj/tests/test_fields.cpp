#include <doctest.h>

#include <memory>
#include <random>

#include "kemmer/currents.hpp"
#include "kemmer/fields.hpp"
#include "kemmer/grid.hpp"

using namespace kemmer;

namespace {
std::mt19937_64 rng(29);
Event rand_event(double tspan = 2.0, double xspan = 2.0) {
  std::uniform_real_distribution<double> ut(-tspan, tspan), ux(-xspan, xspan);
  return Event{ut(rng), Vec3{ux(rng), ux(rng), ux(rng)}};
}
}  // namespace

TEST_CASE("kg superposition") {
  SUBCASE("rest mode is exp(-imt)") {
    const ScalarField f = ScalarField::superposition({kg_mode({1, 0}, Vec3{}, 1.0)}, 1.0);
    const Complex v = f.value(Event{0.7, Vec3{0.3, 0.1, -0.2}});
    CHECK(std::abs(v - std::exp(Complex{0, -0.7})) < 1e-15);
    CHECK(f.kg_residual(Event{0.7, Vec3{}}) < 1e-15);
  }
  SUBCASE("dispersion from the mass shell") {
    const KgMode m = kg_mode({1, 0}, Vec3{0.3, 0, 0}, 1.0);
    CHECK(m.p[0] == doctest::Approx(std::sqrt(1.09)).epsilon(1e-15));
    const ScalarField f = ScalarField::superposition({m}, 1.0);
    CHECK(f.kg_residual(rand_event()) < 1e-12);
  }
  SUBCASE("two-mode residual at random events") {
    const ScalarField f =
        ScalarField::superposition({kg_mode({1, 0.2}, Vec3{0.3, 0.1, 0}, 1.0), kg_mode({0.5, -0.1}, Vec3{-0.2, 0, 0.4}, 1.0)}, 1.0);
    for (int i = 0; i < 100; ++i) CHECK(f.kg_residual(rand_event()) < 1e-12);
  }
  SUBCASE("off-shell mode is rejected naming the index") {
    std::vector<KgMode> modes{kg_mode({1, 0}, Vec3{0.1, 0, 0}, 1.0), KgMode{{1, 0}, FourVector{2.0, 0.3, 0, 0}}};
    bool threw = false;
    try {
      ScalarField::superposition(modes, 1.0);
    } catch (const std::invalid_argument& e) {
      threw = true;
      CHECK(std::string(e.what()).find("mode 1") != std::string::npos);
    }
    CHECK(threw);
  }
  SUBCASE("negative-frequency four-momentum is on shell and accepted") {
    const ScalarField f = ScalarField::superposition({KgMode{{1, 0}, FourVector{-1.0, 0, 0, 0}}}, 1.0);
    const Complex v = f.value(Event{0.5, Vec3{}});
    CHECK(std::abs(v - std::exp(Complex{0, 0.5})) < 1e-15);
  }
}

TEST_CASE("proca superposition") {
  SUBCASE("rest-frame transverse mode") {
    const ProcaMode m = proca_mode({1, 0}, Vec3{}, 1.0, {Complex{1, 0}, Complex{0, 0}, Complex{0, 0}});
    CHECK(std::abs(m.eps[0]) == 0.0);
    const ProcaField f = ProcaField::superposition({m}, 1.0);
    CHECK(f.relations_residual(rand_event()) < 1e-12);
  }
  SUBCASE("longitudinal mode from the constraint") {
    // p = (E,0,0,k), eps ~ (k,0,0,E)/m satisfies p.eps = 0
    const double k = 0.6, m = 1.0, energy = std::sqrt(m * m + k * k);
    const ProcaMode pm = proca_mode({1, 0}, Vec3{0, 0, k}, m, {Complex{0, 0}, Complex{0, 0}, Complex{energy / m, 0}});
    CHECK(std::abs(pm.eps[0] - Complex{k / m, 0}) < 1e-14);
    const ProcaField f = ProcaField::superposition({pm}, m);
    CHECK(f.lorenz_residual(rand_event()) < 1e-12);
    CHECK(f.kg_residual(rand_event()) < 1e-12);
  }
  SUBCASE("timelike polarization against a rest mode is rejected") {
    ProcaMode bad{{1, 0}, FourVector{1.0, 0, 0, 0}, {Complex{1, 0}, {}, {}, {}}};
    CHECK_THROWS_AS(ProcaField::superposition({bad}, 1.0), std::invalid_argument);
  }
}

TEST_CASE("spin-0 embedding") {
  SUBCASE("rest mode at the origin") {
    const KemmerField f = embed_spin0(ScalarField::superposition({kg_mode({1, 0}, Vec3{}, 1.0)}, 1.0));
    const ComplexVector psi = f.psi(Event{});
    CHECK(std::abs(psi(0) - Complex{0, -1}) < 1e-15);
    CHECK(std::abs(psi(1)) < 1e-15);
    CHECK(std::abs(psi(2)) < 1e-15);
    CHECK(std::abs(psi(3)) < 1e-15);
    CHECK(std::abs(psi(4) - Complex{1, 0}) < 1e-15);
  }
  SUBCASE("kemmer residual for a random superposition") {
    const ScalarField phi =
        ScalarField::superposition({kg_mode({1, 0.3}, Vec3{0.4, -0.1, 0}, 1.0), kg_mode({0.2, 0.5}, Vec3{0, 0.3, -0.2}, 1.0)}, 1.0);
    const KemmerField f = embed_spin0(phi);
    for (int i = 0; i < 50; ++i) CHECK(kemmer_residual(representation(Spin::spin0), f, rand_event()).worst() < 1e-9);
  }
  SUBCASE("embedded tensor equals the direct Klein-Gordon tensor") {
    const ScalarField phi =
        ScalarField::superposition({kg_mode({1, 0.3}, Vec3{0.4, -0.1, 0}, 1.0), kg_mode({0.2, 0.5}, Vec3{0, 0.3, -0.2}, 1.0)}, 1.0);
    const KemmerField f = embed_spin0(phi);
    for (int i = 0; i < 20; ++i) {
      const Event e = rand_event();
      const Tensor2 a = energy_momentum(representation(Spin::spin0), f.psi(e));
      const Tensor2 b = kg_energy_momentum(phi.value(e), phi.d1(e), 1.0);
      CHECK((a - b).max_abs() < 1e-10);
    }
  }
}

TEST_CASE("spin-1 embedding") {
  const ProcaField a = ProcaField::superposition(
      {proca_mode({1, 0}, Vec3{0.4, 0, 0}, 1.0, {Complex{0, 0}, Complex{1, 0}, Complex{0, 0.4}}),
       proca_mode({0.5, 0.2}, Vec3{0, 0.2, 0.3}, 1.0, {Complex{0.3, 0}, Complex{0, 0}, Complex{1, 0}})},
      1.0);
  const KemmerField f = embed_spin1(a);

  SUBCASE("kemmer residual and component relations") {
    for (int i = 0; i < 50; ++i) {
      const Event e = rand_event();
      CHECK(kemmer_residual(representation(Spin::spin1), f, e).worst() < 1e-9);
      CHECK(a.relations_residual(e) < 1e-9);
    }
  }
  SUBCASE("embedded tensor equals the direct Proca tensor") {
    for (int i = 0; i < 20; ++i) {
      const Event e = rand_event();
      const Tensor2 t1 = energy_momentum(representation(Spin::spin1), f.psi(e));
      const Tensor2 t2 = proca_energy_momentum(a.value(e), a.d1(e), 1.0);
      CHECK((t1 - t2).max_abs() < 1e-10);
    }
  }
  SUBCASE("faraday relation d0 B = -curl E via analytic derivatives") {
    // folded into relations_residual; spot-check one mode directly
    const ProcaField single =
        ProcaField::superposition({proca_mode({1, 0}, Vec3{0.3, 0.2, 0}, 1.0, {Complex{0, 0}, Complex{0, 0}, Complex{1, 0}})}, 1.0);
    CHECK(single.relations_residual(rand_event()) < 1e-10);
  }
}

TEST_CASE("nr gaussian packet") {
  SUBCASE("zero velocity at the packet center for k = 0") {
    const NrField f = NrField::gaussian(Spin::spin0, 1.0, 0.8, Vec3{}, Vec3{});
    const NrScalarSample s = f.scalar_sample(Event{0.0, Vec3{}});
    for (const auto& gcomp : s.grad) CHECK(std::abs(std::imag(std::conj(s.value) * gcomp)) < 1e-18);
  }
  SUBCASE("schrodinger residual at random events") {
    const NrField f = NrField::gaussian(Spin::spin0, 1.3, 0.7, Vec3{0.2, -0.4, 0.1}, Vec3{0.5, 0.2, -0.3});
    for (int i = 0; i < 100; ++i) CHECK(f.schrodinger_residual(rand_event(1.5, 1.5)) < 1e-8);
  }
  SUBCASE("real polarization kills the spin density") {
    const NrField f = NrField::gaussian(Spin::spin1, 1.0, 0.8, Vec3{}, Vec3{0.3, 0, 0},
                                        std::array<Complex, 3>{Complex{0.6, 0}, Complex{0.8, 0}, Complex{0, 0}});
    const Vec3 s = spin_density(f.vector_sample(rand_event()));
    CHECK(s.norm() == 0.0);
  }
  CHECK_THROWS_AS(NrField::gaussian(Spin::spin0, 1.0, -0.5, Vec3{}, Vec3{}), std::invalid_argument);
  CHECK_THROWS_AS(NrField::gaussian(Spin::spin1, 1.0, 0.5, Vec3{}, Vec3{}), std::invalid_argument);
}

TEST_CASE("two-slit superposition symmetry") {
  const NrField f = NrField::two_slit(Spin::spin0, 1.0, 2.0, 0.4, 0.7);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int i = 0; i < 50; ++i) {
    const double x = u(rng), y = u(rng), t = 0.5 * std::abs(u(rng));
    const NrScalarSample up = f.scalar_sample(Event{t, Vec3{x, y, 0}});
    const NrScalarSample dn = f.scalar_sample(Event{t, Vec3{x, -y, 0}});
    CHECK(std::abs(std::abs(up.value) - std::abs(dn.value)) < 1e-12);
    // j_y antisymmetric under the reflection
    const double jy_up = std::imag(std::conj(up.value) * up.grad[1]);
    const double jy_dn = std::imag(std::conj(dn.value) * dn.grad[1]);
    CHECK(std::abs(jy_up + jy_dn) < 1e-10);
  }
  const NrScalarSample axis = f.scalar_sample(Event{0.8, Vec3{0.4, 0.0, 0}});
  CHECK(std::abs(std::imag(std::conj(axis.value) * axis.grad[1])) < 1e-16);
}

TEST_CASE("analytic derivatives agree with finite differences (Richardson)") {
  const ScalarField phi =
      ScalarField::superposition({kg_mode({1, 0.2}, Vec3{0.5, -0.2, 0.1}, 1.0), kg_mode({0.3, 0}, Vec3{0, 0.4, 0}, 1.0)}, 1.0);
  const Event e{0.4, Vec3{0.2, 0.7, -0.3}};
  const auto d = phi.d1(e);
  auto fd_err = [&](double h) {
    Event p = e, m = e;
    p.x.x += h;
    m.x.x -= h;
    const Complex fd = (phi.value(p) - phi.value(m)) / (2 * h);
    return std::abs(fd - d[1]);
  };
  const double e1 = fd_err(1e-2), e2 = fd_err(5e-3);
  CHECK(e1 / e2 > 3.5);  // second-order convergence onto the analytic value
  CHECK(e2 < 1e-5);
}

TEST_CASE("embedding is linear in the field") {
  const ScalarField p1 = ScalarField::superposition({kg_mode({1, 0.2}, Vec3{0.3, 0, 0}, 1.0)}, 1.0);
  const ScalarField p2 = ScalarField::superposition({kg_mode({0.4, -0.6}, Vec3{0, -0.2, 0.5}, 1.0)}, 1.0);
  std::vector<KgMode> joint = p1.modes();
  joint.push_back(p2.modes()[0]);
  const ScalarField sum = ScalarField::superposition(joint, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Event e = rand_event();
    const ComplexVector d = embed_spin0(sum).psi(e) - (embed_spin0(p1).psi(e) + embed_spin0(p2).psi(e));
    CHECK(d.cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("grid-backed sampling errors outside the lattice") {
  const GridSpec spec{0.0, 10.0, 101, 0.0, 1.0, 41};
  auto g = std::make_shared<GridField>(GridField::solve_coupled_kg(
      spec, GridBoundary::periodic, Potential1p1::free(), 0.0, 1.0,
      [](double x) { return std::exp(Complex{0, x}); }, [](double x) { return Complex{0, -1.4} * std::exp(Complex{0, x}); }));
  CHECK_THROWS_AS(g->sample(Event{0.5, Vec3{11.0, 0, 0}}), std::domain_error);
  CHECK_THROWS_AS(g->sample(Event{2.0, Vec3{5.0, 0, 0}}), std::domain_error);
  const GridSample s = g->sample(Event{0.5, Vec3{5.0, 0, 0}});
  CHECK(std::abs(s.phi) > 0.0);
}
