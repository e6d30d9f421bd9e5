#include <doctest.h>

#include <memory>
#include <random>

#include "kemmer/currents.hpp"
#include "kemmer/fields.hpp"

using namespace kemmer;

namespace {
std::mt19937_64 rng(31);

ComplexVector random_vec(int n) {
  std::normal_distribution<double> g(0, 1);
  ComplexVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex{g(rng), g(rng)};
  return v;
}

Event rand_event(double span = 2.0) {
  std::uniform_real_distribution<double> u(-span, span);
  return Event{u(rng), Vec3{u(rng), u(rng), u(rng)}};
}
}  // namespace

TEST_CASE("energy-momentum basics") {
  for (Spin s : {Spin::spin0, Spin::spin1}) {
    const DkpRep& rep = representation(s);
    SUBCASE("Theta^00 equals psi^dag psi and the tensor is symmetric") {
      for (int i = 0; i < 1000; ++i) {
        const ComplexVector psi = random_vec(rep.dim);
        const Tensor2 th = energy_momentum(rep, psi);
        CHECK(std::abs(th(0, 0) - psi.squaredNorm()) < 1e-12 * psi.squaredNorm());
        CHECK(th.max_asymmetry() < 1e-12);
        // row Theta^{0 mu} is future-causal
        const FourVector row{th(0, 0), th(1, 0), th(2, 0), th(3, 0)};
        CHECK(minkowski_dot(row, row) > -1e-10 * psi.squaredNorm() * psi.squaredNorm());
      }
    }
    SUBCASE("zero state maps to the zero tensor") {
      const Tensor2 th = energy_momentum(rep, ComplexVector::Zero(rep.dim));
      CHECK(th.max_abs() == 0.0);
    }
  }
  CHECK_THROWS_AS(energy_momentum(representation(Spin::spin0), ComplexVector::Zero(10)), std::invalid_argument);
}

TEST_CASE("plane-wave velocity from the tensor (frozen oracle: Theta^10 = 2|A|^2 E p)") {
  const double m = 1.0, p = 0.7, amp = 1.3;
  const double energy = std::sqrt(m * m + p * p);
  const KemmerField f = embed_spin0(ScalarField::superposition({kg_mode({amp, 0}, Vec3{p, 0, 0}, m)}, m));
  const Tensor2 th = energy_momentum(representation(Spin::spin0), f.psi(rand_event()));
  CHECK(th(1, 0) == doctest::Approx(2 * amp * amp * energy * p).epsilon(1e-12));
  CHECK(th(0, 0) == doctest::Approx(2 * amp * amp * energy * energy).epsilon(1e-12));
  CHECK(th(1, 0) / th(0, 0) == doctest::Approx(p / energy).epsilon(1e-10));
}

TEST_CASE("charge current") {
  const double m = 1.0, p = 0.4;
  const double energy = std::sqrt(m * m + p * p);
  SUBCASE("positive-frequency plane wave: s^0 = 2E, matches the direct formula") {
    const ScalarField phi = ScalarField::superposition({kg_mode({1, 0}, Vec3{p, 0, 0}, m)}, m);
    const KemmerField f = embed_spin0(phi);
    const Event e = rand_event();
    const FourVector s = charge_current(representation(Spin::spin0), f.psi(e), m);
    CHECK(s[0] == doctest::Approx(2 * energy).epsilon(1e-10));
    const FourVector direct = kg_charge_current(phi.value(e), phi.d1(e));
    for (int mu = 0; mu < 4; ++mu) CHECK(std::abs(s[mu] - direct[mu]) < 1e-10);
  }
  SUBCASE("negative-frequency mode has negative charge density") {
    const ScalarField phi = ScalarField::superposition({KgMode{{1, 0}, FourVector{-energy, -p, 0, 0}}}, m);
    const FourVector s = charge_current(representation(Spin::spin0), embed_spin0(phi).psi(rand_event()), m);
    CHECK(s[0] < 0.0);
  }
  SUBCASE("zero state") {
    const FourVector s = charge_current(representation(Spin::spin0), ComplexVector::Zero(5), m);
    for (int mu = 0; mu < 4; ++mu) CHECK(s[mu] == 0.0);
  }
}

TEST_CASE("observer current") {
  const DkpRep& rep = representation(Spin::spin1);
  SUBCASE("rest observer picks the energy density") {
    const ComplexVector psi = random_vec(10);
    const Tensor2 th = energy_momentum(rep, psi);
    const FourVector j = observer_current(th, rest_observer());
    CHECK(j[0] == th(0, 0));
  }
  SUBCASE("zero tensor maps to zero") {
    const FourVector j = observer_current(Tensor2{}, rest_observer());
    for (int mu = 0; mu < 4; ++mu) CHECK(j[mu] == 0.0);
  }
  SUBCASE("randomized future-causality audit") {
    std::uniform_real_distribution<double> u(-0.55, 0.55);
    for (int i = 0; i < 1000; ++i) {
      const ComplexVector psi = random_vec(10);
      const Observer obs = boosted_observer(Vec3{u(rng), u(rng), u(rng)});
      const FourVector j = observer_current(energy_momentum(rep, psi), obs);
      const double scale = psi.squaredNorm();
      CHECK(j[0] > -1e-10 * scale);
      CHECK(minkowski_dot(j, j) > -1e-10 * scale * scale);
    }
  }
  CHECK_THROWS_AS(make_observer(FourVector{1.0, 0.5, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(make_observer(FourVector{-1.0, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("ambiguity perturbation") {
  const AmbiguityTensor a = make_ambiguity({1.0, 0, 0, 0, 0, 0});  // A^{01} = 1 = -A^{10}
  SUBCASE("A^{10} = -1 shifts j^1 for the rest observer, energy density fixed") {
    const ComplexVector psi = random_vec(5);
    const Tensor2 th = energy_momentum(representation(Spin::spin0), psi);
    const Tensor2 pert = perturbed_tensor(th, a);
    const FourVector j0 = observer_current(th, rest_observer());
    const FourVector j1 = observer_current(pert, rest_observer());
    CHECK(j1[0] == j0[0]);
    CHECK(j1[1] - j0[1] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(pert.observer_density(rest_observer().a) == th.observer_density(rest_observer().a));
  }
  SUBCASE("a a A contraction vanishes for 1000 random observers") {
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    const AmbiguityTensor r = make_ambiguity({0.3, -0.8, 0.2, 1.4, -0.5, 0.7});
    for (int i = 0; i < 1000; ++i) {
      const Observer obs = boosted_observer(Vec3{u(rng), u(rng), u(rng)});
      CHECK(r.a.observer_density(obs.a) == 0.0);
    }
  }
  SUBCASE("zero perturbation is the identity") {
    const ComplexVector psi = random_vec(5);
    const Tensor2 th = energy_momentum(representation(Spin::spin0), psi);
    const Tensor2 same = perturbed_tensor(th, make_ambiguity({0, 0, 0, 0, 0, 0}));
    CHECK((same - th).max_abs() == 0.0);
  }
}

TEST_CASE("multi-particle current") {
  const DkpRep& r0 = representation(Spin::spin0);
  SUBCASE("product state density factorizes for the rest observer") {
    const ComplexVector a = random_vec(5), b = random_vec(5);
    const MultiCurrent mc = multi_current({Spin::spin0, Spin::spin0}, kronecker(a, b), rest_observer());
    CHECK(mc.density == doctest::Approx(a.squaredNorm() * b.squaredNorm()).epsilon(1e-12));
    CHECK(mc.per_particle[0][0] == mc.density);
    CHECK(mc.per_particle[1][0] == mc.density);
  }
  SUBCASE("plane-wave product: particle velocities factorize") {
    const double m = 1.0, p1 = 0.5, p2 = -0.3;
    const double e1 = std::sqrt(m * m + p1 * p1), e2 = std::sqrt(m * m + p2 * p2);
    const KemmerField f1 = embed_spin0(ScalarField::superposition({kg_mode({1, 0}, Vec3{p1, 0, 0}, m)}, m));
    const KemmerField f2 = embed_spin0(ScalarField::superposition({kg_mode({1, 0}, Vec3{0, p2, 0}, m)}, m));
    const ComplexVector psi = kronecker(f1.psi(Event{0.2, Vec3{0.1, 0, 0}}), f2.psi(Event{0.2, Vec3{0.5, 0.2, 0}}));
    const MultiCurrent mc = multi_current({Spin::spin0, Spin::spin0}, psi, rest_observer());
    CHECK(mc.per_particle[0][1] / mc.density == doctest::Approx(p1 / e1).epsilon(1e-10));
    CHECK(mc.per_particle[1][2] / mc.density == doctest::Approx(p2 / e2).epsilon(1e-10));
    CHECK(std::abs(mc.per_particle[0][2] / mc.density) < 1e-12);
  }
  SUBCASE("entangled state: density positive at random configurations") {
    std::normal_distribution<double> g(0, 1);
    for (int i = 0; i < 1000; ++i) {
      const ComplexVector psi = random_vec(25);
      const MultiCurrent mc = multi_current({Spin::spin0, Spin::spin0}, psi, rest_observer());
      CHECK(mc.density > -1e-10 * psi.squaredNorm());
      for (const auto& j : mc.per_particle) CHECK(minkowski_dot(j, j) > -1e-10 * psi.squaredNorm() * psi.squaredNorm());
    }
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(multi_current({Spin::spin0, Spin::spin0}, random_vec(10), rest_observer()), std::invalid_argument);
    (void)r0;
  }
}

TEST_CASE("nonrelativistic currents") {
  const double m = 1.2;
  SUBCASE("plane wave: j = k rho / m; with constant V: j = (k - eV) rho / m") {
    const NrField f = NrField::plane_waves(Spin::spin0, m, {{Complex{1, 0}, Vec3{0.4, 0, 0}}});
    const NrScalarSample s = f.scalar_sample(rand_event());
    const NrCurrent free_c = nr_current_spin0(s, m);
    CHECK(free_c.j.x == doctest::Approx(0.4 * free_c.rho / m).epsilon(1e-12));
    const NrCurrent coup = nr_current_spin0(s, m, Vec3{0.1, 0, 0}, 0.7);
    CHECK(coup.j.x == doctest::Approx((0.4 - 0.7 * 0.1) * coup.rho / m).epsilon(1e-12));
  }
  SUBCASE("real wavefunction carries no free current") {
    // standing wave at t = 0: psi = 2 cos(kx)
    const NrField f = NrField::plane_waves(Spin::spin0, m, {{Complex{1, 0}, Vec3{0.4, 0, 0}}, {Complex{1, 0}, Vec3{-0.4, 0, 0}}});
    const NrCurrent c = nr_current_spin0(f.scalar_sample(Event{0.0, Vec3{0.3, 0.2, 0}}), m);
    CHECK(std::abs(c.j.x) < 1e-14);
  }
  SUBCASE("spin-1 circular polarization: spin term equals grad(rho) x s / 2m") {
    const double inv = 1.0 / std::sqrt(2.0);
    const std::array<Complex, 3> circ{Complex{inv, 0}, Complex{0, inv}, Complex{0, 0}};
    // oracle: s = eps^dag S eps via explicit 3x3 contraction, (S_j)_{ik} = i eps_{ijk}
    Complex shat[3] = {};
    const int levi[3][3][3] = {{{0, 0, 0}, {0, 0, 1}, {0, -1, 0}}, {{0, 0, -1}, {0, 0, 0}, {1, 0, 0}}, {{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}}};
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) shat[j] += std::conj(circ[static_cast<std::size_t>(i)]) * Complex{0, 1} * static_cast<double>(levi[i][j][k]) * circ[static_cast<std::size_t>(k)];
    CHECK(std::abs(shat[0]) < 1e-15);
    CHECK(std::abs(shat[1]) < 1e-15);
    CHECK(std::abs(shat[2] - Complex{1, 0}) < 1e-15);

    const NrField f = NrField::gaussian(Spin::spin1, m, 0.8, Vec3{}, Vec3{}, circ);
    const Event e{0.0, Vec3{0.4, -0.3, 0.2}};
    const NrVectorSample vs = f.vector_sample(e);
    const NrCurrent c = nr_current_spin1(vs, m);
    // curl identity oracle: grad rho x z-hat / 2m (k = 0 so no convective part)
    const NrScalarSample ss = f.scalar_sample(e);
    Vec3 grad_rho{2 * std::real(std::conj(ss.value) * ss.grad[0]), 2 * std::real(std::conj(ss.value) * ss.grad[1]),
                  2 * std::real(std::conj(ss.value) * ss.grad[2])};
    const Vec3 want = cross(grad_rho, Vec3{0, 0, 1}) / (2 * m);
    CHECK((c.j - want).norm() < 1e-12 * std::max(1.0, want.norm()));
  }
  SUBCASE("uniform density: spin term vanishes") {
    const double inv = 1.0 / std::sqrt(2.0);
    const std::array<Complex, 3> circ{Complex{inv, 0}, Complex{0, inv}, Complex{0, 0}};
    const NrField f = NrField::plane_waves(Spin::spin1, m, {{Complex{1, 0}, Vec3{0.3, 0, 0}}}, circ);
    const NrCurrent c1 = nr_current_spin1(f.vector_sample(rand_event()), m);
    const NrField f0 = NrField::plane_waves(Spin::spin0, m, {{Complex{1, 0}, Vec3{0.3, 0, 0}}});
    const NrCurrent c0 = nr_current_spin0(f0.scalar_sample(rand_event()), m);
    CHECK(c1.j.x == doctest::Approx(c0.j.x).epsilon(1e-12));
    CHECK(std::abs(c1.j.y) < 1e-13);
    CHECK(std::abs(c1.j.z) < 1e-13);
  }
}

TEST_CASE("divergence audits on free fields") {
  SUBCASE("single-particle current: residual drops at second order") {
    const ScalarField phi = ScalarField::superposition(
        {kg_mode({1, 0.2}, Vec3{0.5, -0.1, 0}, 1.0), kg_mode({0.4, 0.3}, Vec3{-0.3, 0.2, 0.4}, 1.0)}, 1.0);
    const KemmerField f = embed_spin0(phi);
    const DkpRep& rep = representation(Spin::spin0);
    const Observer obs = boosted_observer(Vec3{0.2, 0.1, -0.3});
    CurrentFn j = [&](const Event& e) { return observer_current(energy_momentum(rep, f.psi(e)), obs); };
    const DivergenceReport r = divergence_audit(j, Event{0.3, Vec3{0.2, -0.5, 0.7}}, 0.05);
    REQUIRE(r.ratio.has_value());
    CHECK(*r.ratio > 3.5);
    CHECK(r.serialize().find("ratio") != std::string::npos);
  }
  SUBCASE("two-particle conservation law at second order") {
    const KemmerField fa = embed_spin0(ScalarField::superposition(
        {kg_mode({1, 0}, Vec3{0.4, 0, 0}, 1.0), kg_mode({0.5, 0.1}, Vec3{0, -0.3, 0.2}, 1.0)}, 1.0));
    const KemmerField fb = embed_spin0(ScalarField::superposition(
        {kg_mode({0.7, -0.2}, Vec3{-0.2, 0.3, 0}, 1.0), kg_mode({0.3, 0}, Vec3{0.1, 0, -0.4}, 1.0)}, 1.0));
    const KemmerFieldN fn = KemmerFieldN::product_sum({ProductTerm{{1, 0}, {fa, fb}}});
    auto ctx = std::make_shared<MultiContext>(fn.kinds(), rest_observer());
    MultiFn cur = [&](double t, const std::vector<Vec3>& xs) { return ctx->evaluate(fn.psi(t, xs)); };
    const DivergenceReport r = divergence_audit_multi(cur, 0.4, {Vec3{0.3, 0, 0}, Vec3{-0.2, 0.5, 0}}, 0.05);
    REQUIRE(r.ratio.has_value());
    CHECK(*r.ratio > 3.5);
  }
}

TEST_CASE("lorentz force density") {
  SUBCASE("zero field gives zero force") {
    const FourVector f = lorentz_force_density(Tensor2{}, FourVector{2, 1, 0, 0}, 0.7);
    for (int mu = 0; mu < 4; ++mu) CHECK(f[mu] == 0.0);
  }
  SUBCASE("constant electric field on a rest charge: f^1 = e E s^0") {
    // oracle by direct contraction: f^1 = e F^{1 mu} s_mu = e F^{10} s_0 = e E s^0
    const double ef = 0.4, e = 0.5, s0 = 2.0;
    const FourVector f = lorentz_force_density(constant_efield_tensor(ef), FourVector{s0, 0, 0, 0}, e);
    CHECK(f[1] == doctest::Approx(e * ef * s0).epsilon(1e-15));
    CHECK(f[0] == 0.0);
  }
  SUBCASE("force is orthogonal to the current in the antisymmetric sense") {
    const FourVector s{1.5, 0.3, -0.2, 0.7};
    const FourVector f = lorentz_force_density(constant_efield_tensor(0.8), s, 1.0);
    CHECK(std::abs(minkowski_dot(f, s)) < 1e-12);
  }
  SUBCASE("non-antisymmetric tensor is rejected") {
    Tensor2 bad;
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(lorentz_force_density(bad, FourVector{1, 0, 0, 0}, 1.0), std::invalid_argument);
  }
}
