#include <doctest.h>

#include <cmath>
#include <random>

#include "kemmer/guidance.hpp"

using namespace kemmer;

TEST_CASE("velocity field examples") {
  SUBCASE("embedded plane wave moves at p/E everywhere") {
    const double m = 1.0, p = 0.6;
    const double energy = std::sqrt(m * m + p * p);
    const KemmerField f = embed_spin0(ScalarField::superposition({kg_mode({1, 0}, Vec3{p, 0, 0}, m)}, m));
    GuidanceConfig cfg;
    cfg.node_eps = 1e-14;
    const Vec3 v = velocity_at(f, cfg, Event{0.7, Vec3{1.2, -0.3, 0.4}});
    CHECK(v.x == doctest::Approx(p / energy).epsilon(1e-12));
    CHECK(std::abs(v.y) < 1e-13);
  }
  SUBCASE("nr gaussian at rest has zero velocity at the center") {
    const NrField f = NrField::gaussian(Spin::spin0, 1.0, 0.8, Vec3{}, Vec3{});
    GuidanceConfig cfg;
    cfg.source = CurrentSource::nr_spin0;
    cfg.node_eps = 1e-14;
    const Vec3 v = velocity_at(f, cfg, Event{0.0, Vec3{}});
    CHECK(v.norm() < 1e-14);
  }
  SUBCASE("nr spin-1 circular polarization: pure spin-term circulation at k = 0") {
    const double inv = 1.0 / std::sqrt(2.0), m = 1.0, sigma = 0.8;
    const NrField f =
        NrField::gaussian(Spin::spin1, m, sigma, Vec3{}, Vec3{}, std::array<Complex, 3>{Complex{inv, 0}, Complex{0, inv}, Complex{0, 0}});
    GuidanceConfig cfg;
    cfg.source = CurrentSource::nr_spin1;
    cfg.node_eps = 1e-14;
    const Vec3 x{0.5, -0.2, 0.3};
    const Vec3 v = velocity_at(f, cfg, Event{0.0, Vec3{x}});
    // closed-form gaussian gradient: grad rho / rho = -x / sigma^2 at t = 0
    const Vec3 expected = cross(x * (-1.0 / (sigma * sigma)), Vec3{0, 0, 1}) / (2.0 * m);
    CHECK((v - expected).norm() < 1e-12);
  }
}

TEST_CASE("trajectory integration") {
  const double m = 1.0, p = 0.6;
  const double energy = std::sqrt(m * m + p * p);
  const KemmerField f = embed_spin0(ScalarField::superposition({kg_mode({1, 0}, Vec3{p, 0, 0}, m)}, m));
  GuidanceConfig cfg;
  cfg.dt = 0.002;
  cfg.node_eps = 1e-14;

  SUBCASE("plane wave follows a straight line over 1000 steps") {
    const Trajectory t = integrate(f, cfg, Vec3{0.1, 0.2, 0.3}, 0.0, 2.0);
    REQUIRE(t.status == Termination::completed);
    REQUIRE(t.samples.size() == 1001);
    double dev = 0.0;
    for (const auto& s : t.samples) {
      const Vec3 want{0.1 + (p / energy) * s.t, 0.2, 0.3};
      dev = std::max(dev, (s.pos[0] - want).norm());
    }
    CHECK(dev < 1e-8);
    CHECK(t.samples.back().t == 2.0);
  }

  SUBCASE("t1 == t0 yields a single completed sample") {
    const Trajectory t = integrate(f, cfg, Vec3{0.4, 0, 0}, 1.0, 1.0);
    CHECK(t.status == Termination::completed);
    CHECK(t.samples.size() == 1);
    CHECK(t.samples[0].t == 1.0);
    CHECK(t.samples[0].speed[0] == doctest::Approx(p / energy).epsilon(1e-12));
  }

  SUBCASE("starting on a density node aborts instead of crashing") {
    // standing wave: psi' ~ sin(kx) vanishes at x = 0
    const NrField sw = NrField::plane_waves(Spin::spin0, m, {{Complex{1, 0}, Vec3{0.5, 0, 0}}, {Complex{-1, 0}, Vec3{-0.5, 0, 0}}});
    GuidanceConfig ncfg;
    ncfg.source = CurrentSource::nr_spin0;
    ncfg.dt = 0.01;
    ncfg.node_eps = 1e-12;
    const Trajectory t = integrate(sw, ncfg, Vec3{0, 0.3, 0}, 0.0, 1.0);
    CHECK(t.status == Termination::node_abort);
    CHECK(t.samples.empty());
    // velocity_at surfaces the node as an error carrying the event
    try {
      velocity_at(sw, ncfg, Event{0.2, Vec3{0, 0.3, 0}});
      FAIL("expected NodeError");
    } catch (const NodeError& e) {
      CHECK(e.where.t == 0.2);
      CHECK(e.where.x.y == 0.3);
    }
  }

  SUBCASE("timestamps strictly increase and speeds match velocity norms") {
    const Trajectory t = integrate(f, cfg, Vec3{0, 0, 0}, 0.0, 0.1);
    for (std::size_t i = 1; i < t.samples.size(); ++i) CHECK(t.samples[i].t > t.samples[i - 1].t);
    for (const auto& s : t.samples) CHECK(s.speed[0] == s.vel[0].norm());
  }
}

TEST_CASE("many-particle integration") {
  const double m = 1.0, p1 = 0.5, p2 = -0.3;
  const double e1 = std::sqrt(m * m + p1 * p1), e2 = std::sqrt(m * m + p2 * p2);
  const KemmerField fa = embed_spin0(ScalarField::superposition({kg_mode({1, 0}, Vec3{p1, 0, 0}, m)}, m));
  const KemmerField fb = embed_spin0(ScalarField::superposition({kg_mode({1, 0}, Vec3{p2, 0, 0}, m)}, m));
  const KemmerFieldN fn = KemmerFieldN::product_sum({ProductTerm{{1, 0}, {fa, fb}}});
  GuidanceConfig cfg;
  cfg.dt = 0.01;
  cfg.node_eps = 1e-12;

  SUBCASE("plane-wave product: each particle keeps its own velocity") {
    const Trajectory t = integrate_many(fn, cfg, {Vec3{0, 0, 0}, Vec3{1, 0, 0}}, 0.0, 1.0);
    REQUIRE(t.status == Termination::completed);
    const auto& last = t.samples.back();
    CHECK(last.pos[0].x == doctest::Approx(p1 / e1 * 1.0).epsilon(1e-9));
    CHECK(last.pos[1].x == doctest::Approx(1.0 + p2 / e2 * 1.0).epsilon(1e-9));
  }

  SUBCASE("N = 1 product field reduces to single-particle integration") {
    const KemmerFieldN f1 = KemmerFieldN::product_sum({ProductTerm{{1, 0}, {fa}}});
    const Trajectory tn = integrate_many(f1, cfg, {Vec3{0.2, 0, 0}}, 0.0, 0.5);
    const Trajectory ts = integrate(fa, cfg, Vec3{0.2, 0, 0}, 0.0, 0.5);
    REQUIRE(tn.samples.size() == ts.samples.size());
    for (std::size_t i = 0; i < tn.samples.size(); ++i)
      CHECK((tn.samples[i].pos[0] - ts.samples[i].pos[0]).norm() < 1e-12);
  }

  SUBCASE("entangled state couples the particles") {
    const KemmerField fc = embed_spin0(ScalarField::superposition({kg_mode({1, 0}, Vec3{0, 0.4, 0}, m)}, m));
    const KemmerField fd = embed_spin0(ScalarField::superposition({kg_mode({1, 0}, Vec3{0, -0.2, 0.3}, m)}, m));
    const KemmerFieldN ent = KemmerFieldN::product_sum({ProductTerm{{1, 0}, {fa, fb}}, ProductTerm{{0.8, 0.1}, {fc, fd}}});
    const auto va = velocity_many(ent, cfg, 0.2, {Vec3{0.1, 0, 0}, Vec3{0.9, 0.2, 0}});
    const auto vb = velocity_many(ent, cfg, 0.2, {Vec3{0.1, 0, 0}, Vec3{-0.4, 1.0, 0.5}});
    CHECK((va[0] - vb[0]).norm() > 1e-6);  // particle-1 velocity depends on particle-2 position
  }
}

TEST_CASE("ensemble sampling") {
  SUBCASE("n = 1 returns one position inside the box") {
    const Ensemble e = sample_ensemble([](const Vec3&) { return 1.0; }, Box{Vec3{-1, 2, 0}, Vec3{1, 3, 0}}, 1, 99);
    REQUIRE(e.positions.size() == 1);
    CHECK(e.positions[0].x >= -1.0);
    CHECK(e.positions[0].x <= 1.0);
    CHECK(e.positions[0].y >= 2.0);
    CHECK(e.positions[0].y <= 3.0);
    CHECK(e.positions[0].z == 0.0);
  }
  SUBCASE("same seed reproduces the ensemble bitwise") {
    auto rho = [](const Vec3& x) { return std::exp(-x.norm2()); };
    const Ensemble a = sample_ensemble(rho, Box{Vec3{-2, -2, 0}, Vec3{2, 2, 0}}, 500, 1234);
    const Ensemble b = sample_ensemble(rho, Box{Vec3{-2, -2, 0}, Vec3{2, 2, 0}}, 500, 1234);
    REQUIRE(a.positions.size() == b.positions.size());
    for (std::size_t i = 0; i < a.positions.size(); ++i) {
      CHECK(a.positions[i].x == b.positions[i].x);
      CHECK(a.positions[i].y == b.positions[i].y);
    }
  }
  SUBCASE("degenerate density is rejected") {
    CHECK_THROWS_AS(sample_ensemble([](const Vec3&) { return 0.0; }, Box{Vec3{0, 0, 0}, Vec3{1, 1, 1}}, 10, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("causality audit") {
  const double m = 1.0, p = 0.6;
  const KemmerField f = embed_spin0(ScalarField::superposition({kg_mode({1, 0}, Vec3{p, 0, 0}, m)}, m));
  GuidanceConfig cfg;
  cfg.dt = 0.01;
  cfg.node_eps = 1e-14;
  const Trajectory t = integrate(f, cfg, Vec3{}, 0.0, 1.0);

  SUBCASE("plane wave: max speed is p/E") {
    const CausalityReport r = causality_audit(t, CurrentSource::kemmer_energy_momentum);
    CHECK(r.applicable);
    CHECK(r.pass);
    CHECK(r.max_speed == doctest::Approx(p / std::sqrt(m * m + p * p)).epsilon(1e-12));
    CHECK(r.over_light_count == 0);
  }
  SUBCASE("superposition of timelike modes stays subluminal") {
    const KemmerField sup = embed_spin0(ScalarField::superposition(
        {kg_mode({1, 0}, Vec3{0.7, 0, 0}, m), kg_mode({0.5, 0.4}, Vec3{-0.5, 0.3, 0}, m)}, m));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    double max_speed = 0.0;
    GuidanceConfig c2;
    c2.node_eps = 1e-12;
    for (int i = 0; i < 1000; ++i) {
      try {
        const Vec3 v = velocity_at(sup, c2, Event{u(rng), Vec3{u(rng), u(rng), u(rng)}});
        max_speed = std::max(max_speed, v.norm());
      } catch (const NodeError&) {
      }
    }
    CHECK(max_speed <= 1.0 + 1e-9);
  }
  SUBCASE("nonrelativistic trajectories are flagged not applicable") {
    const CausalityReport r = causality_audit(t, CurrentSource::nr_spin0);
    CHECK_FALSE(r.applicable);
  }
}

TEST_CASE("deterministic parallel ensembles") {
  const NrField f = NrField::gaussian(Spin::spin0, 1.0, 1.0, Vec3{}, Vec3{0.4, 0, 0});
  GuidanceConfig cfg;
  cfg.source = CurrentSource::nr_spin0;
  cfg.dt = 0.02;
  cfg.node_eps = 1e-15;
  const FlowFn flow = make_flow(f, cfg);
  std::vector<std::vector<Vec3>> starts;
  for (int i = 0; i < 16; ++i) starts.push_back({Vec3{-1.5 + 0.2 * i, 0, 0}});
  const auto a = integrate_ensemble(flow, 1, starts, 0.0, 1.0, cfg, 2);
  const auto b = integrate_ensemble(flow, 1, starts, 0.0, 1.0, cfg, 1);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].samples.size() == b[i].samples.size());
    for (std::size_t s = 0; s < a[i].samples.size(); ++s)
      CHECK((a[i].samples[s].pos[0] - b[i].samples[s].pos[0]).norm() == 0.0);
  }
}
