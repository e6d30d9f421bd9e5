#include <doctest.h>

#include <random>
#include <sstream>

#include "kemmer/dkp.hpp"

using namespace kemmer;

namespace {

ComplexVector random_vec(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0, 1);
  ComplexVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex{g(rng), g(rng)};
  return v;
}

}  // namespace

TEST_CASE("representation dimensions") {
  CHECK(build_representation(Spin::spin0).dim == 5);
  CHECK(build_representation(Spin::spin1).dim == 10);
  CHECK(spin_dimension(Spin::spin0) == 5);
  CHECK(spin_dimension(Spin::spin1) == 10);
}

TEST_CASE("trilinear algebra holds exhaustively") {
  for (Spin s : {Spin::spin0, Spin::spin1}) {
    const AlgebraReport r = verify_algebra(representation(s));
    CHECK(r.pass);
    CHECK(r.max_residual < 1e-12);
  }
}

TEST_CASE("beta0 cubes to itself and eta0 squares to one") {
  for (Spin s : {Spin::spin0, Spin::spin1}) {
    const DkpRep& r = representation(s);
    const ComplexMatrix id = ComplexMatrix::Identity(r.dim, r.dim);
    CHECK((r.beta[0] * r.beta[0] * r.beta[0] - r.beta[0]).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((r.eta0 * r.eta0 - id).cwiseAbs().maxCoeff() == 0.0);
    CHECK((r.eta0 - (2.0 * r.beta[0] * r.beta[0] - id)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("a corrupted representation is flagged with the worst triple") {
  DkpRep bad = build_representation(Spin::spin0);
  bad.beta[0] *= 2.0;
  const AlgebraReport r = verify_algebra(bad);
  CHECK_FALSE(r.pass);
  CHECK(r.worst_triple == std::array<int, 3>{0, 0, 0});
}

TEST_CASE("gamma operator") {
  std::mt19937_64 rng(17);
  for (Spin s : {Spin::spin0, Spin::spin1}) {
    const DkpRep& r = representation(s);
    const ComplexMatrix id = ComplexMatrix::Identity(r.dim, r.dim);

    // Gamma_00 = identity, so psi^dag Gamma_00 psi = psi^dag psi.
    CHECK((gamma_operator(r, 0, 0).matrix - id).cwiseAbs().maxCoeff() == 0.0);

    // symmetric in the index pair, exactly
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = 0; nu < 4; ++nu)
        CHECK((r.gamma_lower(mu, nu) - r.gamma_lower(nu, mu)).cwiseAbs().maxCoeff() == 0.0);

    // psi^dag Gamma_{0i} psi equals the commutator form psi^dag btilde_i psi,
    // with btilde assembled independently here.
    for (int i = 0; i < 3; ++i) {
      const ComplexMatrix bt = r.beta[0] * r.beta[static_cast<std::size_t>(i + 1)] -
                               r.beta[static_cast<std::size_t>(i + 1)] * r.beta[0];
      for (int trial = 0; trial < 20; ++trial) {
        const ComplexVector psi = random_vec(rng, r.dim);
        const Complex a = psi.dot(r.gamma_lower(0, i + 1) * psi);
        const Complex b = psi.dot(bt * psi);
        CHECK(std::abs(a - b) < 1e-12 * psi.squaredNorm());
      }
    }

    CHECK_THROWS_AS(gamma_operator(r, 4, 0), std::invalid_argument);
  }
}

TEST_CASE("lift to a tensor-product particle space") {
  const DkpRep& r0 = representation(Spin::spin0);
  std::mt19937_64 rng(23);

  SUBCASE("N = 1 lift is the operator itself") {
    const LiftedOp l = lift_to_particle({&r0}, 0, r0.beta[0]);
    CHECK((l.matrix - r0.beta[0]).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("acting on a product state changes only the target factor") {
    const ComplexVector a = random_vec(rng, 5), b = random_vec(rng, 5);
    const LiftedOp l = lift_to_particle({&r0, &r0}, 0, r0.beta[0]);
    const ComplexVector got = l.matrix * kronecker(a, b);
    const ComplexVector want = kronecker(ComplexVector(r0.beta[0] * a), b);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-14 * want.cwiseAbs().maxCoeff());
  }

  SUBCASE("lifts onto different particles commute") {
    const LiftedOp l1 = lift_to_particle({&r0, &r0}, 0, r0.beta[1]);
    const LiftedOp l2 = lift_to_particle({&r0, &r0}, 1, r0.beta[2]);
    const ComplexMatrix comm = l1.matrix * l2.matrix - l2.matrix * l1.matrix;
    CHECK(comm.cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("dimension mismatch and cap errors") {
    const DkpRep& r1 = representation(Spin::spin1);
    CHECK_THROWS_AS(lift_to_particle({&r0, &r0}, 0, r1.beta[0]), std::invalid_argument);
    CHECK_THROWS_AS(lift_to_particle({&r0, &r0}, 2, r0.beta[0]), std::invalid_argument);
    CHECK_THROWS_AS(lift_to_particle({&r1, &r1, &r1}, 0, r1.beta[0], 100), std::length_error);
  }
}

TEST_CASE("matrix dump emits re+im tables") {
  std::ostringstream os;
  dump_matrices(representation(Spin::spin0), os);
  const std::string s = os.str();
  CHECK(s.find("beta_0 (5x5)") != std::string::npos);
  CHECK(s.find("beta_tilde_3") != std::string::npos);
  CHECK(s.find("i") != std::string::npos);
}
