#ifndef KEMMER_DKP_HPP
#define KEMMER_DKP_HPP

// Duffin-Kemmer-Petiau matrix representations.
//
// The 5x5 (spin-0) and 10x10 (spin-1) beta matrices are derived
// constructively from the physical-component orderings
//
//   spin-0:  psi = (d_0 phi, d_1 phi, d_2 phi, d_3 phi, m phi)^T
//   spin-1:  psi = (-E, B, m A, -m A^0)^T,  E = -grad A^0 - d_0 A,  B = curl A
//
// by writing the first-order wave equation  (i beta^mu d_mu - m) psi = 0  on
// the embedded vector and matching coefficients of the independent field
// derivatives.  Only the raised-index entries follow directly; covariant
// matrices are obtained by lowering with the metric.  In this convention the
// Schroedinger-form split of the wave equation holds with raised spatial
// indices, i.e.
//
//   i d_0 psi = (-i btu_k d_k + m beta_0) psi,    btu_k = beta^0 beta^k - beta^k beta^0
//   i beta^k beta_0^2 d_k psi = m (1 - beta_0^2) psi
//
// while the stored beta_tilde follows the covariant definition
// beta_tilde_i = beta_0 beta_i - beta_i beta_0 = -btu_i.

#include <array>
#include <iosfwd>
#include <vector>

#include "kemmer/algebra.hpp"

namespace kemmer {

enum class Spin { spin0, spin1 };

int spin_dimension(Spin kind);  // 5 or 10

struct DkpRep {
  Spin kind = Spin::spin0;
  int dim = 5;

  std::array<ComplexMatrix, 4> beta;        // covariant beta_mu
  ComplexMatrix eta0;                       // 2 beta_0^2 - 1
  std::array<ComplexMatrix, 3> beta_tilde;  // beta_0 beta_i - beta_i beta_0

  /// beta^mu = g^{mu mu} beta_mu.
  ComplexMatrix beta_upper(int mu) const { return kMetric[static_cast<std::size_t>(mu)] * beta[static_cast<std::size_t>(mu)]; }

  /// Gamma_{mu nu} = eta0 (beta_mu beta_nu + beta_nu beta_mu - g_{mu nu}),
  /// cached at construction. psi^dag Gamma_{mu nu} psi = Theta_{mu nu}.
  const ComplexMatrix& gamma_lower(int mu, int nu) const { return gammas[static_cast<std::size_t>(4 * mu + nu)]; }

  /// Raised-index sandwich: psi^dag theta_upper(mu,nu) psi = Theta^{mu nu}.
  const ComplexMatrix& theta_upper(int mu, int nu) const { return thetas[static_cast<std::size_t>(4 * mu + nu)]; }

  std::array<ComplexMatrix, 16> gammas;
  std::array<ComplexMatrix, 16> thetas;
};

/// Build the representation for the requested spin. Deterministic; the result
/// satisfies the trilinear commutation relation to round-off (see
/// verify_algebra) and the embedding identities exercised by the tests.
DkpRep build_representation(Spin kind);

/// Shared immutable instance (built once, safe for concurrent readers).
const DkpRep& representation(Spin kind);

struct AlgebraReport {
  double max_residual = 0.0;
  std::array<int, 3> worst_triple{0, 0, 0};
  bool pass = false;
};

/// Exhaustive check of
///   beta_mu beta_nu beta_la + beta_la beta_nu beta_mu
///     = beta_mu g_{nu la} + beta_la g_{nu mu}
/// over all 64 index triples. pass iff max residual < 1e-12.
AlgebraReport verify_algebra(const DkpRep& rep);

struct GammaOp {
  int mu = 0, nu = 0;
  ComplexMatrix matrix;  // Gamma_{mu nu}
};

GammaOp gamma_operator(const DkpRep& rep, int mu, int nu);

struct LiftedOp {
  int n = 1;      // particle count
  int alpha = 0;  // 0-based target particle
  ComplexMatrix matrix;
};

inline constexpr long kDefaultLiftCap = 10000;

/// Embed a single-particle operator into the N-fold tensor-product spin space:
/// identity x ... x op x ... x identity, acting on particle alpha (0-based).
/// Throws std::invalid_argument on dimension mismatch and std::length_error
/// when the product dimension exceeds cap.
LiftedOp lift_to_particle(const std::vector<const DkpRep*>& reps, int alpha, const ComplexMatrix& op,
                          long cap = kDefaultLiftCap);

/// Kronecker product, row-major factor ordering (first factor slowest).
ComplexMatrix kronecker(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector kronecker(const ComplexVector& a, const ComplexVector& b);

/// Plain-text dump of the representation matrices ("re+im i" entries).
void dump_matrices(const DkpRep& rep, std::ostream& os);

}  // namespace kemmer

#endif  // KEMMER_DKP_HPP
