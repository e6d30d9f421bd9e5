#include "kemmer/dkp.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace kemmer {

namespace {

const Complex kI{0.0, 1.0};

double levi_civita(int i, int j, int k) {
  // 1-based spatial indices.
  if (i == j || j == k || i == k) return 0.0;
  if ((i == 1 && j == 2 && k == 3) || (i == 2 && j == 3 && k == 1) || (i == 3 && j == 1 && k == 2)) return 1.0;
  return -1.0;
}

// Raised-index beta^mu for the spin-0 ordering psi = (d_mu phi, m phi)^T.
// Coefficient matching of (i beta^mu d_mu - m) psi = 0 against
//   m psi_rho = d_rho (m phi)            (rows 0..3)
//   m psi_4   = -g^{mu nu} d_mu d_nu phi (row 4, Klein-Gordon)
// forces (beta^mu)_{rho,4} = -i delta^mu_rho and (beta^mu)_{4,nu} = i g^{mu nu}.
std::array<ComplexMatrix, 4> build_beta_upper_spin0() {
  std::array<ComplexMatrix, 4> b;
  for (int mu = 0; mu < 4; ++mu) {
    b[static_cast<std::size_t>(mu)] = ComplexMatrix::Zero(5, 5);
    b[static_cast<std::size_t>(mu)](mu, 4) = -kI;
    b[static_cast<std::size_t>(mu)](4, mu) = kI * kMetric[static_cast<std::size_t>(mu)];
  }
  return b;
}

// Raised-index beta^mu for the spin-1 ordering
//   psi = (-E, B, m A, -m A^0)^T
// with component blocks E: 0..2, B: 3..5, A: 6..8, A0: 9. The matched
// first-order system is the Proca pair G^{mu nu} = d^mu A^nu - d^nu A^mu,
// d_mu G^{mu nu} = -m^2 A^nu written on the blocks:
//   m psi^E_j  = d_0 psi^A_j - d_j psi^A0
//   m psi^B_j  = eps_{jkl} d_k psi^A_l
//   m psi^A_j  = -d_0 psi^E_j - eps_{jkl} d_k psi^B_l
//   m psi^A0   = -d_k psi^E_k
std::array<ComplexMatrix, 4> build_beta_upper_spin1() {
  std::array<ComplexMatrix, 4> b;
  for (auto& m : b) m = ComplexMatrix::Zero(10, 10);

  for (int j = 0; j < 3; ++j) {
    b[0](j, 6 + j) = -kI;     // E-row <- d_0 A
    b[0](6 + j, j) = kI;      // A-row <- d_0 E
  }
  for (int k = 1; k <= 3; ++k) {
    auto& bk = b[static_cast<std::size_t>(k)];
    bk(k - 1, 9) = kI;        // E-row <- d_k A0
    bk(9, k - 1) = kI;        // A0-row <- d_k E
    for (int j = 1; j <= 3; ++j) {
      for (int l = 1; l <= 3; ++l) {
        const double eps = levi_civita(j, k, l);
        if (eps == 0.0) continue;
        bk(2 + j, 5 + l) = -kI * eps;  // B-row <- curl A
        bk(5 + j, 2 + l) = kI * eps;   // A-row <- curl B
      }
    }
  }
  return b;
}

DkpRep assemble(Spin kind, const std::array<ComplexMatrix, 4>& beta_upper) {
  DkpRep rep;
  rep.kind = kind;
  rep.dim = static_cast<int>(beta_upper[0].rows());
  for (int mu = 0; mu < 4; ++mu)
    rep.beta[static_cast<std::size_t>(mu)] = kMetric[static_cast<std::size_t>(mu)] * beta_upper[static_cast<std::size_t>(mu)];

  const ComplexMatrix id = ComplexMatrix::Identity(rep.dim, rep.dim);
  rep.eta0 = 2.0 * rep.beta[0] * rep.beta[0] - id;
  for (int i = 0; i < 3; ++i) {
    const auto& bi = rep.beta[static_cast<std::size_t>(i + 1)];
    rep.beta_tilde[static_cast<std::size_t>(i)] = rep.beta[0] * bi - bi * rep.beta[0];
  }
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = 0; nu < 4; ++nu) {
      const auto& bm = rep.beta[static_cast<std::size_t>(mu)];
      const auto& bn = rep.beta[static_cast<std::size_t>(nu)];
      const double g = (mu == nu) ? kMetric[static_cast<std::size_t>(mu)] : 0.0;
      rep.gammas[static_cast<std::size_t>(4 * mu + nu)] = rep.eta0 * (bm * bn + bn * bm - g * id);
      rep.thetas[static_cast<std::size_t>(4 * mu + nu)] =
          kMetric[static_cast<std::size_t>(mu)] * kMetric[static_cast<std::size_t>(nu)] * rep.gammas[static_cast<std::size_t>(4 * mu + nu)];
    }
  }
  return rep;
}

}  // namespace

int spin_dimension(Spin kind) { return kind == Spin::spin0 ? 5 : 10; }

DkpRep build_representation(Spin kind) {
  return assemble(kind, kind == Spin::spin0 ? build_beta_upper_spin0() : build_beta_upper_spin1());
}

const DkpRep& representation(Spin kind) {
  static const DkpRep rep0 = build_representation(Spin::spin0);
  static const DkpRep rep1 = build_representation(Spin::spin1);
  return kind == Spin::spin0 ? rep0 : rep1;
}

AlgebraReport verify_algebra(const DkpRep& rep) {
  AlgebraReport report;
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = 0; nu < 4; ++nu) {
      for (int la = 0; la < 4; ++la) {
        const auto& bm = rep.beta[static_cast<std::size_t>(mu)];
        const auto& bn = rep.beta[static_cast<std::size_t>(nu)];
        const auto& bl = rep.beta[static_cast<std::size_t>(la)];
        const double g_nl = (nu == la) ? kMetric[static_cast<std::size_t>(nu)] : 0.0;
        const double g_nm = (nu == mu) ? kMetric[static_cast<std::size_t>(nu)] : 0.0;
        const ComplexMatrix lhs = bm * bn * bl + bl * bn * bm;
        const ComplexMatrix rhs = g_nl * bm + g_nm * bl;
        const double res = (lhs - rhs).cwiseAbs().maxCoeff();
        if (res > report.max_residual) {
          report.max_residual = res;
          report.worst_triple = {mu, nu, la};
        }
      }
    }
  }
  report.pass = report.max_residual < 1e-12;
  return report;
}

GammaOp gamma_operator(const DkpRep& rep, int mu, int nu) {
  if (mu < 0 || mu > 3 || nu < 0 || nu > 3) throw std::invalid_argument("gamma_operator: indices must be in 0..3");
  return GammaOp{mu, nu, rep.gamma_lower(mu, nu)};
}

ComplexMatrix kronecker(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

ComplexVector kronecker(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector r(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) r.segment(i * b.size(), b.size()) = a(i) * b;
  return r;
}

LiftedOp lift_to_particle(const std::vector<const DkpRep*>& reps, int alpha, const ComplexMatrix& op, long cap) {
  const int n = static_cast<int>(reps.size());
  if (n < 1) throw std::invalid_argument("lift_to_particle: empty representation list");
  if (alpha < 0 || alpha >= n) throw std::invalid_argument("lift_to_particle: particle index out of range");
  if (op.rows() != op.cols() || op.rows() != reps[static_cast<std::size_t>(alpha)]->dim)
    throw std::invalid_argument("lift_to_particle: operator dimension does not match the target factor");

  long total = 1;
  for (const auto* r : reps) {
    total *= r->dim;
    if (total > cap) throw std::length_error("lift_to_particle: tensor-product dimension exceeds cap");
  }

  ComplexMatrix acc = ComplexMatrix::Identity(1, 1);
  for (int f = 0; f < n; ++f) {
    const int d = reps[static_cast<std::size_t>(f)]->dim;
    acc = kronecker(acc, f == alpha ? op : ComplexMatrix(ComplexMatrix::Identity(d, d)));
  }
  return LiftedOp{n, alpha, std::move(acc)};
}

void dump_matrices(const DkpRep& rep, std::ostream& os) {
  auto dump = [&](const char* name, const ComplexMatrix& m) {
    os << name << " (" << m.rows() << "x" << m.cols() << ")\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double re = m(i, j).real() + 0.0;  // flush negative zeros
        const double im = m(i, j).imag() + 0.0;
        os << re << (im < 0 ? "" : "+") << im << "i" << (j + 1 < m.cols() ? "\t" : "\n");
      }
    }
    os << "\n";
  };
  dump("beta_0", rep.beta[0]);
  dump("beta_1", rep.beta[1]);
  dump("beta_2", rep.beta[2]);
  dump("beta_3", rep.beta[3]);
  dump("eta_0", rep.eta0);
  dump("beta_tilde_1", rep.beta_tilde[0]);
  dump("beta_tilde_2", rep.beta_tilde[1]);
  dump("beta_tilde_3", rep.beta_tilde[2]);
}

}  // namespace kemmer
