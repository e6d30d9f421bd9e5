#ifndef KEMMER_CURRENTS_HPP
#define KEMMER_CURRENTS_HPP

// Energy-momentum tensors, charge currents, observer contractions, the
// ambiguity demonstrator, N-particle currents and finite-difference
// conservation audits.
//
// Bilinear evaluators assert that imaginary parts are at round-off level
// (<= 1e-10 relative) before discarding them; larger imaginary parts raise a
// consistency error since the sandwiched operators are provably Hermitian.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kemmer/algebra.hpp"
#include "kemmer/dkp.hpp"
#include "kemmer/fields.hpp"

namespace kemmer {

// ---------------------------------------------------------------------------
// Observers

struct Observer {
  FourVector a{1.0, 0.0, 0.0, 0.0};
};

/// Validates unit norm (within 1e-12) and future orientation.
Observer make_observer(const FourVector& a);
Observer rest_observer();
/// gamma * (1, beta); |beta| < 1.
Observer boosted_observer(const Vec3& beta);

// ---------------------------------------------------------------------------
// Single-particle currents

/// Theta^{mu nu} = psibar (beta^mu beta^nu + beta^nu beta^mu - g^{mu nu}) psi.
Tensor2 energy_momentum(const DkpRep& rep, const ComplexVector& psi);

/// s^mu = psibar beta^mu psi / m.
FourVector charge_current(const DkpRep& rep, const ComplexVector& psi, double mass);

/// j^mu = Theta^{mu nu} a_nu.
FourVector observer_current(const Tensor2& theta, const Observer& obs);

struct AmbiguityTensor {
  Tensor2 a;  // exactly antisymmetric
};

/// Builds A from the six independent components A^{01}, A^{02}, A^{03},
/// A^{12}, A^{13}, A^{23}; the mirror entries are stored as exact negations.
AmbiguityTensor make_ambiguity(const std::array<double, 6>& upper);

/// Theta + A.
Tensor2 perturbed_tensor(const Tensor2& theta, const AmbiguityTensor& a);

// ---------------------------------------------------------------------------
// N-particle currents

struct MultiCurrent {
  double density = 0.0;                  // j^{0...0}
  std::vector<FourVector> per_particle;  // per-alpha four-vector, [0] == density
};

/// Lifted current operators for a particle list and observer, built once and
/// reused (trajectory integration evaluates these at every step).
class MultiContext {
 public:
  MultiContext(std::vector<Spin> kinds, const Observer& obs, long cap = kDefaultLiftCap);

  long dim() const { return dim_; }
  int particles() const { return static_cast<int>(kinds_.size()); }
  const Observer& observer() const { return obs_; }

  MultiCurrent evaluate(const ComplexVector& psi) const;

 private:
  std::vector<Spin> kinds_;
  Observer obs_;
  long dim_ = 1;
  ComplexMatrix density_op_;
  std::vector<std::array<ComplexMatrix, 4>> current_ops_;  // [alpha][mu]
};

MultiCurrent multi_current(const std::vector<Spin>& kinds, const ComplexVector& psi, const Observer& obs);

// ---------------------------------------------------------------------------
// Nonrelativistic currents

struct NrCurrent {
  double rho = 0.0;
  Vec3 j{};
};

NrCurrent nr_current_spin0(const NrScalarSample& s, double mass);
NrCurrent nr_current_spin0(const NrScalarSample& s, double mass, const Vec3& v_pot, double e);
NrCurrent nr_current_spin1(const NrVectorSample& s, double mass);
NrCurrent nr_current_spin1(const NrVectorSample& s, double mass, const Vec3& v_pot, double e);

/// Phi^dag S Phi with (S_j)_{ik} = i eps_{ijk}; exactly real by pairwise
/// accumulation.
Vec3 spin_density(const NrVectorSample& s);

// ---------------------------------------------------------------------------
// Reduction formulas (direct evaluation on the physical components; these are
// the second route for the equivalence checks and the grid audits)

Tensor2 kg_energy_momentum(const Complex& phi, const std::array<Complex, 4>& dphi, double mass);
FourVector kg_charge_current(const Complex& phi, const std::array<Complex, 4>& dphi);

/// Minimally coupled variants; dphi holds plain derivatives d_mu phi and the
/// covariant derivative is formed internally as D_mu = d_mu + i e V_mu.
Tensor2 kg_energy_momentum_coupled(const Complex& phi, const std::array<Complex, 4>& dphi, double mass,
                                   const FourVector& v_pot, double e);
FourVector kg_charge_current_coupled(const Complex& phi, const std::array<Complex, 4>& dphi, const FourVector& v_pot,
                                     double e);

Tensor2 proca_energy_momentum(const std::array<Complex, 4>& a, const std::array<std::array<Complex, 4>, 4>& da,
                              double mass);
FourVector proca_charge_current(const std::array<Complex, 4>& a, const std::array<std::array<Complex, 4>, 4>& da);

// ---------------------------------------------------------------------------
// Lorentz force and divergence audits

/// f^nu = e F^{nu mu} s_mu. Throws if F is not antisymmetric (1e-12 relative).
FourVector lorentz_force_density(const Tensor2& f, const FourVector& s, double e);

/// Field tensor of a constant electric field along x: F^{10} = efield.
Tensor2 constant_efield_tensor(double efield);

struct DivergenceReport {
  Event event;
  double h = 0.0;
  std::vector<double> residual;                      // per component (or per particle)
  std::optional<std::vector<double>> residual_half;  // same quantities at h/2
  std::optional<double> ratio;                       // worst(h) / worst(h/2)

  double worst() const;
  double worst_half() const;
  std::string serialize() const;
};

using CurrentFn = std::function<FourVector(const Event&)>;
using TensorFn = std::function<Tensor2(const Event&)>;
using MultiFn = std::function<MultiCurrent(double, const std::vector<Vec3>&)>;

/// Centered-difference d_mu j^mu at steps h and h/2 (single scalar residual).
DivergenceReport divergence_audit(const CurrentFn& current, const Event& e, double h, bool refine = true);

/// Multi-particle conservation law: d_t j^{0..0} + sum_alpha d_i j^{0..i..0}.
DivergenceReport divergence_audit_multi(const MultiFn& current, double t, const std::vector<Vec3>& xs, double h,
                                        bool refine = true);

/// d_mu Theta^{mu nu} (four components) by centered differences.
FourVector theta_divergence(const TensorFn& theta, const Event& e, double h);

/// Residual of d_mu Theta^{mu nu} = e F^{nu mu} s_mu at a single step.
DivergenceReport coupled_divergence_audit(const TensorFn& theta, const CurrentFn& s, const Tensor2& f, double e_charge,
                                          const Event& e, double h);

}  // namespace kemmer

#endif  // KEMMER_CURRENTS_HPP
