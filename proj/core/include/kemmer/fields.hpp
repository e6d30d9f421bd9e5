#ifndef KEMMER_FIELDS_HPP
#define KEMMER_FIELDS_HPP

// Catalog of exact analytic wavefunctions and their embeddings into the
// first-order Kemmer form. All analytic evaluators supply closed-form
// derivatives; residual helpers check the defining equations directly.

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "kemmer/algebra.hpp"
#include "kemmer/dkp.hpp"

namespace kemmer {

struct Event {
  double t = 0.0;
  Vec3 x{};
};

// ---------------------------------------------------------------------------
// Klein-Gordon superpositions

struct KgMode {
  Complex amplitude{1.0, 0.0};
  FourVector p;  // four-momentum, p.p = m^2 (either frequency sign)
};

/// Positive-frequency mode with E = +sqrt(k^2 + m^2).
KgMode kg_mode(Complex amplitude, const Vec3& k, double mass);

class ScalarField {
 public:
  /// phi(x) = sum_k A_k exp(-i p_k . x). Throws std::invalid_argument naming
  /// the offending mode index if a mode is off shell.
  static ScalarField superposition(std::vector<KgMode> modes, double mass);

  double mass() const { return mass_; }
  const std::vector<KgMode>& modes() const { return modes_; }

  Complex value(const Event& e) const;
  std::array<Complex, 4> d1(const Event& e) const;                  // d_mu phi
  std::array<std::array<Complex, 4>, 4> d2(const Event& e) const;   // d_mu d_nu phi

  /// |(box + m^2) phi| / (m^2 |phi| + sum |A_k| m^2), evaluated analytically.
  double kg_residual(const Event& e) const;

 private:
  std::vector<KgMode> modes_;
  double mass_ = 1.0;
};

// ---------------------------------------------------------------------------
// Proca superpositions

struct ProcaMode {
  Complex amplitude{1.0, 0.0};
  FourVector p;
  std::array<Complex, 4> eps{};  // polarization, p.eps = 0
};

/// Transverse/longitudinal helper: completes eps^0 from the spatial part so
/// that p.eps = 0 for a positive-frequency mode.
ProcaMode proca_mode(Complex amplitude, const Vec3& k, double mass, const std::array<Complex, 3>& eps_spatial);

class ProcaField {
 public:
  /// A^mu(x) = sum_k A_k eps_k^mu exp(-i p_k . x); rejects off-shell modes and
  /// modes with p.eps != 0.
  static ProcaField superposition(std::vector<ProcaMode> modes, double mass);

  double mass() const { return mass_; }
  const std::vector<ProcaMode>& modes() const { return modes_; }

  std::array<Complex, 4> value(const Event& e) const;                  // A^mu
  std::array<std::array<Complex, 4>, 4> d1(const Event& e) const;      // d1[nu][mu] = d_nu A^mu
  std::array<std::array<std::array<Complex, 4>, 4>, 4> d2(const Event& e) const;  // d2[la][nu][mu]

  double lorenz_residual(const Event& e) const;      // |d_mu A^mu| (relative)
  double kg_residual(const Event& e) const;          // per-component (box+m^2)A
  /// Residual of the component relations div E = -m^2 A0, B = curl A,
  /// d0 E = curl B + m^2 A, d0 B = -curl E (relative, worst component).
  double relations_residual(const Event& e) const;

 private:
  std::vector<ProcaMode> modes_;
  double mass_ = 1.0;
};

// ---------------------------------------------------------------------------
// Nonrelativistic fields (free Schroedinger; spin-1 fields are spin
// eigenstates Phi = psi' * eps with constant eps)

struct NrMode {
  Complex amplitude{1.0, 0.0};
  Vec3 k;
};

struct NrScalarSample {
  Complex value{};
  std::array<Complex, 3> grad{};
  Complex dt{};
  Complex laplacian{};
};

struct NrVectorSample {
  std::array<Complex, 3> value{};
  std::array<std::array<Complex, 3>, 3> grad{};  // grad[i][c] = d_i Phi_c
  std::array<Complex, 3> dt{};
};

class NrField {
 public:
  /// Freely spreading Gaussian packet (closed-form complex width), an exact
  /// solution of the free Schroedinger equation.
  static NrField gaussian(Spin kind, double mass, double sigma, const Vec3& center, const Vec3& k,
                          std::optional<std::array<Complex, 3>> eps = std::nullopt);

  /// Two Gaussian packets centred at y = +/- separation/2, both moving with
  /// the given forward speed along x.
  static NrField two_slit(Spin kind, double mass, double separation, double sigma, double speed,
                          std::optional<std::array<Complex, 3>> eps = std::nullopt);

  /// Plane-wave superposition, omega_k = k^2 / 2m.
  static NrField plane_waves(Spin kind, double mass, std::vector<NrMode> modes,
                             std::optional<std::array<Complex, 3>> eps = std::nullopt);

  Spin kind() const { return kind_; }
  double mass() const { return mass_; }
  const std::array<Complex, 3>& polarization() const { return eps_; }

  NrScalarSample scalar_sample(const Event& e) const;  // psi'
  NrVectorSample vector_sample(const Event& e) const;  // Phi = psi' eps (spin1)

  /// |i dt + lap/2m| psi' relative to m|psi'| + |lap|/2m.
  double schrodinger_residual(const Event& e) const;

 private:
  enum class Shape { gaussian, two_slit, plane_waves };
  Shape shape_ = Shape::gaussian;
  Spin kind_ = Spin::spin0;
  double mass_ = 1.0;
  double sigma_ = 1.0;
  double separation_ = 0.0;
  Vec3 center_{};
  Vec3 k_{};
  std::vector<NrMode> modes_;
  std::array<Complex, 3> eps_{Complex{1, 0}, Complex{0, 0}, Complex{0, 0}};
};

// ---------------------------------------------------------------------------
// Kemmer fields

enum class Provenance { embedded_scalar, embedded_proca, grid };
enum class DerivMethod { analytic, centered_fd };

struct KemmerSample {
  ComplexVector psi;
  std::array<ComplexVector, 4> dpsi;  // d_mu psi
  DerivMethod method = DerivMethod::analytic;
};

class GridField;  // grid.hpp

class KemmerField {
 public:
  Spin kind() const { return kind_; }
  Provenance provenance() const { return prov_; }
  double mass() const { return mass_; }

  ComplexVector psi(const Event& e) const;
  KemmerSample sample(const Event& e) const;
  bool in_domain(const Event& e, double margin_nodes = 0.0) const;

  const ScalarField* scalar() const { return scalar_ ? &*scalar_ : nullptr; }
  const ProcaField* proca() const { return proca_ ? &*proca_ : nullptr; }
  const GridField* grid() const { return grid_.get(); }

  friend KemmerField embed_spin0(ScalarField phi);
  friend KemmerField embed_spin1(ProcaField a);
  friend KemmerField grid_kemmer_field(std::shared_ptr<const GridField> g);

 private:
  Spin kind_ = Spin::spin0;
  Provenance prov_ = Provenance::embedded_scalar;
  double mass_ = 1.0;
  std::optional<ScalarField> scalar_;
  std::optional<ProcaField> proca_;
  std::shared_ptr<const GridField> grid_;
};

/// psi = (d_mu phi, m phi)^T.
KemmerField embed_spin0(ScalarField phi);

/// psi = (-E, B, m A, -m A^0)^T with E, B computed analytically.
KemmerField embed_spin1(ProcaField a);

/// Kemmer view of a 1+1D grid solution, psi = (D_mu phi, m phi)^T with
/// centered finite differences.
KemmerField grid_kemmer_field(std::shared_ptr<const GridField> g);

// ---------------------------------------------------------------------------
// N-particle wavefunctions: sums of tensor products of single-particle fields
// evaluated at equal times, psi(t, x_1..x_N) in the M^N-dimensional spin space.

struct ProductTerm {
  Complex coeff{1.0, 0.0};
  std::vector<KemmerField> factors;
};

class KemmerFieldN {
 public:
  /// All terms must agree in particle count and per-slot spin kind.
  static KemmerFieldN product_sum(std::vector<ProductTerm> terms, long cap = kDefaultLiftCap);

  int particles() const { return static_cast<int>(kinds_.size()); }
  const std::vector<Spin>& kinds() const { return kinds_; }
  long dim() const { return dim_; }
  const std::vector<ProductTerm>& terms() const { return terms_; }

  ComplexVector psi(double t, const std::vector<Vec3>& xs) const;

 private:
  std::vector<ProductTerm> terms_;
  std::vector<Spin> kinds_;
  long dim_ = 1;
};

struct KemmerResidual {
  double covariant = 0.0;    // (i beta^mu d_mu - m) psi
  double schrodinger = 0.0;  // i d_0 psi - (-i btu_k d_k + m beta_0) psi
  double constraint = 0.0;   // i beta^k beta_0^2 d_k psi - m (1 - beta_0^2) psi
  double worst() const { return std::max(covariant, std::max(schrodinger, constraint)); }
};

/// Relative residuals of the Kemmer wave equation (covariant and split form)
/// on a field sample.
KemmerResidual kemmer_residual(const DkpRep& rep, const KemmerField& field, const Event& e);

}  // namespace kemmer

#endif  // KEMMER_FIELDS_HPP
