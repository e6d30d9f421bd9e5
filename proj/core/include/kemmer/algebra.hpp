#ifndef KEMMER_ALGEBRA_HPP
#define KEMMER_ALGEBRA_HPP

// Minkowski four-vector arithmetic, Lorentz boosts and the small dense
// complex-matrix type shared by the whole library.
//
// Conventions (used everywhere, never restated):
//   metric g = diag(+1,-1,-1,-1), natural units c = hbar = 1.
//   FourVector and Tensor2 store contravariant components.

#include <array>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace kemmer {

using Complex = std::complex<double>;

/// Dense complex matrix used for DKP representations and lifted operators.
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// g_{mu mu} for the (+,-,-,-) signature.
inline constexpr std::array<double, 4> kMetric{1.0, -1.0, -1.0, -1.0};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double norm() const;
  double norm2() const { return x * x + y * y + z * z; }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
double dot(const Vec3& a, const Vec3& b);
Vec3 cross(const Vec3& a, const Vec3& b);

/// Contravariant four-vector v^mu.
struct FourVector {
  std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};

  FourVector() = default;
  FourVector(double t, double x, double y, double z) : c{t, x, y, z} {}
  FourVector(double t, const Vec3& v) : c{t, v.x, v.y, v.z} {}

  double& operator[](int mu) { return c[static_cast<std::size_t>(mu)]; }
  double operator[](int mu) const { return c[static_cast<std::size_t>(mu)]; }

  Vec3 spatial() const { return {c[1], c[2], c[3]}; }

  /// Covariant component v_mu = g_{mu mu} v^mu.
  double lower(int mu) const { return kMetric[static_cast<std::size_t>(mu)] * c[static_cast<std::size_t>(mu)]; }

  FourVector operator+(const FourVector& o) const;
  FourVector operator-(const FourVector& o) const;
  FourVector operator*(double s) const;
};

/// u^mu g_{mu nu} v^nu = u0 v0 - u.v
double minkowski_dot(const FourVector& u, const FourVector& v);

/// v0 >= -tol and v.v >= -tol (future-directed timelike or null).
bool is_future_causal(const FourVector& v, double tol);

/// Rank-2 contravariant tensor T^{mu nu}.
struct Tensor2 {
  std::array<std::array<double, 4>, 4> m{};

  double& operator()(int mu, int nu) { return m[static_cast<std::size_t>(mu)][static_cast<std::size_t>(nu)]; }
  double operator()(int mu, int nu) const { return m[static_cast<std::size_t>(mu)][static_cast<std::size_t>(nu)]; }

  Tensor2 transposed() const;
  Tensor2 symmetric_part() const;
  Tensor2 antisymmetric_part() const;
  Tensor2 operator+(const Tensor2& o) const;
  Tensor2 operator-(const Tensor2& o) const;
  Tensor2 operator*(double s) const;

  double max_abs() const;
  double max_asymmetry() const;  // max |T^{mu nu} - T^{nu mu}|

  /// T^{mu nu} a_nu (index lowered on the contraction).
  FourVector contract_right(const FourVector& a) const;

  /// T^{mu nu} a_mu a_nu, accumulated over unordered index pairs so that an
  /// antisymmetric part cancels exactly in floating point.
  double observer_density(const FourVector& a) const;
};

/// Lorentz transformation matrix Lambda^mu_nu.
struct LorentzTransform {
  std::array<std::array<double, 4>, 4> a{};

  static LorentzTransform identity();

  double operator()(int mu, int nu) const { return a[static_cast<std::size_t>(mu)][static_cast<std::size_t>(nu)]; }

  FourVector apply(const FourVector& v) const;

  /// max componentwise |Lambda^T g Lambda - g|.
  double metric_residual() const;
};

/// Standard boost with velocity beta, |beta| < 1. boost(beta) maps the rest
/// observer (1,0,0,0) to gamma*(1,beta). Throws std::invalid_argument for
/// |beta| >= 1.
LorentzTransform boost(const Vec3& beta);

}  // namespace kemmer

#endif  // KEMMER_ALGEBRA_HPP
