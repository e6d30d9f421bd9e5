#include "kemmer/algebra.hpp"

#include <cmath>

namespace kemmer {

double Vec3::norm() const { return std::sqrt(norm2()); }

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

FourVector FourVector::operator+(const FourVector& o) const {
  return {c[0] + o.c[0], c[1] + o.c[1], c[2] + o.c[2], c[3] + o.c[3]};
}

FourVector FourVector::operator-(const FourVector& o) const {
  return {c[0] - o.c[0], c[1] - o.c[1], c[2] - o.c[2], c[3] - o.c[3]};
}

FourVector FourVector::operator*(double s) const {
  return {c[0] * s, c[1] * s, c[2] * s, c[3] * s};
}

double minkowski_dot(const FourVector& u, const FourVector& v) {
  return u.c[0] * v.c[0] - u.c[1] * v.c[1] - u.c[2] * v.c[2] - u.c[3] * v.c[3];
}

bool is_future_causal(const FourVector& v, double tol) {
  return v.c[0] >= -tol && minkowski_dot(v, v) >= -tol;
}

Tensor2 Tensor2::transposed() const {
  Tensor2 r;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) r(mu, nu) = (*this)(nu, mu);
  return r;
}

Tensor2 Tensor2::symmetric_part() const {
  Tensor2 r;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) r(mu, nu) = 0.5 * ((*this)(mu, nu) + (*this)(nu, mu));
  return r;
}

Tensor2 Tensor2::antisymmetric_part() const {
  Tensor2 r;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) r(mu, nu) = 0.5 * ((*this)(mu, nu) - (*this)(nu, mu));
  return r;
}

Tensor2 Tensor2::operator+(const Tensor2& o) const {
  Tensor2 r;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) r(mu, nu) = (*this)(mu, nu) + o(mu, nu);
  return r;
}

Tensor2 Tensor2::operator-(const Tensor2& o) const {
  Tensor2 r;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) r(mu, nu) = (*this)(mu, nu) - o(mu, nu);
  return r;
}

Tensor2 Tensor2::operator*(double s) const {
  Tensor2 r;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) r(mu, nu) = (*this)(mu, nu) * s;
  return r;
}

double Tensor2::max_abs() const {
  double r = 0.0;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) r = std::max(r, std::abs((*this)(mu, nu)));
  return r;
}

double Tensor2::max_asymmetry() const {
  double r = 0.0;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = mu + 1; nu < 4; ++nu) r = std::max(r, std::abs((*this)(mu, nu) - (*this)(nu, mu)));
  return r;
}

FourVector Tensor2::contract_right(const FourVector& a) const {
  FourVector j;
  for (int mu = 0; mu < 4; ++mu) {
    double s = 0.0;
    for (int nu = 0; nu < 4; ++nu) s += (*this)(mu, nu) * a.lower(nu);
    j[mu] = s;
  }
  return j;
}

double Tensor2::observer_density(const FourVector& a) const {
  // Pairwise accumulation: the (mu,nu)+(nu,mu) sum vanishes bitwise for an
  // exactly antisymmetric part.
  double s = 0.0;
  for (int mu = 0; mu < 4; ++mu) {
    s += (*this)(mu, mu) * a.lower(mu) * a.lower(mu);
    for (int nu = mu + 1; nu < 4; ++nu)
      s += ((*this)(mu, nu) + (*this)(nu, mu)) * a.lower(mu) * a.lower(nu);
  }
  return s;
}

LorentzTransform LorentzTransform::identity() {
  LorentzTransform l;
  for (int mu = 0; mu < 4; ++mu) l.a[static_cast<std::size_t>(mu)][static_cast<std::size_t>(mu)] = 1.0;
  return l;
}

FourVector LorentzTransform::apply(const FourVector& v) const {
  FourVector r;
  for (int mu = 0; mu < 4; ++mu) {
    double s = 0.0;
    for (int nu = 0; nu < 4; ++nu) s += (*this)(mu, nu) * v[nu];
    r[mu] = s;
  }
  return r;
}

double LorentzTransform::metric_residual() const {
  double r = 0.0;
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = 0; nu < 4; ++nu) {
      double s = 0.0;
      for (int al = 0; al < 4; ++al) s += (*this)(al, mu) * kMetric[static_cast<std::size_t>(al)] * (*this)(al, nu);
      double expect = (mu == nu) ? kMetric[static_cast<std::size_t>(mu)] : 0.0;
      r = std::max(r, std::abs(s - expect));
    }
  }
  return r;
}

LorentzTransform boost(const Vec3& beta) {
  const double b2 = beta.norm2();
  if (b2 >= 1.0) throw std::invalid_argument("boost: |beta| must be < 1");
  if (b2 == 0.0) return LorentzTransform::identity();

  const double gamma = 1.0 / std::sqrt(1.0 - b2);
  const std::array<double, 3> b{beta.x, beta.y, beta.z};

  LorentzTransform l;
  l.a[0][0] = gamma;
  for (int i = 0; i < 3; ++i) {
    l.a[0][static_cast<std::size_t>(i + 1)] = gamma * b[static_cast<std::size_t>(i)];
    l.a[static_cast<std::size_t>(i + 1)][0] = gamma * b[static_cast<std::size_t>(i)];
    for (int j = 0; j < 3; ++j) {
      l.a[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j + 1)] =
          (i == j ? 1.0 : 0.0) + (gamma - 1.0) * b[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)] / b2;
    }
  }
  return l;
}

}  // namespace kemmer
