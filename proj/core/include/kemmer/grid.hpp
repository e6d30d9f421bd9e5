#ifndef KEMMER_GRID_HPP
#define KEMMER_GRID_HPP

// 1+1D finite-difference solver for the minimally coupled Klein-Gordon
// equation (D_mu D^mu + m^2) phi = 0, D_mu = d_mu + i e V_mu. Explicit
// leapfrog on the second-order form, O(h^2) in space and time.

#include <complex>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "kemmer/algebra.hpp"
#include "kemmer/fields.hpp"

namespace kemmer {

struct GridSpec {
  double x0 = -10.0, x1 = 10.0;
  int nx = 201;
  double t0 = 0.0, t1 = 1.0;
  int nt = 101;

  double h() const { return (x1 - x0) / (nx - 1); }
  double dt() const { return (t1 - t0) / (nt - 1); }

  /// Refined spec with both mesh widths halved (same spans).
  GridSpec refined() const { return {x0, x1, 2 * (nx - 1) + 1, t0, t1, 2 * (nt - 1) + 1}; }
};

enum class GridBoundary { periodic, dirichlet_zero };

/// External potential V^mu restricted to 1+1D: V^0(t,x) and V^1(t,x).
struct Potential1p1 {
  std::function<double(double, double)> v0;
  std::function<double(double, double)> v1;
  std::string description = "free";

  static Potential1p1 free();
  static Potential1p1 constant_v0(double v0);
  /// V^0 = -efield * x (constant electric field along x).
  static Potential1p1 linear_efield(double efield);
};

struct GridSample {
  Complex phi{};
  std::array<Complex, 4> d1{};  // d_mu phi, centered differences
  int n = 0, j = 0;
};

class GridField {
 public:
  /// March the discretized equation from initial data phi(t0,x), dphi/dt(t0,x).
  /// Throws std::invalid_argument when the stability bound
  /// dt <= 0.9 h / (1 + |e| Vmax h) is violated or initial data is not finite.
  static GridField solve_coupled_kg(const GridSpec& spec, GridBoundary bc, Potential1p1 v, double e, double mass,
                                    const std::function<Complex(double)>& phi0,
                                    const std::function<Complex(double)>& dtphi0);

  const GridSpec& spec() const { return spec_; }
  GridBoundary boundary() const { return bc_; }
  double coupling() const { return e_; }
  double mass() const { return mass_; }
  const std::string& potential_description() const { return v_.description; }

  double v_mu(int mu, double t, double x) const;

  Complex phi(int n, int j) const { return data_[static_cast<std::size_t>(n) * static_cast<std::size_t>(spec_.nx) + static_cast<std::size_t>(j)]; }

  /// Sample at a lattice-aligned event; derivatives are centered differences
  /// (second-order one-sided at the edges). Throws std::domain_error off-grid.
  GridSample sample(const Event& e) const;

  bool in_domain(const Event& e, double margin_nodes = 0.0) const;

  /// Discrete total charge integral s^0 dx at time level n (interior levels).
  double charge(int n) const;

  /// Plain-text table "t x Re(phi) Im(phi)".
  void export_table(std::ostream& os, int stride_t = 1, int stride_x = 1) const;
  /// Sidecar metadata record (h, dt, e, m, potential, boundary).
  void export_metadata(std::ostream& os) const;

 private:
  GridSpec spec_;
  GridBoundary bc_ = GridBoundary::periodic;
  Potential1p1 v_;
  double e_ = 0.0;
  double mass_ = 1.0;
  std::vector<Complex> data_;

  int node_x(double x) const;
  int node_t(double t) const;
};

}  // namespace kemmer

#endif  // KEMMER_GRID_HPP
