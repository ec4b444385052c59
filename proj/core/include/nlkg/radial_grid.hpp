#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace nlkg {

// Cell-centred uniform mesh of [0, r_max] for radial functions on R^d.
// Node i sits at (i + 1/2) dr; the quadrature weight of node i is
// omega * r_i^{d-1} * dr, omega being the area of the unit sphere.
class RadialGrid {
 public:
  RadialGrid(int d, int n, double r_max);

  int dim() const { return d_; }
  int size() const { return n_; }
  double r_max() const { return r_max_; }
  double dr() const { return dr_; }
  double omega() const { return omega_; }
  // critical Sobolev exponent 2* = 2d/(d-2)
  double critical_exponent() const { return 2.0 * d_ / (d_ - 2.0); }

  double node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

  // Flux-form Laplacian: (Lap f)_i = up_i (f_{i+1} - f_i) - lo_i (f_i - f_{i-1}),
  // with a zero-area face at r = 0. The outer face carries the flux of the
  // harmonic extension c r^{2-d} of the last node value, i.e. the last row
  // also gets -robin() * f_{n-1}. This keeps W's tail quiet at the wall.
  std::span<const double> lap_upper() const { return up_; }
  std::span<const double> lap_lower() const { return lo_; }
  double robin() const { return robin_; }
  // Weight of interior face i+1/2 in the gradient quadrature
  // (omega r_{i+1/2}^{d-1} / dr), n-1 entries.
  std::span<const double> face_weights() const { return face_; }
  // Dirichlet energy of the harmonic extension beyond r_max per unit f_{n-1}^2.
  double boundary_weight() const { return boundary_weight_; }

  // Largest eigenvalue of the discrete -Lap, and the leapfrog CFL number it
  // permits (dt <= stable_cfl() * dr), capped at 0.5.
  double laplacian_max_eigenvalue() const { return lap_max_; }
  double stable_cfl() const;

 private:
  int d_;
  int n_;
  double r_max_;
  double dr_;
  double omega_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> up_;
  std::vector<double> lo_;
  std::vector<double> face_;
  double robin_ = 0.0;
  double boundary_weight_ = 0.0;
  double lap_max_ = 0.0;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(int d, int n, double r_max);

// Area of the unit sphere S^{d-1}.
double unit_sphere_area(int d);

class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid);
  Field(GridPtr grid, std::vector<double> values);

  template <class F>
  static Field from_function(const GridPtr& grid, F&& f) {
    Field out(grid);
    for (int i = 0; i < grid->size(); ++i) out.values_[static_cast<std::size_t>(i)] = f(grid->node(i));
    return out;
  }

  const GridPtr& grid() const { return grid_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return values_[static_cast<std::size_t>(i)]; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<const double> values() const { return values_; }
  std::vector<double>& raw() { return values_; }

  bool all_finite() const;
  double max_abs() const;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double s);
  // this += s * o
  Field& axpy(double s, const Field& o);

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend Field operator*(Field a, double s) { return a *= s; }
  friend Field operator-(Field a) { return a *= -1.0; }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

// Pointwise product.
Field hadamard(const Field& a, const Field& b);

struct State {
  Field u1;  // position u
  Field u2;  // velocity du/dt

  State() = default;
  State(Field a, Field b);
  static State zero(const GridPtr& grid);

  const GridPtr& grid() const { return u1.grid(); }
  bool all_finite() const { return u1.all_finite() && u2.all_finite(); }
};

void check_same_grid(const Field& a, const Field& b);

double integrate(const Field& f);
double inner(const Field& f, const Field& g);
double norm_l2(const Field& f);

Field radial_laplacian(const Field& f);
// Raw kernel used by the time stepper; out and f must not alias.
void radial_laplacian(const RadialGrid& grid, const double* f, double* out);

// Sum over interior faces of (forward difference)^2 times face weight, plus
// the exterior harmonic term; equals -<Lap f, f> exactly.
double gradient_norm_sq(const Field& f);
double gradient_inner(const Field& f, const Field& g);

// Cubic Lagrange interpolation of f at radius r: even reflection across the
// origin, harmonic extension f_{n-1} (r_{n-1}/r)^{d-2} past the last node.
double sample(const Field& f, double r);

}  // namespace nlkg
