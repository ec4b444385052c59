#include "nlkg/radial_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nlkg/errors.hpp"
#include "tridiag.hpp"

namespace nlkg {

double unit_sphere_area(int d) {
  // 2 pi^{d/2} / Gamma(d/2)
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

RadialGrid::RadialGrid(int d, int n, double r_max) : d_(d), n_(n), r_max_(r_max) {
  if (d < 3 || d > 5) throw InvalidArgument("dimension must be 3, 4 or 5, got " + std::to_string(d));
  if (n <= 0) throw InvalidArgument("point count must be positive, got " + std::to_string(n));
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw InvalidArgument("r_max must be positive and finite");

  dr_ = r_max / n;
  omega_ = unit_sphere_area(d);
  const auto un = static_cast<std::size_t>(n);
  nodes_.resize(un);
  weights_.resize(un);
  up_.assign(un, 0.0);
  lo_.assign(un, 0.0);
  face_.assign(un > 0 ? un - 1 : 0, 0.0);

  const double dr2 = dr_ * dr_;
  for (std::size_t i = 0; i < un; ++i) {
    const double r = (static_cast<double>(i) + 0.5) * dr_;
    nodes_[i] = r;
    weights_[i] = omega_ * std::pow(r, d - 1) * dr_;
  }
  for (std::size_t i = 0; i + 1 < un; ++i) {
    const double rf = static_cast<double>(i + 1) * dr_;
    const double area = std::pow(rf, d - 1);
    face_[i] = omega_ * area / dr_;
    up_[i] = area / (std::pow(nodes_[i], d - 1) * dr2);
    lo_[i + 1] = area / (std::pow(nodes_[i + 1], d - 1) * dr2);
  }

  {
    const double rl = nodes_[un - 1];
    robin_ = (d - 2.0) / (rl * dr_);
    boundary_weight_ = omega_ * (d - 2.0) * std::pow(rl, d - 2);
  }

  detail::SymTridiag t;
  t.diag.resize(un);
  t.off_sq.resize(face_.size());
  for (std::size_t i = 0; i < un; ++i) t.diag[i] = up_[i] + lo_[i];
  t.diag[un - 1] += robin_;
  for (std::size_t i = 0; i + 1 < un; ++i) t.off_sq[i] = up_[i] * lo_[i + 1];
  lap_max_ = un > 1 ? t.eigenvalue(n - 1, 1e-10) : 0.0;
}

double RadialGrid::stable_cfl() const {
  if (lap_max_ <= 0.0) return 0.5;
  // leapfrog on u'' = -A u is stable for dt^2 lambda_max < 4
  const double limit = 0.98 * 2.0 / std::sqrt(lap_max_ * dr_ * dr_);
  return std::min(0.5, limit);
}

GridPtr make_grid(int d, int n, double r_max) { return std::make_shared<const RadialGrid>(d, n, r_max); }

Field::Field(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw InvalidArgument("field needs a grid");
  values_.assign(static_cast<std::size_t>(grid_->size()), 0.0);
}

Field::Field(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw InvalidArgument("field needs a grid");
  if (static_cast<int>(values_.size()) != grid_->size())
    throw ShapeMismatch("field length " + std::to_string(values_.size()) + " does not match grid size " +
                        std::to_string(grid_->size()));
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void check_same_grid(const Field& a, const Field& b) {
  if (a.grid() == b.grid()) return;
  if (!a.grid() || !b.grid()) throw ShapeMismatch("field without grid");
  const auto& ga = *a.grid();
  const auto& gb = *b.grid();
  if (ga.dim() != gb.dim() || ga.size() != gb.size() || ga.r_max() != gb.r_max())
    throw ShapeMismatch("fields live on different grids");
}

Field& Field::operator+=(const Field& o) {
  check_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  check_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Field& Field::axpy(double s, const Field& o) {
  check_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * o.values_[i];
  return *this;
}

Field hadamard(const Field& a, const Field& b) {
  check_same_grid(a, b);
  Field out = a;
  for (int i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

State::State(Field a, Field b) : u1(std::move(a)), u2(std::move(b)) { check_same_grid(u1, u2); }

State State::zero(const GridPtr& grid) { return State(Field(grid), Field(grid)); }

double integrate(const Field& f) {
  const auto w = f.grid()->weights();
  double s = 0.0;
  for (int i = 0; i < f.size(); ++i) s += f[i] * w[static_cast<std::size_t>(i)];
  return s;
}

double inner(const Field& f, const Field& g) {
  check_same_grid(f, g);
  const auto w = f.grid()->weights();
  double s = 0.0;
  for (int i = 0; i < f.size(); ++i) s += f[i] * g[i] * w[static_cast<std::size_t>(i)];
  return s;
}

double norm_l2(const Field& f) { return std::sqrt(inner(f, f)); }

void radial_laplacian(const RadialGrid& grid, const double* f, double* out) {
  const int n = grid.size();
  const double* up = grid.lap_upper().data();
  const double* lo = grid.lap_lower().data();
  const double rob = grid.robin();
  if (n == 1) {
    out[0] = -rob * f[0];
    return;
  }
  out[0] = up[0] * (f[1] - f[0]);
  for (int i = 1; i < n - 1; ++i) out[i] = up[i] * (f[i + 1] - f[i]) - lo[i] * (f[i] - f[i - 1]);
  out[n - 1] = -lo[n - 1] * (f[n - 1] - f[n - 2]) - rob * f[n - 1];
}

Field radial_laplacian(const Field& f) {
  Field out(f.grid());
  radial_laplacian(*f.grid(), f.data(), out.data());
  return out;
}

double gradient_norm_sq(const Field& f) { return gradient_inner(f, f); }

double gradient_inner(const Field& f, const Field& g) {
  check_same_grid(f, g);
  const auto face = f.grid()->face_weights();
  double s = 0.0;
  for (std::size_t i = 0; i < face.size(); ++i) {
    const int j = static_cast<int>(i);
    s += face[i] * (f[j + 1] - f[j]) * (g[j + 1] - g[j]);
  }
  const int last = f.size() - 1;
  return s + f.grid()->boundary_weight() * f[last] * g[last];
}

double sample(const Field& f, double r) {
  const auto& grid = *f.grid();
  const int n = grid.size();
  r = std::abs(r);
  const int d = grid.dim();
  const double r_last = grid.node(n - 1);
  if (n < 4) {
    if (r >= r_last) return f[n - 1] * std::pow(r_last / r, d - 2);
    // too few points for a cubic stencil; piecewise linear
    const double s = std::clamp(r / grid.dr() - 0.5, 0.0, static_cast<double>(n - 1));
    const int i = std::min(static_cast<int>(s), n - 2 < 0 ? 0 : n - 2);
    if (n == 1) return f[0];
    const double t = s - i;
    return (1 - t) * f[i] + t * f[i + 1];
  }
  const double s = r / grid.dr() - 0.5;  // fractional node index
  int i = static_cast<int>(std::floor(s));
  const double t = s - i;
  if (s > n + 2.0) return f[n - 1] * std::pow(r_last / r, d - 2);
  auto at = [&](int j) {
    if (j < 0) j = -j - 1;  // even reflection across r = 0
    if (j >= n) return f[n - 1] * std::pow(r_last / ((j + 0.5) * grid.dr()), d - 2);
    return f[j];
  };
  const double fm = at(i - 1), f0 = at(i), f1 = at(i + 1), f2 = at(i + 2);
  const double c_m = -t * (t - 1) * (t - 2) / 6.0;
  const double c_0 = (t + 1) * (t - 1) * (t - 2) / 2.0;
  const double c_1 = -(t + 1) * t * (t - 2) / 2.0;
  const double c_2 = (t + 1) * t * (t - 1) / 6.0;
  return c_m * fm + c_0 * f0 + c_1 * f1 + c_2 * f2;
}

}  // namespace nlkg
