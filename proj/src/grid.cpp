#include "orlicz/grid.hpp"

#include "orlicz/error.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace orlicz {

Grid::Grid(int dim, int n, double side, Topology topology, Eigen::Vector3d origin)
    : dim_(dim), n_(n), side_(side), topology_(topology), origin_(origin) {
  if (dim < 1 || dim > 3) throw Error(Errc::invalid_grid, "dimension must be 1, 2 or 3");
  if (n < 8) throw Error(Errc::invalid_grid, "need at least 8 points per axis");
  if (!(side > 0.0)) throw Error(Errc::invalid_grid, "side length must be positive");
  for (int d = dim; d < 3; ++d) origin_[d] = 0.0;
  size_ = 1;
  for (int d = 0; d < dim; ++d) size_ *= n;
}

double Grid::cell_measure() const { return std::pow(h(), dim_); }

Index3 Grid::index(Eigen::Index flat) const {
  Index3 idx{0, 0, 0};
  for (int d = dim_ - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

Eigen::Index Grid::flat(const Index3& idx) const {
  Eigen::Index f = 0;
  for (int d = 0; d < dim_; ++d) f = f * n_ + idx[d];
  return f;
}

Eigen::Index Grid::wrap(Index3 idx) const {
  for (int d = 0; d < dim_; ++d) idx[d] = ((idx[d] % n_) + n_) % n_;
  return flat(idx);
}

bool Grid::inside(const Index3& idx) const {
  for (int d = 0; d < dim_; ++d) {
    if (idx[d] < 0 || idx[d] >= n_) return false;
  }
  return true;
}

Eigen::Vector3d Grid::point(Eigen::Index flat) const { return point(index(flat)); }

Eigen::Vector3d Grid::point(const Index3& idx) const {
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  const double shift = periodic() ? 0.0 : 0.5;
  for (int d = 0; d < dim_; ++d) x[d] = origin_[d] + (idx[d] + shift) * h();
  return x;
}

Eigen::Vector3d Grid::displacement(const Eigen::Vector3d& x, const Eigen::Vector3d& y) const {
  Eigen::Vector3d d = y - x;
  if (periodic()) {
    for (int k = 0; k < dim_; ++k) d[k] -= side_ * std::round(d[k] / side_);
  }
  return d;
}

Grid Grid::refined(int n) const { return Grid(dim_, n, side_, topology_, origin_); }

bool Grid::operator==(const Grid& o) const {
  return dim_ == o.dim_ && n_ == o.n_ && side_ == o.side_ && topology_ == o.topology_ && origin_ == o.origin_;
}

GridFunction::GridFunction(Grid grid, int components)
    : grid_(std::move(grid)), values_(Eigen::ArrayXXd::Zero(grid_.size(), components)) {
  if (components < 1) throw Error(Errc::invalid_argument, "grid function needs at least one component");
}

GridFunction::GridFunction(Grid grid, Eigen::ArrayXXd values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.rows() != grid_.size() || values_.cols() < 1) {
    throw Error(Errc::invalid_argument, "value array does not match the grid");
  }
  check_finite();
}

GridFunction::GridFunction(Grid grid, const Eigen::ArrayXd& values) : GridFunction(std::move(grid), Eigen::ArrayXXd(values)) {}

GridFunction GridFunction::sample(const Grid& grid, const std::function<double(const Eigen::Vector3d&)>& f) {
  Eigen::ArrayXXd v(grid.size(), 1);
  for (Eigen::Index i = 0; i < grid.size(); ++i) v(i, 0) = f(grid.point(i));
  return GridFunction(grid, std::move(v));
}

void GridFunction::check_finite() const {
  if (!values_.isFinite().all()) throw Error(Errc::invalid_argument, "grid function has non-finite values");
}

Eigen::ArrayXd GridFunction::scalar() const {
  if (components() != 1) return magnitude();
  return values_.col(0);
}

GridFunction GridFunction::component(int j) const {
  if (j < 0 || j >= components()) throw Error(Errc::invalid_argument, "component out of range");
  return GridFunction(grid_, Eigen::ArrayXXd(values_.col(j)));
}

Eigen::ArrayXd GridFunction::magnitude() const {
  if (components() == 1) return values_.col(0).abs();
  return values_.square().rowwise().sum().sqrt();
}

double GridFunction::max_abs() const { return values_.abs().maxCoeff(); }

GridFunction GridFunction::operator+(const GridFunction& o) const {
  if (!(grid_ == o.grid_) || components() != o.components()) throw Error(Errc::invalid_argument, "grid mismatch");
  return GridFunction(grid_, Eigen::ArrayXXd(values_ + o.values_));
}

GridFunction GridFunction::operator-(const GridFunction& o) const {
  if (!(grid_ == o.grid_) || components() != o.components()) throw Error(Errc::invalid_argument, "grid mismatch");
  return GridFunction(grid_, Eigen::ArrayXXd(values_ - o.values_));
}

GridFunction GridFunction::operator*(double c) const { return GridFunction(grid_, Eigen::ArrayXXd(values_ * c)); }

GridFunction GridFunction::times(const GridFunction& s) const {
  if (!(grid_ == s.grid_) || s.components() != 1) throw Error(Errc::invalid_argument, "grid mismatch");
  Eigen::ArrayXXd v = values_;
  for (int c = 0; c < components(); ++c) v.col(c) *= s.values_.col(0);
  return GridFunction(grid_, std::move(v));
}

Region Region::whole() { return Region(); }

Region Region::ball(const Eigen::Vector3d& center, double radius) {
  if (!(radius > 0.0)) throw Error(Errc::invalid_argument, "ball radius must be positive");
  Region r;
  r.kind_ = Kind::ball;
  r.a_ = center;
  r.r_ = radius;
  return r;
}

Region Region::box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
  Region r;
  r.kind_ = Kind::box;
  r.a_ = lo;
  r.b_ = hi;
  return r;
}

bool Region::contains(const Grid& grid, Eigen::Index i) const {
  if (kind_ == Kind::whole) return true;
  const Eigen::Vector3d x = grid.point(i);
  if (kind_ == Kind::ball) {
    const Eigen::Vector3d d = grid.displacement(a_, x);
    return d.head(grid.dim()).norm() <= r_ * (1 + 1e-12);
  }
  for (int k = 0; k < grid.dim(); ++k) {
    if (x[k] < a_[k] || x[k] > b_[k]) return false;
  }
  return true;
}

std::vector<Eigen::Index> Region::indices(const Grid& grid) const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    if (contains(grid, i)) out.push_back(i);
  }
  if (out.empty()) throw Error(Errc::invalid_grid, "region " + describe() + " contains no grid point");
  return out;
}

double Region::measure(const Grid& grid) const {
  return static_cast<double>(indices(grid).size()) * grid.cell_measure();
}

bool Region::inside_domain(const Grid& grid) const {
  if (grid.periodic() || kind_ == Kind::whole) return true;
  for (int k = 0; k < grid.dim(); ++k) {
    const double lo = grid.origin()[k], hi = lo + grid.side();
    const double a = kind_ == Kind::ball ? a_[k] - r_ : a_[k];
    const double b = kind_ == Kind::ball ? a_[k] + r_ : b_[k];
    if (a < lo || b > hi) return false;
  }
  return true;
}

std::string Region::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::whole: return "whole";
    case Kind::ball: os << "ball(" << a_.transpose() << "; r=" << r_ << ")"; break;
    case Kind::box: os << "box(" << a_.transpose() << " .. " << b_.transpose() << ")"; break;
  }
  return os.str();
}

namespace {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw Error(Errc::io, "truncated grid function file");
  return v;
}

}  // namespace

void write_binary(const GridFunction& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::io, "cannot open " + path);
  const Grid& g = f.grid();
  os.write("GFN1", 4);
  put<std::int32_t>(os, g.dim());
  for (int d = 0; d < g.dim(); ++d) put<std::int32_t>(os, g.n());
  put<std::int32_t>(os, static_cast<std::int32_t>(g.topology()));
  put<std::int32_t>(os, f.components());
  for (int d = 0; d < g.dim(); ++d) put<double>(os, g.origin()[d]);
  put<double>(os, g.side());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    for (int c = 0; c < f.components(); ++c) put<double>(os, f(i, c));
  }
  if (!os) throw Error(Errc::io, "write failed for " + path);
}

GridFunction read_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::io, "cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "GFN1") throw Error(Errc::io, path + " is not a grid function file");
  const int dim = get<std::int32_t>(is);
  if (dim < 1 || dim > 3) throw Error(Errc::io, "bad dimension in " + path);
  int n = 0;
  for (int d = 0; d < dim; ++d) {
    const int nd = get<std::int32_t>(is);
    if (d > 0 && nd != n) throw Error(Errc::io, "anisotropic grids are not supported");
    n = nd;
  }
  const auto topo = static_cast<Topology>(get<std::int32_t>(is));
  const int m = get<std::int32_t>(is);
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  for (int d = 0; d < dim; ++d) origin[d] = get<double>(is);
  const double side = get<double>(is);
  Grid g(dim, n, side, topo, origin);
  Eigen::ArrayXXd v(g.size(), m);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    for (int c = 0; c < m; ++c) v(i, c) = get<double>(is);
  }
  return GridFunction(g, std::move(v));
}

void write_csv(const GridFunction& f, std::ostream& os) {
  const Grid& g = f.grid();
  for (int d = 0; d < g.dim(); ++d) os << (d ? "," : "") << "x" << d + 1;
  for (int c = 0; c < f.components(); ++c) os << ",v" << c;
  os << '\n';
  char buf[40];
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const Eigen::Vector3d x = g.point(i);
    for (int d = 0; d < g.dim(); ++d) {
      std::snprintf(buf, sizeof buf, "%.17g", x[d]);
      os << (d ? "," : "") << buf;
    }
    for (int c = 0; c < f.components(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", f(i, c));
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace orlicz
