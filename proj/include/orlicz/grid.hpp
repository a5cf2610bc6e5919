#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace orlicz {

enum class Topology { torus = 0, rectangle = 1 };

using Index3 = std::array<int, 3>;

/// Uniform grid on [origin, origin + side)^dim with n points per axis.
///
/// Torus points sit at origin + i h; rectangle points are cell centres
/// origin + (i + 1/2) h, so no sample lies on the boundary.
class Grid {
 public:
  Grid(int dim, int n, double side = 1.0, Topology topology = Topology::torus,
       Eigen::Vector3d origin = Eigen::Vector3d::Zero());

  int dim() const { return dim_; }
  int n() const { return n_; }
  double side() const { return side_; }
  double h() const { return side_ / n_; }
  Topology topology() const { return topology_; }
  bool periodic() const { return topology_ == Topology::torus; }
  const Eigen::Vector3d& origin() const { return origin_; }
  Eigen::Index size() const { return size_; }
  double cell_measure() const;

  Index3 index(Eigen::Index flat) const;
  Eigen::Index flat(const Index3& idx) const;
  /// Flat index after reducing every coordinate modulo n.
  Eigen::Index wrap(Index3 idx) const;
  bool inside(const Index3& idx) const;

  Eigen::Vector3d point(Eigen::Index flat) const;
  Eigen::Vector3d point(const Index3& idx) const;
  /// y - x, reduced to the nearest periodic image on the torus.
  Eigen::Vector3d displacement(const Eigen::Vector3d& x, const Eigen::Vector3d& y) const;
  /// Same grid with n points per axis.
  Grid refined(int n) const;

  bool operator==(const Grid& other) const;

 private:
  int dim_;
  int n_;
  double side_;
  Topology topology_;
  Eigen::Vector3d origin_;
  Eigen::Index size_;
};

/// Sampled field with `components` values per grid point, stored as a
/// (points x components) array in row-major point order.
class GridFunction {
 public:
  explicit GridFunction(Grid grid, int components = 1);
  GridFunction(Grid grid, Eigen::ArrayXXd values);
  GridFunction(Grid grid, const Eigen::ArrayXd& values);

  static GridFunction sample(const Grid& grid, const std::function<double(const Eigen::Vector3d&)>& f);

  const Grid& grid() const { return grid_; }
  int components() const { return static_cast<int>(values_.cols()); }
  const Eigen::ArrayXXd& values() const { return values_; }
  Eigen::ArrayXXd& values() { return values_; }
  Eigen::ArrayXd scalar() const;
  GridFunction component(int j) const;
  /// Euclidean magnitude per point.
  Eigen::ArrayXd magnitude() const;
  double operator()(Eigen::Index i, int c = 0) const { return values_(i, c); }
  double max_abs() const;

  GridFunction operator+(const GridFunction& o) const;
  GridFunction operator-(const GridFunction& o) const;
  GridFunction operator*(double c) const;
  /// Pointwise product with a scalar field.
  GridFunction times(const GridFunction& scalar) const;

 private:
  void check_finite() const;

  Grid grid_;
  Eigen::ArrayXXd values_;
};

inline GridFunction operator*(double c, const GridFunction& f) { return f * c; }

struct Ball {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.0;
};

/// Point selection: the whole grid, a Euclidean ball or an axis-aligned box.
class Region {
 public:
  static Region whole();
  static Region ball(const Eigen::Vector3d& center, double radius);
  static Region ball(const Ball& b) { return ball(b.center, b.radius); }
  static Region box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi);

  bool contains(const Grid& grid, Eigen::Index i) const;
  /// Selected flat indices in increasing order; throws Errc::invalid_grid when
  /// the selection is empty.
  std::vector<Eigen::Index> indices(const Grid& grid) const;
  double measure(const Grid& grid) const;
  /// True when the region lies inside the grid's domain (always true on a torus).
  bool inside_domain(const Grid& grid) const;
  std::string describe() const;

 private:
  enum class Kind { whole, ball, box };
  Kind kind_ = Kind::whole;
  Eigen::Vector3d a_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d b_ = Eigen::Vector3d::Zero();
  double r_ = 0.0;
};

/// Binary layout: "GFN1", int32 dim, int32 n per axis, int32 topology, int32 m,
/// float64 origin per axis, float64 side, then float64 values in row-major
/// point order with components innermost.
void write_binary(const GridFunction& f, const std::string& path);
GridFunction read_binary(const std::string& path);
/// Columns x1..xdim, v0..v(m-1).
void write_csv(const GridFunction& f, std::ostream& os);

}  // namespace orlicz
