#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <vector>

#include "catalyx/errors.hpp"

namespace catalyx {

/// One boundary face of the tensor grid: the cell it belongs to, the axis of
/// its outward normal, and the side (-1 = low end, +1 = high end).
struct BoundaryFace {
  int id = 0;
  int cell = 0;
  int axis = 0;
  int side = 0;
};

/// Uniform tensor grid on an interval or a rectangle. Cell values are stored
/// cell-major; 2D cells are indexed row-major as iy * nx + ix.
class Grid {
public:
  static Grid interval(double length, int cells) {
    Grid g;
    g.dim_ = 1;
    g.extent_ = {length, 0.0};
    g.cells_ = {cells, 1};
    g.validate();
    g.build_faces();
    return g;
  }

  static Grid rectangle(double lx, double ly, int nx, int ny) {
    Grid g;
    g.dim_ = 2;
    g.extent_ = {lx, ly};
    g.cells_ = {nx, ny};
    g.validate();
    g.build_faces();
    return g;
  }

  int dim() const { return dim_; }
  double extent(int axis) const { return extent_[axis]; }
  int cells(int axis) const { return cells_[axis]; }
  double h(int axis) const { return extent_[axis] / cells_[axis]; }
  int cell_count() const { return dim_ == 1 ? cells_[0] : cells_[0] * cells_[1]; }
  double cell_volume() const { return dim_ == 1 ? h(0) : h(0) * h(1); }
  double domain_volume() const { return dim_ == 1 ? extent_[0] : extent_[0] * extent_[1]; }

  const std::vector<BoundaryFace>& boundary_faces() const { return faces_; }
  int face_count() const { return static_cast<int>(faces_.size()); }

  /// Surface measure of a boundary face (1 in 1D, transverse h in 2D).
  double face_area(const BoundaryFace& f) const {
    return dim_ == 1 ? 1.0 : h(1 - f.axis);
  }

  /// Neighboring cell across the given axis/side, or -1 at the boundary.
  int neighbor(int cell, int axis, int side) const {
    int ix = dim_ == 1 ? cell : cell % cells_[0];
    int iy = dim_ == 1 ? 0 : cell / cells_[0];
    int c[2] = {ix, iy};
    c[axis] += side;
    if (c[axis] < 0 || c[axis] >= cells_[axis]) return -1;
    return dim_ == 1 ? c[0] : c[1] * cells_[0] + c[0];
  }

  /// Boundary face id for (cell, axis, side), or -1 if that side is interior.
  int face_of(int cell, int axis, int side) const {
    const int s = side < 0 ? 0 : 1;
    return face_lookup_[(static_cast<std::size_t>(cell) * 2 + static_cast<std::size_t>(axis)) * 2 +
                        static_cast<std::size_t>(s)];
  }

  std::array<double, 2> cell_center(int cell) const {
    int ix = dim_ == 1 ? cell : cell % cells_[0];
    int iy = dim_ == 1 ? 0 : cell / cells_[0];
    return {(ix + 0.5) * h(0), dim_ == 1 ? 0.0 : (iy + 0.5) * h(1)};
  }

private:
  void validate() const {
    for (int axis = 0; axis < dim_; ++axis) {
      if (cells_[axis] < 3) throw std::invalid_argument("Grid: need at least 3 cells per axis");
      if (!(extent_[axis] > 0.0)) throw std::invalid_argument("Grid: extent must be positive");
    }
  }

  void build_faces() {
    faces_.clear();
    face_lookup_.assign(static_cast<std::size_t>(cell_count()) * 2 * 2, -1);
    auto add = [&](int cell, int axis, int side) {
      BoundaryFace f;
      f.id = static_cast<int>(faces_.size());
      f.cell = cell;
      f.axis = axis;
      f.side = side;
      const int s = side < 0 ? 0 : 1;
      face_lookup_[(static_cast<std::size_t>(cell) * 2 + static_cast<std::size_t>(axis)) * 2 +
                   static_cast<std::size_t>(s)] = f.id;
      faces_.push_back(f);
    };
    if (dim_ == 1) {
      add(0, 0, -1);
      add(cells_[0] - 1, 0, +1);
      return;
    }
    for (int iy = 0; iy < cells_[1]; ++iy) {
      add(iy * cells_[0], 0, -1);
      add(iy * cells_[0] + cells_[0] - 1, 0, +1);
    }
    for (int ix = 0; ix < cells_[0]; ++ix) {
      add(ix, 1, -1);
      add((cells_[1] - 1) * cells_[0] + ix, 1, +1);
    }
  }

  int dim_ = 1;
  std::array<double, 2> extent_{1.0, 0.0};
  std::array<int, 2> cells_{3, 1};
  std::vector<BoundaryFace> faces_;
  std::vector<int> face_lookup_;
};

/// Cell-averaged concentrations; column j holds the N-vector of cell j.
struct StateField {
  Eigen::MatrixXd c;

  static StateField constant(const Grid& grid, const Eigen::VectorXd& value) {
    StateField s;
    s.c = value.replicate(1, grid.cell_count());
    return s;
  }
};

/// Face-trace concentrations; column f holds the N-vector of boundary face f.
/// Traces are unknowns of the coupled step system, distinct from cell averages.
struct BoundaryState {
  Eigen::MatrixXd b;

  static BoundaryState from_cells(const Grid& grid, const StateField& s) {
    BoundaryState bs;
    bs.b.resize(s.c.rows(), grid.face_count());
    for (const auto& f : grid.boundary_faces()) bs.b.col(f.id) = s.c.col(f.cell);
    return bs;
  }
};

}  // namespace catalyx
