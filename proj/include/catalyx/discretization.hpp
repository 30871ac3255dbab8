#pragma once

// Finite-volume discretization of the bulk operator and assembly of the
// coupled interior/boundary nonlinear system for one implicit Euler step.
// Boundary traces are independent unknowns (index-1 DAE formulation): each
// boundary face contributes N unknowns and N rows (n_sigma flux rows plus
// m_sigma algebraic surface-equilibrium rows).

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

#include "catalyx/grid.hpp"
#include "catalyx/network.hpp"

namespace catalyx {

/// Flattened unknown ordering: cell unknowns first (cell-major, species
/// innermost), then face-trace unknowns (face-major, species innermost).
/// Residual rows use the same layout; face rows are flux rows then algebraic
/// rows. Total row count equals total unknown count.
struct SystemLayout {
  int n_species = 0;
  int n_cells = 0;
  int n_faces = 0;

  SystemLayout() = default;
  SystemLayout(const ReactionNetwork& net, const Grid& grid)
      : n_species(net.species_count()),
        n_cells(grid.cell_count()),
        n_faces(grid.face_count()) {}

  int cell_index(int cell, int species) const { return cell * n_species + species; }
  int face_index(int face, int species) const {
    return n_cells * n_species + face * n_species + species;
  }
  int size() const { return (n_cells + n_faces) * n_species; }
};

inline Eigen::VectorXd pack(const SystemLayout& lay, const StateField& s,
                            const BoundaryState& b) {
  Eigen::VectorXd x(lay.size());
  for (int j = 0; j < lay.n_cells; ++j)
    for (int i = 0; i < lay.n_species; ++i) x[lay.cell_index(j, i)] = s.c(i, j);
  for (int f = 0; f < lay.n_faces; ++f)
    for (int i = 0; i < lay.n_species; ++i) x[lay.face_index(f, i)] = b.b(i, f);
  return x;
}

inline void unpack(const SystemLayout& lay, const Eigen::VectorXd& x, StateField& s,
                   BoundaryState& b) {
  s.c.resize(lay.n_species, lay.n_cells);
  b.b.resize(lay.n_species, lay.n_faces);
  for (int j = 0; j < lay.n_cells; ++j)
    for (int i = 0; i < lay.n_species; ++i) s.c(i, j) = x[lay.cell_index(j, i)];
  for (int f = 0; f < lay.n_faces; ++f)
    for (int i = 0; i < lay.n_species; ++i) b.b(i, f) = x[lay.face_index(f, i)];
}

/// Second-order central finite-volume Laplacian scaled by d_i. Boundary faces
/// use the trace values, giving flux d_i (b_i - c_i^cell) / (h/2) into the
/// boundary cell.
inline Eigen::MatrixXd diffusion_operator(const Eigen::VectorXd& d, const Grid& grid,
                                          const StateField& state, const BoundaryState& bdry) {
  const int n = static_cast<int>(d.size());
  if (state.c.rows() != n || state.c.cols() != grid.cell_count())
    throw ShapeMismatch("diffusion_operator: state shape mismatch");
  if (bdry.b.rows() != n || bdry.b.cols() != grid.face_count())
    throw ShapeMismatch("diffusion_operator: boundary shape mismatch");

  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, grid.cell_count());
  for (int j = 0; j < grid.cell_count(); ++j) {
    for (int axis = 0; axis < grid.dim(); ++axis) {
      const double h = grid.h(axis);
      for (int side : {-1, +1}) {
        const int nb = grid.neighbor(j, axis, side);
        if (nb >= 0) {
          for (int i = 0; i < n; ++i)
            lap(i, j) += d[i] * (state.c(i, nb) - state.c(i, j)) / (h * h);
        } else {
          const int f = grid.face_of(j, axis, side);
          for (int i = 0; i < n; ++i)
            lap(i, j) += 2.0 * d[i] * (bdry.b(i, f) - state.c(i, j)) / (h * h);
        }
      }
    }
  }
  return lap;
}

/// Residual of the implicit Euler step system. Rows:
///   (i)  per cell: (c_new - c_old)/dt - D lap(c_new, b_new) - r(c_new)
///   (ii) per face, n_sigma flux rows: e^k . D (c_cell - b) / (h/2)
///  (iii) per face, m_sigma algebraic rows: b^{nu_sigma_a} - kappa_a
inline Eigen::VectorXd assemble_step_residual(const ReactionNetwork& net,
                                              const EquilibriumConstants& kappa,
                                              const ConservedBasis& basis, const Grid& grid,
                                              const StateField& c_old, const StateField& c_new,
                                              const BoundaryState& b_new, double dt,
                                              double floor = kDefaultPositivityFloor) {
  const SystemLayout lay(net, grid);
  const int n = lay.n_species;
  Eigen::VectorXd res(lay.size());

  const Eigen::MatrixXd lap = diffusion_operator(net.d, grid, c_new, b_new);
  for (int j = 0; j < lay.n_cells; ++j) {
    const Eigen::VectorXd r = bulk_rate(net, c_new.c.col(j));
    for (int i = 0; i < n; ++i)
      res[lay.cell_index(j, i)] = (c_new.c(i, j) - c_old.c(i, j)) / dt - lap(i, j) - r[i];
  }

  for (const auto& f : grid.boundary_faces()) {
    const double two_over_h = 2.0 / grid.h(f.axis);
    for (int k = 0; k < static_cast<int>(basis.e.size()); ++k) {
      double v = 0.0;
      for (int i = 0; i < n; ++i)
        v += static_cast<double>(basis.e[k][i]) * net.d[i] *
             (c_new.c(i, f.cell) - b_new.b(i, f.id)) * two_over_h;
      res[lay.face_index(f.id, k)] = v;
    }
    const Eigen::VectorXd sr =
        surface_residual(net, kappa, b_new.b.col(f.id), floor, f.cell);
    for (int a = 0; a < net.surface_count(); ++a)
      res[lay.face_index(f.id, static_cast<int>(basis.e.size()) + a)] = sr[a];
  }
  return res;
}

namespace detail {

/// d/dc_j of the monomial c^expo: expo_j * c^{expo - e_j}, 0 when expo_j = 0.
inline double monomial_derivative(const Eigen::VectorXd& c, const std::vector<long long>& expo,
                                  int j) {
  if (expo[j] == 0) return 0.0;
  double m = static_cast<double>(expo[j]);
  for (int i = 0; i < c.size(); ++i)
    m *= int_pow(c[i], i == j ? expo[i] - 1 : expo[i]);
  return m;
}

}  // namespace detail

/// Exact analytic Jacobian of assemble_step_residual with respect to the
/// packed unknowns. The algebraic rows carry the linearization
/// d/db_i b^{nu} = nu_i b^{nu} / b_i.
inline Eigen::SparseMatrix<double> step_jacobian(const ReactionNetwork& net,
                                                 const EquilibriumConstants& kappa,
                                                 const ConservedBasis& basis, const Grid& grid,
                                                 const StateField& c_new,
                                                 const BoundaryState& b_new, double dt,
                                                 double floor = kDefaultPositivityFloor) {
  (void)kappa;
  const SystemLayout lay(net, grid);
  const int n = lay.n_species;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(lay.size()) * (2 * grid.dim() + n + 2));

  for (int j = 0; j < lay.n_cells; ++j) {
    const Eigen::VectorXd c = c_new.c.col(j);
    // d(reaction)/dc: sum_a nu_i (kf alpha_j c^{alpha-e_j} - kb beta_j c^{beta-e_j})
    Eigen::MatrixXd drdc = Eigen::MatrixXd::Zero(n, n);
    for (const auto& rx : net.bulk_reactions) {
      const auto nu = rx.nu();
      for (int col = 0; col < n; ++col) {
        const double dr = rx.kf * detail::monomial_derivative(c, rx.alpha, col) -
                          rx.kb * detail::monomial_derivative(c, rx.beta, col);
        if (dr == 0.0) continue;
        for (int i = 0; i < n; ++i)
          drdc(i, col) += static_cast<double>(nu[i]) * dr;
      }
    }
    for (int i = 0; i < n; ++i) {
      const int row = lay.cell_index(j, i);
      double diag = 1.0 / dt;
      for (int axis = 0; axis < grid.dim(); ++axis) {
        const double h = grid.h(axis);
        for (int side : {-1, +1}) {
          const int nb = grid.neighbor(j, axis, side);
          if (nb >= 0) {
            diag += net.d[i] / (h * h);
            trip.emplace_back(row, lay.cell_index(nb, i), -net.d[i] / (h * h));
          } else {
            const int f = grid.face_of(j, axis, side);
            diag += 2.0 * net.d[i] / (h * h);
            trip.emplace_back(row, lay.face_index(f, i), -2.0 * net.d[i] / (h * h));
          }
        }
      }
      trip.emplace_back(row, lay.cell_index(j, i), diag);
      for (int col = 0; col < n; ++col)
        if (drdc(i, col) != 0.0) trip.emplace_back(row, lay.cell_index(j, col), -drdc(i, col));
    }
  }

  for (const auto& f : grid.boundary_faces()) {
    const double two_over_h = 2.0 / grid.h(f.axis);
    for (int k = 0; k < static_cast<int>(basis.e.size()); ++k) {
      const int row = lay.face_index(f.id, k);
      for (int i = 0; i < n; ++i) {
        const double coef = static_cast<double>(basis.e[k][i]) * net.d[i] * two_over_h;
        if (coef == 0.0) continue;
        trip.emplace_back(row, lay.cell_index(f.cell, i), coef);
        trip.emplace_back(row, lay.face_index(f.id, i), -coef);
      }
    }
    const Eigen::VectorXd b = b_new.b.col(f.id);
    for (int a = 0; a < net.surface_count(); ++a) {
      const auto& nu = net.surface_reactions[a].nu;
      for (int i = 0; i < n; ++i)
        if (nu[i] < 0 && b[i] <= floor)
          throw DegenerateConcentration(i, f.cell, b[i]);
      const int row = lay.face_index(f.id, static_cast<int>(basis.e.size()) + a);
      for (int i = 0; i < n; ++i) {
        if (nu[i] == 0) continue;
        trip.emplace_back(row, lay.face_index(f.id, i),
                          detail::monomial_derivative(b, nu, i));
      }
    }
  }

  Eigen::SparseMatrix<double> jac(lay.size(), lay.size());
  jac.setFromTriplets(trip.begin(), trip.end());
  return jac;
}

}  // namespace catalyx
