#pragma once

// Exact rational linear algebra used for everything where floating point would
// poison an integer identity: null spaces of stoichiometric matrices, rank and
// orthogonality checks, and the search for a strictly positive conserved
// vector. Vectors returned to callers are scaled to primitive integer form.

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace catalyx::exact {

using Rational = mpq_class;
using RationalVector = std::vector<Rational>;
using RationalMatrix = std::vector<RationalVector>;  // row major

inline RationalMatrix from_integer_rows(const std::vector<std::vector<long long>>& rows,
                                        std::size_t cols) {
  RationalMatrix m;
  m.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.size() != cols) throw std::invalid_argument("from_integer_rows: ragged input");
    RationalVector rv(cols);
    for (std::size_t j = 0; j < cols; ++j) rv[j] = Rational(static_cast<long>(r[j]));
    m.push_back(std::move(rv));
  }
  return m;
}

inline Rational dot(const RationalVector& a, const RationalVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("exact::dot: size mismatch");
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// In-place reduced row echelon form. Returns the rank; pivot columns are
/// appended to *pivots when given.
inline std::size_t rref(RationalMatrix& m, std::vector<std::size_t>* pivots = nullptr) {
  if (m.empty()) return 0;
  const std::size_t rows = m.size();
  const std::size_t cols = m[0].size();
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t pivot = rank;
    while (pivot < rows && m[pivot][col] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(m[rank], m[pivot]);
    const Rational inv = 1 / m[rank][col];
    for (std::size_t j = col; j < cols; ++j) m[rank][j] *= inv;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank || m[r][col] == 0) continue;
      const Rational f = m[r][col];
      for (std::size_t j = col; j < cols; ++j) m[r][j] -= f * m[rank][j];
    }
    if (pivots) pivots->push_back(col);
    ++rank;
  }
  return rank;
}

inline std::size_t rank(RationalMatrix m) { return rref(m); }

/// Basis of the null space {x : M x = 0} of an n_rows x cols matrix.
inline std::vector<RationalVector> null_space(RationalMatrix m, std::size_t cols) {
  std::vector<std::size_t> pivots;
  const std::size_t rk = m.empty() ? 0 : rref(m, &pivots);
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t p : pivots) is_pivot[p] = true;
  std::vector<RationalVector> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    RationalVector v(cols, Rational(0));
    v[free] = 1;
    for (std::size_t r = 0; r < rk; ++r) v[pivots[r]] = -m[r][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

/// Scales a rational vector to the shortest integer vector with the same
/// direction; the first nonzero entry is made positive.
inline std::vector<long long> to_primitive_integer(const RationalVector& v) {
  mpz_class lcm_den = 1;
  for (const auto& q : v) {
    mpz_class den = q.get_den();
    mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(), den.get_mpz_t());
  }
  std::vector<mpz_class> ints(v.size());
  mpz_class g = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    ints[i] = mpz_class(v[i].get_num() * (lcm_den / v[i].get_den()));
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), ints[i].get_mpz_t());
  }
  if (g == 0) g = 1;
  int sign = 0;
  for (const auto& z : ints) {
    if (z != 0) {
      sign = (z > 0) ? 1 : -1;
      break;
    }
  }
  if (sign == 0) sign = 1;
  std::vector<long long> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    mpz_class z = ints[i] / g * sign;
    if (!z.fits_slong_p())
      throw std::overflow_error("to_primitive_integer: entry exceeds machine integer range");
    out[i] = z.get_si();
  }
  return out;
}

namespace detail {

/// Exact phase-1 simplex with Bland's rule for the feasibility system
/// A t >= 1 (componentwise) with t free. Returns t on feasibility.
inline std::optional<RationalVector> feasible_point_geq_one(const RationalMatrix& a,
                                                            std::size_t nvars) {
  const std::size_t nrows = a.size();
  if (nrows == 0) return RationalVector(nvars, Rational(1));
  // Columns: u (nvars), v (nvars), slack (nrows), artificial (nrows).
  const std::size_t n_u = nvars, n_v = nvars;
  const std::size_t ncols = n_u + n_v + nrows + nrows;
  RationalMatrix t(nrows, RationalVector(ncols + 1, Rational(0)));
  for (std::size_t i = 0; i < nrows; ++i) {
    for (std::size_t j = 0; j < nvars; ++j) {
      t[i][j] = a[i][j];
      t[i][n_u + j] = -a[i][j];
    }
    t[i][n_u + n_v + i] = -1;           // surplus
    t[i][n_u + n_v + nrows + i] = 1;    // artificial
    t[i][ncols] = 1;                    // rhs
  }
  std::vector<std::size_t> basis(nrows);
  for (std::size_t i = 0; i < nrows; ++i) basis[i] = n_u + n_v + nrows + i;
  // Objective: minimize sum of artificials; reduced costs start as the
  // negated column sums over all rows (artificials basic with cost 1).
  RationalVector cost(ncols + 1, Rational(0));
  for (std::size_t i = 0; i < nrows; ++i)
    for (std::size_t j = 0; j <= ncols; ++j) cost[j] -= t[i][j];
  for (std::size_t i = 0; i < nrows; ++i) cost[n_u + n_v + nrows + i] = 0;

  while (true) {
    std::size_t enter = ncols;
    for (std::size_t j = 0; j < ncols; ++j) {
      if (cost[j] < 0) {  // Bland: smallest index with negative reduced cost
        enter = j;
        break;
      }
    }
    if (enter == ncols) break;  // optimal
    std::size_t leave = nrows;
    Rational best_ratio = 0;
    for (std::size_t i = 0; i < nrows; ++i) {
      if (t[i][enter] > 0) {
        Rational ratio = t[i][ncols] / t[i][enter];
        if (leave == nrows || ratio < best_ratio ||
            (ratio == best_ratio && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave == nrows) return std::nullopt;  // unbounded phase-1: cannot happen, treat as infeasible
    const Rational piv = t[leave][enter];
    for (std::size_t j = 0; j <= ncols; ++j) t[leave][j] /= piv;
    for (std::size_t i = 0; i < nrows; ++i) {
      if (i == leave || t[i][enter] == 0) continue;
      const Rational f = t[i][enter];
      for (std::size_t j = 0; j <= ncols; ++j) t[i][j] -= f * t[leave][j];
    }
    const Rational fc = cost[enter];
    if (fc != 0)
      for (std::size_t j = 0; j <= ncols; ++j) cost[j] -= fc * t[leave][j];
    basis[leave] = enter;
  }
  // Feasible iff all artificials are zero at the optimum.
  for (std::size_t i = 0; i < nrows; ++i)
    if (basis[i] >= n_u + n_v + nrows && t[i][ncols] != 0) return std::nullopt;
  RationalVector tvec(nvars, Rational(0));
  for (std::size_t i = 0; i < nrows; ++i) {
    if (basis[i] < n_u) tvec[basis[i]] += t[i][ncols];
    else if (basis[i] < n_u + n_v) tvec[basis[i] - n_u] -= t[i][ncols];
  }
  return tvec;
}

}  // namespace detail

/// Searches span(basis) for a strictly positive vector; returns it in
/// primitive integer form, or nullopt when the cone misses the open orthant.
inline std::optional<std::vector<long long>> positive_combination(
    const std::vector<RationalVector>& basis, std::size_t n) {
  if (basis.empty()) return std::nullopt;
  RationalMatrix a(n, RationalVector(basis.size(), Rational(0)));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (basis[j].size() != n) throw std::invalid_argument("positive_combination: ragged basis");
    for (std::size_t i = 0; i < n; ++i) a[i][j] = basis[j][i];
  }
  auto t = detail::feasible_point_geq_one(a, basis.size());
  if (!t) return std::nullopt;
  RationalVector x(n, Rational(0));
  for (std::size_t j = 0; j < basis.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) x[i] += basis[j][i] * (*t)[j];
  for (const auto& xi : x)
    if (xi <= 0) return std::nullopt;
  return to_primitive_integer(x);
}

}  // namespace catalyx::exact
