// Copyright 2026 The qsprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Cholesky factorizations of density matrices and their conversion into
// ensembles of pure states.
//
// A factor M = (P L)(P L)^dag is stored as the lower-triangular L in pivot
// order together with the permutation; row i of L belongs to original index
// permutation[i]. Pruning the all-zero columns of P L gives the 2^n x l
// matrix A whose columns are sqrt(p_i) |psi_i>.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qsprep/error.hpp"
#include "qsprep/linalg.hpp"

namespace qsprep {

enum class FactorKind { Complete, Incomplete };

struct CholeskyFactor {
  ComplexMatrix lower;
  std::vector<std::size_t> permutation;
  /// Number of columns with a positive pivot.
  std::size_t rank = 0;
  FactorKind kind = FactorKind::Complete;
  double drop_tolerance = 0.0;
  /// Shift delta of the successful attempt on M + delta I (0 if none).
  double diagonal_shift = 0.0;
  /// Every shift attempted, in order, starting with 0.
  std::vector<double> shift_trail;

  std::size_t dim() const noexcept { return lower.rows(); }

  std::size_t nnz() const {
    return static_cast<std::size_t>(std::count_if(
        lower.data().begin(), lower.data().end(), [](const Complex& z) { return z != Complex{}; }));
  }

  /// P L in original row order.
  ComplexMatrix permuted_factor() const {
    ComplexMatrix out(lower.rows(), lower.cols());
    for (std::size_t i = 0; i < lower.rows(); ++i) {
      for (std::size_t j = 0; j < lower.cols(); ++j) out(permutation[i], j) = lower(i, j);
    }
    return out;
  }

  /// (P L)(P L)^dag
  ComplexMatrix reconstruct() const {
    const ComplexMatrix a = permuted_factor();
    return a * adjoint(a);
  }
};

/// The pruned 2^n x l factor A with AA^dag approximating rho.
struct FactorMatrix {
  ComplexMatrix a;
  FactorKind kind = FactorKind::Complete;
  std::size_t rank = 0;
  std::size_t factor_nnz = 0;
  double drop_tolerance = 0.0;
  double diagonal_shift = 0.0;

  std::size_t columns() const noexcept { return a.cols(); }
};

/// Weights p_i with pure states |psi_i>; rho = sum_i p_i |psi_i><psi_i|.
class Ensemble {
 public:
  Ensemble(std::vector<double> weights, std::vector<StateVector> states)
      : weights_(std::move(weights)), states_(std::move(states)) {
    if (weights_.empty()) throw ValidationError("ensemble is empty");
    if (weights_.size() != states_.size()) {
      throw DimensionError("ensemble has " + std::to_string(weights_.size()) + " weights but " +
                           std::to_string(states_.size()) + " states");
    }
    double total = 0.0;
    for (double p : weights_) {
      if (!(p > 0.0) || p > 1.0 + 1e-12) {
        throw ValidationError("ensemble weight " + std::to_string(p) + " outside (0, 1]");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw ValidationError("ensemble weights sum to " + std::to_string(total));
    }
    for (const StateVector& s : states_) {
      if (s.num_qubits() != states_.front().num_qubits()) {
        throw DimensionError("ensemble states have different qubit counts");
      }
    }
  }

  std::size_t size() const noexcept { return weights_.size(); }
  int num_qubits() const noexcept { return states_.front().num_qubits(); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<StateVector>& states() const noexcept { return states_; }

  /// sum_i p_i |psi_i><psi_i|
  ComplexMatrix density() const {
    const std::size_t d = states_.front().dim();
    ComplexMatrix rho(d, d);
    for (std::size_t i = 0; i < size(); ++i) {
      const auto amps = states_[i].amplitudes();
      for (std::size_t a = 0; a < d; ++a) {
        if (amps[a] == Complex{}) continue;
        const Complex pa = weights_[i] * amps[a];
        for (std::size_t b = 0; b < d; ++b) rho(a, b) += pa * std::conj(amps[b]);
      }
    }
    return rho;
  }

 private:
  std::vector<double> weights_;
  std::vector<StateVector> states_;
};

namespace detail {

inline double max_real_diagonal(const ComplexMatrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) s = std::max(s, m(i, i).real());
  return s;
}

inline void swap_symmetric(ComplexMatrix& w, std::size_t i, std::size_t j) {
  if (i == j) return;
  for (std::size_t k = 0; k < w.cols(); ++k) std::swap(w(i, k), w(j, k));
  for (std::size_t k = 0; k < w.rows(); ++k) std::swap(w(k, i), w(k, j));
}

}  // namespace detail

/// Cholesky with diagonal pivoting (largest remaining diagonal first, ties to
/// the lowest original index). Stops once the largest remaining diagonal is
/// <= rank_tol * max initial diagonal; the accepted pivot count is the rank
/// and the remaining columns of L are zero.
inline CholeskyFactor pivoted_cholesky(const ComplexMatrix& m, double rank_tol = 1e-10) {
  if (!m.is_square()) throw DimensionError("pivoted_cholesky: matrix is not square");
  if (hermitian_deviation(m) > 1e-10) {
    throw ValidationError("pivoted_cholesky: matrix is not Hermitian");
  }
  const std::size_t d = m.rows();
  ComplexMatrix w = m;
  CholeskyFactor f;
  f.lower = ComplexMatrix(d, d);
  f.permutation.resize(d);
  std::iota(f.permutation.begin(), f.permutation.end(), std::size_t{0});
  f.kind = FactorKind::Complete;
  f.shift_trail = {0.0};

  const double scale = detail::max_real_diagonal(m);
  const double stop_tol = rank_tol * scale;
  const double neg_tol = std::max(rank_tol, 1e-14) * scale;

  std::size_t j = 0;
  for (; j < d; ++j) {
    std::size_t p = j;
    for (std::size_t i = j + 1; i < d; ++i) {
      const double di = w(i, i).real();
      const double dp = w(p, p).real();
      if (di > dp || (di == dp && f.permutation[i] < f.permutation[p])) p = i;
    }
    const double pivot = w(p, p).real();
    if (pivot <= stop_tol) break;

    detail::swap_symmetric(w, j, p);
    for (std::size_t k = 0; k < j; ++k) std::swap(f.lower(j, k), f.lower(p, k));
    std::swap(f.permutation[j], f.permutation[p]);

    const double ljj = std::sqrt(pivot);
    f.lower(j, j) = ljj;
    for (std::size_t i = j + 1; i < d; ++i) f.lower(i, j) = w(i, j) / ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      const Complex lij = f.lower(i, j);
      if (lij == Complex{}) continue;
      for (std::size_t k = j + 1; k < d; ++k) w(i, k) -= lij * std::conj(f.lower(k, j));
    }
  }
  f.rank = j;

  // The untouched Schur complement must be negligible for a PSD input.
  const double off_tol = 10.0 * neg_tol + 1e-12 * scale;
  for (std::size_t i = j; i < d; ++i) {
    if (w(i, i).real() < -neg_tol) {
      throw IndefiniteMatrixError("pivoted_cholesky: pivot " + std::to_string(w(i, i).real()) +
                                  " below -tolerance; matrix is not PSD");
    }
    for (std::size_t k = j; k < d; ++k) {
      if (k != i && std::abs(w(i, k)) > off_tol) {
        throw IndefiniteMatrixError(
            "pivoted_cholesky: residual off-diagonal mass with vanishing pivots; matrix is not "
            "PSD");
      }
    }
  }
  return f;
}

struct IncompleteCholeskyOptions {
  /// Reorder columns by ascending nonzero count of M (ties by index) to
  /// limit fill-in.
  bool reorder = false;
};

namespace detail {

// One attempt of threshold-dropping Cholesky on the (already permuted)
// matrix plus shift * I. Returns false on breakdown.
inline bool incomplete_attempt(const ComplexMatrix& mp, double drop_tol, double shift,
                               CholeskyFactor& f) {
  const std::size_t d = mp.rows();
  ComplexMatrix w = mp;
  for (std::size_t i = 0; i < d; ++i) w(i, i) += shift;
  f.lower = ComplexMatrix(d, d);
  f.rank = 0;

  const double scale = std::max(max_real_diagonal(mp), 0.0);
  const double zero_tol = 1e-14 * scale;
  const double negligible = 1e-13 * scale;
  std::vector<std::size_t> nz;
  nz.reserve(d);

  for (std::size_t j = 0; j < d; ++j) {
    const double pivot = w(j, j).real();
    double col_max = 0.0;
    for (std::size_t i = j + 1; i < d; ++i) col_max = std::max(col_max, std::abs(w(i, j)));

    if (pivot <= zero_tol) {
      if (pivot >= -negligible && col_max <= negligible) continue;  // structurally zero column
      return false;
    }

    const double ljj = std::sqrt(pivot);
    const double threshold = drop_tol * std::sqrt(std::max(mp(j, j).real(), 0.0));
    f.lower(j, j) = ljj;
    ++f.rank;
    nz.clear();
    for (std::size_t i = j + 1; i < d; ++i) {
      const Complex v = w(i, j) / ljj;
      if (v == Complex{} || std::abs(v) < threshold) continue;
      f.lower(i, j) = v;
      nz.push_back(i);
    }
    for (std::size_t i : nz) {
      const Complex lij = f.lower(i, j);
      for (std::size_t k : nz) w(i, k) -= lij * std::conj(f.lower(k, j));
    }
  }
  return true;
}

}  // namespace detail

/// Column-oriented Cholesky with threshold dropping: a computed off-diagonal
/// L_ij with |L_ij| < drop_tol * sqrt(M_jj) is zeroed before it is used.
/// drop_tol = 0 is the complete unpivoted factorization. On breakdown the
/// factorization is retried on M + delta I, delta = 1e-12, 1e-11, ... (8
/// retries).
inline CholeskyFactor incomplete_cholesky(const ComplexMatrix& m, double drop_tol = 0.0,
                                          IncompleteCholeskyOptions options = {}) {
  if (!m.is_square()) throw DimensionError("incomplete_cholesky: matrix is not square");
  if (!(drop_tol >= 0.0)) throw ValidationError("incomplete_cholesky: drop tolerance < 0");
  if (hermitian_deviation(m) > 1e-10) {
    throw ValidationError("incomplete_cholesky: matrix is not Hermitian");
  }
  const std::size_t d = m.rows();

  CholeskyFactor f;
  f.kind = drop_tol > 0.0 ? FactorKind::Incomplete : FactorKind::Complete;
  f.drop_tolerance = drop_tol;
  f.permutation.resize(d);
  std::iota(f.permutation.begin(), f.permutation.end(), std::size_t{0});
  if (options.reorder) {
    std::vector<std::size_t> counts(d, 0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) counts[j] += m(i, j) != Complex{} ? 1 : 0;
    }
    std::stable_sort(f.permutation.begin(), f.permutation.end(),
                     [&](std::size_t x, std::size_t y) { return counts[x] < counts[y]; });
  }
  ComplexMatrix mp(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) mp(i, j) = m(f.permutation[i], f.permutation[j]);
  }

  double shift = 0.0;
  for (int attempt = 0; attempt <= 8; ++attempt) {
    f.shift_trail.push_back(shift);
    if (detail::incomplete_attempt(mp, drop_tol, shift, f)) {
      f.diagonal_shift = shift;
      return f;
    }
    shift = attempt == 0 ? 1e-12 : shift * 10.0;
  }
  throw BreakdownError("incomplete_cholesky: breakdown persists after 8 diagonal shifts",
                       f.shift_trail);
}

/// A = P L with all-zero columns removed.
inline FactorMatrix prune_zero_columns(const CholeskyFactor& f) {
  const ComplexMatrix pl = f.permuted_factor();
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < pl.cols(); ++j) {
    for (std::size_t i = 0; i < pl.rows(); ++i) {
      if (pl(i, j) != Complex{}) {
        keep.push_back(j);
        break;
      }
    }
  }
  FactorMatrix out;
  out.a = ComplexMatrix(pl.rows(), keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c) {
    for (std::size_t i = 0; i < pl.rows(); ++i) out.a(i, c) = pl(i, keep[c]);
  }
  out.kind = f.kind;
  out.rank = f.rank;
  out.factor_nnz = f.nnz();
  out.drop_tolerance = f.drop_tolerance;
  out.diagonal_shift = f.diagonal_shift;
  return out;
}

/// p'_i = (A^dag A)_ii, p_i = p'_i / sum p', psi_i = A_i / sqrt(p'_i).
/// Columns with p'_i <= 1e-14 are dropped.
inline Ensemble ensemble_from_factor(const FactorMatrix& factor) {
  const ComplexMatrix& a = factor.a;
  std::vector<double> raw;
  std::vector<StateVector> states;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double pj = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) pj += std::norm(a(i, j));
    if (pj <= 1e-14) continue;
    std::vector<Complex> col(a.rows());
    const double inv = 1.0 / std::sqrt(pj);
    for (std::size_t i = 0; i < a.rows(); ++i) col[i] = a(i, j) * inv;
    raw.push_back(pj);
    states.push_back(StateVector::normalized(std::move(col)));
  }
  if (raw.empty()) throw ValidationError("ensemble_from_factor: every column is negligible");
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  for (double& p : raw) p /= total;
  return Ensemble(std::move(raw), std::move(states));
}

/// Spectral ensemble {lambda_i, |lambda_i>} over eigenvalues > rank_tol.
inline Ensemble ensemble_from_eigh(const DensityMatrix& rho, double rank_tol = 1e-10) {
  const EigenDecomposition e = eigh(rho.matrix());
  std::vector<double> weights;
  std::vector<StateVector> states;
  for (std::size_t k = 0; k < e.values.size(); ++k) {
    if (e.values[k] <= rank_tol) continue;
    std::vector<Complex> col(rho.dim());
    for (std::size_t i = 0; i < rho.dim(); ++i) col[i] = e.vectors(i, k);
    weights.push_back(e.values[k]);
    states.push_back(StateVector::normalized(std::move(col)));
  }
  if (weights.empty()) throw ValidationError("ensemble_from_eigh: no eigenvalue above tolerance");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& p : weights) p /= total;
  return Ensemble(std::move(weights), std::move(states));
}

}  // namespace qsprep
