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

// Dense complex linear algebra used throughout the library: matrix and
// state types, a cyclic Jacobi eigensolver for Hermitian matrices, norms,
// trace distance, Uhlmann fidelity and partial traces.
//
// Basis-state convention: qubit 0 is the most significant bit of a basis
// index. For an n-qubit index a, qubit q is bit (n - 1 - q).

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qsprep/error.hpp"

namespace qsprep {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// True when d is 2^n for some n >= 0.
inline bool is_power_of_two(std::size_t d) { return d != 0 && (d & (d - 1)) == 0; }

/// log2 of a power of two; throws DimensionError otherwise.
inline int log2_exact(std::size_t d) {
  if (!is_power_of_two(d)) {
    throw DimensionError("size " + std::to_string(d) + " is not a power of two");
  }
  int n = 0;
  while ((std::size_t{1} << n) < d) ++n;
  return n;
}

/// Bit mask selecting qubit q of an n-qubit basis index.
inline std::size_t qubit_mask(int num_qubits, int qubit) {
  return std::size_t{1} << (num_qubits - 1 - qubit);
}

// ---------------------------------------------------------------------------
// ComplexMatrix
// ---------------------------------------------------------------------------

/// Row-major dense complex matrix with finite entries.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  /// Zero matrix.
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Complex{0.0, 0.0}) {}

  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("matrix entry count " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(rows_) + "x" +
                           std::to_string(cols_));
    }
    for (const Complex& z : data_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw ValidationError("matrix has a non-finite entry");
      }
    }
  }

  static ComplexMatrix identity(std::size_t d) {
    ComplexMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<Complex> data() noexcept { return data_; }
  std::span<const Complex> data() const noexcept { return data_; }

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

inline ComplexMatrix adjoint(const ComplexMatrix& m) {
  ComplexMatrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = std::conj(m(i, j));
  }
  return out;
}

inline ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matrix product of " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " and " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
  }
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

inline ComplexMatrix operator*(Complex s, const ComplexMatrix& m) {
  ComplexMatrix out = m;
  for (Complex& z : out.data()) z *= s;
  return out;
}

namespace detail {
template <typename Op>
ComplexMatrix elementwise(const ComplexMatrix& a, const ComplexMatrix& b, Op op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("elementwise operation on matrices of different shapes");
  }
  ComplexMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    out.data()[i] = op(a.data()[i], b.data()[i]);
  }
  return out;
}
}  // namespace detail

inline ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
  return detail::elementwise(a, b, std::plus<Complex>{});
}

inline ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
  return detail::elementwise(a, b, std::minus<Complex>{});
}

inline Complex trace(const ComplexMatrix& m) {
  Complex t{};
  for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) t += m(i, i);
  return t;
}

/// Kronecker product; the left operand occupies the more significant bits.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const Complex aij = a(i, j);
      for (std::size_t k = 0; k < b.rows(); ++k) {
        for (std::size_t l = 0; l < b.cols(); ++l) {
          out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
      }
    }
  }
  return out;
}

/// |u><v|
inline ComplexMatrix outer(std::span<const Complex> u, std::span<const Complex> v) {
  ComplexMatrix out(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) out(i, j) = u[i] * std::conj(v[j]);
  }
  return out;
}

/// Largest |M_ab - conj(M_ba)|.
inline double hermitian_deviation(const ComplexMatrix& m) {
  if (!m.is_square()) throw DimensionError("Hermiticity needs a square matrix");
  double dev = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i; j < m.cols(); ++j) {
      dev = std::max(dev, std::abs(m(i, j) - std::conj(m(j, i))));
    }
  }
  return dev;
}

/// Largest elementwise |a - b|.
inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("comparing matrices of different shapes");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  }
  return d;
}

// ---------------------------------------------------------------------------
// State vectors and density matrices
// ---------------------------------------------------------------------------

inline constexpr double kNormTolerance = 1e-12;

/// Unit-norm amplitude vector over n qubits.
class StateVector {
 public:
  /// Validates the length (2^n) and the norm (|1 - sum |a|^2| <= 1e-12).
  explicit StateVector(std::vector<Complex> amplitudes)
      : num_qubits_(log2_exact(amplitudes.size())), amplitudes_(std::move(amplitudes)) {
    double norm2 = 0.0;
    for (const Complex& z : amplitudes_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw ValidationError("state vector has a non-finite amplitude");
      }
      norm2 += std::norm(z);
    }
    if (std::abs(norm2 - 1.0) > kNormTolerance) {
      throw ValidationError("state vector is not unit norm: sum |a|^2 = " +
                            std::to_string(norm2));
    }
  }

  /// Rescales a nonzero vector to unit norm.
  static StateVector normalized(std::vector<Complex> amplitudes) {
    double norm2 = 0.0;
    for (const Complex& z : amplitudes) norm2 += std::norm(z);
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
      throw ValidationError("cannot normalize a zero or non-finite vector");
    }
    const double s = 1.0 / std::sqrt(norm2);
    for (Complex& z : amplitudes) z *= s;
    return from_trusted(std::move(amplitudes));
  }

  /// |a> over n qubits.
  static StateVector basis(int num_qubits, std::size_t index) {
    std::vector<Complex> v(std::size_t{1} << num_qubits);
    if (index >= v.size()) throw DimensionError("basis index out of range");
    v[index] = 1.0;
    return from_trusted(std::move(v));
  }

  /// Skips the norm check; for vectors produced by norm-preserving code.
  static StateVector from_trusted(std::vector<Complex> amplitudes) {
    StateVector s;
    s.num_qubits_ = log2_exact(amplitudes.size());
    s.amplitudes_ = std::move(amplitudes);
    return s;
  }

  int num_qubits() const noexcept { return num_qubits_; }
  std::size_t dim() const noexcept { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
  const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }

  ComplexMatrix projector() const { return outer(amplitudes_, amplitudes_); }

 private:
  StateVector() = default;

  int num_qubits_ = 0;
  std::vector<Complex> amplitudes_;
};

/// <u|v>
inline Complex inner(std::span<const Complex> u, std::span<const Complex> v) {
  if (u.size() != v.size()) throw DimensionError("inner product of different sizes");
  Complex s{};
  for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
  return s;
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver (cyclic Jacobi)
// ---------------------------------------------------------------------------

/// Eigenvalues in descending order; column i of `vectors` belongs to values[i].
struct EigenDecomposition {
  std::vector<double> values;
  ComplexMatrix vectors;
};

namespace detail {

inline double frobenius(std::span<const Complex> data) {
  double s = 0.0;
  for (const Complex& z : data) s += std::norm(z);
  return std::sqrt(s);
}

// Diagonalizes a Hermitian matrix in place. The off-diagonal stopping
// criterion is Frobenius mass <= 1e-14 * ||M||_F, with at most 100 sweeps.
// Entries negligible against both diagonal neighbours are flushed to zero
// after the third sweep so the criterion is reachable in floating point.
inline std::vector<double> jacobi(ComplexMatrix& a, ComplexMatrix* v) {
  const std::size_t d = a.rows();
  const double fro = frobenius(a.data());
  const double target = 1e-14 * fro;
  if (v != nullptr) *v = ComplexMatrix::identity(d);

  for (std::size_t i = 0; i < d; ++i) a(i, i) = a(i, i).real();

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) s += std::norm(a(p, q));
    }
    return std::sqrt(2.0 * s);
  };

  for (int sweep = 0; sweep < 100; ++sweep) {
    if (off_norm() <= target) break;
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const Complex b = a(p, q);
        const double mag = std::abs(b);
        if (mag == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double g = 100.0 * mag;
        if (sweep > 3 && std::abs(app) + g == std::abs(app) &&
            std::abs(aqq) + g == std::abs(aqq)) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        // G = diag(1, e^{-i phase}) * [[c, s], [-s, c]] zeroes (G^dag A G)_pq.
        const Complex phase = b / mag;
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const Complex gqp = -s * std::conj(phase);
        const Complex gqq = c * std::conj(phase);
        for (std::size_t k = 0; k < d; ++k) {
          if (k == p || k == q) continue;
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          const Complex nkp = akp * c + akq * gqp;
          const Complex nkq = akp * s + akq * gqq;
          a(k, p) = nkp;
          a(k, q) = nkq;
          a(p, k) = std::conj(nkp);
          a(q, k) = std::conj(nkq);
        }
        a(p, p) = app - t * mag;
        a(q, q) = aqq + t * mag;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        if (v != nullptr) {
          ComplexMatrix& vm = *v;
          for (std::size_t k = 0; k < d; ++k) {
            const Complex vkp = vm(k, p);
            const Complex vkq = vm(k, q);
            vm(k, p) = vkp * c + vkq * gqp;
            vm(k, q) = vkp * s + vkq * gqq;
          }
        }
      }
    }
  }

  std::vector<double> values(d);
  for (std::size_t i = 0; i < d; ++i) values[i] = a(i, i).real();
  return values;
}

inline void symmetrize(ComplexMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    m(i, i) = m(i, i).real();
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const Complex avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
      m(i, j) = avg;
      m(j, i) = std::conj(avg);
    }
  }
}

inline void require_hermitian(const ComplexMatrix& m, double tol, const char* who) {
  if (!m.is_square()) {
    throw DimensionError(std::string(who) + ": matrix is not square");
  }
  if (hermitian_deviation(m) > tol) {
    throw ValidationError(std::string(who) + ": matrix is not Hermitian");
  }
}

}  // namespace detail

/// Full eigendecomposition of a Hermitian matrix (within 1e-10).
inline EigenDecomposition eigh(const ComplexMatrix& m) {
  detail::require_hermitian(m, 1e-10, "eigh");
  ComplexMatrix work = m;
  ComplexMatrix vecs;
  std::vector<double> raw = detail::jacobi(work, &vecs);

  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return raw[x] > raw[y]; });

  EigenDecomposition out{std::vector<double>(raw.size()), ComplexMatrix(m.rows(), m.cols())};
  for (std::size_t j = 0; j < order.size(); ++j) {
    out.values[j] = raw[order[j]];
    for (std::size_t i = 0; i < m.rows(); ++i) out.vectors(i, j) = vecs(i, order[j]);
  }
  return out;
}

/// Eigenvalues only, descending.
inline std::vector<double> eigvalsh(const ComplexMatrix& m) {
  detail::require_hermitian(m, 1e-10, "eigvalsh");
  ComplexMatrix work = m;
  std::vector<double> values = detail::jacobi(work, nullptr);
  std::sort(values.begin(), values.end(), std::greater<double>{});
  return values;
}

struct PsdCheck {
  bool hermitian = false;
  bool psd = false;
  /// Smallest eigenvalue of the Hermitian part (M + M^dag) / 2.
  double min_eigenvalue = 0.0;
};

inline PsdCheck hermitian_psd_check(const ComplexMatrix& m, double tol) {
  if (!m.is_square()) throw DimensionError("hermitian_psd_check: matrix is not square");
  PsdCheck out;
  out.hermitian = hermitian_deviation(m) <= tol;
  ComplexMatrix sym(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      sym(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    }
  }
  const std::vector<double> values = eigvalsh(sym);
  out.min_eigenvalue = values.empty() ? 0.0 : values.back();
  out.psd = out.hermitian && out.min_eigenvalue >= -tol;
  return out;
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

inline double frobenius_norm(const ComplexMatrix& m) { return detail::frobenius(m.data()); }

/// Sum of singular values. Hermitian inputs use |eigenvalues|; others use
/// the dilation [[0, M], [M^dag, 0]], whose eigenvalues are +-sigma_i, so
/// small singular values keep absolute accuracy.
inline double trace_norm(const ComplexMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  ComplexMatrix h;
  if (m.is_square() && hermitian_deviation(m) <= 1e-14 * (1.0 + frobenius_norm(m))) {
    h = m;
  } else {
    const std::size_t r = m.rows();
    h = ComplexMatrix(r + m.cols(), r + m.cols());
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) {
        h(i, r + j) = m(i, j);
        h(r + j, i) = std::conj(m(i, j));
      }
    }
  }
  detail::symmetrize(h);
  double s = 0.0;
  for (double lambda : eigvalsh(h)) s += std::abs(lambda);
  return h.rows() == m.rows() ? s : 0.5 * s;
}

// ---------------------------------------------------------------------------
// Density matrices
// ---------------------------------------------------------------------------

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-12;
inline constexpr double kPsdTolerance = 1e-10;

/// Hermitian, PSD, trace-one 2^n x 2^n matrix.
class DensityMatrix {
 public:
  /// Checks every invariant, including PSD (one eigendecomposition).
  explicit DensityMatrix(ComplexMatrix m) : matrix_(std::move(m)) {
    check_shape_and_trace();
    const PsdCheck check = hermitian_psd_check(matrix_, kPsdTolerance);
    if (!check.psd) {
      throw ValidationError("density matrix is not positive semidefinite (min eigenvalue " +
                            std::to_string(check.min_eigenvalue) + ")");
    }
  }

  /// Checks shape, Hermiticity and trace but not PSD. For matrices that are
  /// PSD by construction (AA^dag, partial traces of simulated states).
  static DensityMatrix from_trusted(ComplexMatrix m) {
    DensityMatrix out;
    out.matrix_ = std::move(m);
    out.check_shape_and_trace();
    return out;
  }

  static DensityMatrix from_state(const StateVector& psi) {
    return from_trusted(psi.projector());
  }

  int num_qubits() const noexcept { return num_qubits_; }
  std::size_t dim() const noexcept { return matrix_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return matrix_(i, j); }

 private:
  DensityMatrix() = default;

  void check_shape_and_trace() {
    if (!matrix_.is_square()) throw DimensionError("density matrix is not square");
    num_qubits_ = log2_exact(matrix_.rows());
    if (hermitian_deviation(matrix_) > kHermitianTolerance) {
      throw ValidationError("density matrix is not Hermitian");
    }
    const Complex tr = trace(matrix_);
    if (std::abs(tr - 1.0) > kTraceTolerance) {
      throw ValidationError("density matrix trace is " + std::to_string(tr.real()) +
                            ", expected 1");
    }
  }

  int num_qubits_ = 0;
  ComplexMatrix matrix_;
};

/// D = ||rho1 - rho2||_* / 2.
inline double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  if (rho1.dim() != rho2.dim()) throw DimensionError("trace_distance: dimension mismatch");
  ComplexMatrix diff = rho1.matrix() - rho2.matrix();
  detail::symmetrize(diff);
  double s = 0.0;
  for (double lambda : eigvalsh(diff)) s += std::abs(lambda);
  return std::min(1.0, 0.5 * s);
}

namespace detail {

/// Eigenvalues at or below this are indistinguishable from rounding noise.
inline double noise_floor(std::span<const double> values) {
  double top = 0.0;
  for (double v : values) top = std::max(top, std::abs(v));
  return 4.0 * static_cast<double>(values.size()) * std::numeric_limits<double>::epsilon() * top;
}

// V diag(sqrt(lambda)) V^dag. Eigenvalues in [-1e-10, noise floor] map to 0.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  const EigenDecomposition e = eigh(m);
  const std::size_t d = m.rows();
  std::vector<double> roots(d);
  const double floor = noise_floor(e.values);
  for (std::size_t i = 0; i < d; ++i) {
    if (e.values[i] < -kPsdTolerance) {
      throw ValidationError("matrix square root of a non-PSD matrix (eigenvalue " +
                            std::to_string(e.values[i]) + ")");
    }
    roots[i] = e.values[i] > floor ? std::sqrt(e.values[i]) : 0.0;
  }
  ComplexMatrix out(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    if (roots[k] == 0.0) continue;
    for (std::size_t i = 0; i < d; ++i) {
      const Complex vik = e.vectors(i, k) * roots[k];
      if (vik == Complex{}) continue;
      for (std::size_t j = 0; j < d; ++j) out(i, j) += vik * std::conj(e.vectors(j, k));
    }
  }
  return out;
}

}  // namespace detail

/// Uhlmann fidelity F = (Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2, so that
/// 1 - sqrt(F) <= D <= sqrt(1 - F).
inline double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  if (rho1.dim() != rho2.dim()) throw DimensionError("fidelity: dimension mismatch");
  const ComplexMatrix root = detail::psd_sqrt(rho1.matrix());
  ComplexMatrix x = root * rho2.matrix() * root;
  detail::symmetrize(x);
  const std::vector<double> ev = eigvalsh(x);
  const double floor = detail::noise_floor(ev);
  double s = 0.0;
  for (double lambda : ev) s += lambda > floor ? std::sqrt(lambda) : 0.0;
  return std::min(1.0, s * s);
}

/// |<psi|phi>|^2 for pure states.
inline double fidelity(const StateVector& psi, const StateVector& phi) {
  return std::norm(inner(psi.amplitudes(), phi.amplitudes()));
}

namespace detail {

struct SplitIndex {
  std::vector<std::size_t> kept_masks;
  std::vector<std::size_t> traced_masks;
};

inline SplitIndex split_qubits(int num_qubits, std::span<const int> keep) {
  if (keep.empty()) throw DimensionError("partial_trace: keep set is empty");
  std::vector<int> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DimensionError("partial_trace: duplicate qubit in keep set");
  }
  if (sorted.front() < 0 || sorted.back() >= num_qubits) {
    throw DimensionError("partial_trace: qubit index out of range");
  }
  SplitIndex out;
  for (int q = 0; q < num_qubits; ++q) {
    const std::size_t mask = qubit_mask(num_qubits, q);
    if (std::binary_search(sorted.begin(), sorted.end(), q)) {
      out.kept_masks.push_back(mask);
    } else {
      out.traced_masks.push_back(mask);
    }
  }
  return out;
}

// Scatter the bits of `value` (MSB first) onto the given masks.
inline std::size_t scatter(std::size_t value, const std::vector<std::size_t>& masks) {
  std::size_t out = 0;
  const std::size_t k = masks.size();
  for (std::size_t i = 0; i < k; ++i) {
    if ((value >> (k - 1 - i)) & 1U) out |= masks[i];
  }
  return out;
}

}  // namespace detail

/// Reduced density matrix over `keep` (ordered by ascending qubit index).
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  const int n = rho.num_qubits();
  const detail::SplitIndex split = detail::split_qubits(n, keep);
  const std::size_t dk = std::size_t{1} << split.kept_masks.size();
  const std::size_t dt = std::size_t{1} << split.traced_masks.size();
  std::vector<std::size_t> kept_index(dk), traced_index(dt);
  for (std::size_t a = 0; a < dk; ++a) kept_index[a] = detail::scatter(a, split.kept_masks);
  for (std::size_t t = 0; t < dt; ++t) traced_index[t] = detail::scatter(t, split.traced_masks);

  ComplexMatrix out(dk, dk);
  for (std::size_t a = 0; a < dk; ++a) {
    for (std::size_t b = 0; b < dk; ++b) {
      Complex s{};
      for (std::size_t t = 0; t < dt; ++t) {
        s += rho(kept_index[a] | traced_index[t], kept_index[b] | traced_index[t]);
      }
      out(a, b) = s;
    }
  }
  detail::symmetrize(out);
  return DensityMatrix::from_trusted(std::move(out));
}

/// Reduced density matrix of a pure state, without forming |psi><psi|.
inline DensityMatrix partial_trace(const StateVector& psi, std::span<const int> keep) {
  const int n = psi.num_qubits();
  const detail::SplitIndex split = detail::split_qubits(n, keep);
  const std::size_t dk = std::size_t{1} << split.kept_masks.size();
  const std::size_t dt = std::size_t{1} << split.traced_masks.size();
  std::vector<std::size_t> kept_index(dk), traced_index(dt);
  for (std::size_t a = 0; a < dk; ++a) kept_index[a] = detail::scatter(a, split.kept_masks);
  for (std::size_t t = 0; t < dt; ++t) traced_index[t] = detail::scatter(t, split.traced_masks);

  ComplexMatrix out(dk, dk);
  for (std::size_t t = 0; t < dt; ++t) {
    for (std::size_t a = 0; a < dk; ++a) {
      const Complex pa = psi[kept_index[a] | traced_index[t]];
      if (pa == Complex{}) continue;
      for (std::size_t b = 0; b < dk; ++b) {
        out(a, b) += pa * std::conj(psi[kept_index[b] | traced_index[t]]);
      }
    }
  }
  detail::symmetrize(out);
  return DensityMatrix::from_trusted(std::move(out));
}

}  // namespace qsprep
