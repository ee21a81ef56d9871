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

// Shared oracles for the unit suites. These are written independently of
// the library kernels: dense Kronecker products for gates, explicit sums
// for reduced states.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qsprep/qsprep.hpp"

namespace qsprep::testing {

inline ComplexMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  return ComplexMatrix(2, 2, {a, b, c, d});
}

inline ComplexMatrix ry_matrix(double t) {
  return mat2(std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2));
}

inline ComplexMatrix rz_matrix(double t) {
  return mat2(std::exp(Complex(0, -t / 2)), 0.0, 0.0, std::exp(Complex(0, t / 2)));
}

inline ComplexMatrix projector(int bit) {
  return bit == 0 ? mat2(1.0, 0.0, 0.0, 0.0) : mat2(0.0, 0.0, 0.0, 1.0);
}

/// I (x) ... (x) op_q (x) ... (x) I with qubit 0 leftmost.
inline ComplexMatrix embed(int n, int q, const ComplexMatrix& op) {
  ComplexMatrix out = ComplexMatrix::identity(1);
  for (int k = 0; k < n; ++k) out = kron(out, k == q ? op : ComplexMatrix::identity(2));
  return out;
}

/// Block-diagonal definition of a UCR on (controls..., target), built as
/// sum_a |a><a| (x) R(theta_a) over the full register.
inline ComplexMatrix ucr_reference(int n, const std::vector<int>& controls, int target, Axis axis,
                                   const std::vector<double>& theta) {
  const std::size_t d = std::size_t{1} << n;
  ComplexMatrix out(d, d);
  const std::size_t k = controls.size();
  for (std::size_t a = 0; a < theta.size(); ++a) {
    ComplexMatrix term = ComplexMatrix::identity(1);
    for (int q = 0; q < n; ++q) {
      ComplexMatrix factor = ComplexMatrix::identity(2);
      for (std::size_t j = 0; j < k; ++j) {
        if (controls[j] == q) factor = projector(static_cast<int>((a >> (k - 1 - j)) & 1U));
      }
      if (q == target) factor = axis == Axis::Y ? ry_matrix(theta[a]) : rz_matrix(theta[a]);
      term = kron(term, factor);
    }
    out = out + term;
  }
  return out;
}

inline ComplexMatrix fixed_gate_matrix(GateKind k) {
  const double r = 1 / std::sqrt(2.0);
  switch (k) {
    case GateKind::X: return mat2(0.0, 1.0, 1.0, 0.0);
    case GateKind::H: return mat2(r, r, r, -r);
    case GateKind::T: return mat2(1.0, 0.0, 0.0, std::polar(1.0, kPi / 4));
    case GateKind::TDG: return mat2(1.0, 0.0, 0.0, std::polar(1.0, -kPi / 4));
    case GateKind::S: return mat2(1.0, 0.0, 0.0, Complex(0, 1));
    default: throw std::logic_error("not a fixed one-qubit gate");
  }
}

/// Dense unitary of a primitive-only circuit including its global phase.
inline ComplexMatrix dense_unitary(const Circuit& c) {
  const int n = c.num_qubits();
  ComplexMatrix u = ComplexMatrix::identity(std::size_t{1} << n);
  for (const Gate& g : c.gates()) {
    ComplexMatrix m;
    if (g.kind == GateKind::RY) {
      m = embed(n, g.target(), ry_matrix(g.angle));
    } else if (g.kind == GateKind::RZ) {
      m = embed(n, g.target(), rz_matrix(g.angle));
    } else if (g.kind == GateKind::CNOT) {
      ComplexMatrix off = ComplexMatrix::identity(1);
      ComplexMatrix on = ComplexMatrix::identity(1);
      for (int q = 0; q < n; ++q) {
        const ComplexMatrix id = ComplexMatrix::identity(2);
        off = kron(off, q == g.qubits[0] ? projector(0) : id);
        on = kron(on, q == g.qubits[0]   ? projector(1)
                      : q == g.qubits[1] ? fixed_gate_matrix(GateKind::X)
                                         : id);
      }
      m = off + on;
    } else {
      m = embed(n, g.target(), fixed_gate_matrix(g.kind));
    }
    u = m * u;
  }
  return std::polar(1.0, c.global_phase()) * u;
}

inline ComplexMatrix random_hermitian_psd(std::size_t d, std::size_t rank, Rng& rng) {
  ComplexMatrix g(d, rank);
  for (Complex& z : g.data()) z = random_gaussian(rng);
  ComplexMatrix m = g * adjoint(g);
  m = Complex{1.0 / trace(m).real(), 0.0} * m;
  return m;
}

inline std::vector<double> random_angles(std::size_t count, Rng& rng) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  std::vector<double> out(count);
  for (double& a : out) a = u(rng);
  return out;
}

inline std::size_t count_kind(const Circuit& c, GateKind k) {
  std::size_t n = 0;
  for (const Gate& g : c.gates()) n += g.kind == k ? 1 : 0;
  return n;
}

}  // namespace qsprep::testing
