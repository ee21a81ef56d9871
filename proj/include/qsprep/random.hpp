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

// Seeded generators for test corpora: Haar-like states, random ensembles
// and density matrices of prescribed rank or band structure.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "qsprep/cholesky.hpp"
#include "qsprep/linalg.hpp"

namespace qsprep {

using Rng = std::mt19937_64;

inline Complex random_gaussian(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const double re = g(rng);
  const double im = g(rng);
  return {re, im};
}

/// Normalized complex Gaussian vector (Haar-distributed direction).
inline StateVector random_state(int num_qubits, Rng& rng) {
  std::vector<Complex> v(std::size_t{1} << num_qubits);
  for (Complex& z : v) z = random_gaussian(rng);
  return StateVector::normalized(std::move(v));
}

/// State with `support` nonzero amplitudes at random positions.
inline StateVector random_sparse_state(int num_qubits, std::size_t support, Rng& rng) {
  const std::size_t d = std::size_t{1} << num_qubits;
  std::vector<std::size_t> idx(d);
  for (std::size_t i = 0; i < d; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<Complex> v(d);
  for (std::size_t k = 0; k < std::min(support, d); ++k) v[idx[k]] = random_gaussian(rng);
  return StateVector::normalized(std::move(v));
}

/// Weights from normalized exponentials, each bounded away from zero.
inline std::vector<double> random_weights(std::size_t count, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(count);
  double total = 0.0;
  for (double& w : p) {
    w = 0.05 + e(rng);
    total += w;
  }
  for (double& w : p) w /= total;
  return p;
}

inline Ensemble random_ensemble(int num_qubits, std::size_t count, Rng& rng) {
  std::vector<StateVector> states;
  for (std::size_t i = 0; i < count; ++i) states.push_back(random_state(num_qubits, rng));
  return Ensemble(random_weights(count, rng), std::move(states));
}

/// G G^dag / Tr for a complex Gaussian d x rank matrix G: rank `rank`
/// with probability one.
inline DensityMatrix random_density(int num_qubits, std::size_t rank, Rng& rng) {
  const std::size_t d = std::size_t{1} << num_qubits;
  ComplexMatrix g(d, rank);
  for (Complex& z : g.data()) z = random_gaussian(rng);
  ComplexMatrix rho = g * adjoint(g);
  const double tr = trace(rho).real();
  rho = Complex{1.0 / tr, 0.0} * rho;
  detail::symmetrize(rho);
  return DensityMatrix::from_trusted(std::move(rho));
}

/// B B^dag / Tr for a lower-triangular B with bandwidth `band` (B_ij != 0
/// only for 0 <= i - j <= band) and a dominant positive diagonal; B is the
/// exact Cholesky factor up to scaling, so the factor has no fill-in.
inline DensityMatrix banded_density(int num_qubits, std::size_t band, Rng& rng) {
  const std::size_t d = std::size_t{1} << num_qubits;
  std::uniform_real_distribution<double> mag(0.0, 1.0);
  ComplexMatrix b(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    b(j, j) = 1.0 + mag(rng);
    for (std::size_t i = j + 1; i < std::min(d, j + band + 1); ++i) {
      // Entries decay away from the diagonal, so a drop sweep removes them
      // progressively.
      const double scale = std::pow(0.1, static_cast<double>(i - j - 1)) * mag(rng);
      b(i, j) = scale * random_gaussian(rng) / std::sqrt(2.0);
    }
  }
  ComplexMatrix rho = b * adjoint(b);
  const double tr = trace(rho).real();
  rho = Complex{1.0 / tr, 0.0} * rho;
  detail::symmetrize(rho);
  return DensityMatrix::from_trusted(std::move(rho));
}

}  // namespace qsprep
