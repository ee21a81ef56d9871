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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "test_util.hpp"

namespace qsprep {
namespace {

using testing::random_hermitian_psd;

TEST(HermitianPsdCheck, HalfIdentity) {
  const ComplexMatrix m = Complex{0.5, 0.0} * ComplexMatrix::identity(2);
  const PsdCheck c = hermitian_psd_check(m, 1e-12);
  EXPECT_TRUE(c.hermitian);
  EXPECT_TRUE(c.psd);
  EXPECT_NEAR(c.min_eigenvalue, 0.5, 1e-14);
}

TEST(HermitianPsdCheck, AntisymmetricIsNotHermitian) {
  const ComplexMatrix m(2, 2, {0.0, 1.0, -1.0, 0.0});
  EXPECT_FALSE(hermitian_psd_check(m, 1e-12).hermitian);
}

TEST(HermitianPsdCheck, IndefiniteTwoByTwo) {
  // Eigenvalues 0.5 +- 0.6.
  const ComplexMatrix m(2, 2, {0.5, 0.6, 0.6, 0.5});
  const PsdCheck c = hermitian_psd_check(m, 1e-12);
  EXPECT_TRUE(c.hermitian);
  EXPECT_FALSE(c.psd);
  EXPECT_NEAR(c.min_eigenvalue, -0.1, 1e-14);
}

TEST(HermitianPsdCheck, NonSquareThrows) {
  EXPECT_THROW(hermitian_psd_check(ComplexMatrix(2, 3), 1e-12), DimensionError);
}

TEST(Eigh, DiagonalSortedDescending) {
  const ComplexMatrix m(2, 2, {0.3, 0.0, 0.0, 0.7});
  const EigenDecomposition e = eigh(m);
  ASSERT_EQ(e.values.size(), 2U);
  EXPECT_NEAR(e.values[0], 0.7, 1e-15);
  EXPECT_NEAR(e.values[1], 0.3, 1e-15);
  EXPECT_NEAR(std::abs(e.vectors(1, 0)), 1.0, 1e-15);
}

TEST(Eigh, RejectsNonHermitian) {
  EXPECT_THROW(eigh(ComplexMatrix(2, 2, {0.0, 1.0, 0.0, 0.0})), ValidationError);
}

TEST(Eigh, ResidualAndOrthonormalityOnRandomHermitian) {
  Rng rng(7);
  for (std::size_t d : {2U, 3U, 8U, 17U, 32U}) {
    ComplexMatrix g(d, d);
    for (Complex& z : g.data()) z = random_gaussian(rng);
    const ComplexMatrix m = g + adjoint(g);
    const EigenDecomposition e = eigh(m);
    const double scale = frobenius_norm(m);
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t i = 0; i < d; ++i) {
        Complex mv{};
        for (std::size_t j = 0; j < d; ++j) mv += m(i, j) * e.vectors(j, k);
        EXPECT_LE(std::abs(mv - e.values[k] * e.vectors(i, k)), 1e-9 * scale);
      }
      if (k + 1 < d) EXPECT_GE(e.values[k], e.values[k + 1]);
    }
    const ComplexMatrix gram = adjoint(e.vectors) * e.vectors;
    EXPECT_LE(max_abs_diff(gram, ComplexMatrix::identity(d)), 1e-9);
  }
}

TEST(Eigh, TraceAndDeterminantOracleTwoByTwo) {
  // Closed form for [[a, b], [b*, c]].
  const double a = 0.2, c = -1.3;
  const Complex b{0.4, -0.9};
  const ComplexMatrix m(2, 2, {a, b, std::conj(b), c});
  const double mean = (a + c) / 2;
  const double radius = std::sqrt((a - c) * (a - c) / 4 + std::norm(b));
  const std::vector<double> ev = eigvalsh(m);
  EXPECT_NEAR(ev[0], mean + radius, 1e-14);
  EXPECT_NEAR(ev[1], mean - radius, 1e-14);
}

TEST(StateVector, RejectsBadNormAndLength) {
  EXPECT_THROW(StateVector({0.9, 0.0}), ValidationError);
  EXPECT_THROW(StateVector({1.0, 0.0, 0.0}), DimensionError);
  EXPECT_NO_THROW(StateVector({std::sqrt(0.5), Complex(0, std::sqrt(0.5))}));
}

TEST(DensityMatrix, Invariants) {
  EXPECT_THROW(DensityMatrix(ComplexMatrix(2, 2, {0.5, 0.0, 0.0, 0.4})), ValidationError);
  EXPECT_THROW(DensityMatrix(ComplexMatrix(2, 2, {0.5, 0.6, 0.6, 0.5})), ValidationError);
  EXPECT_THROW(DensityMatrix(ComplexMatrix(2, 2, {0.5, 0.1, 0.2, 0.5})), ValidationError);
  EXPECT_NO_THROW(DensityMatrix(ComplexMatrix(2, 2, {0.5, 0.5, 0.5, 0.5})));
}

TEST(TraceDistance, PureStatesClosedForm) {
  // For pure states D = sqrt(1 - |<a|b>|^2).
  Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    const StateVector a = random_state(2, rng);
    const StateVector b = random_state(2, rng);
    const double f = fidelity(a, b);
    EXPECT_NEAR(trace_distance(DensityMatrix::from_state(a), DensityMatrix::from_state(b)),
                std::sqrt(1 - f), 1e-12);
    EXPECT_NEAR(fidelity(DensityMatrix::from_state(a), DensityMatrix::from_state(b)), f, 1e-10);
  }
}

TEST(Fidelity, DiagonalClosedForm) {
  // Commuting states: F = (sum sqrt(p_i q_i))^2, D = sum |p_i - q_i| / 2.
  const DensityMatrix r1(ComplexMatrix(2, 2, {0.8, 0.0, 0.0, 0.2}));
  const DensityMatrix r2(ComplexMatrix(2, 2, {0.3, 0.0, 0.0, 0.7}));
  const double f = std::pow(std::sqrt(0.24) + std::sqrt(0.14), 2);
  EXPECT_NEAR(fidelity(r1, r2), f, 1e-13);
  EXPECT_NEAR(fidelity(r2, r1), f, 1e-13);
  EXPECT_NEAR(trace_distance(r1, r2), 0.5, 1e-14);
}

TEST(Fidelity, FuchsVanDeGraafOnRandomPairs) {
  Rng rng(11);
  for (int i = 0; i < 10; ++i) {
    const DensityMatrix a = random_density(2, 1 + static_cast<std::size_t>(i % 4), rng);
    const DensityMatrix b = random_density(2, 4, rng);
    const double f = fidelity(a, b);
    const double d = trace_distance(a, b);
    EXPECT_LE(1 - std::sqrt(f), d + 1e-10);
    EXPECT_LE(d, std::sqrt(1 - f) + 1e-10);
    EXPECT_NEAR(fidelity(a, a), 1.0, 1e-9);
  }
}

TEST(PartialTrace, ProductStateOracle) {
  Rng rng(5);
  const DensityMatrix a = random_density(1, 2, rng);
  const DensityMatrix b = random_density(2, 3, rng);
  const DensityMatrix ab = DensityMatrix::from_trusted(kron(a.matrix(), b.matrix()));
  const std::vector<int> keep_a{0};
  const std::vector<int> keep_b{1, 2};
  EXPECT_LE(max_abs_diff(partial_trace(ab, keep_a).matrix(), a.matrix()), 1e-14);
  EXPECT_LE(max_abs_diff(partial_trace(ab, keep_b).matrix(), b.matrix()), 1e-14);
}

TEST(PartialTrace, PureAndDensityPathsAgree) {
  Rng rng(9);
  const StateVector psi = random_state(4, rng);
  const DensityMatrix rho = DensityMatrix::from_state(psi);
  for (const std::vector<int>& keep :
       {std::vector<int>{0}, std::vector<int>{1, 3}, std::vector<int>{0, 2, 3}}) {
    EXPECT_LE(max_abs_diff(partial_trace(psi, keep).matrix(), partial_trace(rho, keep).matrix()),
              1e-14);
  }
}

TEST(PartialTrace, BellStateGivesMaximallyMixed) {
  const double r = 1 / std::sqrt(2.0);
  const StateVector bell({r, 0.0, 0.0, r});
  const std::vector<int> keep{1};
  const DensityMatrix red = partial_trace(bell, keep);
  EXPECT_NEAR(red(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(red(1, 1).real(), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(red(0, 1)), 0.0, 1e-15);
}

TEST(PartialTrace, RejectsBadKeepSets) {
  const StateVector psi = StateVector::basis(2, 0);
  EXPECT_THROW(partial_trace(psi, std::vector<int>{}), DimensionError);
  EXPECT_THROW(partial_trace(psi, std::vector<int>{0, 0}), DimensionError);
  EXPECT_THROW(partial_trace(psi, std::vector<int>{2}), DimensionError);
}

TEST(TraceNorm, MatchesSingularValueSum) {
  // Diagonal with signs: trace norm is the absolute sum.
  const ComplexMatrix m(3, 3, {1.0, 0, 0, 0, -2.0, 0, 0, 0, 0.5});
  EXPECT_NEAR(trace_norm(m), 3.5, 1e-14);
  // Rank-one u v^dag: trace norm is |u| |v|.
  const std::vector<Complex> u{1.0, Complex(0, 2.0)};
  const std::vector<Complex> v{3.0, 4.0};
  EXPECT_NEAR(trace_norm(outer(u, v)), std::sqrt(5.0) * 5.0, 1e-12);
}

TEST(Eigh, RandomPsdReconstruction) {
  Rng rng(21);
  const ComplexMatrix m = random_hermitian_psd(8, 8, rng);
  const EigenDecomposition e = eigh(m);
  ComplexMatrix back(8, 8);
  for (std::size_t k = 0; k < 8; ++k) {
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t j = 0; j < 8; ++j) {
        back(i, j) += e.values[k] * e.vectors(i, k) * std::conj(e.vectors(j, k));
      }
    }
  }
  EXPECT_LE(max_abs_diff(back, m), 1e-12);
}

}  // namespace
}  // namespace qsprep
