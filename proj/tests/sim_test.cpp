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

using testing::dense_unitary;
using testing::random_angles;

Circuit random_circuit(int n, int gates, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_int_distribution<int> qubit(0, n - 1);
  Circuit c(n);
  for (int i = 0; i < gates; ++i) {
    const int q = qubit(rng);
    const int r = (q + 1 + qubit(rng) % std::max(n - 1, 1)) % n;
    switch (pick(rng)) {
      case 0: c.append(Gate::ry(q, random_angles(1, rng)[0])); break;
      case 1: c.append(Gate::rz(q, random_angles(1, rng)[0])); break;
      case 2: c.append(Gate::h(q)); break;
      case 3: c.append(Gate::t(q)); break;
      case 4: c.append(Gate::s(q)); break;
      case 5:
        if (n > 1) c.append(Gate::cnot(q, r));
        break;
      case 6:
        if (n > 2) {
          const int s = (r + 1) % n == q ? (r + 2) % n : (r + 1) % n;
          if (s != q && s != r) c.append(Gate::cswap(q, r, s));
        }
        break;
      case 7:
        if (n > 1) c.append(Gate::ucr(Axis::Y, {r}, q, random_angles(2, rng)));
        break;
      case 8:
        if (n > 1) c.append(Gate::controlled({{r, false}}, {Gate::h(q), Gate::t(q)}));
        break;
      default: c.append(Gate::x(q)); break;
    }
  }
  return c;
}

TEST(RunPure, EmptyCircuitLeavesInput) {
  Rng rng(1);
  const StateVector psi = random_state(3, rng);
  const StateVector out = run_pure(Circuit(3), psi);
  for (std::size_t i = 0; i < psi.dim(); ++i) EXPECT_EQ(out[i], psi[i]);
}

TEST(RunPure, XFlipsGround) {
  Circuit c(1);
  c.append(Gate::x(0));
  const StateVector out = run_pure(c);
  EXPECT_EQ(out[1], Complex(1.0));
  EXPECT_EQ(out[0], Complex{});
}

TEST(RunPure, WidthMismatchThrows) {
  EXPECT_THROW(run_pure(Circuit(2), StateVector::basis(3, 0)), Error);
}

TEST(RunPure, ColumnsMatchDenseUnitaryOfLoweredCircuit) {
  Rng rng(2);
  for (int n = 1; n <= 5; ++n) {
    const Circuit c = random_circuit(n, 40, rng);
    const ComplexMatrix u = dense_unitary(lower_all(c, {.skip_zero = false}));
    for (std::size_t a = 0; a < u.cols(); ++a) {
      const StateVector out = run_pure(c, StateVector::basis(n, a));
      for (std::size_t i = 0; i < u.rows(); ++i) EXPECT_LE(std::abs(out[i] - u(i, a)), 1e-12);
    }
  }
}

TEST(RunPure, ColumnsMatchUnitaryOf) {
  Rng rng(3);
  for (int n = 2; n <= 6; ++n) {
    const Circuit c = random_circuit(n, 30, rng);
    const ComplexMatrix u = unitary_of(c);
    for (std::size_t a = 0; a < u.cols(); a += 3) {
      const StateVector out = run_pure(c, StateVector::basis(n, a));
      for (std::size_t i = 0; i < u.rows(); ++i) EXPECT_LE(std::abs(out[i] - u(i, a)), 1e-12);
    }
  }
}

TEST(RunPure, PreservesNorm) {
  Rng rng(4);
  const Circuit c = random_circuit(6, 200, rng);
  const StateVector out = run_pure(c, random_state(6, rng));
  double s = 0.0;
  for (const Complex& z : out.amplitudes()) s += std::norm(z);
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(RunPure, SynthPureCrossCheck) {
  Rng rng(5);
  const StateVector psi = random_state(6, rng);
  EXPECT_GE(fidelity(run_pure(synth_pure(psi)), psi), 1 - 1e-10);
}

TEST(RunDensity, EmptyCircuitLeavesInput) {
  Rng rng(6);
  const DensityMatrix rho = random_density(2, 3, rng);
  EXPECT_LE(max_abs_diff(run_density(Circuit(2), rho).matrix(), rho.matrix()), 0.0);
}

TEST(RunDensity, MatchesPureOuterProduct) {
  Rng rng(7);
  for (int n = 1; n <= 6; ++n) {
    const Circuit c = random_circuit(n, 30, rng);
    const StateVector v = random_state(n, rng);
    const StateVector out = run_pure(c, v);
    const DensityMatrix rho = run_density(c, DensityMatrix::from_state(v));
    EXPECT_LE(max_abs_diff(rho.matrix(), outer(out.amplitudes(), out.amplitudes())), 1e-12);
    EXPECT_NEAR(trace(rho.matrix()).real(), 1.0, 1e-12);
    EXPECT_LE(hermitian_deviation(rho.matrix()), 1e-12);
  }
}

TEST(RunDensity, MatchesConjugationByDenseUnitary) {
  Rng rng(8);
  const Circuit c = random_circuit(3, 25, rng);
  const DensityMatrix rho = random_density(3, 4, rng);
  const ComplexMatrix u = dense_unitary(lower_all(c, {.skip_zero = false}));
  EXPECT_LE(max_abs_diff(run_density(c, rho).matrix(), u * rho.matrix() * adjoint(u)), 1e-12);
}

TEST(RunDensity, CswapSwapsBlocksWhenControlSet) {
  Rng rng(9);
  const DensityMatrix r0 = random_density(1, 2, rng);
  const DensityMatrix r1 = random_density(1, 2, rng);
  const ComplexMatrix one(2, 2, {0.0, 0.0, 0.0, 1.0});
  const DensityMatrix in = DensityMatrix::from_trusted(kron(kron(one, r0.matrix()), r1.matrix()));
  Circuit c(3);
  c.append(Gate::cswap(0, 1, 2));
  const DensityMatrix out = run_density(c, in);
  const ComplexMatrix expect = kron(kron(one, r1.matrix()), r0.matrix());
  EXPECT_LE(max_abs_diff(out.matrix(), expect), 1e-14);
}

TEST(RunDensity, TwoStateMixing) {
  // ancilla (x) rho0 (x) rho1, RY(2 alpha) on the ancilla with cos^2 alpha =
  // p, CSWAP ladder, keep the first register: p rho0 + (1 - p) rho1.
  Rng rng(10);
  for (int n = 1; n <= 2; ++n) {
    const DensityMatrix r0 = random_density(n, 2, rng);
    const DensityMatrix r1 = random_density(n, 3, rng);
    for (double p : {0.0, 0.3, 0.5, 1.0}) {
      const int width = 2 * n + 1;
      Circuit c(width);
      c.append(Gate::ry(0, 2 * std::acos(std::sqrt(p))));
      for (int q = 0; q < n; ++q) c.append(Gate::cswap(0, 1 + q, 1 + n + q));
      const ComplexMatrix zero(2, 2, {1.0, 0.0, 0.0, 0.0});
      const DensityMatrix in =
          DensityMatrix::from_trusted(kron(kron(zero, r0.matrix()), r1.matrix()));
      std::vector<int> keep;
      for (int q = 0; q < n; ++q) keep.push_back(1 + q);
      const DensityMatrix out = partial_trace(run_density(c, in), keep);
      const ComplexMatrix expect = Complex{p, 0} * r0.matrix() + Complex{1 - p, 0} * r1.matrix();
      EXPECT_LE(trace_distance(out, DensityMatrix::from_trusted(expect)), 1e-10) << "p=" << p;
    }
  }
}

TEST(RunTraced, MatchesFullSimulationAndPartialTrace) {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Circuit c = random_circuit(6, 50, rng);
    const std::vector<int> trash{1, 4};
    const std::vector<int> keep{0, 2, 3, 5};
    const DensityMatrix ref = partial_trace(run_pure(c), keep);
    EXPECT_LE(max_abs_diff(run_traced(c, trash).matrix(), ref.matrix()), 1e-12);
  }
}

TEST(RunTraced, WideMixtureCircuit) {
  // Width 3 * (3 + 1) - 1 = 11 stays in reach of the pure path for a
  // cross-check; the traced path handles much wider circuits.
  Rng rng(12);
  const Ensemble e = random_ensemble(3, 3, rng);
  const Circuit c = synth_mixture(e).circuit;
  const std::vector<int> trash = c.discarded_qubits();
  const std::vector<int> keep{0, 1, 2};
  const DensityMatrix ref = partial_trace(run_pure(c), keep);
  EXPECT_LE(max_abs_diff(run_traced(c, trash).matrix(), ref.matrix()), 1e-12);
}

TEST(RunTraced, RejectsTracingEverything) {
  Circuit c(2);
  const std::vector<int> all{0, 1};
  EXPECT_THROW(run_traced(c, all), DimensionError);
}

TEST(Verify, SelfTargetIsPerfect) {
  Rng rng(13);
  const StateVector psi = random_state(4, rng);
  const Circuit c = synth_pure(psi);
  const SimResult r = verify(psi, c, {});
  EXPECT_NEAR(r.fidelity, 1.0, 1e-12);
  EXPECT_LE(r.trace_distance, 1e-12);
  const SimResult rd = verify(DensityMatrix::from_state(run_pure(c)), c, {});
  EXPECT_NEAR(rd.fidelity, 1.0, 1e-12);
  EXPECT_LE(rd.trace_distance, 1e-12);
}

TEST(Verify, OrthogonalTargetHasZeroFidelity) {
  Circuit c(2);
  c.append(Gate::x(1));
  const SimResult r = verify(StateVector::basis(2, 0), c, {});
  EXPECT_NEAR(r.fidelity, 0.0, 1e-15);
  EXPECT_NEAR(r.trace_distance, 1.0, 1e-15);
}

TEST(Verify, MixedTargetWithTrash) {
  Rng rng(14);
  const Ensemble e = random_ensemble(2, 3, rng);
  const MixedSynthesis s = synth_purification(e);
  const DensityMatrix target = DensityMatrix::from_trusted(e.density());
  const SimResult r = verify(target, s.circuit, s.circuit.discarded_qubits());
  EXPECT_NEAR(r.fidelity, 1.0, 1e-9);
  EXPECT_LE(r.trace_distance, 1e-10);
}

TEST(Verify, PureTargetAgainstMixedOutput) {
  // Bell circuit, keep qubit 0: rho = I/2, <0|rho|0> = 1/2, D = 1/2.
  Circuit c(2);
  c.append(Gate::h(0));
  c.append(Gate::cnot(0, 1));
  const std::vector<int> trash{1};
  const SimResult r = verify(StateVector::basis(1, 0), c, trash);
  EXPECT_NEAR(r.fidelity, 0.5, 1e-14);
  EXPECT_NEAR(r.trace_distance, 0.5, 1e-14);
}

TEST(Verify, DimensionMismatchThrows) {
  Circuit c(3);
  const std::vector<int> trash{2};
  EXPECT_THROW(verify(StateVector::basis(1, 0), c, trash), DimensionError);
}

TEST(Verify, IncompleteCholeskyPipelineEnvelope) {
  Rng rng(15);
  for (int trial = 0; trial < 3; ++trial) {
    const DensityMatrix rho = banded_density(3, 1, rng);
    const DensitySynthesis s = synth_from_density(rho, {.drop_tol = 1e-3});
    ASSERT_TRUE(s.error.verified);
    EXPECT_GE(s.error.fidelity, 1 - 1e-2);
  }
}

}  // namespace
}  // namespace qsprep
