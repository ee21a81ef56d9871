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

// Pure-state preparation by a ladder of uniformly controlled rotations.
//
// Level k targets qubit k with qubits 0..k-1 as controls. For branch a of
// level k (the amplitude block whose first k bits read a) the pair
// RY(theta), RZ(phi) splits the branch amplitude r e^{i w} into
//
//   r cos(theta/2) e^{i (w - phi/2)},   r sin(theta/2) e^{i (w + phi/2)}
//
// so running the ladder on |0...0> gives e^{-i Omega} |psi> where Omega is
// the phase left at the root.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qsprep/circuit.hpp"
#include "qsprep/error.hpp"
#include "qsprep/linalg.hpp"

namespace qsprep {

/// theta_y[k][a], phi_z[k][a] for level k = 0..n-1 and branch a < 2^k.
struct AngleTree {
  std::vector<std::vector<double>> theta_y;
  std::vector<std::vector<double>> phi_z;

  int num_levels() const noexcept { return static_cast<int>(theta_y.size()); }
};

/// psi = exp(i global_phase) * ladder |0...0>.
struct PhaseLedger {
  double global_phase = 0.0;
};

struct PureAngles {
  AngleTree tree;
  PhaseLedger ledger;
};

namespace detail {

// Bottom-up angle extraction on an arbitrary nonzero vector. A branch whose
// norm is <= 1e-15 ||v|| is free; it copies the angles of the lowest-index
// populated branch on its level, which keeps uniform levels uniform (the
// Gray transform then leaves a single nonzero angle).
inline PureAngles angles_from_amplitudes(std::span<const Complex> v) {
  const int n = log2_exact(v.size());
  double norm2 = 0.0;
  for (const Complex& z : v) norm2 += std::norm(z);
  if (!(norm2 > 0.0)) throw ValidationError("pure_angles: zero vector");
  const double zero = 1e-15 * std::sqrt(norm2);

  PureAngles out;
  out.tree.theta_y.resize(static_cast<std::size_t>(n));
  out.tree.phi_z.resize(static_cast<std::size_t>(n));
  std::vector<Complex> cur(v.begin(), v.end());
  for (int k = n - 1; k >= 0; --k) {
    const std::size_t branches = std::size_t{1} << k;
    std::vector<double>& theta = out.tree.theta_y[static_cast<std::size_t>(k)];
    std::vector<double>& phi = out.tree.phi_z[static_cast<std::size_t>(k)];
    theta.assign(branches, 0.0);
    phi.assign(branches, 0.0);
    std::vector<Complex> next(branches, Complex{});
    std::vector<bool> populated(branches, false);
    for (std::size_t a = 0; a < branches; ++a) {
      const Complex c0 = cur[2 * a];
      const Complex c1 = cur[2 * a + 1];
      const double r0 = std::abs(c0);
      const double r1 = std::abs(c1);
      const double r = std::hypot(r0, r1);
      if (r <= zero) continue;
      populated[a] = true;
      const double w0 = r0 > zero ? std::arg(c0) : std::arg(c1);
      const double w1 = r1 > zero ? std::arg(c1) : w0;
      theta[a] = 2.0 * std::atan2(r1, r0);
      // Wrapped to [-pi, pi] so equal relative phases give equal angles;
      // the parent phase w0 + phi/2 keeps both children exact.
      phi[a] = std::remainder(w1 - w0, 2.0 * kPi);
      next[a] = std::polar(r, w0 + 0.5 * phi[a]);
    }
    std::size_t first = 0;
    while (first < branches && !populated[first]) ++first;
    for (std::size_t a = 0; a < branches; ++a) {
      if (!populated[a]) {
        theta[a] = theta[first];
        phi[a] = phi[first];
      }
    }
    cur = std::move(next);
  }
  out.ledger.global_phase = std::arg(cur[0]);
  return out;
}

}  // namespace detail

inline PureAngles pure_angles(const StateVector& psi) {
  return detail::angles_from_amplitudes(psi.amplitudes());
}

struct PureSynthOptions {
  /// Omit UCRs whose angles are all within 1e-14 of zero.
  bool skip_zero = true;
};

namespace detail {

// Ladder on `targets` (targets[0] = level 0) with every UCR additionally
// controlled by `controls` reading `pattern`; the level angles sit at
// indices pattern * 2^k + a and the other patterns get zero.
inline std::vector<Gate> ladder_gates(const AngleTree& tree, const std::vector<int>& targets,
                                      const std::vector<int>& controls, std::size_t pattern,
                                      bool skip_zero) {
  std::vector<Gate> out;
  for (int k = 0; k < tree.num_levels(); ++k) {
    const std::size_t ku = static_cast<std::size_t>(k);
    std::vector<int> ctrl = controls;
    ctrl.insert(ctrl.end(), targets.begin(), targets.begin() + k);
    const std::size_t base = pattern << ku;
    for (Axis axis : {Axis::Y, Axis::Z}) {
      const std::vector<double>& level = axis == Axis::Y ? tree.theta_y[ku] : tree.phi_z[ku];
      if (skip_zero && all_zero(level)) continue;
      std::vector<double> angles(std::size_t{1} << ctrl.size(), 0.0);
      std::copy(level.begin(), level.end(), angles.begin() + static_cast<std::ptrdiff_t>(base));
      out.push_back(Gate::ucr(axis, ctrl, targets[ku], std::move(angles)));
    }
  }
  return out;
}

inline std::vector<int> iota_qubits(int first, int count) {
  std::vector<int> q(static_cast<std::size_t>(count));
  std::iota(q.begin(), q.end(), first);
  return q;
}

}  // namespace detail

/// F^0[RY], F^0[RZ], ..., F^{n-1}[RY], F^{n-1}[RZ] as UCR macro gates with
/// the ledger phase as the circuit's global phase, so the circuit maps
/// |0...0> to psi exactly.
inline Circuit synth_pure(const StateVector& psi, PureSynthOptions options = {}) {
  const int n = psi.num_qubits();
  const PureAngles angles = pure_angles(psi);
  Circuit c(n);
  c.add_register({"target", RegisterRole::Target, detail::iota_qubits(0, n)});
  c.append(detail::ladder_gates(angles.tree, detail::iota_qubits(0, n), {}, 0, options.skip_zero));
  c.set_global_phase(angles.ledger.global_phase);
  return c;
}

struct ControlledSynthOptions {
  bool skip_zero = true;
  /// Emit the ledger phase as a diagonal on the controls so the active
  /// branch carries psi exactly rather than up to phase.
  bool phase_fix = true;
};

/// The ladder for psi on `targets`, fired only when `controls` match their
/// polarities. Negative controls select the corresponding 0-bits of the
/// pattern. With no controls the ledger phase is returned as a global phase.
inline PhasedGates synth_pure_as_controlled(const StateVector& psi, const std::vector<int>& targets,
                                            const std::vector<Control>& controls,
                                            ControlledSynthOptions options = {}) {
  if (static_cast<int>(targets.size()) != psi.num_qubits()) {
    throw DimensionError("synth_pure_as_controlled: " + std::to_string(targets.size()) +
                         " targets for a " + std::to_string(psi.num_qubits()) + "-qubit state");
  }
  std::vector<int> cq;
  std::size_t pattern = 0;
  for (const Control& c : controls) {
    if (std::find(targets.begin(), targets.end(), c.qubit) != targets.end() ||
        std::find(cq.begin(), cq.end(), c.qubit) != cq.end()) {
      throw CircuitError("synth_pure_as_controlled: control qubit " + std::to_string(c.qubit) +
                         " overlaps the targets or repeats");
    }
    cq.push_back(c.qubit);
    pattern = (pattern << 1) | (c.positive ? 1U : 0U);
  }
  const PureAngles angles = pure_angles(psi);
  PhasedGates out;
  out.gates = detail::ladder_gates(angles.tree, targets, cq, pattern, options.skip_zero);
  const double omega = angles.ledger.global_phase;
  if (cq.empty()) {
    out.global_phase = omega;
  } else if (options.phase_fix && omega != 0.0) {
    std::vector<double> chi(std::size_t{1} << cq.size(), 0.0);
    chi[pattern] = omega;
    PhasedGates d = diagonal_phase_gates(cq, std::move(chi));
    for (Gate& g : d.gates) {
      if (!options.skip_zero || !detail::all_zero(g.angles)) out.gates.push_back(std::move(g));
    }
    out.global_phase = d.global_phase;
  }
  return out;
}

/// Reassembles the state from an angle tree and ledger (amplitude-level
/// inverse of pure_angles).
inline std::vector<Complex> amplitudes_from_angles(const PureAngles& angles) {
  std::vector<Complex> cur{std::polar(1.0, angles.ledger.global_phase)};
  for (int k = 0; k < angles.tree.num_levels(); ++k) {
    const std::size_t ku = static_cast<std::size_t>(k);
    std::vector<Complex> next(cur.size() * 2);
    for (std::size_t a = 0; a < cur.size(); ++a) {
      const double t = angles.tree.theta_y[ku][a];
      const double p = angles.tree.phi_z[ku][a];
      next[2 * a] = cur[a] * std::polar(std::cos(t / 2), -p / 2);
      next[2 * a + 1] = cur[a] * std::polar(std::sin(t / 2), p / 2);
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace qsprep
