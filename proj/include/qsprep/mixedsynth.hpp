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

// Mixed-state preparation from an ensemble {p_i, |psi_i>}, i < l.
//
// Mixture ladder (static layout, width l(n+1)-1):
//   q[0..n)                 target, prepared in |psi_0>
//   for i = 1..l-1, base_i = n + (i-1)(n+1):
//     q[base_i .. base_i+n)  trash register prepared in |psi_i>
//     q[base_i+n]            weight ancilla, RY(2 alpha_i)
//     n CSWAPs (ancilla; target j, trash j)
// Tracing out everything but the target leaves sum_i p_i |psi_i><psi_i|.
//
// Purification (width n+m, m = ceil(log2 l)): target q[0..n), ancillas
// q[n..n+m) in sum_i sqrt(p_i) |i> with q[n] the most significant bit, then
// |psi_i> prepared on the target under ancilla pattern i.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qsprep/cholesky.hpp"
#include "qsprep/circuit.hpp"
#include "qsprep/error.hpp"
#include "qsprep/linalg.hpp"
#include "qsprep/puresynth.hpp"
#include "qsprep/sim.hpp"

namespace qsprep {

/// alpha_i = atan(sqrt(p_i / sum_{j<i} p_j)), i = 1..l-1.
inline std::vector<double> mixture_weight_angles(std::span<const double> p) {
  if (p.empty()) throw ValidationError("mixture_weight_angles: empty weight list");
  double total = 0.0;
  for (double w : p) {
    if (!(w > 0.0)) throw ValidationError("mixture_weight_angles: nonpositive weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("mixture_weight_angles: weights sum to " + std::to_string(total));
  }
  std::vector<double> alpha;
  double prefix = p[0];
  for (std::size_t i = 1; i < p.size(); ++i) {
    alpha.push_back(std::atan(std::sqrt(p[i] / prefix)));
    prefix += p[i];
  }
  return alpha;
}

struct MixedSynthesis {
  Circuit circuit;
  GateCountReport counts;
};

namespace detail {

inline void append_phased(Circuit& c, PhasedGates block) {
  c.append(block.gates);
  c.add_global_phase(block.global_phase);
}

inline int ceil_log2(std::size_t l) {
  int m = 0;
  while ((std::size_t{1} << m) < l) ++m;
  return m;
}

}  // namespace detail

struct MixtureOptions {
  bool skip_zero = true;
};

inline MixedSynthesis synth_mixture(const Ensemble& e, MixtureOptions options = {}) {
  const int n = e.num_qubits();
  const std::size_t l = e.size();
  const int width = static_cast<int>(l) * (n + 1) - 1;
  const std::vector<double> alpha = mixture_weight_angles(e.weights());
  const ControlledSynthOptions ladder{.skip_zero = options.skip_zero, .phase_fix = true};

  Circuit c(width);
  const std::vector<int> target = detail::iota_qubits(0, n);
  c.add_register({"target", RegisterRole::Target, target});
  detail::append_phased(c, synth_pure_as_controlled(e.states()[0], target, {}, ladder));
  for (std::size_t i = 1; i < l; ++i) {
    const int base = n + static_cast<int>(i - 1) * (n + 1);
    const std::vector<int> trash = detail::iota_qubits(base, n);
    const int ancilla = base + n;
    c.add_register({"trash" + std::to_string(i), RegisterRole::Trash, trash});
    c.add_register({"weight" + std::to_string(i), RegisterRole::Ancilla, {ancilla}});
    detail::append_phased(c, synth_pure_as_controlled(e.states()[i], trash, {}, ladder));
    c.append(Gate::ry(ancilla, 2.0 * alpha[i - 1]));
    for (int j = 0; j < n; ++j) c.append(Gate::cswap(ancilla, j, base + j));
  }
  c.set_dynamic_width(l == 1 ? n : 2 * n + 1);
  GateCountReport counts = gate_counts(c, options.skip_zero);
  return {std::move(c), counts};
}

namespace detail {

inline std::vector<Complex> p_state_amplitudes(std::span<const double> p, int m) {
  if ((std::size_t{1} << m) < p.size()) {
    throw DimensionError("synth_p_state: " + std::to_string(m) + " qubits cannot index " +
                         std::to_string(p.size()) + " weights");
  }
  std::vector<Complex> amp(std::size_t{1} << m, Complex{});
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0) throw ValidationError("synth_p_state: negative weight");
    amp[i] = std::sqrt(p[i]);
  }
  return amp;
}

// RY-only ladder for sum_i sqrt(p_i) |i> on `qubits`.
inline std::vector<Gate> p_state_gates(std::span<const double> p, const std::vector<int>& qubits,
                                       bool skip_zero) {
  const int m = static_cast<int>(qubits.size());
  if (m == 0) {
    p_state_amplitudes(p, 0);
    return {};
  }
  PureAngles angles = angles_from_amplitudes(p_state_amplitudes(p, m));
  std::vector<Gate> out;
  for (const Gate& g : ladder_gates(angles.tree, qubits, {}, 0, skip_zero)) {
    if (g.axis == Axis::Y) out.push_back(g);
  }
  return out;
}

}  // namespace detail

/// sum_i sqrt(p_i) |i> on m qubits from RY-axis UCRs only.
inline Circuit synth_p_state(std::span<const double> p, int m, bool skip_zero = true) {
  Circuit c(m);
  c.append(detail::p_state_gates(p, detail::iota_qubits(0, m), skip_zero));
  return c;
}

struct PurificationOptions {
  bool skip_zero = true;
  /// Correct branch phases so the purified state is exact up to one global
  /// phase; the reduced state does not depend on it.
  bool phase_fix = true;
  /// Merge the l controlled ladders into one ladder over ancilla+prefix.
  bool merge = true;
};

/// Merges the controlled ladders of an unmerged purification circuit: UCRs
/// with equal (axis, controls, target) are summed. Ancilla-only gates come
/// first (per ancilla level: RY then RZ), then per target level RY, RZ.
inline Circuit merge_purification_ucr(const Circuit& c, bool skip_zero = true) {
  const std::vector<int> data = c.qubits_with_role(RegisterRole::Target);
  const std::vector<int> anc = c.qubits_with_role(RegisterRole::Ancilla);
  auto fail = [](const std::string& why) {
    throw CircuitError("merge_purification_ucr: " + why);
  };
  if (static_cast<int>(data.size() + anc.size()) != c.num_qubits()) {
    fail("circuit is not a target+ancilla layout");
  }
  std::map<std::pair<int, int>, Gate> merged;  // (target, axis) -> UCR
  for (const Gate& g : c.gates()) {
    if (g.kind != GateKind::UCR) fail(std::string("unexpected ") + gate_name(g.kind) + " gate");
    const std::pair<int, int> key{g.target(), g.axis == Axis::Y ? 0 : 1};
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(key, g);
      continue;
    }
    if (it->second.qubits != g.qubits) fail("UCRs on one target use different controls");
    for (std::size_t a = 0; a < g.angles.size(); ++a) it->second.angles[a] += g.angles[a];
  }
  Circuit out(c.num_qubits());
  for (const Register& r : c.registers()) out.add_register(r);
  out.set_global_phase(c.global_phase());
  out.set_dynamic_width(c.dynamic_width());
  std::vector<int> order = anc;
  order.insert(order.end(), data.begin(), data.end());
  for (int q : order) {
    for (int axis : {0, 1}) {
      const auto it = merged.find({q, axis});
      if (it == merged.end()) continue;
      if (skip_zero && detail::all_zero(it->second.angles)) continue;
      out.append(it->second);
    }
  }
  return out;
}

inline MixedSynthesis synth_purification(const Ensemble& e, PurificationOptions options = {}) {
  const int n = e.num_qubits();
  const std::size_t l = e.size();
  const int m = detail::ceil_log2(l);
  Circuit c(n + m);
  const std::vector<int> target = detail::iota_qubits(0, n);
  const std::vector<int> anc = detail::iota_qubits(n, m);
  c.add_register({"target", RegisterRole::Target, target});
  if (m > 0) c.add_register({"ancilla", RegisterRole::Ancilla, anc});

  c.append(detail::p_state_gates(e.weights(), anc, options.skip_zero));
  const ControlledSynthOptions block{.skip_zero = options.skip_zero,
                                     .phase_fix = options.phase_fix};
  for (std::size_t i = 0; i < l; ++i) {
    std::vector<Control> controls;
    for (int b = 0; b < m; ++b) {
      controls.push_back({anc[static_cast<std::size_t>(b)], ((i >> (m - 1 - b)) & 1U) != 0});
    }
    detail::append_phased(c, synth_pure_as_controlled(e.states()[i], target, controls, block));
  }
  if (options.merge) c = merge_purification_ucr(c, options.skip_zero);
  GateCountReport counts = gate_counts(c, options.skip_zero);
  return {std::move(c), counts};
}

/// sum_i p_i |psi_i> (x) |i> purification as a vector over target+ancilla
/// (target bits high), for checking synth_purification.
inline StateVector purified_state(const Ensemble& e) {
  const int n = e.num_qubits();
  const int m = detail::ceil_log2(e.size());
  std::vector<Complex> v(std::size_t{1} << (n + m), Complex{});
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double s = std::sqrt(e.weights()[i]);
    const auto amps = e.states()[i].amplitudes();
    for (std::size_t a = 0; a < amps.size(); ++a) v[(a << m) | i] = s * amps[a];
  }
  return StateVector::from_trusted(std::move(v));
}

enum class MixedMethod { Mixture, Purification };

struct DensitySynthOptions {
  MixedMethod method = MixedMethod::Purification;
  /// 0 selects pivoted Cholesky; > 0 selects threshold-dropping Cholesky.
  double drop_tol = 0.0;
  bool reorder = false;
  bool skip_zero = true;
  bool phase_fix = true;
  bool merge = true;
  /// Simulate the circuit and compare with the input.
  bool verify = true;
};

struct FactorStats {
  std::size_t ensemble_size = 0;
  std::size_t rank = 0;
  std::size_t factor_nnz = 0;
  double drop_tol = 0.0;
  double diagonal_shift = 0.0;
  /// ||rho - AA^dag / Tr(AA^dag)||_F / ||rho||_F
  double relative_error = 0.0;
};

struct ApproxError {
  bool verified = false;
  double trace_distance = 0.0;
  double fidelity = 0.0;
};

struct DensitySynthesis {
  Circuit circuit;
  GateCountReport counts;
  FactorStats stats;
  ApproxError error;
};

/// Factor matrix of rho: pivoted Cholesky for drop_tol = 0, threshold
/// dropping otherwise.
inline FactorMatrix factor_density(const DensityMatrix& rho, double drop_tol, bool reorder = false) {
  const CholeskyFactor f = drop_tol > 0.0
                               ? incomplete_cholesky(rho.matrix(), drop_tol, {.reorder = reorder})
                               : pivoted_cholesky(rho.matrix());
  return prune_zero_columns(f);
}

/// Simulates c, traces out its discarded registers and compares the result
/// with rho; `verified` is false when the circuit is too wide to simulate.
inline ApproxError check_against(const DensityMatrix& rho, const Circuit& c) {
  ApproxError err;
  try {
    const std::vector<int> trash = c.discarded_qubits();
    const SimResult r = verify(rho, c, trash);
    err.verified = true;
    err.trace_distance = r.trace_distance;
    err.fidelity = r.fidelity;
  } catch (const CircuitError&) {
    err.verified = false;
  }
  return err;
}

inline DensitySynthesis synth_from_density(const DensityMatrix& rho, DensitySynthOptions options = {}) {
  const FactorMatrix a = factor_density(rho, options.drop_tol, options.reorder);
  const Ensemble e = ensemble_from_factor(a);

  DensitySynthesis out{Circuit(0), {}, {}, {}};
  out.stats.ensemble_size = e.size();
  out.stats.rank = a.rank;
  out.stats.factor_nnz = a.factor_nnz;
  out.stats.drop_tol = options.drop_tol;
  out.stats.diagonal_shift = a.diagonal_shift;
  ComplexMatrix approx = a.a * adjoint(a.a);
  const double tr = trace(approx).real();
  if (tr > 0.0) approx = Complex{1.0 / tr, 0.0} * approx;
  out.stats.relative_error =
      frobenius_norm(rho.matrix() - approx) / std::max(frobenius_norm(rho.matrix()), 1e-300);

  MixedSynthesis s = options.method == MixedMethod::Mixture
                         ? synth_mixture(e, {.skip_zero = options.skip_zero})
                         : synth_purification(e, {.skip_zero = options.skip_zero,
                                                  .phase_fix = options.phase_fix,
                                                  .merge = options.merge});
  out.circuit = std::move(s.circuit);
  out.counts = s.counts;
  if (options.verify) out.error = check_against(rho, out.circuit);
  return out;
}

}  // namespace qsprep
