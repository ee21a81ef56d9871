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

// State-vector and density-matrix simulation of circuits.
//
// Gates are applied in place by amplitude stride updates. UCR, CSWAP and
// CONTROLLED gates are simulated natively, so synthesized circuits can be
// checked before and after lowering. A density matrix over n qubits is
// treated as a 2n-qubit vector (row bits high, column bits low): a gate U
// acts on the row qubits and conj(U) on the column qubits.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qsprep/circuit.hpp"
#include "qsprep/error.hpp"
#include "qsprep/linalg.hpp"

namespace qsprep {

inline constexpr int kMaxPureQubits = 24;
inline constexpr int kMaxDensityQubits = 12;

namespace detail {

// [[a, b], [c, d]]
struct Mat2 {
  Complex a, b, c, d;
};

inline Mat2 conj(const Mat2& m) { return {std::conj(m.a), std::conj(m.b), std::conj(m.c), std::conj(m.d)}; }

inline Mat2 rotation_mat2(Axis axis, double t) {
  const double ch = std::cos(t / 2);
  const double sh = std::sin(t / 2);
  if (axis == Axis::Y) return {ch, -sh, sh, ch};
  return {std::polar(1.0, -t / 2), 0.0, 0.0, std::polar(1.0, t / 2)};
}

inline Mat2 gate_mat2(const Gate& g) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (g.kind) {
    case GateKind::RY: return rotation_mat2(Axis::Y, g.angle);
    case GateKind::RZ: return rotation_mat2(Axis::Z, g.angle);
    case GateKind::X: return {0.0, 1.0, 1.0, 0.0};
    case GateKind::H: return {r, r, r, -r};
    case GateKind::T: return {1.0, 0.0, 0.0, std::polar(1.0, kPi / 4)};
    case GateKind::TDG: return {1.0, 0.0, 0.0, std::polar(1.0, -kPi / 4)};
    case GateKind::S: return {1.0, 0.0, 0.0, Complex{0.0, 1.0}};
    default: throw CircuitError("gate_mat2: not a one-qubit gate");
  }
}

// Maps circuit qubits to bit positions of the simulated vector: qubit q
// becomes local index map[q] (or q) plus `offset`, over `width` local qubits.
struct Layout {
  int width = 0;
  int offset = 0;
  const std::vector<int>* map = nullptr;

  std::size_t mask(int q) const {
    const int local = (map != nullptr ? (*map)[static_cast<std::size_t>(q)] : q) + offset;
    return std::size_t{1} << (width - 1 - local);
  }
};

// Visits every index i with the `tbit` bit clear and (i & cmask) == cval.
template <typename F>
inline void for_each_pair(std::size_t dim, std::size_t tbit, std::size_t cmask, std::size_t cval,
                          F&& f) {
  const std::size_t low = tbit - 1;
  for (std::size_t k = 0; k < dim / 2; ++k) {
    const std::size_t i = ((k & ~low) << 1) | (k & low);
    if ((i & cmask) == cval) f(i, i | tbit);
  }
}

inline void apply_mat2(std::span<Complex> v, std::size_t tbit, const Mat2& m, std::size_t cmask,
                       std::size_t cval) {
  for_each_pair(v.size(), tbit, cmask, cval, [&](std::size_t i0, std::size_t i1) {
    const Complex x0 = v[i0];
    const Complex x1 = v[i1];
    v[i0] = m.a * x0 + m.b * x1;
    v[i1] = m.c * x0 + m.d * x1;
  });
}

inline void apply_gate(std::span<Complex> v, const Gate& g, const Layout& lay, bool conjugate,
                       std::size_t cmask, std::size_t cval) {
  switch (g.kind) {
    case GateKind::CNOT: {
      const std::size_t c = lay.mask(g.qubits[0]);
      for_each_pair(v.size(), lay.mask(g.qubits[1]), cmask | c, cval | c,
                    [&](std::size_t i0, std::size_t i1) { std::swap(v[i0], v[i1]); });
      return;
    }
    case GateKind::CSWAP: {
      const std::size_t c = lay.mask(g.qubits[0]);
      const std::size_t a = lay.mask(g.qubits[1]);
      const std::size_t b = lay.mask(g.qubits[2]);
      // Pairs |c=1, a=1, b=0> <-> |c=1, a=0, b=1>.
      for_each_pair(v.size(), b, cmask | c | a, cval | c | a,
                    [&](std::size_t i0, std::size_t) { std::swap(v[i0], v[(i0 ^ a) | b]); });
      return;
    }
    case GateKind::UCR: {
      const std::span<const int> controls = g.controls();
      std::vector<std::size_t> cbits(controls.size());
      for (std::size_t j = 0; j < controls.size(); ++j) cbits[j] = lay.mask(controls[j]);
      std::vector<Mat2> mats(g.angles.size());
      for (std::size_t a = 0; a < mats.size(); ++a) {
        mats[a] = rotation_mat2(g.axis, g.angles[a]);
        if (conjugate) mats[a] = conj(mats[a]);
      }
      for_each_pair(v.size(), lay.mask(g.target()), cmask, cval,
                    [&](std::size_t i0, std::size_t i1) {
                      std::size_t pattern = 0;
                      for (std::size_t cb : cbits) pattern = (pattern << 1) | ((i0 & cb) != 0 ? 1U : 0U);
                      const Mat2& m = mats[pattern];
                      const Complex x0 = v[i0];
                      const Complex x1 = v[i1];
                      v[i0] = m.a * x0 + m.b * x1;
                      v[i1] = m.c * x0 + m.d * x1;
                    });
      return;
    }
    case GateKind::CONTROLLED: {
      std::size_t m = cmask;
      std::size_t val = cval;
      for (std::size_t j = 0; j < g.qubits.size(); ++j) {
        const std::size_t bit = lay.mask(g.qubits[j]);
        m |= bit;
        if (g.polarity[j]) val |= bit;
      }
      for (const Gate& inner : g.body) apply_gate(v, inner, lay, conjugate, m, val);
      return;
    }
    default: {
      const Mat2 m = gate_mat2(g);
      apply_mat2(v, lay.mask(g.target()), conjugate ? conj(m) : m, cmask, cval);
      return;
    }
  }
}

// rho <- U rho U^dag for a density vector over `n` local qubits.
inline void apply_gate_density(std::span<Complex> rho, const Gate& g, int n,
                               const std::vector<int>* map) {
  apply_gate(rho, g, Layout{2 * n, 0, map}, false, 0, 0);
  apply_gate(rho, g, Layout{2 * n, n, map}, true, 0, 0);
}

inline void check_width(const Circuit& c, int n, int limit, const char* who) {
  if (c.num_qubits() != n) {
    throw DimensionError(std::string(who) + ": circuit width " + std::to_string(c.num_qubits()) +
                         " does not match input width " + std::to_string(n));
  }
  if (n > limit) {
    throw CircuitError(std::string(who) + ": width " + std::to_string(n) + " exceeds " +
                       std::to_string(limit));
  }
}

}  // namespace detail

/// U|init> including the global phase.
inline StateVector run_pure(const Circuit& c, const StateVector& init) {
  detail::check_width(c, init.num_qubits(), kMaxPureQubits, "run_pure");
  std::vector<Complex> v(init.amplitudes().begin(), init.amplitudes().end());
  const detail::Layout lay{c.num_qubits(), 0, nullptr};
  for (const Gate& g : c.gates()) detail::apply_gate(v, g, lay, false, 0, 0);
  if (c.global_phase() != 0.0) {
    const Complex ph = std::polar(1.0, c.global_phase());
    for (Complex& z : v) z *= ph;
  }
  return StateVector::from_trusted(std::move(v));
}

/// U|0...0>.
inline StateVector run_pure(const Circuit& c) {
  return run_pure(c, StateVector::basis(c.num_qubits(), 0));
}

/// U rho U^dag.
inline DensityMatrix run_density(const Circuit& c, const DensityMatrix& init) {
  detail::check_width(c, init.num_qubits(), kMaxDensityQubits, "run_density");
  const int n = c.num_qubits();
  std::vector<Complex> rho(init.matrix().data().begin(), init.matrix().data().end());
  for (const Gate& g : c.gates()) detail::apply_gate_density(rho, g, n, nullptr);
  const std::size_t d = init.dim();
  ComplexMatrix out(d, d, std::move(rho));
  detail::symmetrize(out);
  return DensityMatrix::from_trusted(std::move(out));
}

namespace detail {

// Density vector over `live` qubits (live[0] most significant).
struct LiveDensity {
  std::vector<int> live;
  std::vector<Complex> rho{Complex{1.0, 0.0}};

  std::size_t dim() const { return std::size_t{1} << live.size(); }

  // rho <- rho (x) |0><0| with q as the new least significant qubit.
  void add(int q) {
    const std::size_t d = dim();
    std::vector<Complex> next(4 * d * d, Complex{});
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) next[(2 * r) * (2 * d) + 2 * c] = rho[r * d + c];
    }
    rho = std::move(next);
    live.push_back(q);
  }

  void trace_out(int q) {
    const auto it = std::find(live.begin(), live.end(), q);
    const std::size_t pos = static_cast<std::size_t>(it - live.begin());
    const std::size_t d = dim();
    const std::size_t bit = std::size_t{1} << (live.size() - 1 - pos);
    const std::size_t nd = d / 2;
    auto insert = [&](std::size_t x, std::size_t b) {
      const std::size_t low = x & (bit - 1);
      return ((x - low) << 1) | (b != 0 ? bit : 0) | low;
    };
    std::vector<Complex> next(nd * nd, Complex{});
    for (std::size_t r = 0; r < nd; ++r) {
      for (std::size_t c = 0; c < nd; ++c) {
        next[r * nd + c] = rho[insert(r, 0) * d + insert(c, 0)] + rho[insert(r, 1) * d + insert(c, 1)];
      }
    }
    rho = std::move(next);
    live.erase(it);
  }
};

}  // namespace detail

/// Reduced state over the qubits not in `discard` (ascending), simulated as
/// a density matrix in which each qubit enters as |0> at its first gate and
/// a discarded qubit is traced out after its last gate. Equal to the static
/// simulation followed by a partial trace, but the live width is only the
/// peak number of simultaneously active qubits.
inline DensityMatrix run_traced(const Circuit& c, std::span<const int> discard) {
  const int n = c.num_qubits();
  std::vector<bool> dropped(static_cast<std::size_t>(n), false);
  for (int q : discard) {
    if (q < 0 || q >= n) throw DimensionError("run_traced: discarded qubit out of range");
    if (dropped[static_cast<std::size_t>(q)]) throw DimensionError("run_traced: duplicate qubit");
    dropped[static_cast<std::size_t>(q)] = true;
  }
  if (static_cast<int>(discard.size()) == n) throw DimensionError("run_traced: nothing kept");

  std::vector<std::size_t> last(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<int>> supports;
  supports.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    supports.push_back(c.gates()[i].support());
    for (int q : supports.back()) last[static_cast<std::size_t>(q)] = i;
  }

  detail::LiveDensity state;
  std::vector<int> map(static_cast<std::size_t>(n), -1);
  auto refresh = [&] {
    for (std::size_t j = 0; j < state.live.size(); ++j) map[static_cast<std::size_t>(state.live[j])] = static_cast<int>(j);
  };
  auto is_live = [&](int q) {
    return std::find(state.live.begin(), state.live.end(), q) != state.live.end();
  };
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int q : supports[i]) {
      if (!is_live(q)) state.add(q);
    }
    const int width = static_cast<int>(state.live.size());
    if (width > kMaxDensityQubits) {
      throw CircuitError("run_traced: " + std::to_string(width) + " simultaneously live qubits exceed " +
                         std::to_string(kMaxDensityQubits));
    }
    refresh();
    detail::apply_gate_density(state.rho, c.gates()[i], width, &map);
    for (int q : supports[i]) {
      if (dropped[static_cast<std::size_t>(q)] && last[static_cast<std::size_t>(q)] == i) {
        state.trace_out(q);
      }
    }
  }
  for (int q = 0; q < n; ++q) {
    if (!dropped[static_cast<std::size_t>(q)] && !is_live(q)) state.add(q);
  }

  // Reorder the live qubits ascending.
  const std::size_t L = state.live.size();
  const std::size_t d = state.dim();
  std::vector<int> order = state.live;
  std::sort(order.begin(), order.end());
  std::vector<std::size_t> src_bit(L);
  for (std::size_t j = 0; j < L; ++j) {
    const std::size_t pos = static_cast<std::size_t>(
        std::find(state.live.begin(), state.live.end(), order[j]) - state.live.begin());
    src_bit[j] = std::size_t{1} << (L - 1 - pos);
  }
  std::vector<std::size_t> src(d, 0);
  for (std::size_t x = 0; x < d; ++x) {
    for (std::size_t j = 0; j < L; ++j) {
      if ((x >> (L - 1 - j)) & 1U) src[x] |= src_bit[j];
    }
  }
  ComplexMatrix out(d, d);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t col = 0; col < d; ++col) out(r, col) = state.rho[src[r] * d + src[col]];
  }
  detail::symmetrize(out);
  return DensityMatrix::from_trusted(std::move(out));
}

/// Widths up to this use a full state-vector run before tracing.
inline constexpr int kVerifyPureQubits = 20;

struct SimResult {
  /// Output state when the whole register was simulated as a vector.
  std::optional<StateVector> pure_out;
  /// Reduced state over the kept (non-trash) qubits, ascending.
  DensityMatrix traced;
  double fidelity = 0.0;
  double trace_distance = 1.0;
};

namespace detail {

inline std::vector<int> kept_qubits(int n, std::span<const int> trash) {
  std::vector<int> sorted(trash.begin(), trash.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DimensionError("verify: duplicate trash qubit");
  }
  if (!sorted.empty() && (sorted.front() < 0 || sorted.back() >= n)) {
    throw DimensionError("verify: trash qubit out of range");
  }
  std::vector<int> kept;
  for (int q = 0; q < n; ++q) {
    if (!std::binary_search(sorted.begin(), sorted.end(), q)) kept.push_back(q);
  }
  return kept;
}

inline SimResult simulate_for_verify(const Circuit& c, std::span<const int> trash,
                                     int target_qubits) {
  const std::vector<int> kept = kept_qubits(c.num_qubits(), trash);
  if (static_cast<int>(kept.size()) != target_qubits) {
    throw DimensionError("verify: circuit keeps " + std::to_string(kept.size()) +
                         " qubits but the target has " + std::to_string(target_qubits));
  }
  if (c.num_qubits() <= kVerifyPureQubits) {
    StateVector out = run_pure(c);
    DensityMatrix traced =
        trash.empty() ? DensityMatrix::from_state(out) : partial_trace(out, kept);
    return SimResult{std::move(out), std::move(traced), 0.0, 1.0};
  }
  return SimResult{std::nullopt, run_traced(c, trash), 0.0, 1.0};
}

}  // namespace detail

/// Runs c on |0...0>, traces out `trash` and compares with a pure target.
inline SimResult verify(const StateVector& target, const Circuit& c, std::span<const int> trash) {
  SimResult r = detail::simulate_for_verify(c, trash, target.num_qubits());
  if (r.pure_out && trash.empty()) {
    // Pure-pure: D = sqrt(1 - |c|^2) with c = <target|out>, evaluated as
    // sqrt(|delta|^2 (1 + |c|) / 2) where delta = out - e^{i arg c} target.
    const Complex c = inner(target.amplitudes(), r.pure_out->amplitudes());
    const Complex align = std::abs(c) > 0.0 ? c / std::abs(c) : Complex{1.0, 0.0};
    double delta2 = 0.0;
    for (std::size_t i = 0; i < target.dim(); ++i) {
      delta2 += std::norm((*r.pure_out)[i] - align * target[i]);
    }
    r.fidelity = std::min(1.0, std::norm(c));
    r.trace_distance = std::min(1.0, std::sqrt(0.5 * delta2 * (1.0 + std::abs(c))));
    return r;
  } else {
    // <psi| rho |psi>
    const ComplexMatrix& rho = r.traced.matrix();
    Complex s{};
    for (std::size_t a = 0; a < rho.rows(); ++a) {
      for (std::size_t b = 0; b < rho.cols(); ++b) s += std::conj(target[a]) * rho(a, b) * target[b];
    }
    r.fidelity = std::clamp(s.real(), 0.0, 1.0);
  }
  r.trace_distance = trace_distance(DensityMatrix::from_state(target), r.traced);
  return r;
}

/// Runs c on |0...0>, traces out `trash` and compares with a mixed target.
inline SimResult verify(const DensityMatrix& target, const Circuit& c, std::span<const int> trash) {
  SimResult r = detail::simulate_for_verify(c, trash, target.num_qubits());
  r.fidelity = fidelity(target, r.traced);
  r.trace_distance = trace_distance(target, r.traced);
  return r;
}

}  // namespace qsprep
