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

// Gate-level circuit IR and its lowering passes.
//
// Qubit 0 is the most significant bit of a basis index. Gates act in list
// order, so the circuit unitary is exp(i global_phase) * G_last ... G_first.
//
//   RY(t) = exp(-i t Y / 2)      RZ(t) = exp(-i t Z / 2)
//
// A uniformly controlled rotation UCR(axis, controls, target, angles) applies
// R_axis(angles[a]) to the target when the controls read pattern a, with
// controls[0] the most significant bit of a.

#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qsprep/error.hpp"
#include "qsprep/linalg.hpp"

namespace qsprep {

enum class Axis { Y, Z };

enum class GateKind { RY, RZ, X, H, T, TDG, S, CNOT, CSWAP, UCR, CONTROLLED };

inline const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::RY: return "ry";
    case GateKind::RZ: return "rz";
    case GateKind::X: return "x";
    case GateKind::H: return "h";
    case GateKind::T: return "t";
    case GateKind::TDG: return "tdg";
    case GateKind::S: return "s";
    case GateKind::CNOT: return "cx";
    case GateKind::CSWAP: return "cswap";
    case GateKind::UCR: return "ucr";
    case GateKind::CONTROLLED: return "controlled";
  }
  return "?";
}

/// A control line; negative controls fire on |0>.
struct Control {
  int qubit = 0;
  bool positive = true;
};

/// One gate. Operand layout in `qubits` by kind:
///   one-qubit gates  {target}
///   CNOT             {control, target}
///   CSWAP            {control, a, b}
///   UCR              {controls..., target}
///   CONTROLLED       {controls...} with `polarity` parallel to it and the
///                    controlled sequence in `body`
struct Gate {
  GateKind kind = GateKind::X;
  std::vector<int> qubits;
  double angle = 0.0;
  Axis axis = Axis::Y;
  std::vector<double> angles;
  std::vector<bool> polarity;
  std::vector<Gate> body;

  static Gate one_qubit(GateKind k, int q, double angle = 0.0) {
    Gate g;
    g.kind = k;
    g.qubits = {q};
    g.angle = angle;
    return g;
  }
  static Gate ry(int q, double theta) { return one_qubit(GateKind::RY, q, theta); }
  static Gate rz(int q, double phi) { return one_qubit(GateKind::RZ, q, phi); }
  static Gate rotation(Axis a, int q, double t) {
    return one_qubit(a == Axis::Y ? GateKind::RY : GateKind::RZ, q, t);
  }
  static Gate x(int q) { return one_qubit(GateKind::X, q); }
  static Gate h(int q) { return one_qubit(GateKind::H, q); }
  static Gate t(int q) { return one_qubit(GateKind::T, q); }
  static Gate tdg(int q) { return one_qubit(GateKind::TDG, q); }
  static Gate s(int q) { return one_qubit(GateKind::S, q); }

  static Gate cnot(int control, int target) {
    Gate g;
    g.kind = GateKind::CNOT;
    g.qubits = {control, target};
    return g;
  }

  static Gate cswap(int control, int a, int b) {
    Gate g;
    g.kind = GateKind::CSWAP;
    g.qubits = {control, a, b};
    return g;
  }

  static Gate ucr(Axis axis, std::vector<int> controls, int target, std::vector<double> angles) {
    Gate g;
    g.kind = GateKind::UCR;
    g.axis = axis;
    g.qubits = std::move(controls);
    g.qubits.push_back(target);
    g.angles = std::move(angles);
    return g;
  }

  static Gate controlled(const std::vector<Control>& controls, std::vector<Gate> body) {
    Gate g;
    g.kind = GateKind::CONTROLLED;
    for (const Control& c : controls) {
      g.qubits.push_back(c.qubit);
      g.polarity.push_back(c.positive);
    }
    g.body = std::move(body);
    return g;
  }

  bool is_rotation() const noexcept { return kind == GateKind::RY || kind == GateKind::RZ; }
  bool is_one_qubit() const noexcept { return kind <= GateKind::S; }
  bool is_primitive() const noexcept { return is_one_qubit() || kind == GateKind::CNOT; }
  /// Diagonal in the computational basis.
  bool is_diagonal() const noexcept {
    return kind == GateKind::RZ || kind == GateKind::T || kind == GateKind::TDG ||
           kind == GateKind::S || (kind == GateKind::UCR && axis == Axis::Z);
  }

  int target() const { return qubits.back(); }

  /// UCR controls.
  std::span<const int> controls() const {
    return std::span<const int>(qubits).first(qubits.size() - 1);
  }

  /// Control pattern of a CONTROLLED gate as an index (first control MSB).
  std::size_t active_pattern() const {
    std::size_t v = 0;
    for (bool p : polarity) v = (v << 1) | (p ? 1U : 0U);
    return v;
  }

  /// Every qubit touched, sorted.
  std::vector<int> support() const {
    std::vector<int> out = qubits;
    for (const Gate& g : body) {
      const std::vector<int> inner = g.support();
      out.insert(out.end(), inner.begin(), inner.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  friend bool operator==(const Gate& a, const Gate& b) {
    return a.kind == b.kind && a.qubits == b.qubits && a.angle == b.angle &&
           (a.kind != GateKind::UCR || a.axis == b.axis) && a.angles == b.angles &&
           a.polarity == b.polarity && a.body == b.body;
  }
};

enum class RegisterRole { Target, Ancilla, Trash };

struct Register {
  std::string label;
  RegisterRole role = RegisterRole::Target;
  std::vector<int> qubits;
};

namespace detail {

inline void check_gate(const Gate& g, int width) {
  auto fail = [&](const std::string& why) {
    throw CircuitError(std::string(gate_name(g.kind)) + " gate: " + why);
  };
  std::size_t expected = 0;
  switch (g.kind) {
    case GateKind::CNOT: expected = 2; break;
    case GateKind::CSWAP: expected = 3; break;
    case GateKind::UCR:
    case GateKind::CONTROLLED: expected = g.qubits.size(); break;
    default: expected = 1; break;
  }
  if (g.qubits.size() != expected || g.qubits.empty()) fail("wrong operand count");
  for (int q : g.qubits) {
    if (q < 0 || q >= width) {
      fail("qubit " + std::to_string(q) + " outside width " + std::to_string(width));
    }
  }
  std::vector<int> sorted = g.qubits;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    fail("repeated operand");
  }
  if (!std::isfinite(g.angle)) fail("non-finite angle");
  if (g.kind == GateKind::UCR) {
    if (g.angles.size() != std::size_t{1} << (g.qubits.size() - 1)) {
      fail("angle count " + std::to_string(g.angles.size()) + " is not 2^controls");
    }
    for (double a : g.angles) {
      if (!std::isfinite(a)) fail("non-finite angle");
    }
  }
  if (g.kind == GateKind::CONTROLLED) {
    if (g.polarity.size() != g.qubits.size()) fail("polarity list does not match controls");
    for (const Gate& inner : g.body) {
      check_gate(inner, width);
      for (int q : inner.support()) {
        if (std::binary_search(sorted.begin(), sorted.end(), q)) {
          fail("body acts on control qubit " + std::to_string(q));
        }
      }
    }
  }
}

}  // namespace detail

/// Ordered gate list over a fixed number of qubits plus register labels.
class Circuit {
 public:
  explicit Circuit(int num_qubits = 0) : num_qubits_(num_qubits) {
    if (num_qubits < 0) throw CircuitError("negative circuit width");
  }

  int num_qubits() const noexcept { return num_qubits_; }
  const std::vector<Gate>& gates() const noexcept { return gates_; }
  std::size_t size() const noexcept { return gates_.size(); }
  bool empty() const noexcept { return gates_.empty(); }

  /// Phase gamma in U = exp(i gamma) * product of gates.
  double global_phase() const noexcept { return global_phase_; }
  void add_global_phase(double phase) { global_phase_ += phase; }
  void set_global_phase(double phase) { global_phase_ = phase; }

  void append(Gate g) {
    detail::check_gate(g, num_qubits_);
    gates_.push_back(std::move(g));
  }

  void append(std::span<const Gate> gs) {
    for (const Gate& g : gs) append(g);
  }

  const std::vector<Register>& registers() const noexcept { return registers_; }
  void add_register(Register r) { registers_.push_back(std::move(r)); }

  /// Qubits of registers with the given role, ascending.
  std::vector<int> qubits_with_role(RegisterRole role) const {
    std::vector<int> out;
    for (const Register& r : registers_) {
      if (r.role == role) out.insert(out.end(), r.qubits.begin(), r.qubits.end());
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Ancilla and trash qubits, ascending.
  std::vector<int> discarded_qubits() const {
    std::vector<int> out = qubits_with_role(RegisterRole::Ancilla);
    const std::vector<int> trash = qubits_with_role(RegisterRole::Trash);
    out.insert(out.end(), trash.begin(), trash.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Live-qubit count when discarded registers are reset and reused;
  /// defaults to the static width.
  int dynamic_width() const noexcept { return dynamic_width_ > 0 ? dynamic_width_ : num_qubits_; }
  void set_dynamic_width(int w) { dynamic_width_ = w; }

  /// Same width, gates and global phase (register labels ignored).
  friend bool operator==(const Circuit& a, const Circuit& b) {
    return a.num_qubits_ == b.num_qubits_ && a.gates_ == b.gates_ &&
           a.global_phase_ == b.global_phase_;
  }

 private:
  int num_qubits_ = 0;
  std::vector<Gate> gates_;
  double global_phase_ = 0.0;
  std::vector<Register> registers_;
  int dynamic_width_ = 0;
};

// ---------------------------------------------------------------------------
// Uniformly controlled rotations
// ---------------------------------------------------------------------------

inline std::size_t gray_code(std::size_t j) { return j ^ (j >> 1); }

namespace detail {
inline double gray_sign(std::size_t b, std::size_t a) {
  return (std::popcount(b & gray_code(a)) & 1) != 0 ? -1.0 : 1.0;
}
inline std::size_t checked_log2(std::size_t n, const char* who) {
  if (!is_power_of_two(n)) {
    throw DimensionError(std::string(who) + ": length " + std::to_string(n) +
                         " is not a power of two");
  }
  return static_cast<std::size_t>(log2_exact(n));
}
}  // namespace detail

/// phi_a = 2^-k sum_b (-1)^(b . g(a)) theta_b.
inline std::vector<double> ucr_angles(std::span<const double> theta) {
  const std::size_t k = detail::checked_log2(theta.size(), "ucr_angles");
  const std::size_t n = theta.size();
  const double scale = std::ldexp(1.0, -static_cast<int>(k));
  std::vector<double> phi(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < n; ++b) s += detail::gray_sign(b, a) * theta[b];
    phi[a] = scale * s;
  }
  return phi;
}

/// theta_b = sum_a (-1)^(b . g(a)) phi_a.
inline std::vector<double> ucr_angles_inverse(std::span<const double> phi) {
  detail::checked_log2(phi.size(), "ucr_angles_inverse");
  const std::size_t n = phi.size();
  std::vector<double> theta(n, 0.0);
  for (std::size_t b = 0; b < n; ++b) {
    double s = 0.0;
    for (std::size_t a = 0; a < n; ++a) s += detail::gray_sign(b, a) * phi[a];
    theta[b] = s;
  }
  return theta;
}

/// R(phi_0), CNOT, R(phi_1), CNOT, ..., R(phi_{2^k-1}), CNOT. The j-th CNOT
/// is controlled by the control whose pattern bit flips between g(j) and
/// g(j+1), with g(2^k) = g(0) closing the cycle on controls[0]. The product
/// equals the UCR exactly.
inline std::vector<Gate> decompose_ucr(const Gate& g) {
  if (g.kind != GateKind::UCR) throw CircuitError("decompose_ucr: gate is not a UCR");
  const std::span<const int> controls = g.controls();
  const std::size_t k = controls.size();
  const std::size_t n = std::size_t{1} << k;
  if (g.angles.size() != n) throw CircuitError("decompose_ucr: angle count mismatch");
  const std::vector<double> phi = ucr_angles(g.angles);
  std::vector<Gate> out;
  out.reserve(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    out.push_back(Gate::rotation(g.axis, g.target(), phi[j]));
    if (k == 0) break;
    const std::size_t flip = gray_code(j) ^ gray_code((j + 1) % n);
    const int bit = std::countr_zero(flip);
    out.push_back(Gate::cnot(controls[k - 1 - static_cast<std::size_t>(bit)], g.target()));
  }
  return out;
}

/// UCR-y followed by UCR-z on the same controls and target. The z part is
/// emitted in reverse gate order, which realizes the same operator because
/// every RZ there sits between an even number of target flips per pattern;
/// the two CNOTs that meet at the junction cancel.
inline std::vector<Gate> fuse_ucr_pair(const Gate& gy, const Gate& gz) {
  if (gy.kind != GateKind::UCR || gz.kind != GateKind::UCR || gy.axis != Axis::Y ||
      gz.axis != Axis::Z) {
    throw CircuitError("fuse_ucr_pair: expected a UCR-y followed by a UCR-z");
  }
  if (gy.qubits != gz.qubits) {
    throw CircuitError("fuse_ucr_pair: controls or target differ");
  }
  std::vector<Gate> out = decompose_ucr(gy);
  std::vector<Gate> z = decompose_ucr(gz);
  std::reverse(z.begin(), z.end());
  std::size_t skip = 0;
  if (!out.empty() && !z.empty() && out.back().kind == GateKind::CNOT && out.back() == z.front()) {
    out.pop_back();
    skip = 1;
  }
  out.insert(out.end(), z.begin() + static_cast<std::ptrdiff_t>(skip), z.end());
  return out;
}

/// CSWAP(c; a, b) = CNOT(b, a) Toffoli(c, a; b) CNOT(b, a) with the
/// Clifford+T Toffoli: 8 CNOTs and 10 one-qubit gates, exact.
inline std::vector<Gate> lower_cswap(const Gate& g) {
  if (g.kind != GateKind::CSWAP) throw CircuitError("lower_cswap: gate is not a CSWAP");
  const int c = g.qubits[0];
  const int a = g.qubits[1];
  const int b = g.qubits[2];
  // Toffoli with controls x, y and target z.
  const int x = c, y = a, z = b;
  return {
      Gate::cnot(b, a),
      Gate::h(z),    Gate::cnot(y, z), Gate::tdg(z), Gate::cnot(x, z), Gate::t(z),
      Gate::cnot(y, z), Gate::tdg(z), Gate::cnot(x, z), Gate::tdg(y), Gate::t(z),
      Gate::cnot(x, y), Gate::h(z),    Gate::tdg(y), Gate::cnot(x, y), Gate::t(x),
      Gate::s(y),
      Gate::cnot(b, a),
  };
}

/// Gates whose product is diag(exp(i chi[a])) over `qubits` (qubits[0] MSB):
/// one UCR-z per qubit, last qubit first, plus the returned global phase.
struct PhasedGates {
  std::vector<Gate> gates;
  double global_phase = 0.0;
};

inline PhasedGates diagonal_phase_gates(const std::vector<int>& qubits, std::vector<double> chi) {
  const std::size_t k = qubits.size();
  if (chi.size() != std::size_t{1} << k) {
    throw DimensionError("diagonal_phase_gates: phase count is not 2^qubits");
  }
  PhasedGates out;
  for (std::size_t level = k; level-- > 0;) {
    const std::size_t half = chi.size() / 2;
    std::vector<double> z(half);
    std::vector<double> rest(half);
    for (std::size_t a = 0; a < half; ++a) {
      z[a] = chi[2 * a + 1] - chi[2 * a];
      rest[a] = 0.5 * (chi[2 * a] + chi[2 * a + 1]);
    }
    out.gates.push_back(Gate::ucr(
        Axis::Z, std::vector<int>(qubits.begin(), qubits.begin() + static_cast<std::ptrdiff_t>(level)),
        qubits[level], std::move(z)));
    chi = std::move(rest);
  }
  out.global_phase = chi[0];
  return out;
}

// ---------------------------------------------------------------------------
// Lowering
// ---------------------------------------------------------------------------

inline constexpr double kZeroAngle = 1e-14;

struct LowerOptions {
  /// Drop all-zero UCRs, delete rotations with |angle| <= 1e-14 and cancel
  /// CNOT pairs that meet through commuting gates.
  bool skip_zero = true;
  /// Leave CSWAP gates in place (used for counting).
  bool keep_cswap = false;
};

namespace detail {

inline std::vector<double> pattern_angles(std::size_t k, std::size_t pattern, double value) {
  std::vector<double> a(std::size_t{1} << k, 0.0);
  a[pattern] = value;
  return a;
}

inline bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::abs(a) <= kZeroAngle; });
}

inline void expand(const Gate& g, bool keep_cswap, std::vector<Gate>& out, double& phase);

// Appends a UCR/phase realization of primitive `p` fired by the control
// pattern `pattern` on `controls`.
inline void control_primitive(const Gate& p, const std::vector<int>& controls,
                              std::size_t pattern, std::vector<Gate>& out, double& phase) {
  const std::size_t k = controls.size();
  auto ucr = [&](Axis axis, int target, double angle) {
    out.push_back(Gate::ucr(axis, controls, target, pattern_angles(k, pattern, angle)));
  };
  auto branch_phase = [&](const std::vector<int>& qs, std::size_t pat, double value) {
    PhasedGates d = diagonal_phase_gates(qs, pattern_angles(qs.size(), pat, value));
    out.insert(out.end(), d.gates.begin(), d.gates.end());
    phase += d.global_phase;
  };
  const int q = p.qubits.empty() ? 0 : p.target();
  switch (p.kind) {
    case GateKind::RY: ucr(Axis::Y, q, p.angle); return;
    case GateKind::RZ: ucr(Axis::Z, q, p.angle); return;
    case GateKind::X:  // X = i RY(pi) RZ(pi)
      ucr(Axis::Z, q, kPi);
      ucr(Axis::Y, q, kPi);
      branch_phase(controls, pattern, kPi / 2);
      return;
    case GateKind::H:  // H = i RY(pi/2) RZ(pi)
      ucr(Axis::Z, q, kPi);
      ucr(Axis::Y, q, kPi / 2);
      branch_phase(controls, pattern, kPi / 2);
      return;
    case GateKind::T:
      ucr(Axis::Z, q, kPi / 4);
      branch_phase(controls, pattern, kPi / 8);
      return;
    case GateKind::TDG:
      ucr(Axis::Z, q, -kPi / 4);
      branch_phase(controls, pattern, -kPi / 8);
      return;
    case GateKind::S:
      ucr(Axis::Z, q, kPi / 2);
      branch_phase(controls, pattern, kPi / 4);
      return;
    case GateKind::CNOT: {
      std::vector<int> wider = controls;
      wider.push_back(p.qubits[0]);
      control_primitive(Gate::x(p.qubits[1]), wider, (pattern << 1) | 1U, out, phase);
      return;
    }
    case GateKind::UCR: {
      std::vector<int> wider = controls;
      const std::span<const int> inner = p.controls();
      wider.insert(wider.end(), inner.begin(), inner.end());
      std::vector<double> angles(std::size_t{1} << wider.size(), 0.0);
      const std::size_t base = pattern << inner.size();
      std::copy(p.angles.begin(), p.angles.end(), angles.begin() + static_cast<std::ptrdiff_t>(base));
      out.push_back(Gate::ucr(p.axis, std::move(wider), p.target(), std::move(angles)));
      return;
    }
    default: throw CircuitError("control_primitive: unexpected gate kind");
  }
}

inline void expand_controlled(const Gate& g, std::vector<Gate>& out, double& phase) {
  std::vector<Gate> body;
  double body_phase = 0.0;
  for (const Gate& inner : g.body) expand(inner, false, body, body_phase);
  const std::size_t pattern = g.active_pattern();
  for (const Gate& p : body) control_primitive(p, g.qubits, pattern, out, phase);
  if (body_phase != 0.0) {
    PhasedGates d =
        diagonal_phase_gates(g.qubits, pattern_angles(g.qubits.size(), pattern, body_phase));
    out.insert(out.end(), d.gates.begin(), d.gates.end());
    phase += d.global_phase;
  }
}

// Expands CSWAP (unless kept) and CONTROLLED; UCRs pass through.
inline void expand(const Gate& g, bool keep_cswap, std::vector<Gate>& out, double& phase) {
  switch (g.kind) {
    case GateKind::CSWAP:
      if (keep_cswap) {
        out.push_back(g);
      } else {
        for (const Gate& p : lower_cswap(g)) out.push_back(p);
      }
      return;
    case GateKind::CONTROLLED: expand_controlled(g, out, phase); return;
    default: out.push_back(g); return;
  }
}

inline bool commutes_with_cnot(const Gate& cx, const Gate& g) {
  const int c = cx.qubits[0];
  const int t = cx.qubits[1];
  if (g.kind == GateKind::CNOT) return c != g.qubits[1] && g.qubits[0] != t;
  if (g.is_one_qubit()) {
    const int q = g.qubits[0];
    if (q != c && q != t) return true;
    if (q == c) return g.is_diagonal();
    return g.kind == GateKind::X;
  }
  for (int q : g.support()) {
    if (q == c || q == t) return false;
  }
  return true;
}

// Cancels CNOT pairs that can be brought together through commuting gates,
// repeated to a fixpoint.
inline std::vector<Gate> cancel_cnots(std::vector<Gate> gates) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Gate> out;
    out.reserve(gates.size());
    for (Gate& g : gates) {
      bool cancelled = false;
      if (g.kind == GateKind::CNOT) {
        for (std::size_t j = out.size(); j-- > 0;) {
          if (out[j].kind == GateKind::CNOT && out[j].qubits == g.qubits) {
            out.erase(out.begin() + static_cast<std::ptrdiff_t>(j));
            cancelled = true;
            break;
          }
          if (!commutes_with_cnot(g, out[j])) break;
        }
      }
      if (cancelled) {
        changed = true;
      } else {
        out.push_back(std::move(g));
      }
    }
    gates = std::move(out);
  }
  return gates;
}

}  // namespace detail

/// Lowers every UCR, CONTROLLED and (unless kept) CSWAP to
/// {RY, RZ, X, H, T, TDG, S, CNOT}. Adjacent UCR-y/UCR-z pairs on the same
/// operands are fused. The unitary is preserved exactly (the global phase
/// absorbs the phases of controlled lowerings).
inline Circuit lower_all(const Circuit& c, LowerOptions options = {}) {
  std::vector<Gate> stage;
  double phase = c.global_phase();
  for (const Gate& g : c.gates()) detail::expand(g, options.keep_cswap, stage, phase);

  if (options.skip_zero) {
    std::erase_if(stage, [](const Gate& g) {
      return g.kind == GateKind::UCR && detail::all_zero(g.angles);
    });
  }

  std::vector<Gate> flat;
  flat.reserve(stage.size());
  for (std::size_t i = 0; i < stage.size(); ++i) {
    const Gate& g = stage[i];
    if (g.kind != GateKind::UCR) {
      flat.push_back(g);
      continue;
    }
    std::vector<Gate> parts;
    if (g.axis == Axis::Y && i + 1 < stage.size() && stage[i + 1].kind == GateKind::UCR &&
        stage[i + 1].axis == Axis::Z && stage[i + 1].qubits == g.qubits) {
      parts = fuse_ucr_pair(g, stage[i + 1]);
      ++i;
    } else {
      parts = decompose_ucr(g);
    }
    flat.insert(flat.end(), parts.begin(), parts.end());
  }

  if (options.skip_zero) {
    std::erase_if(flat, [](const Gate& g) {
      return g.is_rotation() && std::abs(g.angle) <= kZeroAngle;
    });
    flat = detail::cancel_cnots(std::move(flat));
  }

  Circuit out(c.num_qubits());
  for (const Register& r : c.registers()) out.add_register(r);
  out.set_dynamic_width(c.dynamic_width());
  out.set_global_phase(phase);
  out.append(flat);
  return out;
}

// ---------------------------------------------------------------------------
// Counting
// ---------------------------------------------------------------------------

struct GateCountReport {
  /// Counts with CSWAPs kept as units.
  std::size_t cnot = 0;
  std::size_t one_qubit_rotations = 0;
  std::size_t other_one_qubit = 0;
  std::size_t cswap = 0;
  /// Counts after lowering CSWAPs as well.
  std::size_t cnot_total = 0;
  std::size_t one_qubit_total = 0;
  std::size_t total_primitive = 0;
  std::size_t registers_static = 0;
  std::size_t registers_dynamic = 0;

  friend bool operator==(const GateCountReport&, const GateCountReport&) = default;
};

inline GateCountReport gate_counts(const Circuit& c, bool skip_zero = true) {
  GateCountReport r;
  const Circuit kept = lower_all(c, {.skip_zero = skip_zero, .keep_cswap = true});
  for (const Gate& g : kept.gates()) {
    if (g.kind == GateKind::CNOT) ++r.cnot;
    else if (g.kind == GateKind::CSWAP) ++r.cswap;
    else if (g.is_rotation()) ++r.one_qubit_rotations;
    else ++r.other_one_qubit;
  }
  const Circuit full = lower_all(c, {.skip_zero = skip_zero, .keep_cswap = false});
  for (const Gate& g : full.gates()) {
    if (g.kind == GateKind::CNOT) ++r.cnot_total;
    else ++r.one_qubit_total;
  }
  r.total_primitive = full.size();
  r.registers_static = static_cast<std::size_t>(c.num_qubits());
  r.registers_dynamic = static_cast<std::size_t>(c.dynamic_width());
  return r;
}

// ---------------------------------------------------------------------------
// Unitary of a circuit (dense local-matrix product, test oracle)
// ---------------------------------------------------------------------------

inline constexpr int kMaxUnitaryQubits = 10;

inline ComplexMatrix unitary_of(const Circuit& c);

namespace detail {

inline ComplexMatrix rotation_matrix(Axis axis, double t) {
  const double ch = std::cos(t / 2);
  const double sh = std::sin(t / 2);
  if (axis == Axis::Y) return ComplexMatrix(2, 2, {ch, -sh, sh, ch});
  return ComplexMatrix(2, 2, {std::polar(1.0, -t / 2), 0.0, 0.0, std::polar(1.0, t / 2)});
}

inline ComplexMatrix fixed_matrix(GateKind k) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (k) {
    case GateKind::X: return ComplexMatrix(2, 2, {0.0, 1.0, 1.0, 0.0});
    case GateKind::H: return ComplexMatrix(2, 2, {r, r, r, -r});
    case GateKind::T: return ComplexMatrix(2, 2, {1.0, 0.0, 0.0, std::polar(1.0, kPi / 4)});
    case GateKind::TDG: return ComplexMatrix(2, 2, {1.0, 0.0, 0.0, std::polar(1.0, -kPi / 4)});
    case GateKind::S: return ComplexMatrix(2, 2, {1.0, 0.0, 0.0, Complex{0.0, 1.0}});
    default: throw CircuitError("fixed_matrix: not a fixed one-qubit gate");
  }
}

inline ComplexMatrix permutation_matrix(std::size_t d, auto&& map) {
  ComplexMatrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) m(map(i), i) = 1.0;
  return m;
}

// Local matrix of `g` over `qubits` (qubits[0] most significant).
inline ComplexMatrix local_matrix(const Gate& g, std::vector<int>& qubits) {
  switch (g.kind) {
    case GateKind::RY:
    case GateKind::RZ:
      qubits = g.qubits;
      return rotation_matrix(g.kind == GateKind::RY ? Axis::Y : Axis::Z, g.angle);
    case GateKind::CNOT:
      qubits = g.qubits;
      return permutation_matrix(4, [](std::size_t i) { return (i & 2U) != 0 ? i ^ 1U : i; });
    case GateKind::CSWAP:
      qubits = g.qubits;
      return permutation_matrix(8, [](std::size_t i) {
        const bool a = (i & 2U) != 0;
        const bool b = (i & 1U) != 0;
        return (i & 4U) != 0 && a != b ? i ^ 3U : i;
      });
    case GateKind::UCR: {
      qubits = g.qubits;
      const std::size_t blocks = g.angles.size();
      ComplexMatrix m(2 * blocks, 2 * blocks);
      for (std::size_t a = 0; a < blocks; ++a) {
        const ComplexMatrix r = rotation_matrix(g.axis, g.angles[a]);
        for (std::size_t i = 0; i < 2; ++i) {
          for (std::size_t j = 0; j < 2; ++j) m(2 * a + i, 2 * a + j) = r(i, j);
        }
      }
      return m;
    }
    case GateKind::CONTROLLED: {
      std::vector<int> targets;
      for (const Gate& inner : g.body) {
        for (int q : inner.support()) targets.push_back(q);
      }
      std::sort(targets.begin(), targets.end());
      targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
      Circuit sub(static_cast<int>(targets.size()));
      for (Gate inner : g.body) {
        auto remap = [&](auto& self, Gate& x) -> void {
          for (int& q : x.qubits) {
            q = static_cast<int>(std::lower_bound(targets.begin(), targets.end(), q) -
                                 targets.begin());
          }
          for (Gate& y : x.body) self(self, y);
        };
        remap(remap, inner);
        sub.append(std::move(inner));
      }
      const ComplexMatrix body = unitary_of(sub);
      const std::size_t db = body.rows();
      const std::size_t nc = g.qubits.size();
      ComplexMatrix m = ComplexMatrix::identity(db << nc);
      const std::size_t base = g.active_pattern() * db;
      for (std::size_t i = 0; i < db; ++i) {
        for (std::size_t j = 0; j < db; ++j) m(base + i, base + j) = body(i, j);
      }
      qubits = g.qubits;
      qubits.insert(qubits.end(), targets.begin(), targets.end());
      return m;
    }
    default:
      qubits = g.qubits;
      return fixed_matrix(g.kind);
  }
}

// U <- (local gate on `qubits`) * U, column by column.
inline void apply_local(ComplexMatrix& u, int n, const std::vector<int>& qubits,
                        const ComplexMatrix& g) {
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t m = qubits.size();
  const std::size_t sub = std::size_t{1} << m;
  std::vector<std::size_t> offset(sub, 0);
  std::size_t qmask = 0;
  for (std::size_t s = 0; s < sub; ++s) {
    for (std::size_t b = 0; b < m; ++b) {
      if ((s >> (m - 1 - b)) & 1U) offset[s] |= qubit_mask(n, qubits[b]);
    }
  }
  for (int q : qubits) qmask |= qubit_mask(n, q);
  std::vector<Complex> in(sub);
  for (std::size_t col = 0; col < dim; ++col) {
    for (std::size_t base = 0; base < dim; ++base) {
      if ((base & qmask) != 0) continue;
      for (std::size_t s = 0; s < sub; ++s) in[s] = u(base | offset[s], col);
      for (std::size_t r = 0; r < sub; ++r) {
        Complex acc{};
        for (std::size_t s = 0; s < sub; ++s) acc += g(r, s) * in[s];
        u(base | offset[r], col) = acc;
      }
    }
  }
}

}  // namespace detail

/// exp(i global_phase) * G_last ... G_first as a dense 2^n x 2^n matrix.
inline ComplexMatrix unitary_of(const Circuit& c) {
  if (c.num_qubits() > kMaxUnitaryQubits) {
    throw CircuitError("unitary_of: width " + std::to_string(c.num_qubits()) + " exceeds " +
                       std::to_string(kMaxUnitaryQubits));
  }
  ComplexMatrix u = ComplexMatrix::identity(std::size_t{1} << c.num_qubits());
  std::vector<int> qubits;
  for (const Gate& g : c.gates()) {
    const ComplexMatrix local = detail::local_matrix(g, qubits);
    detail::apply_local(u, c.num_qubits(), qubits, local);
  }
  if (c.global_phase() != 0.0) u = std::polar(1.0, c.global_phase()) * u;
  return u;
}

/// max |a - e^{i t} b| with t aligning the largest-magnitude entry of b.
inline double max_diff_up_to_phase(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("max_diff_up_to_phase: shapes differ");
  }
  std::size_t arg = 0;
  for (std::size_t i = 0; i < b.data().size(); ++i) {
    if (std::abs(b.data()[i]) > std::abs(b.data()[arg])) arg = i;
  }
  Complex align{1.0, 0.0};
  if (std::abs(b.data()[arg]) > 0.0 && std::abs(a.data()[arg]) > 0.0) {
    const Complex r = a.data()[arg] / b.data()[arg];
    align = r / std::abs(r);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - align * b.data()[i]));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// QASM export
// ---------------------------------------------------------------------------

inline std::string format_angle(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// OPENQASM 2.0 text of a lowered circuit; the global phase is not written.
inline std::string export_qasm(const Circuit& c) {
  std::string out = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[" +
                    std::to_string(c.num_qubits()) + "];\n";
  auto q = [](int i) { return "q[" + std::to_string(i) + "]"; };
  for (const Gate& g : c.gates()) {
    if (g.is_rotation()) {
      out += std::string(gate_name(g.kind)) + "(" + format_angle(g.angle) + ") " + q(g.target()) +
             ";\n";
    } else if (g.is_one_qubit()) {
      out += std::string(gate_name(g.kind)) + " " + q(g.target()) + ";\n";
    } else if (g.kind == GateKind::CNOT) {
      out += "cx " + q(g.qubits[0]) + "," + q(g.qubits[1]) + ";\n";
    } else {
      throw CircuitError(std::string("export_qasm: unlowered ") + gate_name(g.kind) +
                         " gate; run lower_all first");
    }
  }
  return out;
}

}  // namespace qsprep
