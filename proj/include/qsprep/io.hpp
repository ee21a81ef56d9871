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

// JSON input documents and reports.
//
//   {"kind": "statevector", "num_qubits": n, "data": [[re, im], ...]}
//   {"kind": "ensemble", "num_qubits": n, "weights": [p_0, ...],
//    "data": [[[re, im], ...], ...]}
//   {"kind": "density", "num_qubits": n, "data": <4^n entries, row-major,
//    flat or as rows>}
//
// A complex entry is [re, im] or a bare real number.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsprep/cholesky.hpp"
#include "qsprep/circuit.hpp"
#include "qsprep/error.hpp"
#include "qsprep/linalg.hpp"

namespace qsprep {

using Json = nlohmann::ordered_json;

enum class DocumentKind { StateVector, Ensemble, Density };

struct InputDocument {
  DocumentKind kind = DocumentKind::StateVector;
  int num_qubits = 0;
  std::optional<StateVector> state;
  std::optional<Ensemble> ensemble;
  std::optional<DensityMatrix> density;

  /// The document as a density matrix (projector or ensemble mixture).
  DensityMatrix as_density() const {
    if (density) return *density;
    if (state) return DensityMatrix::from_state(*state);
    ComplexMatrix rho = ensemble->density();
    detail::symmetrize(rho);
    return DensityMatrix::from_trusted(std::move(rho));
  }
};

inline Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw ValidationError(where + ": expected [re, im] or a number");
}

inline std::vector<Complex> complex_list(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected a list");
  std::vector<Complex> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(complex_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline Json complex_list_to_json(std::span<const Complex> v) {
  Json out = Json::array();
  for (const Complex& z : v) out.push_back(complex_to_json(z));
  return out;
}

/// Nested rows of [re, im].
inline Json matrix_to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    rows.push_back(complex_list_to_json(m.data().subspan(i * m.cols(), m.cols())));
  }
  return rows;
}

namespace detail {

inline std::vector<Complex> checked_state_data(const Json& j, int n, const std::string& where) {
  std::vector<Complex> v = complex_list(j, where);
  const std::size_t d = std::size_t{1} << n;
  if (v.size() != d) {
    throw DimensionError(where + ": " + std::to_string(v.size()) + " amplitudes, expected 2^" +
                         std::to_string(n) + " = " + std::to_string(d));
  }
  return v;
}

inline ComplexMatrix density_data(const Json& j, int n) {
  const std::size_t d = std::size_t{1} << n;
  if (!j.is_array()) throw ValidationError("data: expected a list");
  std::vector<Complex> flat;
  const bool nested = !j.empty() && j[0].is_array() && !j[0].empty() && j[0][0].is_array();
  if (nested) {
    if (j.size() != d) throw DimensionError("data: expected " + std::to_string(d) + " rows");
    for (std::size_t i = 0; i < d; ++i) {
      const std::vector<Complex> row = complex_list(j[i], "data[" + std::to_string(i) + "]");
      if (row.size() != d) {
        throw DimensionError("data[" + std::to_string(i) + "]: expected " + std::to_string(d) +
                             " entries");
      }
      flat.insert(flat.end(), row.begin(), row.end());
    }
  } else {
    flat = complex_list(j, "data");
    if (flat.size() != d * d) {
      throw DimensionError("data: " + std::to_string(flat.size()) + " entries, expected 4^" +
                           std::to_string(n) + " = " + std::to_string(d * d));
    }
  }
  return ComplexMatrix(d, d, std::move(flat));
}

}  // namespace detail

/// Validates and converts a parsed document; errors name the offending
/// field or invariant.
inline InputDocument parse_document(const Json& doc) {
  try {
    if (!doc.is_object()) throw ValidationError("document: expected a JSON object");
    if (!doc.contains("kind") || !doc["kind"].is_string()) {
      throw ValidationError("document: missing string field 'kind'");
    }
    if (!doc.contains("num_qubits") || !doc["num_qubits"].is_number_integer()) {
      throw ValidationError("document: missing integer field 'num_qubits'");
    }
    if (!doc.contains("data")) throw ValidationError("document: missing field 'data'");
    const std::string kind = doc["kind"].get<std::string>();
    const int n = doc["num_qubits"].get<int>();
    if (n < 0 || n > 24) throw DimensionError("num_qubits " + std::to_string(n) + " out of range");

    InputDocument out;
    out.num_qubits = n;
    if (kind == "statevector") {
      out.kind = DocumentKind::StateVector;
      out.state = StateVector(detail::checked_state_data(doc["data"], n, "data"));
    } else if (kind == "ensemble") {
      out.kind = DocumentKind::Ensemble;
      if (!doc.contains("weights")) throw ValidationError("document: missing field 'weights'");
      const std::vector<double> weights = doc["weights"].get<std::vector<double>>();
      const Json& data = doc["data"];
      if (!data.is_array()) throw ValidationError("data: expected a list of states");
      std::vector<StateVector> states;
      for (std::size_t i = 0; i < data.size(); ++i) {
        const std::string where = "data[" + std::to_string(i) + "]";
        try {
          states.emplace_back(detail::checked_state_data(data[i], n, where));
        } catch (const ValidationError& e) {
          throw ValidationError(where + ": " + e.what());
        }
      }
      out.ensemble = Ensemble(weights, std::move(states));
    } else if (kind == "density") {
      out.kind = DocumentKind::Density;
      if (n > 10) throw DimensionError("density documents are limited to 10 qubits");
      out.density = DensityMatrix(detail::density_data(doc["data"], n));
    } else {
      throw ValidationError("document: unknown kind '" + kind + "'");
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("document: ") + e.what());
  }
}

inline Json state_document(const StateVector& psi) {
  return Json{{"kind", "statevector"},
              {"num_qubits", psi.num_qubits()},
              {"data", complex_list_to_json(psi.amplitudes())}};
}

inline Json ensemble_document(const Ensemble& e) {
  Json data = Json::array();
  for (const StateVector& s : e.states()) data.push_back(complex_list_to_json(s.amplitudes()));
  return Json{{"kind", "ensemble"},
              {"num_qubits", e.num_qubits()},
              {"weights", e.weights()},
              {"data", std::move(data)}};
}

inline Json density_document(const DensityMatrix& rho) {
  return Json{{"kind", "density"},
              {"num_qubits", rho.num_qubits()},
              {"data", matrix_to_json(rho.matrix())}};
}

inline Json counts_to_json(const GateCountReport& r) {
  return Json{{"cnot", r.cnot},
              {"one_qubit_rotations", r.one_qubit_rotations},
              {"other_one_qubit", r.other_one_qubit},
              {"cswap", r.cswap},
              {"cnot_total", r.cnot_total},
              {"one_qubit_total", r.one_qubit_total},
              {"total_primitive", r.total_primitive},
              {"registers_static", r.registers_static},
              {"registers_dynamic", r.registers_dynamic}};
}

}  // namespace qsprep
