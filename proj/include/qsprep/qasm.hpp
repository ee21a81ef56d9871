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

// Reader for the OPENQASM 2.0 subset written by export_qasm.
//
// Accepted statements, one per line: the OPENQASM and include headers, a
// single `qreg q[N];`, `ry(a) q[i];`, `rz(a) q[i];`, `x|h|t|tdg|s q[i];` and
// `cx q[i],q[j];`. Blank lines and `//` comments are skipped.

#pragma once

#include <charconv>
#include <cstddef>
#include <regex>
#include <string>
#include <string_view>

#include "qsprep/circuit.hpp"
#include "qsprep/error.hpp"

namespace qsprep {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
inline T parse_number(const std::string& text, std::size_t line) {
  T value{};
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ParseError(line, "malformed number '" + text + "'");
  }
  return value;
}

inline GateKind fixed_kind(const std::string& name) {
  if (name == "x") return GateKind::X;
  if (name == "h") return GateKind::H;
  if (name == "t") return GateKind::T;
  if (name == "tdg") return GateKind::TDG;
  return GateKind::S;
}

}  // namespace detail

inline Circuit parse_qasm(std::string_view text) {
  static const std::regex header(R"(OPENQASM\s+2\.0\s*;)");
  static const std::regex include(R"(include\s+"qelib1\.inc"\s*;)");
  static const std::regex qreg(R"(qreg\s+q\s*\[\s*(\d+)\s*\]\s*;)");
  static const std::regex rotation(R"((ry|rz)\s*\(\s*([^()\s]+)\s*\)\s*q\s*\[\s*(\d+)\s*\]\s*;)");
  static const std::regex fixed(R"((x|h|tdg|t|s)\s+q\s*\[\s*(\d+)\s*\]\s*;)");
  static const std::regex cx(R"(cx\s+q\s*\[\s*(\d+)\s*\]\s*,\s*q\s*\[\s*(\d+)\s*\]\s*;)");

  Circuit c(0);
  bool have_header = false;
  bool have_qreg = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string line(detail::trim(raw));
    if (line.empty() || line.starts_with("//")) continue;

    std::smatch m;
    auto qubit = [&](std::size_t group) {
      return detail::parse_number<int>(m[group].str(), line_no);
    };
    auto add = [&](Gate g) {
      if (!have_qreg) throw ParseError(line_no, "gate before qreg declaration");
      try {
        c.append(std::move(g));
      } catch (const CircuitError& e) {
        throw ParseError(line_no, e.what());
      }
    };

    if (std::regex_match(line, header)) {
      if (have_header || have_qreg || !c.empty()) {
        throw ParseError(line_no, "OPENQASM header must come first");
      }
      have_header = true;
    } else if (std::regex_match(line, include)) {
      if (have_qreg) throw ParseError(line_no, "include after qreg declaration");
    } else if (std::regex_match(line, m, qreg)) {
      if (have_qreg) throw ParseError(line_no, "only one qreg is supported");
      c = Circuit(qubit(1));
      have_qreg = true;
    } else if (std::regex_match(line, m, rotation)) {
      const double angle = detail::parse_number<double>(m[2].str(), line_no);
      add(Gate::rotation(m[1].str() == "ry" ? Axis::Y : Axis::Z, qubit(3), angle));
    } else if (std::regex_match(line, m, fixed)) {
      add(Gate::one_qubit(detail::fixed_kind(m[1].str()), qubit(2)));
    } else if (std::regex_match(line, m, cx)) {
      add(Gate::cnot(qubit(1), qubit(2)));
    } else {
      throw ParseError(line_no, "unsupported statement '" + line + "'");
    }
  }
  return c;
}

}  // namespace qsprep
