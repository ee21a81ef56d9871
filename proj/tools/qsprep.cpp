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

// qsprep: state preparation circuits from JSON state documents.
//
// Exit codes: 0 success, 1 input or usage error, 2 verification below the
// fidelity threshold. Reports go to --report or standard output and are
// byte-identical for identical inputs unless --timings is given.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qsprep/io.hpp"
#include "qsprep/qsprep.hpp"

namespace {

using qsprep::Json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitVerify = 2;

class Stopwatch {
 public:
  void lap(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    laps_[stage] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }
  Json to_json() const {
    Json out = Json::object();
    for (const auto& [k, v] : laps_) out[k] = v;
    return out;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
  std::map<std::string, double> laps_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qsprep::ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw qsprep::ValidationError("cannot write '" + path + "'");
  out << text;
}

qsprep::InputDocument load_document(const std::string& path) {
  Json doc;
  try {
    doc = Json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw qsprep::ValidationError(path + ": " + e.what());
  }
  return qsprep::parse_document(doc);
}

void emit(const Json& report, const std::string& path) {
  const std::string text = report.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

std::vector<int> parse_trash(const std::string& list) {
  std::vector<int> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int q = -1;
    try {
      q = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || q < 0) {
      throw qsprep::ValidationError("--trash: '" + item + "' is not a qubit index");
    }
    out.push_back(q);
  }
  return out;
}

Json verification_json(bool verified, double fidelity, double distance, double threshold) {
  Json v{{"verified", verified}};
  if (verified) {
    v["fidelity"] = fidelity;
    v["trace_distance"] = distance;
    v["threshold"] = threshold;
    v["passed"] = fidelity >= threshold;
  }
  return v;
}

int exit_for(const Json& verification) {
  if (verification.value("verified", false) && !verification.value("passed", true)) {
    return kExitVerify;
  }
  return kExitOk;
}

struct CommonFlags {
  std::string output;
  std::string report;
  double threshold = 1.0 - 1e-9;
  bool timings = false;
  bool keep_zero = false;
};

int cmd_synth_pure(const std::string& input, const CommonFlags& f) {
  Stopwatch clock;
  const qsprep::InputDocument doc = load_document(input);
  if (doc.kind != qsprep::DocumentKind::StateVector) {
    throw qsprep::ValidationError("synth-pure expects a statevector document");
  }
  clock.lap("load");
  const qsprep::Circuit c = qsprep::synth_pure(*doc.state, {.skip_zero = !f.keep_zero});
  const qsprep::Circuit low = qsprep::lower_all(c, {.skip_zero = !f.keep_zero});
  clock.lap("synthesis");
  if (!f.output.empty()) write_file(f.output, qsprep::export_qasm(low));

  Json report{{"command", "synth-pure"},
              {"num_qubits", doc.num_qubits},
              {"counts", qsprep::counts_to_json(qsprep::gate_counts(c, !f.keep_zero))}};
  Json verification;
  if (doc.num_qubits <= qsprep::kVerifyPureQubits) {
    const qsprep::SimResult r = qsprep::verify(*doc.state, low, {});
    verification = verification_json(true, r.fidelity, r.trace_distance, f.threshold);
  } else {
    verification = verification_json(false, 0, 0, f.threshold);
  }
  clock.lap("verification");
  report["verification"] = verification;
  if (f.timings) report["timings"] = clock.to_json();
  emit(report, f.report);
  return exit_for(verification);
}

struct MixedFlags {
  std::string method = "purification";
  double drop_tol = 0.0;
  bool no_phase_fix = false;
  bool no_merge = false;
  bool reorder = false;
};

Json stats_json(const qsprep::FactorStats& s) {
  return Json{{"ensemble_size", s.ensemble_size}, {"rank", s.rank},
              {"factor_nnz", s.factor_nnz},       {"drop_tol", s.drop_tol},
              {"diagonal_shift", s.diagonal_shift}, {"relative_error", s.relative_error}};
}

int cmd_synth_mixed(const std::string& input, const CommonFlags& f, const MixedFlags& m) {
  Stopwatch clock;
  const qsprep::InputDocument doc = load_document(input);
  if (doc.kind == qsprep::DocumentKind::StateVector) {
    throw qsprep::ValidationError("synth-mixed expects an ensemble or density document");
  }
  if (m.method != "mixture" && m.method != "purification") {
    throw qsprep::ValidationError("--method must be 'mixture' or 'purification'");
  }
  if (!(m.drop_tol >= 0.0) || !std::isfinite(m.drop_tol)) {
    throw qsprep::ValidationError("--drop-tol must be a finite value >= 0");
  }
  const bool mixture = m.method == "mixture";
  clock.lap("load");

  Json report{{"command", "synth-mixed"}, {"method", m.method}, {"num_qubits", doc.num_qubits}};
  qsprep::Circuit c(0);
  if (doc.kind == qsprep::DocumentKind::Ensemble) {
    if (m.drop_tol > 0.0) {
      throw qsprep::ValidationError("--drop-tol applies to density documents only");
    }
    c = mixture ? qsprep::synth_mixture(*doc.ensemble, {.skip_zero = !f.keep_zero}).circuit
                : qsprep::synth_purification(*doc.ensemble, {.skip_zero = !f.keep_zero,
                                                             .phase_fix = !m.no_phase_fix,
                                                             .merge = !m.no_merge})
                      .circuit;
    report["ensemble_size"] = doc.ensemble->size();
  } else {
    qsprep::DensitySynthOptions opts;
    opts.method = mixture ? qsprep::MixedMethod::Mixture : qsprep::MixedMethod::Purification;
    opts.drop_tol = m.drop_tol;
    opts.reorder = m.reorder;
    opts.skip_zero = !f.keep_zero;
    opts.phase_fix = !m.no_phase_fix;
    opts.merge = !m.no_merge;
    opts.verify = false;
    qsprep::DensitySynthesis s = qsprep::synth_from_density(*doc.density, opts);
    report["factorization"] = stats_json(s.stats);
    c = std::move(s.circuit);
  }
  const qsprep::Circuit low = qsprep::lower_all(c, {.skip_zero = !f.keep_zero});
  clock.lap("synthesis");
  if (!f.output.empty()) write_file(f.output, qsprep::export_qasm(low));

  report["counts"] = qsprep::counts_to_json(qsprep::gate_counts(c, !f.keep_zero));
  report["trash"] = c.discarded_qubits();
  const qsprep::ApproxError err = qsprep::check_against(doc.as_density(), low);
  const Json verification =
      verification_json(err.verified, err.fidelity, err.trace_distance, f.threshold);
  clock.lap("verification");
  report["verification"] = verification;
  if (f.timings) report["timings"] = clock.to_json();
  emit(report, f.report);
  return exit_for(verification);
}

int cmd_factorize(const std::string& input, const CommonFlags& f, double drop_tol, bool pivot,
                  bool reorder) {
  Stopwatch clock;
  const qsprep::InputDocument doc = load_document(input);
  if (doc.kind != qsprep::DocumentKind::Density) {
    throw qsprep::ValidationError("factorize expects a density document");
  }
  if (!(drop_tol >= 0.0) || !std::isfinite(drop_tol)) {
    throw qsprep::ValidationError("--drop-tol must be a finite value >= 0");
  }
  if (pivot && drop_tol > 0.0) {
    throw qsprep::ValidationError("--pivot and a positive --drop-tol are exclusive");
  }
  clock.lap("load");
  const qsprep::FactorMatrix a = qsprep::factor_density(*doc.density, drop_tol, reorder);
  const qsprep::Ensemble e = qsprep::ensemble_from_factor(a);
  clock.lap("factorization");

  const qsprep::ComplexMatrix approx = a.a * qsprep::adjoint(a.a);
  const double rel = qsprep::frobenius_norm(doc.density->matrix() - approx) /
                     qsprep::frobenius_norm(doc.density->matrix());
  Json stats{{"ensemble_size", e.size()},
             {"rank", a.rank},
             {"factor_nnz", a.factor_nnz},
             {"drop_tol", drop_tol},
             {"diagonal_shift", a.diagonal_shift},
             {"relative_error", rel},
             {"method", drop_tol > 0.0 ? "incomplete" : "pivoted"}};
  if (!f.output.empty()) {
    const Json factor{{"kind", "factor"},
                      {"num_qubits", doc.num_qubits},
                      {"columns", a.columns()},
                      {"a", qsprep::matrix_to_json(a.a)},
                      {"ensemble", qsprep::ensemble_document(e)}};
    write_file(f.output, factor.dump(2) + "\n");
  }
  Json report{{"command", "factorize"}, {"num_qubits", doc.num_qubits}, {"stats", stats}};
  if (f.timings) report["timings"] = clock.to_json();
  emit(report, f.report);
  return kExitOk;
}

int cmd_verify(const std::string& circuit_path, const std::string& target_path,
               const std::string& trash_list, const CommonFlags& f) {
  Stopwatch clock;
  const qsprep::Circuit c = qsprep::parse_qasm(read_file(circuit_path));
  const qsprep::InputDocument doc = load_document(target_path);
  const std::vector<int> trash = parse_trash(trash_list);
  for (int q : trash) {
    if (q >= c.num_qubits()) {
      throw qsprep::DimensionError("--trash: qubit " + std::to_string(q) + " outside a " +
                                   std::to_string(c.num_qubits()) + "-qubit circuit");
    }
  }
  if (c.num_qubits() - static_cast<int>(trash.size()) != doc.num_qubits) {
    throw qsprep::DimensionError("circuit has " + std::to_string(c.num_qubits()) + " qubits and " +
                                 std::to_string(trash.size()) + " trash qubits, target has " +
                                 std::to_string(doc.num_qubits));
  }
  clock.lap("load");
  qsprep::SimResult r = doc.state ? qsprep::verify(*doc.state, c, trash)
                                  : qsprep::verify(doc.as_density(), c, trash);
  clock.lap("verification");
  const Json verification = verification_json(true, r.fidelity, r.trace_distance, f.threshold);
  Json report{{"command", "verify"},
              {"num_qubits", c.num_qubits()},
              {"trash", trash},
              {"verification", verification}};
  if (f.timings) report["timings"] = clock.to_json();
  emit(report, f.report);
  return exit_for(verification);
}

int cmd_counts(const std::string& circuit_path, const CommonFlags& f) {
  const qsprep::Circuit c = qsprep::parse_qasm(read_file(circuit_path));
  const Json report{{"command", "counts"},
                    {"num_qubits", c.num_qubits()},
                    {"counts", qsprep::counts_to_json(qsprep::gate_counts(c, false))}};
  emit(report, f.report);
  return kExitOk;
}

int cmd_random(const std::string& kind, int n, std::uint64_t seed, std::size_t rank,
               std::size_t count, const CommonFlags& f) {
  if (n < 1 || n > 10) throw qsprep::ValidationError("--num-qubits must be in [1, 10]");
  qsprep::Rng rng(seed);
  const std::size_t d = std::size_t{1} << n;
  Json doc;
  if (kind == "statevector") {
    doc = qsprep::state_document(qsprep::random_state(n, rng));
  } else if (kind == "ensemble") {
    if (count == 0) throw qsprep::ValidationError("--count must be positive");
    doc = qsprep::ensemble_document(qsprep::random_ensemble(n, count, rng));
  } else if (kind == "density") {
    if (rank == 0 || rank > d) throw qsprep::ValidationError("--rank must be in [1, 2^n]");
    doc = qsprep::density_document(qsprep::random_density(n, rank, rng));
  } else {
    throw qsprep::ValidationError("--kind must be statevector, ensemble or density");
  }
  emit(doc, f.output);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qsprep: quantum state preparation circuit synthesis"};
  app.require_subcommand(1);

  CommonFlags common;
  auto add_common = [&](CLI::App* sub, bool output) {
    if (output) sub->add_option("-o,--output", common.output, "Output file");
    sub->add_option("--report", common.report, "Report file (default: standard output)");
    sub->add_option("--threshold", common.threshold, "Minimum fidelity for exit code 0");
    sub->add_flag("--timings", common.timings, "Add per-stage wall-clock timings to the report");
  };

  std::string input;
  std::string target;
  std::string trash;
  MixedFlags mixed;
  bool pivot = false;
  std::string kind = "statevector";
  int num_qubits = 2;
  std::uint64_t seed = 0;
  std::size_t rank = 1;
  std::size_t count = 2;

  CLI::App* pure = app.add_subcommand("synth-pure", "Synthesize a pure-state circuit");
  pure->add_option("input", input, "Statevector document")->required();
  pure->add_flag("--keep-zero", common.keep_zero, "Keep zero rotations (worst-case counts)");
  add_common(pure, true);

  CLI::App* mix = app.add_subcommand("synth-mixed", "Synthesize a mixed-state circuit");
  mix->add_option("input", input, "Ensemble or density document")->required();
  mix->add_option("--method", mixed.method, "mixture or purification");
  mix->add_option("--drop-tol", mixed.drop_tol, "Incomplete Cholesky drop tolerance");
  mix->add_flag("--no-phase-fix", mixed.no_phase_fix, "Omit branch phase correction");
  mix->add_flag("--no-merge", mixed.no_merge, "Do not merge purification rotations");
  mix->add_flag("--reorder", mixed.reorder, "Diagonal reordering before incomplete Cholesky");
  mix->add_flag("--keep-zero", common.keep_zero, "Keep zero rotations (worst-case counts)");
  add_common(mix, true);

  CLI::App* fac = app.add_subcommand("factorize", "Factor a density matrix");
  fac->add_option("input", input, "Density document")->required();
  fac->add_option("--drop-tol", mixed.drop_tol, "Incomplete Cholesky drop tolerance");
  fac->add_flag("--pivot", pivot, "Pivoted Cholesky (the default when --drop-tol is 0)");
  fac->add_flag("--reorder", mixed.reorder, "Diagonal reordering before incomplete Cholesky");
  add_common(fac, true);

  CLI::App* ver = app.add_subcommand("verify", "Check a circuit against a target state");
  ver->add_option("circuit", input, "QASM circuit")->required();
  ver->add_option("target", target, "Target document")->required();
  ver->add_option("--trash", trash, "Comma-separated qubits to trace out");
  add_common(ver, false);

  CLI::App* cnt = app.add_subcommand("counts", "Gate counts of a QASM circuit");
  cnt->add_option("circuit", input, "QASM circuit")->required();
  cnt->add_option("--report", common.report, "Report file (default: standard output)");

  CLI::App* rnd = app.add_subcommand("random", "Random input document");
  rnd->add_option("--kind", kind, "statevector, ensemble or density");
  rnd->add_option("--num-qubits", num_qubits, "Qubit count");
  rnd->add_option("--seed", seed, "Generator seed");
  rnd->add_option("--rank", rank, "Density rank");
  rnd->add_option("--count", count, "Ensemble size");
  rnd->add_option("-o,--output", common.output, "Output file (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*pure) return cmd_synth_pure(input, common);
    if (*mix) return cmd_synth_mixed(input, common, mixed);
    if (*fac) return cmd_factorize(input, common, mixed.drop_tol, pivot, mixed.reorder);
    if (*ver) return cmd_verify(input, target, trash, common);
    if (*cnt) return cmd_counts(input, common);
    if (*rnd) return cmd_random(kind, num_qubits, seed, rank, count, common);
  } catch (const qsprep::BreakdownError& e) {
    std::cerr << "qsprep: error: " << e.what() << "\n  shifts tried:";
    for (double s : e.shifts()) std::cerr << ' ' << s;
    std::cerr << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "qsprep: error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
