#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcf/error.hpp"

namespace qcf {

enum class GateKind { X, Y, Z, H, RX, RY, RZ, CNOT, SWAP, Measure, Call };

const char* gate_name(GateKind kind);
std::optional<GateKind> gate_from_name(const std::string& name);
bool is_rotation(GateKind kind);
bool is_two_qubit(GateKind kind);

// A rotation angle or call argument: a literal, a symbol, or a negated symbol.
struct ParamExpr {
  double value = 0.0;
  std::string symbol;  // empty means literal
  bool negated = false;

  static ParamExpr literal(double v) { return {v, "", false}; }
  static ParamExpr sym(std::string name, bool neg = false) {
    return {0.0, std::move(name), neg};
  }
  bool is_symbol() const { return !symbol.empty(); }
  std::string to_string() const;
  bool operator==(const ParamExpr&) const = default;
};

struct Instruction {
  GateKind kind = GateKind::X;
  std::vector<uint32_t> qubits;
  std::optional<ParamExpr> param;  // RX/RY/RZ only
  std::optional<uint32_t> cbit;    // Measure only
  std::string callee;              // Call only
  std::vector<ParamExpr> args;     // Call only

  static Instruction gate1(GateKind kind, uint32_t q);
  static Instruction rotation(GateKind kind, ParamExpr angle, uint32_t q);
  static Instruction cnot(uint32_t control, uint32_t target);
  static Instruction swap_gate(uint32_t a, uint32_t b);
  static Instruction measure(uint32_t q, uint32_t cbit);
  static Instruction call(std::string callee, std::vector<ParamExpr> args);

  std::string to_string() const;
  bool operator==(const Instruction&) const = default;
};

struct Kernel {
  std::string name;
  std::vector<std::string> params;
  std::vector<Instruction> body;

  // Executable width: max qubit index + 1.
  uint32_t width() const;
  bool has_calls() const;
  bool fully_bound() const;
  bool operator==(const Kernel&) const = default;
};

struct Program {
  std::vector<Kernel> kernels;

  const Kernel* find(const std::string& name) const;
  bool operator==(const Program&) const = default;
};

// Checks all Program/Kernel/Instruction invariants; throws ValidationError.
void validate(const Program& program);
void validate(const Kernel& kernel);

// Human-readable assembly form. parse(to_assembly(p)) == p.
std::string to_assembly(const Program& program);

// On-disk JSON form, deterministic key order.
// Schema: {kernels:[{name,params,instructions:[{op,qubits,param?,cbit?,callee?,args?}]}]}
std::string serialize(const Program& program);
Program deserialize(const std::string& document);

// Dependency-graph form: instructions sharing a qubit are ordered as in the body.
struct CircuitDag {
  std::vector<Instruction> nodes;
  std::vector<std::pair<size_t, size_t>> edges;  // from -> to, body order
};

CircuitDag to_dag(const Kernel& kernel);
std::string to_dot(const CircuitDag& dag);

// Substitutes every symbol; the result carries only literal params.
Kernel bind_parameters(const Kernel& kernel,
                       const std::map<std::string, double>& values);

// Shortest round-trip decimal rendering of a double.
std::string format_double(double v);

}  // namespace qcf
