#include "qcf/ir.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace qcf {

using json = nlohmann::ordered_json;

const char* gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::H: return "H";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::SWAP: return "SWAP";
    case GateKind::Measure: return "MEASURE";
    case GateKind::Call: return "CALL";
  }
  return "?";
}

std::optional<GateKind> gate_from_name(const std::string& name) {
  static const std::map<std::string, GateKind> table = {
      {"X", GateKind::X},       {"Y", GateKind::Y},
      {"Z", GateKind::Z},       {"H", GateKind::H},
      {"RX", GateKind::RX},     {"RY", GateKind::RY},
      {"RZ", GateKind::RZ},     {"CNOT", GateKind::CNOT},
      {"SWAP", GateKind::SWAP}, {"MEASURE", GateKind::Measure},
      {"CALL", GateKind::Call}};
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

bool is_rotation(GateKind kind) {
  return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ;
}

bool is_two_qubit(GateKind kind) {
  return kind == GateKind::CNOT || kind == GateKind::SWAP;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string ParamExpr::to_string() const {
  if (is_symbol()) return negated ? "-" + symbol : symbol;
  return format_double(value);
}

Instruction Instruction::gate1(GateKind kind, uint32_t q) {
  Instruction i;
  i.kind = kind;
  i.qubits = {q};
  return i;
}

Instruction Instruction::rotation(GateKind kind, ParamExpr angle, uint32_t q) {
  Instruction i;
  i.kind = kind;
  i.qubits = {q};
  i.param = std::move(angle);
  return i;
}

Instruction Instruction::cnot(uint32_t control, uint32_t target) {
  Instruction i;
  i.kind = GateKind::CNOT;
  i.qubits = {control, target};
  return i;
}

Instruction Instruction::swap_gate(uint32_t a, uint32_t b) {
  Instruction i;
  i.kind = GateKind::SWAP;
  i.qubits = {a, b};
  return i;
}

Instruction Instruction::measure(uint32_t q, uint32_t cbit) {
  Instruction i;
  i.kind = GateKind::Measure;
  i.qubits = {q};
  i.cbit = cbit;
  return i;
}

Instruction Instruction::call(std::string callee, std::vector<ParamExpr> args) {
  Instruction i;
  i.kind = GateKind::Call;
  i.callee = std::move(callee);
  i.args = std::move(args);
  return i;
}

std::string Instruction::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case GateKind::Measure:
      os << "MEASURE " << qubits[0] << " [" << *cbit << "]";
      break;
    case GateKind::Call: {
      os << callee << "(b";
      for (const auto& a : args) os << "," << a.to_string();
      os << ")";
      break;
    }
    default:
      os << gate_name(kind);
      if (is_rotation(kind)) os << "(" << param->to_string() << ")";
      for (uint32_t q : qubits) os << " " << q;
  }
  return os.str();
}

uint32_t Kernel::width() const {
  uint32_t w = 0;
  for (const auto& ins : body)
    for (uint32_t q : ins.qubits) w = std::max(w, q + 1);
  return w;
}

bool Kernel::has_calls() const {
  return std::any_of(body.begin(), body.end(), [](const Instruction& i) {
    return i.kind == GateKind::Call;
  });
}

bool Kernel::fully_bound() const {
  for (const auto& ins : body) {
    if (ins.param && ins.param->is_symbol()) return false;
    for (const auto& a : ins.args)
      if (a.is_symbol()) return false;
  }
  return true;
}

const Kernel* Program::find(const std::string& name) const {
  for (const auto& k : kernels)
    if (k.name == name) return &k;
  return nullptr;
}

namespace {

void validate_instruction(const Instruction& ins, const Kernel& kernel) {
  auto fail = [&](const std::string& msg) {
    throw ValidationError("kernel '" + kernel.name + "': " + msg + " in '" +
                          ins.to_string() + "'");
  };
  size_t expected = is_two_qubit(ins.kind) ? 2
                    : ins.kind == GateKind::Call ? 0
                                                 : 1;
  if (ins.qubits.size() != expected) fail("wrong qubit operand count");
  if (is_two_qubit(ins.kind) && ins.qubits[0] == ins.qubits[1])
    fail("two-qubit gate operands must be distinct");
  if (is_rotation(ins.kind) != ins.param.has_value())
    fail("rotation parameter mismatch");
  if ((ins.kind == GateKind::Measure) != ins.cbit.has_value())
    fail("classical bit only valid on MEASURE");
  if ((ins.kind == GateKind::Call) != !ins.callee.empty())
    fail("callee only valid on CALL");
  auto check_symbol = [&](const ParamExpr& e) {
    if (!e.is_symbol()) return;
    if (std::find(kernel.params.begin(), kernel.params.end(), e.symbol) ==
        kernel.params.end())
      fail("unbound symbol '" + e.symbol + "'");
  };
  if (ins.param) check_symbol(*ins.param);
  for (const auto& a : ins.args) check_symbol(a);
}

}  // namespace

void validate(const Kernel& kernel) {
  std::set<uint32_t> cbits;
  for (const auto& ins : kernel.body) {
    validate_instruction(ins, kernel);
    if (ins.cbit && !cbits.insert(*ins.cbit).second)
      throw ValidationError("kernel '" + kernel.name +
                            "': duplicate classical bit index " +
                            std::to_string(*ins.cbit));
  }
}

void validate(const Program& program) {
  std::set<std::string> names;
  for (const auto& k : program.kernels) {
    if (!names.insert(k.name).second)
      throw ValidationError("duplicate kernel '" + k.name + "'");
    validate(k);
  }
  for (const auto& k : program.kernels) {
    for (const auto& ins : k.body) {
      if (ins.kind != GateKind::Call) continue;
      const Kernel* callee = program.find(ins.callee);
      if (!callee)
        throw ValidationError("kernel '" + k.name + "' calls undefined kernel '" +
                              ins.callee + "'");
      if (ins.args.size() != callee->params.size())
        throw ValidationError("call to '" + ins.callee + "' in '" + k.name +
                              "' passes " + std::to_string(ins.args.size()) +
                              " arguments, expected " +
                              std::to_string(callee->params.size()));
    }
  }
  // Call graph must be acyclic.
  enum class Mark { White, Grey, Black };
  std::map<std::string, Mark> marks;
  std::function<void(const Kernel&)> visit = [&](const Kernel& k) {
    marks[k.name] = Mark::Grey;
    for (const auto& ins : k.body) {
      if (ins.kind != GateKind::Call) continue;
      Mark m = marks.count(ins.callee) ? marks[ins.callee] : Mark::White;
      if (m == Mark::Grey)
        throw ValidationError("cyclic kernel calls through '" + ins.callee + "'");
      if (m == Mark::White) visit(*program.find(ins.callee));
    }
    marks[k.name] = Mark::Black;
  };
  for (const auto& k : program.kernels)
    if (!marks.count(k.name)) visit(k);
}

std::string to_assembly(const Program& program) {
  std::ostringstream os;
  for (const auto& k : program.kernels) {
    os << "__qpu__ " << k.name << "(AcceleratorBuffer b";
    for (const auto& p : k.params) os << ", double " << p;
    os << ") {\n";
    for (const auto& ins : k.body) os << "    " << ins.to_string() << "\n";
    os << "}\n";
  }
  return os.str();
}

namespace {

json param_to_json(const ParamExpr& e) {
  if (e.is_symbol()) return json(e.negated ? "-" + e.symbol : e.symbol);
  return json(e.value);
}

ParamExpr param_from_json(const json& j) {
  if (j.is_number()) return ParamExpr::literal(j.get<double>());
  if (!j.is_string())
    throw ValidationError("parameter expression must be a number or string");
  std::string s = j.get<std::string>();
  bool neg = !s.empty() && s[0] == '-';
  if (neg) s = s.substr(1);
  if (s.empty()) throw ValidationError("empty parameter symbol");
  return ParamExpr::sym(s, neg);
}

}  // namespace

std::string serialize(const Program& program) {
  json doc;
  doc["kernels"] = json::array();
  for (const auto& k : program.kernels) {
    json jk;
    jk["name"] = k.name;
    jk["params"] = k.params;
    jk["instructions"] = json::array();
    for (const auto& ins : k.body) {
      json ji;
      ji["op"] = gate_name(ins.kind);
      ji["qubits"] = ins.qubits;
      if (ins.param) ji["param"] = param_to_json(*ins.param);
      if (ins.cbit) ji["cbit"] = *ins.cbit;
      if (ins.kind == GateKind::Call) {
        ji["callee"] = ins.callee;
        json args = json::array();
        for (const auto& a : ins.args) args.push_back(param_to_json(a));
        ji["args"] = args;
      }
      jk["instructions"].push_back(std::move(ji));
    }
    doc["kernels"].push_back(std::move(jk));
  }
  return doc.dump(2) + "\n";
}

Program deserialize(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed document: ") + e.what(), 1,
                     static_cast<int>(e.byte));
  }
  Program program;
  if (!doc.is_object() || !doc.contains("kernels") || !doc["kernels"].is_array())
    throw ValidationError("document must contain a 'kernels' array");
  for (const auto& jk : doc["kernels"]) {
    Kernel k;
    k.name = jk.at("name").get<std::string>();
    k.params = jk.at("params").get<std::vector<std::string>>();
    for (const auto& ji : jk.at("instructions")) {
      Instruction ins;
      std::string op = ji.at("op").get<std::string>();
      auto kind = gate_from_name(op);
      if (!kind) throw ValidationError("unknown op '" + op + "'");
      ins.kind = *kind;
      ins.qubits = ji.at("qubits").get<std::vector<uint32_t>>();
      if (ji.contains("param")) ins.param = param_from_json(ji["param"]);
      if (ji.contains("cbit")) ins.cbit = ji["cbit"].get<uint32_t>();
      if (ji.contains("callee")) ins.callee = ji["callee"].get<std::string>();
      if (ji.contains("args"))
        for (const auto& a : ji["args"]) ins.args.push_back(param_from_json(a));
      k.body.push_back(std::move(ins));
    }
    program.kernels.push_back(std::move(k));
  }
  validate(program);
  return program;
}

CircuitDag to_dag(const Kernel& kernel) {
  if (kernel.has_calls())
    throw Error("to_dag: kernel '" + kernel.name +
                "' contains unresolved calls");
  CircuitDag dag;
  dag.nodes = kernel.body;
  std::map<uint32_t, size_t> last_on_qubit;
  std::set<std::pair<size_t, size_t>> seen;
  for (size_t i = 0; i < kernel.body.size(); ++i) {
    for (uint32_t q : kernel.body[i].qubits) {
      auto it = last_on_qubit.find(q);
      if (it != last_on_qubit.end() && seen.insert({it->second, i}).second)
        dag.edges.push_back({it->second, i});
      last_on_qubit[q] = i;
    }
  }
  return dag;
}

std::string to_dot(const CircuitDag& dag) {
  std::ostringstream os;
  os << "digraph circuit {\n";
  for (size_t i = 0; i < dag.nodes.size(); ++i) {
    const auto& ins = dag.nodes[i];
    std::string label = gate_name(ins.kind);
    for (uint32_t q : ins.qubits) label += " " + std::to_string(q);
    if (ins.param) label += " [" + ins.param->to_string() + "]";
    os << "  n" << i << " [label=\"" << label << "\"];\n";
  }
  for (const auto& [from, to] : dag.edges)
    os << "  n" << from << " -> n" << to << ";\n";
  os << "}\n";
  return os.str();
}

Kernel bind_parameters(const Kernel& kernel,
                       const std::map<std::string, double>& values) {
  auto bind_expr = [&](const ParamExpr& e) {
    if (!e.is_symbol()) return e;
    auto it = values.find(e.symbol);
    if (it == values.end()) throw Error("unbound " + e.symbol);
    return ParamExpr::literal(e.negated ? -it->second : it->second);
  };
  Kernel out = kernel;
  out.params.clear();
  for (auto& ins : out.body) {
    if (ins.param) ins.param = bind_expr(*ins.param);
    for (auto& a : ins.args) a = bind_expr(a);
  }
  return out;
}

}  // namespace qcf
