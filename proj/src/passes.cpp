#include "qcf/passes.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "json.hpp"

namespace qcf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kZeroAngleTol = 1e-12;

double normalize_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

bool self_inverse(GateKind k) {
  switch (k) {
    case GateKind::X:
    case GateKind::Y:
    case GateKind::Z:
    case GateKind::H:
    case GateKind::CNOT:
    case GateKind::SWAP:
      return true;
    default:
      return false;
  }
}

// Index of the first instruction after `i` touching qubit q, or npos.
size_t next_on_qubit(const std::vector<Instruction>& body, size_t i,
                     uint32_t q) {
  for (size_t j = i + 1; j < body.size(); ++j)
    if (std::find(body[j].qubits.begin(), body[j].qubits.end(), q) !=
        body[j].qubits.end())
      return j;
  return std::string::npos;
}

void require_call_free(const Kernel& kernel, const char* pass) {
  if (kernel.has_calls())
    throw Error(std::string(pass) + ": kernel '" + kernel.name +
                "' contains unresolved calls");
}

}  // namespace

bool Topology::has_edge(uint32_t a, uint32_t b) const {
  if (a > b) std::swap(a, b);
  return edges.count({a, b}) > 0;
}

std::vector<uint32_t> Topology::neighbors(uint32_t q) const {
  std::vector<uint32_t> out;
  for (const auto& [a, b] : edges) {
    if (a == q) out.push_back(b);
    if (b == q) out.push_back(a);
  }
  return out;
}

Topology Topology::line(uint32_t n) {
  Topology t;
  t.qubit_count = n;
  for (uint32_t i = 0; i + 1 < n; ++i) t.edges.insert({i, i + 1});
  return t;
}

Topology Topology::full(uint32_t n) {
  Topology t;
  t.qubit_count = n;
  for (uint32_t i = 0; i < n; ++i)
    for (uint32_t j = i + 1; j < n; ++j) t.edges.insert({i, j});
  return t;
}

Topology Topology::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed topology: ") + e.what(), 1,
                     static_cast<int>(e.byte));
  }
  Topology t;
  t.qubit_count = doc.at("qubits").get<uint32_t>();
  for (const auto& e : doc.at("edges")) {
    uint32_t a = e.at(0).get<uint32_t>();
    uint32_t b = e.at(1).get<uint32_t>();
    if (a > b) std::swap(a, b);
    t.edges.insert({a, b});
  }
  t.check();
  return t;
}

void Topology::check() const {
  if (qubit_count < 1) throw ValidationError("topology needs at least 1 qubit");
  for (const auto& [a, b] : edges) {
    if (a == b) throw ValidationError("topology has a self-edge");
    if (b >= qubit_count)
      throw ValidationError("topology edge index out of range");
  }
  if (qubit_count == 1) return;
  std::vector<bool> seen(qubit_count, false);
  std::deque<uint32_t> queue{0};
  seen[0] = true;
  while (!queue.empty()) {
    uint32_t q = queue.front();
    queue.pop_front();
    for (uint32_t n : neighbors(q))
      if (!seen[n]) {
        seen[n] = true;
        queue.push_back(n);
      }
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    throw ValidationError("topology is not connected");
}

NativeGateSet NativeGateSet::default_set() {
  return {{GateKind::RX, GateKind::RZ, GateKind::CNOT, GateKind::Measure}};
}

void NativeGateSet::check() const {
  if (!contains(GateKind::Measure))
    throw ValidationError("native gate set must contain MEASURE");
  if (!contains(GateKind::CNOT) && !contains(GateKind::SWAP))
    throw ValidationError("native gate set needs an entangling two-qubit gate");
}

Kernel cancel_inverse_pairs(const Kernel& kernel) {
  require_call_free(kernel, "cancel_inverse_pairs");
  Kernel out = kernel;
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < out.body.size() && !changed; ++i) {
      const Instruction& a = out.body[i];
      if (!self_inverse(a.kind)) continue;
      // The partner must be the immediate DAG successor on every operand.
      size_t j = next_on_qubit(out.body, i, a.qubits[0]);
      if (j == std::string::npos) continue;
      bool adjacent = true;
      for (uint32_t q : a.qubits)
        if (next_on_qubit(out.body, i, q) != j) adjacent = false;
      if (!adjacent) continue;
      const Instruction& b = out.body[j];
      if (b.kind != a.kind || b.qubits != a.qubits) continue;
      out.body.erase(out.body.begin() + j);
      out.body.erase(out.body.begin() + i);
      changed = true;
    }
  }
  return out;
}

Kernel merge_rotations(const Kernel& kernel) {
  require_call_free(kernel, "merge_rotations");
  if (!kernel.fully_bound())
    throw Error("merge_rotations: kernel '" + kernel.name +
                "' has symbolic parameters; bind first");
  Kernel out = kernel;
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < out.body.size() && !changed; ++i) {
      Instruction& a = out.body[i];
      if (!is_rotation(a.kind)) continue;
      size_t j = next_on_qubit(out.body, i, a.qubits[0]);
      if (j != std::string::npos && out.body[j].kind == a.kind) {
        a.param = ParamExpr::literal(
            normalize_angle(a.param->value + out.body[j].param->value));
        out.body.erase(out.body.begin() + j);
        changed = true;
        continue;
      }
      if (std::abs(normalize_angle(a.param->value)) < kZeroAngleTol) {
        out.body.erase(out.body.begin() + i);
        changed = true;
      }
    }
  }
  return out;
}

namespace {

// First hop of a BFS shortest path from `from` to `to`.
uint32_t first_hop(const Topology& topology, uint32_t from, uint32_t to) {
  std::vector<int64_t> parent(topology.qubit_count, -1);
  std::deque<uint32_t> queue{from};
  parent[from] = from;
  while (!queue.empty()) {
    uint32_t q = queue.front();
    queue.pop_front();
    if (q == to) break;
    for (uint32_t n : topology.neighbors(q))
      if (parent[n] < 0) {
        parent[n] = q;
        queue.push_back(n);
      }
  }
  if (parent[to] < 0) throw Error("routing: no path between qubits");
  uint32_t step = to;
  while (static_cast<uint32_t>(parent[step]) != from)
    step = static_cast<uint32_t>(parent[step]);
  return step;
}

}  // namespace

RoutingResult route_swaps(const Kernel& kernel, const Topology& topology) {
  require_call_free(kernel, "route_swaps");
  topology.check();
  if (kernel.width() > topology.qubit_count)
    throw Error("route_swaps: kernel is wider than the topology");

  std::vector<uint32_t> layout(topology.qubit_count);  // logical -> physical
  std::vector<uint32_t> occupant(topology.qubit_count);  // physical -> logical
  for (uint32_t i = 0; i < topology.qubit_count; ++i) layout[i] = occupant[i] = i;

  RoutingResult result;
  result.kernel.name = kernel.name;
  result.kernel.params = kernel.params;
  auto swap_physical = [&](uint32_t pa, uint32_t pb) {
    result.kernel.body.push_back(Instruction::swap_gate(pa, pb));
    std::swap(occupant[pa], occupant[pb]);
    layout[occupant[pa]] = pa;
    layout[occupant[pb]] = pb;
  };

  for (const auto& ins : kernel.body) {
    Instruction mapped = ins;
    if (is_two_qubit(ins.kind)) {
      while (!topology.has_edge(layout[ins.qubits[0]], layout[ins.qubits[1]])) {
        uint32_t pa = layout[ins.qubits[0]];
        uint32_t pb = layout[ins.qubits[1]];
        swap_physical(pa, first_hop(topology, pa, pb));
      }
    }
    for (auto& q : mapped.qubits) q = layout[q];
    result.kernel.body.push_back(std::move(mapped));
  }
  result.layout = layout;
  return result;
}

Kernel lower_to_native(const Kernel& kernel, const NativeGateSet& native) {
  require_call_free(kernel, "lower_to_native");
  native.check();
  const double half = kPi / 2.0;
  Kernel out;
  out.name = kernel.name;
  out.params = kernel.params;
  auto emit = [&](Instruction ins) {
    if (!native.contains(ins.kind))
      throw Error(std::string("lower_to_native: cannot lower ") +
                  gate_name(ins.kind) + " with the given native set");
    out.body.push_back(std::move(ins));
  };
  auto rot = [&](GateKind k, double angle, uint32_t q) {
    emit(Instruction::rotation(k, ParamExpr::literal(angle), q));
  };
  for (const auto& ins : kernel.body) {
    if (native.contains(ins.kind)) {
      out.body.push_back(ins);
      continue;
    }
    uint32_t q = ins.qubits[0];
    switch (ins.kind) {
      case GateKind::X:
        rot(GateKind::RX, kPi, q);
        break;
      case GateKind::Z:
        rot(GateKind::RZ, kPi, q);
        break;
      case GateKind::Y:  // RZ(pi)*RX(pi) as a matrix product
        rot(GateKind::RX, kPi, q);
        rot(GateKind::RZ, kPi, q);
        break;
      case GateKind::H:
        rot(GateKind::RZ, half, q);
        rot(GateKind::RX, half, q);
        rot(GateKind::RZ, half, q);
        break;
      case GateKind::RY:
        // RY(t) = RZ(pi/2)*RX(t)*RZ(-pi/2); rightmost factor executes first.
        if (ins.param->is_symbol())
          throw Error("lower_to_native: symbolic RY angle; bind first");
        rot(GateKind::RZ, -half, q);
        rot(GateKind::RX, ins.param->value, q);
        rot(GateKind::RZ, half, q);
        break;
      case GateKind::SWAP:
        emit(Instruction::cnot(ins.qubits[0], ins.qubits[1]));
        emit(Instruction::cnot(ins.qubits[1], ins.qubits[0]));
        emit(Instruction::cnot(ins.qubits[0], ins.qubits[1]));
        break;
      default:
        throw Error(std::string("lower_to_native: no rule for ") +
                    gate_name(ins.kind));
    }
  }
  return out;
}

PassPipeline PassPipeline::identity() { return {}; }

PassPipeline PassPipeline::standard() {
  PassPipeline p;
  p.optimizers.push_back(
      [](const Kernel& k) { return cancel_inverse_pairs(k); });
  p.optimizers.push_back([](const Kernel& k) {
    // Rotation merging needs literal angles; skip symbolic kernels.
    return k.fully_bound() ? merge_rotations(k) : k;
  });
  p.transformations.push_back(
      [](const Kernel& k, const Topology& t) { return route_swaps(k, t); });
  return p;
}

PipelineResult run_pipeline(const Kernel& kernel, const PassPipeline& pipeline,
                            const Topology& topology,
                            const NativeGateSet& native) {
  if (kernel.width() > topology.qubit_count)
    throw Error("run_pipeline: kernel is wider than the topology");

  PipelineResult result;
  result.kernel = kernel;
  for (const auto& pre : pipeline.pre_processors) {
    PreProcessResult r = pre(result.kernel);
    result.kernel = std::move(r.kernel);
    for (auto& k : r.prelude) result.prelude.push_back(std::move(k));
    if (r.post) result.post_processors.push_back(std::move(*r.post));
  }
  for (const auto& opt : pipeline.optimizers) result.kernel = opt(result.kernel);

  result.layout.resize(topology.qubit_count);
  for (uint32_t i = 0; i < topology.qubit_count; ++i) result.layout[i] = i;
  for (const auto& transform : pipeline.transformations) {
    RoutingResult r = transform(result.kernel, topology);
    result.kernel = std::move(r.kernel);
    std::vector<uint32_t> composed(result.layout.size());
    for (size_t q = 0; q < result.layout.size(); ++q)
      composed[q] = r.layout[result.layout[q]];
    result.layout = std::move(composed);
  }

  result.kernel = lower_to_native(result.kernel, native);
  for (auto& k : result.prelude) k = lower_to_native(k, native);
  return result;
}

}  // namespace qcf
