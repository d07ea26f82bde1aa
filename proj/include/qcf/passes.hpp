#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qcf/accel.hpp"
#include "qcf/ir.hpp"

namespace qcf {

// Undirected coupling graph of a device.
struct Topology {
  uint32_t qubit_count = 0;
  std::set<std::pair<uint32_t, uint32_t>> edges;  // normalized a < b

  bool has_edge(uint32_t a, uint32_t b) const;
  std::vector<uint32_t> neighbors(uint32_t q) const;

  static Topology line(uint32_t n);
  static Topology full(uint32_t n);
  // {"qubits": n, "edges": [[a,b],...]}
  static Topology from_json(const std::string& text);
  void check() const;  // connected, no self-edges, indices in range
};

struct NativeGateSet {
  std::set<GateKind> kinds;

  bool contains(GateKind k) const { return kinds.count(k) > 0; }
  static NativeGateSet default_set();  // {RX, RZ, CNOT, MEASURE}
  void check() const;
};

// Removes DAG-adjacent self-inverse pairs (X, Y, Z, H, CNOT, SWAP on
// identical operands) to fixpoint. MEASURE acts as a barrier.
Kernel cancel_inverse_pairs(const Kernel& kernel);

// Fuses chain-adjacent same-axis rotations and drops zero-angle rotations.
// Angles are normalized to (-pi, pi]. Requires a fully bound kernel.
Kernel merge_rotations(const Kernel& kernel);

struct RoutingResult {
  Kernel kernel;
  std::vector<uint32_t> layout;  // logical -> physical, after routing
};

// Greedy shortest-path SWAP insertion: every 2-qubit gate in the output acts
// on a topology edge. The initial layout is the identity.
RoutingResult route_swaps(const Kernel& kernel, const Topology& topology);

// Rewrites to the native set. Default rules (matrix products, up to phase):
//   X = RX(pi), Z = RZ(pi), Y = RZ(pi)*RX(pi),
//   H = RZ(pi/2)*RX(pi/2)*RZ(pi/2),
//   RY(t) = RZ(pi/2)*RX(t)*RZ(-pi/2),
//   SWAP a b = CNOT a b; CNOT b a; CNOT a b.
Kernel lower_to_native(const Kernel& kernel, const NativeGateSet& native);

// Applied after the main kernel's execution; receives the main buffer and
// the buffers of any prelude kernels a pre-processor emitted.
using PostProcessor = std::function<AcceleratorBuffer(
    const AcceleratorBuffer& main,
    const std::vector<AcceleratorBuffer>& prelude)>;

struct PreProcessResult {
  Kernel kernel;
  std::vector<Kernel> prelude;
  std::optional<PostProcessor> post;
};

using PreProcessor = std::function<PreProcessResult(const Kernel&)>;
using OptimizerPass = std::function<Kernel(const Kernel&)>;
using Transformation =
    std::function<RoutingResult(const Kernel&, const Topology&)>;

// Layer order is fixed: pre-process, optimize, transform, lower.
struct PassPipeline {
  std::vector<PreProcessor> pre_processors;
  std::vector<OptimizerPass> optimizers;
  std::vector<Transformation> transformations;

  static PassPipeline identity();
  static PassPipeline standard();  // cancel + merge + route
};

struct PipelineResult {
  Kernel kernel;
  std::vector<Kernel> prelude;
  std::vector<PostProcessor> post_processors;
  std::vector<uint32_t> layout;  // logical -> physical
};

PipelineResult run_pipeline(const Kernel& kernel, const PassPipeline& pipeline,
                            const Topology& topology,
                            const NativeGateSet& native);

}  // namespace qcf
