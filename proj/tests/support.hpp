// Test-only oracles and generators. The circuit oracle builds full 2^n x 2^n
// unitaries by Kronecker embedding and multiplies them into the state, a path
// independent of the simulator's in-place updates.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qcf/ir.hpp"
#include "qcf/vqe.hpp"

namespace oracle {

using cd = std::complex<double>;
using Vec = std::vector<cd>;
using Mat = std::vector<std::vector<cd>>;

inline Mat identity(size_t n) {
  Mat m(n, std::vector<cd>(n, cd(0.0)));
  for (size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
  size_t ar = a.size(), br = b.size();
  Mat out(ar * br, std::vector<cd>(ar * br, cd(0.0)));
  for (size_t i = 0; i < ar; ++i)
    for (size_t j = 0; j < ar; ++j)
      for (size_t k = 0; k < br; ++k)
        for (size_t l = 0; l < br; ++l)
          out[i * br + k][j * br + l] = a[i][j] * b[k][l];
  return out;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  size_t n = a.size();
  Mat out(n, std::vector<cd>(n, cd(0.0)));
  for (size_t i = 0; i < n; ++i)
    for (size_t k = 0; k < n; ++k)
      for (size_t j = 0; j < n; ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

inline Vec matvec(const Mat& m, const Vec& v) {
  Vec out(m.size(), cd(0.0));
  for (size_t i = 0; i < m.size(); ++i)
    for (size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
  return out;
}

inline Mat pauli(char op) {
  const cd i(0.0, 1.0);
  switch (op) {
    case 'X': return {{0, 1}, {1, 0}};
    case 'Y': return {{0, -i}, {i, 0}};
    case 'Z': return {{1, 0}, {0, -1}};
    default: return identity(2);
  }
}

inline Mat gate2x2(const qcf::Instruction& ins) {
  using qcf::GateKind;
  const double s2 = 1.0 / std::sqrt(2.0);
  const cd i(0.0, 1.0);
  double t = ins.param ? ins.param->value : 0.0;
  switch (ins.kind) {
    case GateKind::X: return pauli('X');
    case GateKind::Y: return pauli('Y');
    case GateKind::Z: return pauli('Z');
    case GateKind::H: return {{s2, s2}, {s2, -s2}};
    case GateKind::RX:
      return {{std::cos(t / 2), -i * std::sin(t / 2)},
              {-i * std::sin(t / 2), std::cos(t / 2)}};
    case GateKind::RY:
      return {{std::cos(t / 2), -std::sin(t / 2)},
              {std::sin(t / 2), std::cos(t / 2)}};
    case GateKind::RZ:
      return {{std::exp(-i * (t / 2)), 0}, {0, std::exp(i * (t / 2))}};
    default: throw qcf::Error("not a 1-qubit gate");
  }
}

// Embeds a single-qubit gate on qubit q of an n-qubit register.
// Qubit 0 is the least-significant index bit, so it is the rightmost
// Kronecker factor.
inline Mat embed1(const Mat& g, uint32_t q, uint32_t n) {
  Mat out = identity(1);
  for (int k = static_cast<int>(n) - 1; k >= 0; --k)
    out = kron(out, static_cast<uint32_t>(k) == q ? g : identity(2));
  return out;
}

// Dense n-qubit unitary of one instruction (MEASURE -> identity).
inline Mat instruction_unitary(const qcf::Instruction& ins, uint32_t n) {
  using qcf::GateKind;
  const size_t dim = size_t(1) << n;
  if (ins.kind == GateKind::Measure) return identity(dim);
  if (ins.kind == GateKind::CNOT || ins.kind == GateKind::SWAP) {
    Mat out(dim, std::vector<cd>(dim, cd(0.0)));
    uint32_t a = ins.qubits[0], b = ins.qubits[1];
    for (size_t idx = 0; idx < dim; ++idx) {
      size_t target = idx;
      if (ins.kind == GateKind::CNOT) {
        if ((idx >> a) & 1) target = idx ^ (size_t(1) << b);
      } else {
        bool ba = (idx >> a) & 1, bb = (idx >> b) & 1;
        if (ba != bb) target = idx ^ (size_t(1) << a) ^ (size_t(1) << b);
      }
      out[target][idx] = 1.0;
    }
    return out;
  }
  return embed1(gate2x2(ins), ins.qubits[0], n);
}

inline Vec apply_kernel(const qcf::Kernel& kernel, uint32_t n, Vec state) {
  for (const auto& ins : kernel.body)
    state = matvec(instruction_unitary(ins, n), state);
  return state;
}

inline Vec zero_state(uint32_t n) {
  Vec v(size_t(1) << n, cd(0.0));
  v[0] = 1.0;
  return v;
}

inline Vec random_state(uint32_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(size_t(1) << n);
  double norm = 0.0;
  for (auto& a : v) {
    a = cd(gauss(rng), gauss(rng));
    norm += std::norm(a);
  }
  norm = std::sqrt(norm);
  for (auto& a : v) a /= norm;
  return v;
}

inline double fidelity(const Vec& a, const Vec& b) {
  cd inner(0.0);
  for (size_t i = 0; i < a.size(); ++i) inner += std::conj(a[i]) * b[i];
  return std::norm(inner);
}

// Reorders a routed state back to logical qubit order:
// bit q of the logical index is bit layout[q] of the physical index.
inline Vec unpermute(const Vec& physical, const std::vector<uint32_t>& layout) {
  Vec logical(physical.size(), cd(0.0));
  for (size_t i = 0; i < physical.size(); ++i) {
    size_t j = 0;
    for (size_t q = 0; q < layout.size(); ++q)
      if ((i >> layout[q]) & 1) j |= size_t(1) << q;
    logical[j] = physical[i];
  }
  return logical;
}

inline Mat dense_hamiltonian(const qcf::PauliHamiltonian& h, uint32_t n) {
  const size_t dim = size_t(1) << n;
  Mat out(dim, std::vector<cd>(dim, cd(0.0)));
  for (const auto& term : h.terms) {
    Mat m = identity(1);
    for (int q = static_cast<int>(n) - 1; q >= 0; --q) {
      auto it = term.ops.find(static_cast<uint32_t>(q));
      m = kron(m, it == term.ops.end() ? identity(2) : pauli(it->second));
    }
    for (size_t i = 0; i < dim; ++i)
      for (size_t j = 0; j < dim; ++j) out[i][j] += term.coefficient * m[i][j];
  }
  return out;
}

inline double rayleigh(const Mat& h, const Vec& psi) {
  Vec hp = matvec(h, psi);
  cd acc(0.0);
  for (size_t i = 0; i < psi.size(); ++i) acc += std::conj(psi[i]) * hp[i];
  return acc.real();
}

// ---- random generators ----------------------------------------------------

inline qcf::Instruction random_gate(std::mt19937_64& rng, uint32_t n,
                                    bool allow_symbol = false,
                                    const std::vector<std::string>& params = {}) {
  using qcf::GateKind;
  static const GateKind kinds[] = {GateKind::X,  GateKind::Y,  GateKind::Z,
                                   GateKind::H,  GateKind::RX, GateKind::RY,
                                   GateKind::RZ, GateKind::CNOT,
                                   GateKind::SWAP};
  std::uniform_int_distribution<size_t> pick_kind(0, n >= 2 ? 8 : 6);
  std::uniform_int_distribution<uint32_t> pick_q(0, n - 1);
  std::uniform_real_distribution<double> pick_angle(-3.0, 3.0);
  GateKind kind = kinds[pick_kind(rng)];
  if (qcf::is_two_qubit(kind)) {
    uint32_t a = pick_q(rng), b = pick_q(rng);
    while (b == a) b = pick_q(rng);
    return kind == GateKind::CNOT ? qcf::Instruction::cnot(a, b)
                                  : qcf::Instruction::swap_gate(a, b);
  }
  if (qcf::is_rotation(kind)) {
    qcf::ParamExpr angle = qcf::ParamExpr::literal(pick_angle(rng));
    if (allow_symbol && !params.empty() && rng() % 3 == 0)
      angle = qcf::ParamExpr::sym(params[rng() % params.size()], rng() % 2 == 0);
    return qcf::Instruction::rotation(kind, angle, pick_q(rng));
  }
  return qcf::Instruction::gate1(kind, pick_q(rng));
}

inline qcf::Kernel random_bound_kernel(std::mt19937_64& rng, uint32_t max_qubits,
                                       uint32_t max_gates,
                                       bool with_measures = false) {
  std::uniform_int_distribution<uint32_t> pick_n(1, max_qubits);
  uint32_t n = pick_n(rng);
  std::uniform_int_distribution<uint32_t> pick_len(1, max_gates);
  qcf::Kernel k;
  k.name = "random";
  uint32_t len = pick_len(rng);
  for (uint32_t i = 0; i < len; ++i) k.body.push_back(random_gate(rng, n));
  if (with_measures)
    for (uint32_t q = 0; q < n; ++q)
      k.body.push_back(qcf::Instruction::measure(q, q));
  return k;
}

inline qcf::Program random_program(std::mt19937_64& rng) {
  std::uniform_int_distribution<uint32_t> pick_kernels(1, 4);
  std::uniform_int_distribution<uint32_t> pick_len(0, 8);
  std::uniform_int_distribution<uint32_t> pick_params(0, 2);
  qcf::Program program;
  uint32_t count = pick_kernels(rng);
  for (uint32_t ki = 0; ki < count; ++ki) {
    qcf::Kernel k;
    k.name = "k" + std::to_string(ki);
    uint32_t nparams = pick_params(rng);
    for (uint32_t p = 0; p < nparams; ++p)
      k.params.push_back("p" + std::to_string(ki) + std::to_string(p));
    uint32_t len = pick_len(rng);
    uint32_t cbit = 0;
    for (uint32_t i = 0; i < len; ++i) {
      uint32_t roll = rng() % 10;
      if (roll == 0 && ki > 0) {
        // Call a previously generated kernel: the call graph stays acyclic.
        const qcf::Kernel& callee = program.kernels[rng() % ki];
        std::vector<qcf::ParamExpr> args;
        for (size_t a = 0; a < callee.params.size(); ++a) {
          if (!k.params.empty() && rng() % 2 == 0)
            args.push_back(
                qcf::ParamExpr::sym(k.params[rng() % k.params.size()],
                                    rng() % 2 == 0));
          else
            args.push_back(qcf::ParamExpr::literal(
                std::uniform_real_distribution<double>(-2.0, 2.0)(rng)));
        }
        k.body.push_back(qcf::Instruction::call(callee.name, std::move(args)));
      } else if (roll == 1) {
        k.body.push_back(
            qcf::Instruction::measure(rng() % 4, cbit++));
      } else {
        k.body.push_back(random_gate(rng, 4, true, k.params));
      }
    }
    program.kernels.push_back(std::move(k));
  }
  return program;
}

// Verbatim kernel source for the deuteron VQE example.
inline const char* listing1_source() {
  return R"(__qpu__ ansatz(AcceleratorBuffer b, double t0) {
    X 0
    RY(t0) 1
    CNOT 1 0
}
__qpu__ z0(AcceleratorBuffer b, double t0) {
    ansatz(b,t0)
    MEASURE 0 [0]
}
__qpu__ z1(AcceleratorBuffer b, double t0) {
    ansatz(b,t0)
    MEASURE 1 [1]
}
__qpu__ x0x1(AcceleratorBuffer b, double t0) {
    ansatz(b,t0)
    H 0
    H 1
    MEASURE 0 [0]
    MEASURE 1 [1]
}
__qpu__ y0y1(AcceleratorBuffer b, double t0) {
    ansatz(b,t0)
    RX(1.57079) 0
    RX(1.57079) 1
    MEASURE 0 [0]
    MEASURE 1 [1]
}
)";
}

inline const char* deuteron_hamiltonian_text() {
  return "5.906709 I\n0.218291 Z0\n-6.125 Z1\n-2.143304 X0X1\n-2.143304 Y0Y1\n";
}

// Closed-form deuteron N=2 energy for the single-parameter ansatz.
inline double deuteron_energy(double theta) {
  return 5.906709 - 6.343291 * std::cos(theta) - 4.286608 * std::sin(theta);
}

inline double deuteron_min_energy() {
  return 5.906709 - std::sqrt(6.343291 * 6.343291 + 4.286608 * 4.286608);
}

inline double deuteron_theta_star() {
  return std::atan2(4.286608, 6.343291);
}

}  // namespace oracle
