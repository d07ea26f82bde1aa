#include "qcf/accel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "json.hpp"

namespace qcf {

namespace {

constexpr uint32_t kMaxQubits = 20;
using cd = std::complex<double>;
const cd kI(0.0, 1.0);

struct Mat2 {
  cd a, b, c, d;  // [[a, b], [c, d]]
};

Mat2 gate_matrix(const Instruction& ins) {
  const double s2 = 1.0 / std::sqrt(2.0);
  switch (ins.kind) {
    case GateKind::X: return {0, 1, 1, 0};
    case GateKind::Y: return {0, -kI, kI, 0};
    case GateKind::Z: return {1, 0, 0, -1};
    case GateKind::H: return {s2, s2, s2, -s2};
    case GateKind::RX: {
      double t = ins.param->value / 2.0;
      return {std::cos(t), -kI * std::sin(t), -kI * std::sin(t), std::cos(t)};
    }
    case GateKind::RY: {
      double t = ins.param->value / 2.0;
      return {std::cos(t), -std::sin(t), std::sin(t), std::cos(t)};
    }
    case GateKind::RZ: {
      double t = ins.param->value / 2.0;
      return {std::exp(-kI * t), 0, 0, std::exp(kI * t)};
    }
    default:
      throw Error(std::string("no matrix for ") + gate_name(ins.kind));
  }
}

void apply_single(StateVector& psi, const Mat2& m, uint32_t q) {
  const size_t stride = size_t(1) << q;
  for (size_t base = 0; base < psi.size(); base += 2 * stride) {
    for (size_t i = base; i < base + stride; ++i) {
      cd a0 = psi[i];
      cd a1 = psi[i + stride];
      psi[i] = m.a * a0 + m.b * a1;
      psi[i + stride] = m.c * a0 + m.d * a1;
    }
  }
}

void apply_cnot(StateVector& psi, uint32_t control, uint32_t target) {
  const size_t cbit = size_t(1) << control;
  const size_t tbit = size_t(1) << target;
  for (size_t i = 0; i < psi.size(); ++i)
    if ((i & cbit) && !(i & tbit)) std::swap(psi[i], psi[i | tbit]);
}

void apply_swap(StateVector& psi, uint32_t a, uint32_t b) {
  const size_t abit = size_t(1) << a;
  const size_t bbit = size_t(1) << b;
  for (size_t i = 0; i < psi.size(); ++i)
    if ((i & abit) && !(i & bbit)) std::swap(psi[i], psi[(i & ~abit) | bbit]);
}

void check_executable(const Kernel& kernel) {
  if (kernel.has_calls())
    throw Error("kernel '" + kernel.name + "' contains unresolved calls");
  if (!kernel.fully_bound())
    throw Error("kernel '" + kernel.name + "' has unbound parameters");
  if (kernel.width() > kMaxQubits)
    throw Error("kernel '" + kernel.name + "' exceeds the " +
                std::to_string(kMaxQubits) + "-qubit cap");
  // Mid-circuit measurement is not supported: once a MEASURE appears,
  // only MEASUREs may follow.
  bool measured = false;
  for (const auto& ins : kernel.body) {
    if (ins.kind == GateKind::Measure)
      measured = true;
    else if (measured)
      throw Error("kernel '" + kernel.name + "' has mid-circuit measurement");
  }
}

}  // namespace

NoiseModel NoiseModel::symmetric(uint32_t qubits, double p) {
  NoiseModel nm;
  nm.readout.assign(qubits, Readout{p, p});
  return nm;
}

NoiseModel NoiseModel::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed noise model: ") + e.what(), 1,
                     static_cast<int>(e.byte));
  }
  NoiseModel nm;
  uint32_t n = doc.at("qubits").get<uint32_t>();
  for (const auto& r : doc.at("readout")) {
    Readout ro{r.at("p0").get<double>(), r.at("p1").get<double>()};
    if (ro.p0 < 0 || ro.p1 < 0)
      throw ValidationError("readout probabilities must be non-negative");
    nm.readout.push_back(ro);
  }
  if (nm.readout.size() != n)
    throw ValidationError("noise model readout entries do not match qubit count");
  return nm;
}

std::string NoiseModel::to_json() const {
  nlohmann::ordered_json doc;
  doc["qubits"] = readout.size();
  doc["readout"] = nlohmann::ordered_json::array();
  for (const auto& r : readout)
    doc["readout"].push_back({{"p0", r.p0}, {"p1", r.p1}});
  return doc.dump();
}

size_t AcceleratorBuffer::bit_position(uint32_t qubit) const {
  for (size_t i = 0; i < measured.size(); ++i)
    if (measured[i].qubit == qubit) return i;
  throw Error("qubit " + std::to_string(qubit) + " was not measured");
}

std::map<std::string, double> AcceleratorBuffer::distribution() const {
  std::map<std::string, double> dist;
  if (shots == 0) return dist;
  for (const auto& [key, n] : counts)
    dist[key] = static_cast<double>(n) / static_cast<double>(shots);
  return dist;
}

std::vector<AcceleratorBuffer::MeasuredBit> measured_bits(const Kernel& kernel) {
  std::vector<AcceleratorBuffer::MeasuredBit> bits;
  for (const auto& ins : kernel.body)
    if (ins.kind == GateKind::Measure)
      bits.push_back({*ins.cbit, ins.qubits[0]});
  std::sort(bits.begin(), bits.end(),
            [](const auto& a, const auto& b) { return a.cbit > b.cbit; });
  return bits;
}

StateVector simulate(const Kernel& kernel) {
  check_executable(kernel);
  const uint32_t n = std::max<uint32_t>(kernel.width(), 1);
  StateVector psi(size_t(1) << n, cd(0.0));
  psi[0] = 1.0;
  for (const auto& ins : kernel.body) {
    switch (ins.kind) {
      case GateKind::Measure:
        break;
      case GateKind::CNOT:
        apply_cnot(psi, ins.qubits[0], ins.qubits[1]);
        break;
      case GateKind::SWAP:
        apply_swap(psi, ins.qubits[0], ins.qubits[1]);
        break;
      default:
        apply_single(psi, gate_matrix(ins), ins.qubits[0]);
    }
  }
  return psi;
}

std::map<std::string, double> exact_measured_distribution(const Kernel& kernel) {
  auto bits = measured_bits(kernel);
  if (bits.empty())
    throw Error("kernel '" + kernel.name + "' has no MEASURE instruction");
  StateVector psi = simulate(kernel);
  std::map<std::string, double> dist;
  for (size_t idx = 0; idx < psi.size(); ++idx) {
    double p = std::norm(psi[idx]);
    if (p == 0.0) continue;
    std::string key(bits.size(), '0');
    for (size_t i = 0; i < bits.size(); ++i)
      if ((idx >> bits[i].qubit) & 1) key[i] = '1';
    dist[key] += p;
  }
  return dist;
}

AcceleratorBuffer sample(const Kernel& kernel, uint64_t shots, uint64_t seed,
                         const NoiseModel* noise) {
  if (shots == 0) throw Error("shots must be positive");
  auto bits = measured_bits(kernel);
  if (bits.empty())
    throw Error("kernel '" + kernel.name + "' has no MEASURE instruction");

  auto dist = exact_measured_distribution(kernel);
  std::vector<std::string> keys;
  std::vector<double> probs;
  for (const auto& [key, p] : dist) {
    keys.push_back(key);
    probs.push_back(p);
  }

  AcceleratorBuffer buf;
  buf.qubit_count = kernel.width();
  buf.shots = shots;
  buf.measured = bits;

  std::mt19937_64 rng(seed);
  std::discrete_distribution<size_t> pick(probs.begin(), probs.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (uint64_t s = 0; s < shots; ++s) {
    std::string key = keys[pick(rng)];
    if (noise) {
      for (size_t i = 0; i < bits.size(); ++i) {
        auto ro = noise->for_qubit(bits[i].qubit);
        double flip = key[i] == '0' ? ro.p0 : ro.p1;
        if (flip > 0.0 && unit(rng) < flip) key[i] = key[i] == '0' ? '1' : '0';
      }
    }
    ++buf.counts[key];
  }
  return buf;
}

namespace {

// Parses "X0X1", "Z0", "I", "" into qubit -> operator.
std::map<uint32_t, char> parse_pauli(const std::string& pauli) {
  std::map<uint32_t, char> ops;
  size_t i = 0;
  while (i < pauli.size()) {
    char c = pauli[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == 'I' && i + 1 >= pauli.size()) return ops;
    if (c != 'X' && c != 'Y' && c != 'Z')
      throw Error("malformed Pauli string '" + pauli + "'");
    ++i;
    if (i >= pauli.size() || !std::isdigit(static_cast<unsigned char>(pauli[i])))
      throw Error("malformed Pauli string '" + pauli + "': missing qubit index");
    uint32_t q = 0;
    while (i < pauli.size() && std::isdigit(static_cast<unsigned char>(pauli[i])))
      q = q * 10 + (pauli[i++] - '0');
    if (!ops.emplace(q, c).second)
      throw Error("malformed Pauli string '" + pauli + "': repeated qubit");
  }
  return ops;
}

}  // namespace

double exact_expectation(const Kernel& kernel, const std::string& pauli) {
  auto ops = parse_pauli(pauli);
  uint32_t width = kernel.width();
  for (const auto& [q, op] : ops)
    if (q >= std::max<uint32_t>(width, 1))
      throw Error("observable acts on qubit " + std::to_string(q) +
                  " outside kernel width");
  StateVector psi = simulate(kernel);
  // phi = P|psi> via bit flips and phases, then Re <psi|phi>.
  cd acc(0.0);
  for (size_t idx = 0; idx < psi.size(); ++idx) {
    if (psi[idx] == cd(0.0)) continue;
    size_t target = idx;
    cd phase(1.0);
    for (const auto& [q, op] : ops) {
      bool bit = (idx >> q) & 1;
      switch (op) {
        case 'X':
          target ^= size_t(1) << q;
          break;
        case 'Y':
          target ^= size_t(1) << q;
          phase *= bit ? -kI : kI;
          break;
        case 'Z':
          if (bit) phase = -phase;
          break;
      }
    }
    acc += std::conj(psi[target]) * phase * psi[idx];
  }
  return acc.real();
}

double state_fidelity(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) throw Error("state dimension mismatch");
  cd inner(0.0);
  for (size_t i = 0; i < a.size(); ++i) inner += std::conj(a[i]) * b[i];
  return std::norm(inner);
}

std::vector<AcceleratorBuffer> Accelerator::execute_batch(
    const std::vector<Kernel>& kernels, uint64_t shots, uint64_t seed) {
  std::vector<AcceleratorBuffer> out;
  out.reserve(kernels.size());
  for (size_t i = 0; i < kernels.size(); ++i)
    out.push_back(execute(kernels[i], shots, seed + i));
  return out;
}

double Accelerator::expectation(const Kernel&, const std::string&) {
  throw Error("accelerator '" + name() + "' does not support exact expectations");
}

AcceleratorBuffer LocalAccelerator::execute(const Kernel& kernel,
                                            uint64_t shots, uint64_t seed) {
  return sample(kernel, shots, seed, noise_ ? &*noise_ : nullptr);
}

double LocalAccelerator::expectation(const Kernel& kernel,
                                     const std::string& pauli) {
  if (noise_)
    throw Error("exact expectations unavailable on a noisy accelerator");
  return exact_expectation(kernel, pauli);
}

}  // namespace qcf
