#include "qcf/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qcf {

CalibrationData::QubitCal CalibrationData::for_qubit(uint32_t q) const {
  auto it = per_qubit.find(q);
  if (it == per_qubit.end())
    throw Error("no calibration data for qubit " + std::to_string(q));
  return it->second;
}

bool CalibrationData::invertible(uint32_t q) const {
  auto cal = for_qubit(q);
  return cal.p0 + cal.p1 < 1.0;
}

std::string calibration_kernel_name(uint32_t qubit, int bit) {
  return "cal_" + std::to_string(qubit) + "_" + std::to_string(bit);
}

Program make_calibration_kernels(const std::vector<uint32_t>& qubits) {
  if (qubits.empty()) throw ValidationError("calibration qubit list is empty");
  std::set<uint32_t> seen;
  Program program;
  for (uint32_t q : qubits) {
    if (!seen.insert(q).second)
      throw ValidationError("duplicate calibration qubit " + std::to_string(q));
    Kernel zero;
    zero.name = calibration_kernel_name(q, 0);
    zero.body.push_back(Instruction::measure(q, 0));
    Kernel one;
    one.name = calibration_kernel_name(q, 1);
    one.body.push_back(Instruction::gate1(GateKind::X, q));
    one.body.push_back(Instruction::measure(q, 0));
    program.kernels.push_back(std::move(zero));
    program.kernels.push_back(std::move(one));
  }
  return program;
}

CalibrationData estimate_confusion(
    const std::vector<uint32_t>& qubits,
    const std::map<std::string, AcceleratorBuffer>& buffers) {
  CalibrationData cal;
  for (uint32_t q : qubits) {
    auto it0 = buffers.find(calibration_kernel_name(q, 0));
    auto it1 = buffers.find(calibration_kernel_name(q, 1));
    if (it0 == buffers.end() || it1 == buffers.end())
      throw Error("missing calibration buffer for qubit " + std::to_string(q));
    const auto& b0 = it0->second;
    const auto& b1 = it1->second;
    if (b0.shots == 0 || b1.shots == 0)
      throw Error("calibration buffer has zero shots");
    CalibrationData::QubitCal qc;
    auto c0 = b0.counts.find("1");
    qc.p0 = c0 == b0.counts.end()
                ? 0.0
                : static_cast<double>(c0->second) / b0.shots;
    auto c1 = b1.counts.find("0");
    qc.p1 = c1 == b1.counts.end()
                ? 0.0
                : static_cast<double>(c1->second) / b1.shots;
    cal.per_qubit[q] = qc;
    cal.shots = std::max(cal.shots, b0.shots);
  }
  return cal;
}

AcceleratorBuffer correct_counts(const AcceleratorBuffer& buffer,
                                 const CalibrationData& cal) {
  const size_t m = buffer.measured.size();
  if (m == 0) throw Error("buffer has no measured bits");
  if (m > 24) throw Error("too many measured bits to invert");

  for (const auto& bit : buffer.measured)
    if (!cal.invertible(bit.qubit))
      throw Error("calibration for qubit " + std::to_string(bit.qubit) +
                  " is not invertible (p0 + p1 >= 1)");

  const size_t dim = size_t(1) << m;
  std::vector<double> p(dim, 0.0);
  for (const auto& [key, n] : buffer.counts) {
    if (key.size() != m) throw Error("count key width mismatch");
    size_t idx = 0;
    for (size_t i = 0; i < m; ++i)
      if (key[i] == '1') idx |= size_t(1) << (m - 1 - i);
    p[idx] = static_cast<double>(n) / buffer.shots;
  }

  // Apply each per-bit inverse confusion matrix
  //   A_q^-1 = 1/(1-p0-p1) [[1-p1, -p1], [-p0, 1-p0]]
  // along its axis of the 2^m distribution.
  for (size_t i = 0; i < m; ++i) {
    auto qc = cal.for_qubit(buffer.measured[i].qubit);
    double det = 1.0 - qc.p0 - qc.p1;
    size_t stride = size_t(1) << (m - 1 - i);
    for (size_t base = 0; base < dim; ++base) {
      if (base & stride) continue;
      double v0 = p[base];
      double v1 = p[base | stride];
      p[base] = ((1.0 - qc.p1) * v0 - qc.p1 * v1) / det;
      p[base | stride] = (-qc.p0 * v0 + (1.0 - qc.p0) * v1) / det;
    }
  }

  AcceleratorBuffer out = buffer;
  out.counts.clear();
  auto key_of = [&](size_t idx) {
    std::string key(m, '0');
    for (size_t i = 0; i < m; ++i)
      if ((idx >> (m - 1 - i)) & 1) key[i] = '1';
    return key;
  };

  double total = 0.0;
  std::vector<double> clipped(dim);
  for (size_t idx = 0; idx < dim; ++idx) {
    out.metadata["quasi_" + key_of(idx)] = p[idx];
    clipped[idx] = std::max(p[idx], 0.0);
    total += clipped[idx];
  }
  if (total <= 0.0) throw Error("corrected distribution vanished");

  // Scale back to integer counts with largest-remainder rounding.
  std::vector<std::pair<double, size_t>> remainders;
  uint64_t assigned = 0;
  std::vector<uint64_t> whole(dim, 0);
  for (size_t idx = 0; idx < dim; ++idx) {
    double exact = clipped[idx] / total * buffer.shots;
    whole[idx] = static_cast<uint64_t>(std::floor(exact));
    assigned += whole[idx];
    remainders.push_back({exact - std::floor(exact), idx});
  }
  std::sort(remainders.rbegin(), remainders.rend());
  for (size_t i = 0; assigned < buffer.shots && i < remainders.size(); ++i) {
    ++whole[remainders[i].second];
    ++assigned;
  }
  for (size_t idx = 0; idx < dim; ++idx) {
    if (whole[idx] > 0) out.counts[key_of(idx)] = whole[idx];
    out.metadata["corrected_" + key_of(idx)] = clipped[idx] / total;
  }
  return out;
}

double correct_expectation(double z_expectation, uint32_t qubit,
                           const CalibrationData& cal) {
  if (!cal.invertible(qubit))
    throw Error("calibration for qubit " + std::to_string(qubit) +
                " is not invertible (p0 + p1 >= 1)");
  auto qc = cal.for_qubit(qubit);
  double corrected =
      (z_expectation - (qc.p1 - qc.p0)) / (1.0 - qc.p0 - qc.p1);
  return std::clamp(corrected, -1.0, 1.0);
}

PreProcessor readout_mitigation_preprocessor() {
  return [](const Kernel& kernel) {
    std::vector<uint32_t> qubits;
    for (const auto& bit : measured_bits(kernel)) qubits.push_back(bit.qubit);
    std::sort(qubits.begin(), qubits.end());
    if (qubits.empty())
      throw Error("readout mitigation requires a measured kernel");

    PreProcessResult result;
    result.kernel = kernel;
    Program cal_program = make_calibration_kernels(qubits);
    std::vector<std::string> prelude_names;
    for (auto& k : cal_program.kernels) {
      prelude_names.push_back(k.name);
      result.prelude.push_back(std::move(k));
    }
    result.post = [qubits, prelude_names](
                      const AcceleratorBuffer& main,
                      const std::vector<AcceleratorBuffer>& prelude) {
      if (prelude.size() != prelude_names.size())
        throw Error("calibration buffer count mismatch");
      std::map<std::string, AcceleratorBuffer> by_name;
      for (size_t i = 0; i < prelude.size(); ++i)
        by_name[prelude_names[i]] = prelude[i];
      CalibrationData cal = estimate_confusion(qubits, by_name);
      AcceleratorBuffer out = correct_counts(main, cal);
      for (const auto& [q, qc] : cal.per_qubit) {
        out.metadata["cal_p0_" + std::to_string(q)] = qc.p0;
        out.metadata["cal_p1_" + std::to_string(q)] = qc.p1;
      }
      return out;
    };
    return result;
  };
}

}  // namespace qcf
