#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "qcf/accel.hpp"
#include "qcf/passes.hpp"

namespace qcf {

// Estimated readout flip rates from calibration executions.
struct CalibrationData {
  struct QubitCal {
    double p0 = 0.0;  // fraction of 1 readouts after preparing |0>
    double p1 = 0.0;  // fraction of 0 readouts after preparing |1>
  };
  std::map<uint32_t, QubitCal> per_qubit;
  uint64_t shots = 0;

  QubitCal for_qubit(uint32_t q) const;
  // The 2x2 confusion matrix is invertible iff p0 + p1 < 1.
  bool invertible(uint32_t q) const;
};

// Name of the calibration kernel preparing |bit> on qubit q: cal_<q>_<bit>.
std::string calibration_kernel_name(uint32_t qubit, int bit);

// Two kernels per qubit: cal_q_0 = [MEASURE q] and cal_q_1 = [X q; MEASURE q].
Program make_calibration_kernels(const std::vector<uint32_t>& qubits);

// Buffers keyed by calibration kernel name.
CalibrationData estimate_confusion(
    const std::vector<uint32_t>& qubits,
    const std::map<std::string, AcceleratorBuffer>& buffers);

// Inverts the tensor-product confusion matrix over the measured bits.
// Negative quasi-probabilities are clipped and the distribution renormalized;
// the raw quasi-distribution is kept in metadata ("quasi_<bitstring>").
AcceleratorBuffer correct_counts(const AcceleratorBuffer& buffer,
                                 const CalibrationData& cal);

// Affine inverse for a single-qubit Z expectation:
//   (z - (p1 - p0)) / (1 - p0 - p1), clamped to [-1, 1].
double correct_expectation(double z_expectation, uint32_t qubit,
                           const CalibrationData& cal);

// IR pre-processor: prepends calibration kernels for the kernel's measured
// qubits and returns a post-processor that corrects the main buffer using
// the prelude results.
PreProcessor readout_mitigation_preprocessor();

}  // namespace qcf
