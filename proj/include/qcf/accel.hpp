#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qcf/ir.hpp"

namespace qcf {

// Qubit 0 is the least-significant bit of the amplitude index.
using StateVector = std::vector<std::complex<double>>;

// Per-qubit readout flip probabilities.
// p0: probability of reading 1 when the qubit is 0.
// p1: probability of reading 0 when the qubit is 1.
struct NoiseModel {
  struct Readout {
    double p0 = 0.0;
    double p1 = 0.0;
  };
  std::vector<Readout> readout;

  Readout for_qubit(uint32_t q) const {
    return q < readout.size() ? readout[q] : Readout{};
  }
  static NoiseModel symmetric(uint32_t qubits, double p);
  static NoiseModel from_json(const std::string& text);
  std::string to_json() const;
};

struct AcceleratorBuffer {
  struct MeasuredBit {
    uint32_t cbit = 0;
    uint32_t qubit = 0;
  };

  uint32_t qubit_count = 0;
  uint64_t shots = 0;
  // Keys render the measured classical bits most-significant first; key
  // position i corresponds to measured[i].
  std::map<std::string, uint64_t> counts;
  std::vector<MeasuredBit> measured;  // sorted by cbit descending
  std::map<std::string, double> metadata;

  // Key position of the classical bit reading qubit q; throws if unmeasured.
  size_t bit_position(uint32_t qubit) const;
  std::map<std::string, double> distribution() const;
};

// Measured-bit layout of a kernel, in key order (cbit descending).
std::vector<AcceleratorBuffer::MeasuredBit> measured_bits(const Kernel& kernel);

// Exact state-vector evolution from |0...0>. MEASURE instructions are
// ignored. Conventions: R*(theta) = exp(-i theta P/2); CNOT control is the
// first operand.
StateVector simulate(const Kernel& kernel);

// Exact probability distribution over measured-bit patterns.
std::map<std::string, double> exact_measured_distribution(const Kernel& kernel);

// Draws `shots` outcomes from the measured-marginal distribution, flipping
// each readout bit per the noise model. Deterministic per seed.
AcceleratorBuffer sample(const Kernel& kernel, uint64_t shots, uint64_t seed,
                         const NoiseModel* noise = nullptr);

// <psi|P|psi> for psi = simulate(kernel). Pauli strings look like "Z0",
// "X0X1"; "I" or "" is the identity.
double exact_expectation(const Kernel& kernel, const std::string& pauli);

// |<a|b>|^2
double state_fidelity(const StateVector& a, const StateVector& b);

class Accelerator {
 public:
  virtual ~Accelerator() = default;
  virtual AcceleratorBuffer execute(const Kernel& kernel, uint64_t shots,
                                    uint64_t seed) = 0;
  // Executes a batch; remote implementations may use one server session.
  virtual std::vector<AcceleratorBuffer> execute_batch(
      const std::vector<Kernel>& kernels, uint64_t shots, uint64_t seed);
  virtual double expectation(const Kernel& kernel, const std::string& pauli);
  virtual std::string name() const = 0;
  virtual bool supports_exact_expectation() const { return false; }
};

class LocalAccelerator : public Accelerator {
 public:
  LocalAccelerator() = default;
  explicit LocalAccelerator(NoiseModel noise) : noise_(std::move(noise)) {}

  AcceleratorBuffer execute(const Kernel& kernel, uint64_t shots,
                            uint64_t seed) override;
  double expectation(const Kernel& kernel, const std::string& pauli) override;
  std::string name() const override { return "local"; }
  bool supports_exact_expectation() const override { return !noise_; }

 private:
  std::optional<NoiseModel> noise_;
};

}  // namespace qcf
