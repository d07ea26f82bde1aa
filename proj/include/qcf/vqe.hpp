#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcf/accel.hpp"
#include "qcf/ir.hpp"

namespace qcf {

struct PauliTerm {
  double coefficient = 0.0;
  std::map<uint32_t, char> ops;  // qubit -> 'X' | 'Y' | 'Z'; empty = identity

  bool is_identity() const { return ops.empty(); }
  // "X0X1", "Z0", "I"
  std::string op_string() const;
};

struct PauliHamiltonian {
  std::vector<PauliTerm> terms;

  uint32_t width() const;
};

// Line format: `coeff ops`, e.g. "0.218291 Z0" or "-2.143304 X0X1"; bare
// "I" for the identity. Terms with equal operator strings are merged.
PauliHamiltonian parse_hamiltonian(const std::string& text);

// One measurement kernel per non-identity term: ansatz body, then a basis
// change per operator (X -> H q, Y -> RX(pi/2) q), then MEASURE of the
// support qubits in ascending index order. Keyed by term op string.
std::map<std::string, Kernel> measurement_kernels(const PauliHamiltonian& h,
                                                  const Kernel& ansatz);

// Parity-weighted average over the buffer's counts at the term's bits.
double term_expectation(const AcceleratorBuffer& buffer, const PauliTerm& term);

struct EnergyPoint {
  double theta = 0.0;
  double energy_raw = 0.0;
  std::optional<double> energy_mitigated;
  std::map<std::string, double> term_expectations;
};

struct VqeOptions {
  uint64_t shots = 0;  // 0 selects exact-expectation mode
  uint64_t seed = 0;
  bool mitigate = false;
  uint64_t calibration_shots = 0;  // 0: same as shots
  int max_iterations = 500;
};

EnergyPoint energy_at(double theta, const PauliHamiltonian& h,
                      const Kernel& ansatz, Accelerator& accelerator,
                      const VqeOptions& options);

std::vector<EnergyPoint> sweep(const std::vector<double>& theta_grid,
                               const PauliHamiltonian& h, const Kernel& ansatz,
                               Accelerator& accelerator,
                               const VqeOptions& options);

struct MinimizeResult {
  std::vector<double> parameters;
  double energy = 0.0;
  int iterations = 0;
  int evaluations = 0;
};

// Nelder-Mead (reflection 1, expansion 2, contraction 0.5, shrink 0.5) over
// the ansatz parameter vector. Converges when the simplex energy spread
// drops below the tolerance (1e-8 exact, 3 sigma-hat in sampling mode).
MinimizeResult minimize(const PauliHamiltonian& h, const Kernel& ansatz,
                        Accelerator& accelerator, const VqeOptions& options,
                        const std::vector<double>& init);

std::string sweep_to_csv(const std::vector<EnergyPoint>& points,
                         const PauliHamiltonian& h);

}  // namespace qcf
