#include "qcf/vqe.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qcf/mitigation.hpp"

namespace qcf {

std::string PauliTerm::op_string() const {
  if (ops.empty()) return "I";
  std::string s;
  for (const auto& [q, op] : ops) s += op + std::to_string(q);
  return s;
}

uint32_t PauliHamiltonian::width() const {
  uint32_t w = 0;
  for (const auto& t : terms)
    for (const auto& [q, op] : t.ops) w = std::max(w, q + 1);
  return w;
}

PauliHamiltonian parse_hamiltonian(const std::string& text) {
  PauliHamiltonian h;
  std::map<std::string, size_t> index;
  std::istringstream stream(text);
  std::string line;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string coeff_tok;
    if (!(ls >> coeff_tok)) continue;  // blank line
    char* end = nullptr;
    double coeff = std::strtod(coeff_tok.c_str(), &end);
    if (end != coeff_tok.c_str() + coeff_tok.size())
      throw ParseError("expected coefficient, found '" + coeff_tok + "'",
                       lineno, 1);
    std::string ops_text, tok;
    while (ls >> tok) ops_text += tok;
    if (ops_text.empty())
      throw ParseError("missing Pauli operators", lineno, 1);

    PauliTerm term;
    term.coefficient = coeff;
    if (ops_text != "I") {
      size_t i = 0;
      while (i < ops_text.size()) {
        char op = ops_text[i];
        if (op != 'X' && op != 'Y' && op != 'Z')
          throw ParseError("expected Pauli operator X/Y/Z, found '" +
                               std::string(1, op) + "'",
                           lineno, static_cast<int>(i + 1));
        ++i;
        if (i >= ops_text.size() ||
            !std::isdigit(static_cast<unsigned char>(ops_text[i])))
          throw ParseError("missing qubit index after operator", lineno,
                           static_cast<int>(i + 1));
        uint32_t q = 0;
        while (i < ops_text.size() &&
               std::isdigit(static_cast<unsigned char>(ops_text[i])))
          q = q * 10 + (ops_text[i++] - '0');
        if (!term.ops.emplace(q, op).second)
          throw ParseError("repeated qubit in Pauli term", lineno, 1);
      }
    }
    auto key = term.op_string();
    auto it = index.find(key);
    if (it != index.end()) {
      h.terms[it->second].coefficient += term.coefficient;
    } else {
      index[key] = h.terms.size();
      h.terms.push_back(std::move(term));
    }
  }
  if (h.terms.empty()) throw ParseError("no Hamiltonian terms", lineno, 1);
  return h;
}

std::map<std::string, Kernel> measurement_kernels(const PauliHamiltonian& h,
                                                  const Kernel& ansatz) {
  if (ansatz.has_calls())
    throw Error("measurement_kernels: ansatz contains unresolved calls");
  const double half_pi = std::numbers::pi / 2.0;
  std::map<std::string, Kernel> kernels;
  for (const auto& term : h.terms) {
    if (term.is_identity()) continue;
    Kernel k;
    k.name = term.op_string();
    k.params = ansatz.params;
    k.body = ansatz.body;
    for (const auto& [q, op] : term.ops) {
      if (op == 'X')
        k.body.push_back(Instruction::gate1(GateKind::H, q));
      else if (op == 'Y')
        k.body.push_back(Instruction::rotation(
            GateKind::RX, ParamExpr::literal(half_pi), q));
    }
    uint32_t cbit = 0;
    for (const auto& [q, op] : term.ops)
      k.body.push_back(Instruction::measure(q, cbit++));
    kernels.emplace(term.op_string(), std::move(k));
  }
  return kernels;
}

double term_expectation(const AcceleratorBuffer& buffer,
                        const PauliTerm& term) {
  if (term.is_identity()) return 1.0;
  if (buffer.shots == 0) throw Error("buffer has no shots");
  std::vector<size_t> positions;
  for (const auto& [q, op] : term.ops)
    positions.push_back(buffer.bit_position(q));
  double acc = 0.0;
  for (const auto& [key, n] : buffer.counts) {
    int parity = 0;
    for (size_t pos : positions)
      if (key.at(pos) == '1') parity ^= 1;
    acc += (parity ? -1.0 : 1.0) * static_cast<double>(n);
  }
  return acc / static_cast<double>(buffer.shots);
}

namespace {

Kernel bind_vector(const Kernel& ansatz, const std::vector<double>& values) {
  if (values.size() != ansatz.params.size())
    throw Error("expected " + std::to_string(ansatz.params.size()) +
                " parameter values, got " + std::to_string(values.size()));
  std::map<std::string, double> bindings;
  for (size_t i = 0; i < values.size(); ++i)
    bindings[ansatz.params[i]] = values[i];
  return bind_parameters(ansatz, bindings);
}

EnergyPoint energy_eval(const std::vector<double>& values,
                        const PauliHamiltonian& h, const Kernel& ansatz,
                        Accelerator& accelerator, const VqeOptions& options) {
  EnergyPoint point;
  point.theta = values.empty() ? 0.0 : values[0];

  double offset = 0.0;
  for (const auto& term : h.terms)
    if (term.is_identity()) offset += term.coefficient;

  if (options.shots == 0) {
    if (!accelerator.supports_exact_expectation())
      throw Error("accelerator '" + accelerator.name() +
                  "' cannot evaluate exact expectations; use --shots");
    Kernel bound = bind_vector(ansatz, values);
    double energy = offset;
    for (const auto& term : h.terms) {
      if (term.is_identity()) continue;
      double ev = accelerator.expectation(bound, term.op_string());
      point.term_expectations[term.op_string()] = ev;
      energy += term.coefficient * ev;
    }
    point.energy_raw = energy;
    if (options.mitigate) point.energy_mitigated = energy;
    return point;
  }

  Kernel bound = bind_vector(ansatz, values);
  auto kernels = measurement_kernels(h, bound);
  std::vector<const PauliTerm*> measured_terms;
  std::vector<Kernel> batch;
  for (const auto& term : h.terms) {
    if (term.is_identity()) continue;
    measured_terms.push_back(&term);
    batch.push_back(kernels.at(term.op_string()));
  }

  auto buffers = accelerator.execute_batch(batch, options.shots, options.seed);
  double energy = offset;
  for (size_t i = 0; i < measured_terms.size(); ++i) {
    double ev = term_expectation(buffers[i], *measured_terms[i]);
    point.term_expectations[measured_terms[i]->op_string()] = ev;
    energy += measured_terms[i]->coefficient * ev;
  }
  point.energy_raw = energy;

  if (options.mitigate) {
    std::vector<uint32_t> qubits;
    for (const auto* term : measured_terms)
      for (const auto& [q, op] : term->ops)
        if (std::find(qubits.begin(), qubits.end(), q) == qubits.end())
          qubits.push_back(q);
    std::sort(qubits.begin(), qubits.end());

    uint64_t cal_shots =
        options.calibration_shots ? options.calibration_shots : options.shots;
    Program cal_program = make_calibration_kernels(qubits);
    auto cal_buffers = accelerator.execute_batch(
        cal_program.kernels, cal_shots, options.seed + 7919);
    std::map<std::string, AcceleratorBuffer> by_name;
    for (size_t i = 0; i < cal_program.kernels.size(); ++i)
      by_name[cal_program.kernels[i].name] = cal_buffers[i];
    CalibrationData cal = estimate_confusion(qubits, by_name);

    double mitigated = offset;
    for (size_t i = 0; i < measured_terms.size(); ++i) {
      AcceleratorBuffer corrected = correct_counts(buffers[i], cal);
      mitigated += measured_terms[i]->coefficient *
                   term_expectation(corrected, *measured_terms[i]);
    }
    point.energy_mitigated = mitigated;
  }
  return point;
}

}  // namespace

EnergyPoint energy_at(double theta, const PauliHamiltonian& h,
                      const Kernel& ansatz, Accelerator& accelerator,
                      const VqeOptions& options) {
  std::vector<double> values(ansatz.params.size(), theta);
  return energy_eval(values, h, ansatz, accelerator, options);
}

std::vector<EnergyPoint> sweep(const std::vector<double>& theta_grid,
                               const PauliHamiltonian& h, const Kernel& ansatz,
                               Accelerator& accelerator,
                               const VqeOptions& options) {
  if (theta_grid.empty()) throw Error("sweep grid is empty");
  for (size_t i = 1; i < theta_grid.size(); ++i)
    if (theta_grid[i] <= theta_grid[i - 1])
      throw Error("sweep grid must be strictly increasing");
  std::vector<EnergyPoint> points;
  points.reserve(theta_grid.size());
  for (double theta : theta_grid)
    points.push_back(energy_at(theta, h, ansatz, accelerator, options));
  return points;
}

MinimizeResult minimize(const PauliHamiltonian& h, const Kernel& ansatz,
                        Accelerator& accelerator, const VqeOptions& options,
                        const std::vector<double>& init) {
  const size_t n = ansatz.params.size();
  if (n < 1) throw Error("ansatz has no variational parameters");
  if (init.size() != n)
    throw Error("initial point has wrong dimension");

  double tol = 1e-8;
  if (options.shots > 0) {
    double var = 0.0;
    for (const auto& t : h.terms)
      if (!t.is_identity()) var += t.coefficient * t.coefficient;
    tol = 3.0 * std::sqrt(var / static_cast<double>(options.shots));
  }

  int evaluations = 0;
  auto energy_of = [&](const std::vector<double>& x) {
    ++evaluations;
    double e = energy_eval(x, h, ansatz, accelerator, options).energy_raw;
    if (!std::isfinite(e)) throw Error("non-finite energy encountered");
    return e;
  };

  // Nelder-Mead coefficients.
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<std::vector<double>> simplex(n + 1, init);
  for (size_t i = 0; i < n; ++i) simplex[i + 1][i] += 0.5;
  std::vector<double> energy(n + 1);
  for (size_t i = 0; i <= n; ++i) energy[i] = energy_of(simplex[i]);

  int iterations = 0;
  while (iterations < options.max_iterations) {
    std::vector<size_t> order(n + 1);
    for (size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return energy[a] < energy[b]; });
    double spread = energy[order.back()] - energy[order.front()];
    if (spread < tol) break;
    ++iterations;

    size_t worst = order.back();
    std::vector<double> centroid(n, 0.0);
    for (size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d] / n;
    }

    auto blend = [&](double coeff) {
      std::vector<double> x(n);
      for (size_t d = 0; d < n; ++d)
        x[d] = centroid[d] + coeff * (simplex[worst][d] - centroid[d]);
      return x;
    };

    std::vector<double> reflected = blend(-alpha);
    double fr = energy_of(reflected);
    if (fr < energy[order.front()]) {
      std::vector<double> expanded = blend(-gamma);
      double fe = energy_of(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        energy[worst] = fe;
      } else {
        simplex[worst] = reflected;
        energy[worst] = fr;
      }
      continue;
    }
    if (fr < energy[order[n - 1]]) {
      simplex[worst] = reflected;
      energy[worst] = fr;
      continue;
    }
    std::vector<double> contracted =
        fr < energy[worst] ? blend(-rho) : blend(rho);
    double fc = energy_of(contracted);
    if (fc < std::min(fr, energy[worst])) {
      simplex[worst] = contracted;
      energy[worst] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    size_t best = order.front();
    for (size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (size_t d = 0; d < n; ++d)
        simplex[i][d] =
            simplex[best][d] + sigma * (simplex[i][d] - simplex[best][d]);
      energy[i] = energy_of(simplex[i]);
    }
  }

  size_t best = 0;
  for (size_t i = 1; i <= n; ++i)
    if (energy[i] < energy[best]) best = i;
  MinimizeResult result;
  result.parameters = simplex[best];
  result.energy = energy[best];
  result.iterations = iterations;
  result.evaluations = evaluations;
  return result;
}

std::string sweep_to_csv(const std::vector<EnergyPoint>& points,
                         const PauliHamiltonian& h) {
  std::vector<std::string> term_cols;
  for (const auto& t : h.terms)
    if (!t.is_identity()) term_cols.push_back(t.op_string());

  std::ostringstream os;
  os << "theta,energy_raw,energy_mitigated";
  for (const auto& col : term_cols) os << ",ev_" << col;
  os << "\n";
  for (const auto& p : points) {
    os << format_double(p.theta) << "," << format_double(p.energy_raw) << ",";
    if (p.energy_mitigated) os << format_double(*p.energy_mitigated);
    for (const auto& col : term_cols) {
      os << ",";
      auto it = p.term_expectations.find(col);
      if (it != p.term_expectations.end()) os << format_double(it->second);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace qcf
