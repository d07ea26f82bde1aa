// End-to-end acceptance checks. Each criterion prints a single pass/fail
// line; the process exits non-zero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcf/mitigation.hpp"
#include "qcf/parser.hpp"
#include "qcf/passes.hpp"
#include "qcf/remote.hpp"
#include "qcf/server.hpp"
#include "qcf/vqe.hpp"
#include "support.hpp"

using namespace qcf;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int criterion, const char* title, bool ok,
            const std::string& detail = "") {
  std::printf("criterion %d: %-4s %s%s%s\n", criterion, ok ? "PASS" : "FAIL",
              title, detail.empty() ? "" : " — ", detail.c_str());
  if (!ok) ++failures;
}

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Program listing1() { return parse(oracle::listing1_source()); }

Kernel bound_kernel(const std::string& name, double theta) {
  return bind_parameters(resolve_calls(listing1(), name), {{"t0", theta}});
}

double ground_state_energy(const PauliHamiltonian& h, uint32_t n) {
  oracle::Mat dense = oracle::dense_hamiltonian(h, n);
  size_t dim = dense.size();
  Eigen::MatrixXcd m(dim, dim);
  for (size_t r = 0; r < dim; ++r)
    for (size_t c = 0; c < dim; ++c) m(r, c) = dense[r][c];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  return solver.eigenvalues().minCoeff();
}

// Fidelity between a kernel and its compiled form on random inputs, undoing
// the routing permutation when a layout is given.
double compiled_fidelity(const Kernel& before, const Kernel& after, uint32_t n,
                         const std::vector<uint32_t>* layout,
                         std::mt19937_64& rng, int trials = 5) {
  double worst = 1.0;
  for (int t = 0; t < trials; ++t) {
    oracle::Vec in = oracle::random_state(n, rng);
    oracle::Vec va = oracle::apply_kernel(before, n, in);
    oracle::Vec vb = oracle::apply_kernel(after, n, in);
    if (layout) vb = oracle::unpermute(vb, *layout);
    worst = std::min(worst, oracle::fidelity(va, vb));
  }
  return worst;
}

void criterion1() {
  auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  try {
    Program p = listing1();
    const std::map<std::string, size_t> expected = {
        {"ansatz", 3}, {"z0", 4}, {"z1", 4}, {"x0x1", 7}, {"y0y1", 7}};
    for (const auto& [name, count] : expected)
      if (resolve_calls(p, name).body.size() != count) ok = false;
    // Tree -> assembly -> tree, tree -> JSON -> tree, and the DAG view.
    if (parse(to_assembly(p)) != p) ok = false;
    if (deserialize(serialize(p)) != p) ok = false;
    for (const auto& k : p.kernels) {
      Kernel resolved = resolve_calls(p, k.name);
      if (to_dag(resolved).nodes.size() != resolved.body.size()) ok = false;
    }
    double ms = elapsed_ms(t0);
    if (ms >= 1000.0) ok = false;
    detail = "resolved counts 3/4/4/7/7, all IR forms round-trip, " +
             std::to_string(ms) + " ms";
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(1, "kernel language and IR forms", ok, detail);
}

void criterion2() {
  bool ok = true;
  std::string detail;
  try {
    PauliHamiltonian h = parse_hamiltonian(oracle::deuteron_hamiltonian_text());
    LocalAccelerator accel;
    VqeOptions o;
    o.shots = 0;
    MinimizeResult r = minimize(h, resolve_calls(listing1(), "ansatz"), accel,
                                o, {0.0});
    double reference = ground_state_energy(h, 2);
    double err = std::abs(r.energy - reference);
    ok = err <= 1e-6;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "E = %.9f vs eigenvalue %.9f (|diff| = %.2e <= 1e-6)",
                  r.energy, reference, err);
    detail = buf;
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(2, "exact variational minimum", ok, detail);
}

void criterion3() {
  bool ok = true;
  std::string detail;
  try {
    PauliHamiltonian h = parse_hamiltonian(oracle::deuteron_hamiltonian_text());
    Kernel ansatz = resolve_calls(listing1(), "ansatz");
    LocalAccelerator accel;
    VqeOptions o;
    o.shots = 0;
    std::vector<double> grid;
    for (int i = 0; i < 50; ++i) grid.push_back(-1.0 + 3.0 * i / 49.0);
    auto points = sweep(grid, h, ansatz, accel, o);
    double worst = 0.0;
    for (const auto& pt : points)
      worst = std::max(worst,
                       std::abs(pt.energy_raw - oracle::deuteron_energy(pt.theta)));
    ok = worst <= 1e-9;
    char buf[120];
    std::snprintf(buf, sizeof buf, "50 points, max |E - closed form| = %.2e <= 1e-9",
                  worst);
    detail = buf;
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(3, "exact energy sweep", ok, detail);
}

void criterion4() {
  bool ok = true;
  std::string detail;
  try {
    PauliHamiltonian h = parse_hamiltonian(oracle::deuteron_hamiltonian_text());
    Kernel ansatz = resolve_calls(listing1(), "ansatz");
    LocalAccelerator accel;
    double theta = oracle::deuteron_theta_star();
    double exact = oracle::deuteron_energy(theta);

    VqeOptions o1;
    o1.shots = 10000;
    o1.seed = 20250101;
    double err1 = std::abs(
        energy_at(theta, h, ansatz, accel, o1).energy_raw - exact);

    VqeOptions o2;
    o2.shots = 100000;
    o2.seed = 20250102;
    double err2 = std::abs(
        energy_at(theta, h, ansatz, accel, o2).energy_raw - exact);

    ok = err1 <= 0.2 && err2 <= 0.07;
    char buf[140];
    std::snprintf(buf, sizeof buf,
                  "|err| = %.4f <= 0.2 at 1e4 shots, %.4f <= 0.07 at 1e5",
                  err1, err2);
    detail = buf;
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(4, "sampled energy accuracy", ok, detail);
}

void criterion5() {
  auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  try {
    PauliHamiltonian h = parse_hamiltonian(oracle::deuteron_hamiltonian_text());
    Kernel ansatz = resolve_calls(listing1(), "ansatz");
    NoiseModel noise = NoiseModel::symmetric(2, 0.05);
    LocalAccelerator noisy(noise);

    VqeOptions raw;
    raw.shots = 100000;
    raw.seed = 90210;
    VqeOptions mitigated = raw;
    mitigated.mitigate = true;

    double raw_err = 0.0, mit_err = 0.0;
    const int points = 20;
    for (int i = 0; i < points; ++i) {
      double theta = -1.0 + 3.0 * i / (points - 1);
      double exact = oracle::deuteron_energy(theta);
      raw_err += std::abs(
          energy_at(theta, h, ansatz, noisy, raw).energy_raw - exact);
      auto pt = energy_at(theta, h, ansatz, noisy, mitigated);
      mit_err += std::abs(pt.energy_mitigated.value() - exact);
    }
    raw_err /= points;
    mit_err /= points;
    bool improves = mit_err <= raw_err / 3.0;

    // Exact inversion: pushing the corrected quasi-distribution back through
    // the confusion matrices must reproduce the measured distribution.
    CalibrationData cal;
    cal.per_qubit[0] = {0.05, 0.05};
    cal.per_qubit[1] = {0.05, 0.05};
    cal.shots = 1;
    Kernel xk = bound_kernel("x0x1", 0.7);
    AcceleratorBuffer noisy_buf = sample(xk, 100000, 515, &noise);
    auto measured = noisy_buf.distribution();
    auto corrected = correct_counts(noisy_buf, cal);
    const char* keys[] = {"00", "01", "10", "11"};
    double worst = 0.0;
    for (const char* key : keys) {
      double reconstructed = 0.0;
      for (const char* src : keys) {
        auto it = corrected.metadata.find(std::string("quasi_") + src);
        double q = it == corrected.metadata.end() ? 0.0 : it->second;
        double w = q;
        for (size_t b = 0; b < 2; ++b) {
          bool truth = src[b] == '1', read = key[b] == '1';
          w *= (truth == read) ? 0.95 : 0.05;
        }
        reconstructed += w;
      }
      double actual = measured.count(key) ? measured.at(key) : 0.0;
      worst = std::max(worst, std::abs(reconstructed - actual));
    }
    bool exact_ok = worst <= 1e-10;

    double ms = elapsed_ms(t0);
    ok = improves && exact_ok && ms < 120000.0;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "mean error %.4f raw vs %.4f mitigated (<= 1/3), exact "
                  "inversion max dev %.1e, %.0f ms",
                  raw_err, mit_err, worst, ms);
    detail = buf;
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(5, "readout-error mitigation", ok, detail);
}

void criterion6() {
  bool ok = true;
  std::string detail;
  try {
    std::mt19937_64 rng(606);
    Topology line = Topology::line(4);
    double worst = 1.0;
    for (int i = 0; i < 200; ++i) {
      Kernel k = oracle::random_bound_kernel(rng, 4, 20);
      RoutingResult routed = route_swaps(k, line);
      for (const auto& ins : routed.kernel.body)
        if (is_two_qubit(ins.kind) &&
            !line.has_edge(ins.qubits[0], ins.qubits[1]))
          ok = false;
      worst = std::min(worst, compiled_fidelity(k, routed.kernel, 4,
                                                &routed.layout, rng));
    }
    if (worst < 1.0 - 1e-10) ok = false;
    char buf[120];
    std::snprintf(buf, sizeof buf,
                  "200 circuits on a 4-qubit line, min fidelity %.12f", worst);
    detail = buf;
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(6, "SWAP routing", ok, detail);
}

void criterion7() {
  bool ok = true;
  std::string detail;
  try {
    std::mt19937_64 rng(707);
    NativeGateSet native = NativeGateSet::default_set();
    double worst_lower = 1.0, worst_opt = 1.0;
    for (int i = 0; i < 100; ++i) {
      Kernel k = oracle::random_bound_kernel(rng, 3, 15);
      uint32_t n = k.width();

      Kernel lowered = lower_to_native(k, native);
      for (const auto& ins : lowered.body)
        if (!native.contains(ins.kind)) ok = false;
      worst_lower =
          std::min(worst_lower, compiled_fidelity(k, lowered, n, nullptr, rng));

      Kernel optimized = merge_rotations(cancel_inverse_pairs(k));
      if (optimized.body.size() > k.body.size()) ok = false;
      worst_opt = std::min(worst_opt,
                           compiled_fidelity(k, optimized, n, nullptr, rng));
    }
    if (worst_lower < 1.0 - 1e-12 || worst_opt < 1.0 - 1e-10) ok = false;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "lowering min fidelity %.14f, optimizer min fidelity %.12f",
                  worst_lower, worst_opt);
    detail = buf;
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(7, "native lowering and optimizers", ok, detail);
}

void criterion8() {
  auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  try {
    // Remote sampling must equal local sampling bit for bit.
    {
      HttpJobServer server;
      int port = server.start(0);
      RemoteAccelerator remote("http://127.0.0.1:" + std::to_string(port));
      Kernel k = bound_kernel("x0x1", 0.5944);
      if (remote.execute(k, 4096, 41).counts != sample(k, 4096, 41).counts)
        ok = false;
      server.stop();
    }
    // One session beats five individual jobs under 100 ms queue latency.
    double session_ms = 0.0, individual_ms = 0.0;
    {
      ServiceConfig config;
      config.latency_ms = 100;
      JobService service(config);
      JobRequest req;
      Program p;
      p.kernels.push_back(bound_kernel("z0", 0.5944));
      req.program = to_assembly(p);
      req.kernel = p.kernels[0].name;
      req.shots = 128;

      auto s0 = Clock::now();
      service.submit_session({req, req, req, req, req});
      service.wait_idle();
      session_ms = elapsed_ms(s0);

      auto s1 = Clock::now();
      for (int i = 0; i < 5; ++i) service.submit_job(req);
      service.wait_idle();
      individual_ms = elapsed_ms(s1);
      if (!(session_ms < individual_ms)) ok = false;
    }
    // Ten queued jobs complete in submission order.
    {
      JobService service;
      std::vector<std::string> ids;
      JobRequest req;
      Program p;
      p.kernels.push_back(bound_kernel("z1", 0.3));
      req.program = to_assembly(p);
      req.kernel = p.kernels[0].name;
      req.shots = 64;
      for (int i = 0; i < 10; ++i) ids.push_back(service.submit_job(req));
      service.wait_idle();
      if (service.completion_order() != ids) ok = false;
    }
    double ms = elapsed_ms(t0);
    if (ms >= 30000.0) ok = false;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "remote == local, session %.0f ms vs %.0f ms individual, "
                  "FIFO x10, %.0f ms total",
                  session_ms, individual_ms, ms);
    detail = buf;
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(8, "job server and remote client", ok, detail);
}

void criterion9() {
  bool ok = true;
  std::string detail;
  try {
    std::mt19937_64 rng(909);
    for (int i = 0; i < 100; ++i) {
      Program p = oracle::random_program(rng);
      if (deserialize(serialize(p)) != p) ok = false;
      if (parse(to_assembly(p)) != p) ok = false;
    }
    detail = "100 random programs round-trip through JSON and assembly";
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(9, "serialization round-trips", ok, detail);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all 9 criteria passed\n");
  return 0;
}
