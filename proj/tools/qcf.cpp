#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qcf/mitigation.hpp"
#include "qcf/parser.hpp"
#include "qcf/passes.hpp"
#include "qcf/remote.hpp"
#include "qcf/server.hpp"
#include "qcf/vqe.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qcf::Error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw qcf::Error("cannot write '" + out_path + "'");
  out << text;
}

std::map<std::string, double> parse_bindings(
    const std::vector<std::string>& binds) {
  std::map<std::string, double> values;
  for (const auto& bind : binds) {
    auto eq = bind.find('=');
    if (eq == std::string::npos)
      throw qcf::Error("--bind expects name=value, got '" + bind + "'");
    values[bind.substr(0, eq)] = std::stod(bind.substr(eq + 1));
  }
  return values;
}

std::unique_ptr<qcf::Accelerator> make_accelerator(
    const std::string& backend, const std::string& noise_file) {
  if (backend != "local")
    return std::make_unique<qcf::RemoteAccelerator>(backend);
  if (!noise_file.empty())
    return std::make_unique<qcf::LocalAccelerator>(
        qcf::NoiseModel::from_json(read_file(noise_file)));
  return std::make_unique<qcf::LocalAccelerator>();
}

int cmd_compile(const std::string& file, const std::string& kernel_name,
                const std::string& topology_file, const std::string& passes,
                const std::string& emit, const std::vector<std::string>& binds,
                const std::string& out_path) {
  qcf::Program program = qcf::parse(read_file(file));
  qcf::Kernel kernel = qcf::resolve_calls(program, kernel_name);
  auto bindings = parse_bindings(binds);
  if (!bindings.empty()) kernel = qcf::bind_parameters(kernel, bindings);

  qcf::Topology topology =
      topology_file.empty()
          ? qcf::Topology::full(std::max<uint32_t>(kernel.width(), 1))
          : qcf::Topology::from_json(read_file(topology_file));

  std::vector<uint32_t> layout;
  std::stringstream names(passes);
  std::string name;
  while (std::getline(names, name, ',')) {
    if (name.empty()) continue;
    if (name == "cancel") {
      kernel = qcf::cancel_inverse_pairs(kernel);
    } else if (name == "merge") {
      kernel = qcf::merge_rotations(kernel);
    } else if (name == "route") {
      auto routed = qcf::route_swaps(kernel, topology);
      kernel = std::move(routed.kernel);
      layout = std::move(routed.layout);
    } else if (name == "lower") {
      kernel = qcf::lower_to_native(kernel, qcf::NativeGateSet::default_set());
    } else {
      throw qcf::Error("unknown pass '" + name + "'");
    }
  }

  if (!layout.empty()) {
    std::cerr << "final layout:";
    for (size_t q = 0; q < layout.size(); ++q)
      std::cerr << " " << q << "->" << layout[q];
    std::cerr << "\n";
  }

  qcf::Program out_program;
  out_program.kernels.push_back(kernel);
  if (emit == "asm")
    write_output(out_path, qcf::to_assembly(out_program));
  else if (emit == "json")
    write_output(out_path, qcf::serialize(out_program));
  else if (emit == "dot")
    write_output(out_path, qcf::to_dot(qcf::to_dag(kernel)));
  else
    throw qcf::Error("unknown emit format '" + emit + "'");
  return 0;
}

int cmd_run(const std::string& file, const std::string& kernel_name,
            const std::vector<std::string>& binds, uint64_t shots,
            uint64_t seed, const std::string& noise_file,
            const std::string& backend) {
  qcf::Program program = qcf::parse(read_file(file));
  qcf::Kernel kernel = qcf::resolve_calls(program, kernel_name);
  kernel = qcf::bind_parameters(kernel, parse_bindings(binds));
  auto accelerator = make_accelerator(backend, noise_file);
  qcf::AcceleratorBuffer buffer = accelerator->execute(kernel, shots, seed);
  nlohmann::ordered_json counts;
  for (const auto& [key, n] : buffer.counts) counts[key] = n;
  std::cout << counts.dump() << "\n";
  return 0;
}

int cmd_vqe(const std::string& ham_file, const std::string& ansatz_file,
            const std::string& ansatz_kernel, const std::string& sweep_spec,
            bool do_minimize, double init, uint64_t shots, uint64_t seed,
            const std::string& noise_file, bool mitigate,
            const std::string& backend, const std::string& out_path) {
  qcf::PauliHamiltonian h = qcf::parse_hamiltonian(read_file(ham_file));
  qcf::Program program = qcf::parse(read_file(ansatz_file));
  qcf::Kernel ansatz = qcf::resolve_calls(program, ansatz_kernel);
  auto accelerator = make_accelerator(backend, noise_file);

  qcf::VqeOptions options;
  options.shots = shots;
  options.seed = seed;
  options.mitigate = mitigate;

  if (do_minimize) {
    std::vector<double> start(ansatz.params.size(), init);
    auto result = qcf::minimize(h, ansatz, *accelerator, options, start);
    std::ostringstream os;
    os << "theta* =";
    for (double p : result.parameters) os << " " << qcf::format_double(p);
    os << "\nE* = " << qcf::format_double(result.energy) << "\n";
    write_output(out_path, os.str());
    return 0;
  }

  if (sweep_spec.empty())
    throw qcf::Error("provide --sweep a:b:n or --minimize");
  double a, b;
  int n;
  if (std::sscanf(sweep_spec.c_str(), "%lf:%lf:%d", &a, &b, &n) != 3 || n < 1)
    throw qcf::Error("--sweep expects a:b:n");
  std::vector<double> grid;
  for (int i = 0; i < n; ++i)
    grid.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  auto points = qcf::sweep(grid, h, ansatz, *accelerator, options);
  write_output(out_path, qcf::sweep_to_csv(points, h));
  return 0;
}

int cmd_serve(int port, int latency_ms, const std::string& backend,
              const std::string& noise_file) {
  qcf::ServiceConfig config;
  config.latency_ms = latency_ms;
  config.exact_backend = backend == "exact";
  config.log_transitions = true;
  if (!noise_file.empty())
    config.default_noise = qcf::NoiseModel::from_json(read_file(noise_file));
  qcf::HttpJobServer server(config);
  int bound = server.start(port);
  std::cerr << "serving on port " << bound << "\n";
  // Run until interrupted.
  static std::atomic<bool> stop{false};
  std::signal(SIGINT, [](int) { stop = true; });
  std::signal(SIGTERM, [](int) { stop = true; });
  while (!stop)
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum kernel compiler, simulator, and VQE driver"};
  app.require_subcommand(1);

  std::string file, kernel_name, topology_file, emit = "asm";
  std::string passes;
  std::vector<std::string> binds;
  std::string out_path, noise_file, backend = "local";
  uint64_t shots = 1024, seed = 0;

  auto* compile = app.add_subcommand("compile", "Parse and transform a kernel");
  compile->add_option("file", file, "kernel source (.qk)")->required();
  compile->add_option("--kernel", kernel_name, "entry kernel")->required();
  compile->add_option("--topology", topology_file, "topology JSON file");
  compile->add_option("--passes", passes, "comma list: cancel,merge,route,lower");
  compile->add_option("--emit", emit, "asm|json|dot");
  compile->add_option("--bind", binds, "name=value parameter binding");
  compile->add_option("--out", out_path, "output file (default stdout)");

  auto* run = app.add_subcommand("run", "Execute a kernel");
  run->add_option("file", file, "kernel source (.qk)")->required();
  run->add_option("--kernel", kernel_name, "entry kernel")->required();
  run->add_option("--bind", binds, "name=value parameter binding");
  run->add_option("--shots", shots, "number of shots");
  run->add_option("--seed", seed, "PRNG seed");
  run->add_option("--noise", noise_file, "noise model JSON file");
  run->add_option("--backend", backend, "local or server URL");

  std::string ham_file, ansatz_file, ansatz_kernel, sweep_spec;
  bool do_minimize = false, mitigate = false;
  double init = 0.5;
  auto* vqe = app.add_subcommand("vqe", "Variational eigensolver");
  vqe->add_option("--hamiltonian", ham_file, "Pauli Hamiltonian (.ham)")
      ->required();
  vqe->add_option("--ansatz", ansatz_file, "ansatz source (.qk)")->required();
  vqe->add_option("--ansatz-kernel", ansatz_kernel, "ansatz kernel name")
      ->required();
  vqe->add_option("--sweep", sweep_spec, "theta grid a:b:n");
  vqe->add_flag("--minimize", do_minimize, "minimize the energy");
  vqe->add_option("--init", init, "initial parameter value");
  vqe->add_option("--shots", shots, "shots per kernel; 0 = exact");
  vqe->add_option("--seed", seed, "PRNG seed");
  vqe->add_option("--noise", noise_file, "noise model JSON file");
  vqe->add_flag("--mitigate", mitigate, "apply readout-error mitigation");
  vqe->add_option("--backend", backend, "local or server URL");
  vqe->add_option("--out", out_path, "output file (default stdout)");

  int port = 8080, latency_ms = 0;
  std::string serve_backend = "sampling";
  auto* serve = app.add_subcommand("serve", "Run the job-queue server");
  serve->add_option("--port", port, "listen port");
  serve->add_option("--latency-ms", latency_ms, "artificial queue latency");
  serve->add_option("--backend", serve_backend, "exact|sampling");
  serve->add_option("--noise", noise_file, "default noise model JSON file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (compile->parsed())
      return cmd_compile(file, kernel_name, topology_file, passes, emit, binds,
                         out_path);
    if (run->parsed())
      return cmd_run(file, kernel_name, binds, shots, seed, noise_file,
                     backend);
    if (vqe->parsed())
      return cmd_vqe(ham_file, ansatz_file, ansatz_kernel, sweep_spec,
                     do_minimize, init, shots, seed, noise_file, mitigate,
                     backend, out_path);
    if (serve->parsed())
      return cmd_serve(port, latency_ms, serve_backend, noise_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
