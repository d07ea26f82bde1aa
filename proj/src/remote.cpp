#include "qcf/remote.hpp"

#include <chrono>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "qcf/server.hpp"

namespace qcf {

using json = nlohmann::json;

namespace {

JobRequest request_for(const Kernel& kernel, uint64_t shots, uint64_t seed) {
  if (kernel.has_calls() || !kernel.fully_bound())
    throw Error("remote execution needs a call-free, fully bound kernel");
  Program program;
  program.kernels.push_back(kernel);
  JobRequest request;
  request.program = to_assembly(program);
  request.kernel = kernel.name;
  request.shots = shots;
  request.seed = seed;
  return request;
}

AcceleratorBuffer buffer_from_counts(const Kernel& kernel, uint64_t shots,
                                     std::map<std::string, uint64_t> counts) {
  AcceleratorBuffer buf;
  buf.qubit_count = kernel.width();
  buf.shots = shots;
  buf.measured = measured_bits(kernel);
  buf.counts = std::move(counts);
  return buf;
}

}  // namespace

RemoteAccelerator::RemoteAccelerator(std::string base_url)
    : base_url_(std::move(base_url)) {
  std::string rest = base_url_;
  auto scheme = rest.find("://");
  if (scheme != std::string::npos) rest = rest.substr(scheme + 3);
  auto colon = rest.find(':');
  if (colon == std::string::npos) {
    host_ = rest;
  } else {
    host_ = rest.substr(0, colon);
    port_ = std::stoi(rest.substr(colon + 1));
  }
}

AcceleratorBuffer RemoteAccelerator::execute(const Kernel& kernel,
                                             uint64_t shots, uint64_t seed) {
  auto buffers = execute_batch({kernel}, shots, seed);
  return std::move(buffers[0]);
}

std::vector<AcceleratorBuffer> RemoteAccelerator::execute_batch(
    const std::vector<Kernel>& kernels, uint64_t shots, uint64_t seed) {
  if (kernels.empty()) return {};
  httplib::Client client(host_, port_);
  client.set_connection_timeout(2, 0);

  auto post = [&](const std::string& path, const std::string& body) {
    for (int attempt = 0; attempt < max_transport_retries; ++attempt) {
      auto res = client.Post(path, body, "application/json");
      if (res) return *res;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    throw TransportError("cannot reach " + base_url_ + path);
  };
  auto get = [&](const std::string& path) {
    for (int attempt = 0; attempt < max_transport_retries; ++attempt) {
      auto res = client.Get(path);
      if (res) return *res;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    throw TransportError("cannot reach " + base_url_ + path);
  };

  // Batches ride a single session; a lone kernel uses the per-job path.
  // Per-kernel seeds match Accelerator::execute_batch's seed + i convention.
  std::vector<std::string> job_ids;
  if (kernels.size() == 1) {
    auto res = post("/jobs", job_request_to_json(request_for(kernels[0], shots, seed)));
    if (res.status != 200)
      throw Error("job rejected: " + json::parse(res.body).value("error", res.body));
    job_ids.push_back(json::parse(res.body).at("id").get<std::string>());
  } else {
    json body;
    body["jobs"] = json::array();
    for (size_t i = 0; i < kernels.size(); ++i)
      body["jobs"].push_back(
          json::parse(job_request_to_json(request_for(kernels[i], shots, seed + i))));
    auto res = post("/sessions", body.dump());
    if (res.status != 200)
      throw Error("session rejected: " +
                  json::parse(res.body).value("error", res.body));
    std::string session_id = json::parse(res.body).at("id").get<std::string>();
    // Poll the session until every member is terminal.
    int delay = poll_initial_ms;
    for (;;) {
      auto view = get("/sessions/" + session_id);
      if (view.status != 200) throw Error("session lookup failed");
      json j = json::parse(view.body);
      bool all_done = true;
      job_ids.clear();
      for (const auto& job : j.at("jobs")) {
        job_ids.push_back(job.at("id").get<std::string>());
        std::string status = job.at("status").get<std::string>();
        if (status != "DONE" && status != "FAILED") all_done = false;
      }
      if (all_done) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      delay = std::min(delay * 2, poll_max_ms);
    }
  }

  std::vector<AcceleratorBuffer> out;
  for (size_t i = 0; i < job_ids.size(); ++i) {
    int delay = poll_initial_ms;
    for (;;) {
      auto res = get("/jobs/" + job_ids[i]);
      if (res.status == 404) throw Error("job vanished: " + job_ids[i]);
      json j = json::parse(res.body);
      std::string status = j.at("status").get<std::string>();
      if (status == "DONE") {
        std::map<std::string, uint64_t> counts;
        for (const auto& [key, n] : j.at("counts").items())
          counts[key] = n.get<uint64_t>();
        out.push_back(buffer_from_counts(kernels[i], shots, std::move(counts)));
        break;
      }
      if (status == "FAILED")
        throw Error("remote execution failed: " +
                    j.value("error", std::string("unknown error")));
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      delay = std::min(delay * 2, poll_max_ms);
    }
  }
  return out;
}

}  // namespace qcf
