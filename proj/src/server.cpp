#include "qcf/server.hpp"

#include <algorithm>
#include <iostream>

#include "httplib.h"
#include "json.hpp"
#include "qcf/parser.hpp"

namespace qcf {

using json = nlohmann::json;

const char* job_status_name(JobStatus status) {
  switch (status) {
    case JobStatus::Queued: return "QUEUED";
    case JobStatus::Running: return "RUNNING";
    case JobStatus::Done: return "DONE";
    case JobStatus::Failed: return "FAILED";
  }
  return "?";
}

std::string job_request_to_json(const JobRequest& request) {
  json j;
  j["program"] = request.program;
  j["kernel"] = request.kernel;
  j["shots"] = request.shots;
  j["seed"] = request.seed;
  if (request.noise) j["noise"] = json::parse(request.noise->to_json());
  return j.dump();
}

JobRequest job_request_from_json(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed request: ") + e.what(), 1,
                     static_cast<int>(e.byte));
  }
  JobRequest request;
  request.program = j.at("program").get<std::string>();
  request.kernel = j.at("kernel").get<std::string>();
  request.shots = j.value("shots", uint64_t{1024});
  request.seed = j.value("seed", uint64_t{0});
  if (j.contains("noise") && !j["noise"].is_null())
    request.noise = NoiseModel::from_json(j["noise"].dump());
  return request;
}

JobService::JobService(ServiceConfig config) : config_(std::move(config)) {
  worker_ = std::thread([this] { worker_loop(); });
}

JobService::~JobService() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

std::string JobService::enqueue_locked(const JobRequest& request) {
  std::string id = "job-" + std::to_string(next_id_++);
  Job job;
  job.request = request;
  job.view.status = JobStatus::Queued;
  job.view.enqueued = std::chrono::steady_clock::now();
  jobs_.emplace(id, std::move(job));
  if (config_.log_transitions)
    std::cerr << "[queue] " << id << " QUEUED kernel=" << request.kernel
              << " shots=" << request.shots << "\n";
  return id;
}

std::string JobService::submit_job(const JobRequest& request) {
  // Parse errors are rejected synchronously, before the job enters the queue.
  Program program = parse(request.program);
  if (!program.find(request.kernel))
    throw ValidationError("unknown kernel '" + request.kernel + "'");
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = enqueue_locked(request);
    queue_.push_back({{id}});
  }
  cv_.notify_one();
  return id;
}

std::string JobService::submit_session(
    const std::vector<JobRequest>& requests) {
  if (requests.empty()) throw ValidationError("session has no jobs");
  std::string session_id;
  {
    std::lock_guard lock(mutex_);
    session_id = "session-" + std::to_string(next_id_++);
    QueueEntry entry;
    for (const auto& request : requests)
      entry.job_ids.push_back(enqueue_locked(request));
    sessions_[session_id] = entry.job_ids;
    queue_.push_back(std::move(entry));
  }
  cv_.notify_one();
  return session_id;
}

JobView JobService::get_job(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw NotFoundError("unknown job '" + id + "'");
  return it->second.view;
}

std::vector<std::pair<std::string, JobView>> JobService::get_session(
    const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end())
    throw NotFoundError("unknown session '" + id + "'");
  std::vector<std::pair<std::string, JobView>> out;
  for (const auto& job_id : it->second)
    out.push_back({job_id, jobs_.at(job_id).view});
  return out;
}

std::vector<std::string> JobService::completion_order() const {
  std::lock_guard lock(mutex_);
  return completed_;
}

void JobService::wait_idle() {
  std::unique_lock lock(mutex_);
  idle_cv_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

void JobService::worker_loop() {
  for (;;) {
    QueueEntry entry;
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      entry = std::move(queue_.front());
      queue_.pop_front();
      busy_ = true;
    }
    // One queue wait per entry, whether it holds one job or a session.
    if (config_.latency_ms > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.latency_ms));
    for (const auto& id : entry.job_ids) run_job(id);
    {
      std::lock_guard lock(mutex_);
      busy_ = false;
    }
    idle_cv_.notify_all();
  }
}

void JobService::run_job(const std::string& id) {
  JobRequest request;
  {
    std::lock_guard lock(mutex_);
    Job& job = jobs_.at(id);
    job.view.status = JobStatus::Running;
    request = job.request;
  }
  if (config_.log_transitions) std::cerr << "[queue] " << id << " RUNNING\n";

  std::map<std::string, uint64_t> counts;
  std::string error;
  try {
    Program program = parse(request.program);
    Kernel kernel = resolve_calls(program, request.kernel);
    if (!kernel.fully_bound())
      throw Error("kernel '" + request.kernel + "' has unbound parameters");
    const NoiseModel* noise = request.noise ? &*request.noise
                              : config_.default_noise ? &*config_.default_noise
                                                      : nullptr;
    if (config_.exact_backend) {
      // Deterministic counts: shots * exact probability, largest remainder.
      auto dist = exact_measured_distribution(kernel);
      if (noise) throw Error("exact backend does not model noise");
      uint64_t assigned = 0;
      std::vector<std::pair<double, std::string>> remainders;
      for (const auto& [key, p] : dist) {
        double exact = p * request.shots;
        uint64_t whole = static_cast<uint64_t>(exact);
        if (whole > 0) counts[key] = whole;
        assigned += whole;
        remainders.push_back({exact - whole, key});
      }
      std::sort(remainders.rbegin(), remainders.rend());
      for (size_t i = 0; assigned < request.shots && i < remainders.size();
           ++i, ++assigned)
        ++counts[remainders[i].second];
    } else {
      counts = sample(kernel, request.shots, request.seed, noise).counts;
    }
  } catch (const std::exception& e) {
    error = e.what();
  }

  {
    std::lock_guard lock(mutex_);
    Job& job = jobs_.at(id);
    job.view.finished = std::chrono::steady_clock::now();
    if (error.empty()) {
      job.view.status = JobStatus::Done;
      job.view.counts = std::move(counts);
    } else {
      job.view.status = JobStatus::Failed;
      job.view.error = error;
    }
    completed_.push_back(id);
  }
  if (config_.log_transitions)
    std::cerr << "[queue] " << id << " "
              << (error.empty() ? "DONE" : ("FAILED: " + error)) << "\n";
}

struct HttpJobServer::Impl {
  httplib::Server http;
  std::thread thread;
};

namespace {

json job_view_to_json(const JobView& view) {
  json j;
  j["status"] = job_status_name(view.status);
  if (view.status == JobStatus::Done) {
    json counts = json::object();
    for (const auto& [key, n] : view.counts) counts[key] = n;
    j["counts"] = counts;
  }
  if (view.status == JobStatus::Failed) j["error"] = view.error;
  return j;
}

}  // namespace

HttpJobServer::HttpJobServer(ServiceConfig config)
    : service_(std::make_unique<JobService>(std::move(config))),
      impl_(std::make_unique<Impl>()) {
  auto& http = impl_->http;

  http.Post("/jobs", [this](const httplib::Request& req,
                            httplib::Response& res) {
    try {
      JobRequest request = job_request_from_json(req.body);
      res.set_content(json{{"id", service_->submit_job(request)}}.dump(),
                      "application/json");
    } catch (const ParseError& e) {
      res.status = 400;
      res.set_content(json{{"error", e.what()}, {"line", e.line}}.dump(),
                      "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", e.what()}, {"line", 0}}.dump(),
                      "application/json");
    }
  });

  http.Get(R"(/jobs/([\w-]+))", [this](const httplib::Request& req,
                                       httplib::Response& res) {
    try {
      JobView view = service_->get_job(req.matches[1]);
      res.set_content(job_view_to_json(view).dump(), "application/json");
    } catch (const NotFoundError& e) {
      res.status = 404;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    }
  });

  http.Post("/sessions", [this](const httplib::Request& req,
                                httplib::Response& res) {
    try {
      json j = json::parse(req.body);
      std::vector<JobRequest> requests;
      for (const auto& job : j.at("jobs"))
        requests.push_back(job_request_from_json(job.dump()));
      res.set_content(json{{"id", service_->submit_session(requests)}}.dump(),
                      "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", e.what()}, {"line", 0}}.dump(),
                      "application/json");
    }
  });

  http.Get(R"(/sessions/([\w-]+))", [this](const httplib::Request& req,
                                           httplib::Response& res) {
    try {
      auto jobs = service_->get_session(req.matches[1]);
      json out;
      out["jobs"] = json::array();
      for (const auto& [id, view] : jobs) {
        json j = job_view_to_json(view);
        j["id"] = id;
        out["jobs"].push_back(std::move(j));
      }
      res.set_content(out.dump(), "application/json");
    } catch (const NotFoundError& e) {
      res.status = 404;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    }
  });
}

HttpJobServer::~HttpJobServer() { stop(); }

int HttpJobServer::start(int port) {
  auto& http = impl_->http;
  int bound = port;
  if (port == 0) {
    bound = http.bind_to_any_port("127.0.0.1");
    if (bound < 0) throw Error("failed to bind a port");
  } else {
    if (!http.bind_to_port("0.0.0.0", port))
      throw Error("failed to bind port " + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  http.wait_until_ready();
  return bound;
}

void HttpJobServer::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
  if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace qcf
