#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qcf/accel.hpp"

namespace qcf {

struct JobRequest {
  std::string program;  // assembly text
  std::string kernel;   // entry kernel name
  uint64_t shots = 1024;
  uint64_t seed = 0;
  std::optional<NoiseModel> noise;
};

enum class JobStatus { Queued, Running, Done, Failed };

const char* job_status_name(JobStatus status);

struct JobView {
  JobStatus status = JobStatus::Queued;
  std::map<std::string, uint64_t> counts;
  std::string error;
  std::chrono::steady_clock::time_point enqueued;
  std::chrono::steady_clock::time_point finished;
};

struct ServiceConfig {
  int latency_ms = 0;          // artificial queue latency per queue entry
  bool exact_backend = false;  // counts from the exact distribution
  std::optional<NoiseModel> default_noise;
  bool log_transitions = false;
};

// FIFO job queue with a single execution worker. A session is one queue
// entry whose jobs run back-to-back, so the queue latency is paid once.
class JobService {
 public:
  explicit JobService(ServiceConfig config = {});
  ~JobService();
  JobService(const JobService&) = delete;
  JobService& operator=(const JobService&) = delete;

  // Validates the program synchronously; throws ParseError/ValidationError.
  std::string submit_job(const JobRequest& request);
  // Session members are validated lazily; a bad member fails alone.
  std::string submit_session(const std::vector<JobRequest>& requests);

  JobView get_job(const std::string& id) const;  // throws NotFoundError
  std::vector<std::pair<std::string, JobView>> get_session(
      const std::string& id) const;

  // Job ids in completion order, for queue-discipline checks.
  std::vector<std::string> completion_order() const;
  void wait_idle();

 private:
  struct Job {
    JobRequest request;
    JobView view;
  };
  struct QueueEntry {
    std::vector<std::string> job_ids;
  };

  std::string enqueue_locked(const JobRequest& request);
  void worker_loop();
  void run_job(const std::string& id);

  ServiceConfig config_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<QueueEntry> queue_;
  std::map<std::string, Job> jobs_;
  std::map<std::string, std::vector<std::string>> sessions_;
  std::vector<std::string> completed_;
  uint64_t next_id_ = 1;
  bool busy_ = false;
  bool stopping_ = false;
  std::thread worker_;
};

// HTTP/JSON front end:
//   POST /jobs          -> {"id": str} | 400 {"error": str, "line": int}
//   GET  /jobs/{id}     -> {"status", "counts"?, "error"?} | 404
//   POST /sessions      -> {"id": str}
//   GET  /sessions/{id} -> {"jobs": [{"id", "status", ...}]} | 404
class HttpJobServer {
 public:
  explicit HttpJobServer(ServiceConfig config = {});
  ~HttpJobServer();

  // Binds and serves on a background thread. port 0 picks a free port.
  // Returns the bound port.
  int start(int port);
  void stop();
  JobService& service() { return *service_; }

 private:
  struct Impl;
  std::unique_ptr<JobService> service_;
  std::unique_ptr<Impl> impl_;
};

// JSON encodings shared by the server and the remote client.
std::string job_request_to_json(const JobRequest& request);
JobRequest job_request_from_json(const std::string& body);

}  // namespace qcf
