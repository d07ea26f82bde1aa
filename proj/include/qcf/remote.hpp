#pragma once

#include <string>
#include <vector>

#include "qcf/accel.hpp"

namespace qcf {

// Accelerator backed by a remote job server. Kernels are serialized to
// assembly, submitted over HTTP, and polled until terminal.
class RemoteAccelerator : public Accelerator {
 public:
  explicit RemoteAccelerator(std::string base_url);

  AcceleratorBuffer execute(const Kernel& kernel, uint64_t shots,
                            uint64_t seed) override;
  // Submits the whole batch as one server session (one queue wait).
  std::vector<AcceleratorBuffer> execute_batch(const std::vector<Kernel>& kernels,
                                               uint64_t shots,
                                               uint64_t seed) override;
  std::string name() const override { return "remote:" + base_url_; }

  int max_transport_retries = 5;
  int poll_initial_ms = 10;
  int poll_max_ms = 500;

 private:
  std::string base_url_;
  std::string host_;
  int port_ = 80;
};

}  // namespace qcf
