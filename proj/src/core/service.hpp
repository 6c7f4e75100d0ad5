#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "scenario.hpp"

namespace hf {

struct ServiceOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8765; // 0 picks a free port
  double snapshot_rate = 30.0;
};

// WebSocket service at /sim. One simulation thread ticks at the fish tick rate
// in real time and broadcasts snapshots; the network runs on its own thread.
// The earliest connected client steers, the rest only observe.
class SimService {
public:
  SimService(Scenario scenario, ServiceOptions options);
  ~SimService();
  SimService(const SimService &) = delete;
  SimService &operator=(const SimService &) = delete;

  void start(); // throws Io if the address cannot be bound
  void stop();
  bool running() const;
  std::uint16_t port() const;

  struct Impl;

private:
  std::unique_ptr<Impl> impl_;
};

} // namespace hf
