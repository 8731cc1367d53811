#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "selfasm/model.hpp"

namespace selfasm::netsim {

// Simulation time has one-microsecond resolution. Keeping the clock integral
// makes t3 - t2 reproduce a configured latency bit-for-bit.
using SimTime = std::chrono::microseconds;

SimTime from_millis(Millis ms);
Millis to_millis(SimTime t);

struct DiscoveryRecord {
  ServiceDescriptor service;
  Millis announced_at = 0.0;
  std::map<std::string, std::string> attributes;
};

struct UniformLatency {
  Millis base_ms = 0.0;
};

struct MatrixLatency {
  std::map<Binding, Millis> entries;
  // Used for pairs missing from `entries`; without it such a pair is an error.
  std::optional<Millis> default_ms;
};

struct SeededLatency {
  Millis base_ms = 0.0;
  Millis jitter_ms = 0.0;
  std::uint64_t seed = 0;
};

using LatencySpec = std::variant<UniformLatency, MatrixLatency, SeededLatency>;

class LatencyModel {
 public:
  explicit LatencyModel(LatencySpec spec);

  // Seeded models draw from their own stream, so the value depends on call
  // order as well as on the seed.
  SimTime sample(const ServiceId& from, const ServiceId& to);

  const LatencySpec& spec() const noexcept { return spec_; }

 private:
  LatencySpec spec_;
  std::mt19937_64 rng_;
};

enum class MessageKind { Probe, ProbeReply, Request, Response, Announce, Withdraw };

std::string_view to_string(MessageKind k) noexcept;

struct TimestampedMessage {
  ServiceId from;
  ServiceId to;
  MessageKind kind = MessageKind::Request;
  SimTime t_sent{0};      // stamped by the sender's output monitor
  SimTime t_received{0};  // stamped by the receiver's input monitor
  std::string payload;

  Millis transfer_ms() const { return to_millis(t_received - t_sent); }
};

struct SimulatorConfig {
  Millis announce_latency_ms = 0.0;
  bool record_trace = true;
};

class Simulator {
 public:
  explicit Simulator(LatencyModel latency, SimulatorConfig config = {});

  SimTime now() const noexcept { return clock_; }
  Millis now_ms() const { return to_millis(clock_); }

  // Makes the record visible to other peers at at + announce latency.
  void announce(DiscoveryRecord record, Millis at);
  void withdraw(const ServiceId& id, Millis at);

  bool is_live(const ServiceId& id) const { return registry_.contains(id); }
  std::vector<ServiceDescriptor> live_services() const;

  // Records visible from `observer` at `at`, excluding the observer, sorted by id.
  std::vector<DiscoveryRecord> surrounding_services(const ServiceId& observer, Millis at) const;

  // Peers listed together can see each other; peers not listed in any group
  // share one implicit remainder group. An empty list removes partitioning.
  void set_partitions(std::vector<std::set<ServiceId>> groups);

  // Replaces whatever the latency model says for this directed pair.
  void override_link(const ServiceId& from, const ServiceId& to, Millis ms);

  // Stamps a response leaving `from` at `at` and arriving at `to`, and returns
  // t3 - t2 in milliseconds.
  Millis measure_link(const ServiceId& from, const ServiceId& to, Millis at);

  // Queues a message leaving `from` now.
  void send(const ServiceId& from, const ServiceId& to, MessageKind kind, std::string payload = {});

  // Delivers the next queued message, moving the clock to its arrival time.
  // Messages addressed to withdrawn peers are dropped and skipped.
  std::optional<TimestampedMessage> deliver_next();

  // Delivers everything due by `until` in (arrival, insertion) order and sets
  // the clock to `until`. Throws InvalidArgument when `until` is in the past.
  std::vector<TimestampedMessage> advance(Millis until);

  bool idle() const noexcept { return queue_.empty(); }

  const std::vector<std::string>& trace() const noexcept { return trace_; }
  std::string trace_jsonl() const;

 private:
  struct Pending {
    TimestampedMessage msg;
    std::uint64_t seq;
  };
  struct Later {
    bool operator()(const Pending& a, const Pending& b) const {
      if (a.msg.t_received != b.msg.t_received) return a.msg.t_received > b.msg.t_received;
      return a.seq > b.seq;
    }
  };
  struct Entry {
    DiscoveryRecord record;
    SimTime visible_at;
  };

  std::optional<TimestampedMessage> deliver_next_until(SimTime limit);
  SimTime link_latency(const ServiceId& from, const ServiceId& to);
  bool reachable(const ServiceId& a, const ServiceId& b) const;
  void log(SimTime t, std::string_view kind, const std::string& from, const std::string& to,
           const std::string& detail);

  LatencyModel latency_;
  SimulatorConfig config_;
  SimTime clock_{0};
  std::uint64_t next_seq_ = 0;
  std::map<ServiceId, Entry> registry_;
  std::map<Binding, SimTime> overrides_;
  std::map<ServiceId, std::size_t> partition_of_;
  bool partitioned_ = false;
  std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
  std::vector<std::string> trace_;
};

}  // namespace selfasm::netsim
