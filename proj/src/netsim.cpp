#include "selfasm/netsim.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "selfasm/error.hpp"

namespace selfasm::netsim {

SimTime from_millis(Millis ms) {
  if (!std::isfinite(ms)) throw Error(Errc::InvalidArgument, "non-finite time");
  return SimTime{std::llround(ms * 1000.0)};
}

Millis to_millis(SimTime t) { return static_cast<double>(t.count()) / 1000.0; }

namespace {

SimTime non_negative(Millis ms, const char* what) {
  if (!(ms >= 0.0)) throw Error(Errc::InvalidArgument, std::string("negative ") + what);
  return from_millis(ms);
}

}  // namespace

LatencyModel::LatencyModel(LatencySpec spec) : spec_(std::move(spec)) {
  std::visit(
      [this](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, UniformLatency>) {
          non_negative(s.base_ms, "uniform latency");
        } else if constexpr (std::is_same_v<T, MatrixLatency>) {
          for (const auto& [pair, ms] : s.entries) non_negative(ms, "matrix latency");
          if (s.default_ms) non_negative(*s.default_ms, "default latency");
        } else {
          non_negative(s.base_ms, "seeded base latency");
          non_negative(s.jitter_ms, "seeded jitter");
          rng_.seed(s.seed);
        }
      },
      spec_);
}

SimTime LatencyModel::sample(const ServiceId& from, const ServiceId& to) {
  return std::visit(
      [&](const auto& s) -> SimTime {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, UniformLatency>) {
          return from_millis(s.base_ms);
        } else if constexpr (std::is_same_v<T, MatrixLatency>) {
          if (auto it = s.entries.find(Binding{from, to}); it != s.entries.end()) return from_millis(it->second);
          if (s.default_ms) return from_millis(*s.default_ms);
          throw Error(Errc::InvalidArgument, "no latency configured for " + from.str() + "->" + to.str());
        } else {
          const auto base = from_millis(s.base_ms);
          const auto jitter = from_millis(s.jitter_ms);
          // 53 high bits -> [0,1), mapped onto [-1,1].
          const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
          const SimTime::rep offset = std::llround((2.0 * u - 1.0) * static_cast<double>(jitter.count()));
          const SimTime::rep t =
              std::clamp(base.count() + offset, base.count() - jitter.count(), base.count() + jitter.count());
          return SimTime{std::max<SimTime::rep>(0, t)};
        }
      },
      spec_);
}

std::string_view to_string(MessageKind k) noexcept {
  switch (k) {
    case MessageKind::Probe: return "probe";
    case MessageKind::ProbeReply: return "probe_reply";
    case MessageKind::Request: return "request";
    case MessageKind::Response: return "response";
    case MessageKind::Announce: return "announce";
    case MessageKind::Withdraw: return "withdraw";
  }
  return "?";
}

Simulator::Simulator(LatencyModel latency, SimulatorConfig config)
    : latency_(std::move(latency)), config_(config) {
  non_negative(config_.announce_latency_ms, "announce latency");
}

void Simulator::log(SimTime t, std::string_view kind, const std::string& from, const std::string& to,
                    const std::string& detail) {
  if (!config_.record_trace) return;
  nlohmann::ordered_json j;
  j["t"] = to_millis(t);
  j["kind"] = kind;
  j["from"] = from;
  j["to"] = to;
  j["detail"] = detail;
  trace_.push_back(j.dump());
}

void Simulator::announce(DiscoveryRecord record, Millis at) {
  const ServiceId id = record.service.id;
  if (id.empty()) throw Error(Errc::InvalidArgument, "record with empty id");
  if (registry_.contains(id)) throw Error(Errc::DuplicateId, id.str());
  for (const auto& [key, value] : record.attributes)
    if (key.empty()) throw Error(Errc::InvalidArgument, "empty attribute key on " + id.str());
  const auto t = from_millis(at);
  record.announced_at = at;
  log(t, "announce", id.str(), "", record.service.type.str());
  registry_.emplace(id, Entry{std::move(record), t + from_millis(config_.announce_latency_ms)});
}

void Simulator::withdraw(const ServiceId& id, Millis at) {
  if (registry_.erase(id) == 0) throw Error(Errc::PeerUnknown, id.str());
  log(from_millis(at), "withdraw", id.str(), "", "");
}

std::vector<ServiceDescriptor> Simulator::live_services() const {
  std::vector<ServiceDescriptor> out;
  out.reserve(registry_.size());
  for (const auto& [id, entry] : registry_) out.push_back(entry.record.service);
  return out;
}

void Simulator::set_partitions(std::vector<std::set<ServiceId>> groups) {
  partition_of_.clear();
  partitioned_ = !groups.empty();
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (const auto& id : groups[g]) partition_of_[id] = g + 1;  // 0 is the remainder group
}

bool Simulator::reachable(const ServiceId& a, const ServiceId& b) const {
  if (!partitioned_) return true;
  auto group = [this](const ServiceId& id) {
    auto it = partition_of_.find(id);
    return it == partition_of_.end() ? std::size_t{0} : it->second;
  };
  return group(a) == group(b);
}

std::vector<DiscoveryRecord> Simulator::surrounding_services(const ServiceId& observer, Millis at) const {
  if (!registry_.contains(observer)) throw Error(Errc::PeerUnknown, observer.str());
  const auto t = from_millis(at);
  std::vector<DiscoveryRecord> out;
  for (const auto& [id, entry] : registry_) {
    if (id == observer || entry.visible_at > t || !reachable(observer, id)) continue;
    out.push_back(entry.record);
  }
  return out;
}

void Simulator::override_link(const ServiceId& from, const ServiceId& to, Millis ms) {
  overrides_[Binding{from, to}] = non_negative(ms, "link latency");
}

SimTime Simulator::link_latency(const ServiceId& from, const ServiceId& to) {
  if (auto it = overrides_.find(Binding{from, to}); it != overrides_.end()) return it->second;
  return latency_.sample(from, to);
}

Millis Simulator::measure_link(const ServiceId& from, const ServiceId& to, Millis at) {
  if (!registry_.contains(from)) throw Error(Errc::PeerUnknown, from.str());
  if (!registry_.contains(to)) throw Error(Errc::PeerUnknown, to.str());
  TimestampedMessage reply{from, to, MessageKind::ProbeReply, from_millis(at), {}, {}};
  reply.t_received = reply.t_sent + link_latency(from, to);
  const Millis measured = reply.transfer_ms();
  log(reply.t_received, "measure", from.str(), to.str(),
      "t3-t2_us=" + std::to_string((reply.t_received - reply.t_sent).count()));
  return measured;
}

void Simulator::send(const ServiceId& from, const ServiceId& to, MessageKind kind, std::string payload) {
  if (!registry_.contains(from)) throw Error(Errc::PeerUnknown, from.str());
  TimestampedMessage msg{from, to, kind, clock_, {}, std::move(payload)};
  msg.t_received = clock_ + link_latency(from, to);
  log(clock_, std::string("send_") + std::string(to_string(kind)), from.str(), to.str(), msg.payload);
  queue_.push(Pending{std::move(msg), next_seq_++});
}

std::optional<TimestampedMessage> Simulator::deliver_next() { return deliver_next_until(SimTime::max()); }

std::optional<TimestampedMessage> Simulator::deliver_next_until(SimTime limit) {
  while (!queue_.empty() && queue_.top().msg.t_received <= limit) {
    auto msg = queue_.top().msg;
    queue_.pop();
    clock_ = std::max(clock_, msg.t_received);
    if (!registry_.contains(msg.to)) {
      log(msg.t_received, "drop", msg.from.str(), msg.to.str(), std::string(to_string(msg.kind)));
      continue;
    }
    log(msg.t_received, std::string("deliver_") + std::string(to_string(msg.kind)), msg.from.str(), msg.to.str(),
        msg.payload);
    return msg;
  }
  return std::nullopt;
}

std::vector<TimestampedMessage> Simulator::advance(Millis until) {
  const auto limit = from_millis(until);
  if (limit < clock_) throw Error(Errc::InvalidArgument, "advance into the past");
  std::vector<TimestampedMessage> delivered;
  while (auto m = deliver_next_until(limit)) delivered.push_back(std::move(*m));
  clock_ = limit;
  return delivered;
}

std::string Simulator::trace_jsonl() const {
  std::string out;
  for (const auto& line : trace_) {
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace selfasm::netsim
