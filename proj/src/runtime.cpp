#include "selfasm/runtime.hpp"

#include <algorithm>

#include <json.hpp>

#include "selfasm/error.hpp"

namespace selfasm::runtime {

std::string_view to_string(ContractStatus s) noexcept {
  return s == ContractStatus::InContract ? "InContract" : "OutContract";
}

std::string_view to_string(ContractCause c) noexcept {
  switch (c) {
    case ContractCause::ResponseTimeExceeded: return "ResponseTimeExceeded";
    case ContractCause::ThresholdExceeded: return "ThresholdExceeded";
    case ContractCause::Injected: return "Injected";
  }
  return "?";
}

ContractNotification check_contract(const ServiceDescriptor& service, Millis observed_response_ms,
                                    std::uint64_t inflight, Millis at, double tolerance) {
  if (!(observed_response_ms >= 0.0)) throw Error(Errc::InvalidArgument, "negative response time");
  if (!(tolerance >= 0.0)) throw Error(Errc::InvalidArgument, "negative tolerance");
  ContractNotification n{service.id, at, ContractStatus::InContract, std::nullopt};
  if (inflight > service.threshold) {
    n.status = ContractStatus::OutContract;
    n.cause = ContractCause::ThresholdExceeded;
  } else if (observed_response_ms > service.qos_ms * (1.0 + tolerance)) {
    n.status = ContractStatus::OutContract;
    n.cause = ContractCause::ResponseTimeExceeded;
  }
  return n;
}

std::string event_kind_name(const ScenarioEvent& e) {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, ServiceAppears>) return "service_appears";
        else if constexpr (std::is_same_v<T, ServiceDisappears>) return "service_disappears";
        else if constexpr (std::is_same_v<T, LinkDegrades>) return "link_degrades";
        else return "inject_out_contract";
      },
      e.kind);
}

std::string Timeline::to_jsonl() const {
  std::string out;
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["t"] = e.t;
    j["trigger"] = e.trigger.str();
    j["feasible"] = e.feasible();
    j["n_nodes"] = e.result ? e.result->assembly.nodes.size() : 0;
    j["n_edges"] = e.result ? e.result->assembly.edges.size() : 0;
    j["combinations_tested"] = e.combinations_tested;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::shared_ptr<const AssemblyResult> CommittedAssembly::load() const {
  std::lock_guard lock(mu_);
  return current_;
}

void CommittedAssembly::store(std::shared_ptr<const AssemblyResult> next) {
  std::lock_guard lock(mu_);
  current_ = std::move(next);
}

namespace {

class Loop {
 public:
  Loop(netsim::Simulator& net, const ApplicationTemplate& tmpl, const RuntimeOptions& options,
       CommittedAssembly& committed)
      : net_(net), tmpl_(tmpl), options_(options), committed_(committed) {}

  void reassemble(Trigger trigger, const ServiceId* exclude) {
    TimelineEntry entry;
    entry.t = net_.now_ms();
    entry.trigger = std::move(trigger);

    auto live = net_.live_services();
    const auto types = body_types(tmpl_);
    std::erase_if(live, [&](const ServiceDescriptor& d) {
      return (exclude && d.id == *exclude) || !types.contains(d.type);
    });
    try {
      auto outcome = assemble(live, tmpl_, net_, options_.assemble);
      entry.status = outcome.status;
      entry.combinations_tested = outcome.stats.combinations_tested;
      entry.result = std::move(outcome.result);
    } catch (const Error& e) {
      // Unsatisfiable live sets are a state to wait out, not a failure.
      if (e.code() != Errc::NoStartingService && e.code() != Errc::InsufficientServices &&
          e.code() != Errc::BudgetExceeded)
        throw;
      entry.status = e.code() == Errc::BudgetExceeded ? AssemblyStatus::BudgetExceeded : AssemblyStatus::Infeasible;
      entry.reason = e.what();
    }

    if (entry.result) {
      committed_.store(std::make_shared<const AssemblyResult>(*entry.result));
      for (const auto& [id, load] : entry.result->per_service_load) {
        const auto desc = std::ranges::find(live, id, &ServiceDescriptor::id);
        timeline_.notifications.push_back(
            check_contract(*desc, desc->qos_ms, load, entry.t, options_.response_tolerance));
      }
    } else {
      committed_.store(nullptr);
    }
    timeline_.entries.push_back(std::move(entry));
  }

  void apply(const ScenarioEvent& event) {
    const Millis t = std::max(event.at, net_.now_ms());
    net_.advance(t);
    const auto current = committed_.load();
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, ServiceAppears>) {
            net_.announce(netsim::DiscoveryRecord{k.service, t, {}}, t);
            reassemble({"service_appears", k.service.id.str()}, nullptr);
          } else if constexpr (std::is_same_v<T, ServiceDisappears>) {
            net_.withdraw(k.id, t);
            if (current && current->assembly.contains(k.id)) reassemble({"service_disappears", k.id.str()}, nullptr);
          } else if constexpr (std::is_same_v<T, LinkDegrades>) {
            net_.override_link(k.from, k.to, k.new_ms);
            if (current && current->assembly.contains(Binding{k.from, k.to}))
              reassemble({"link_degrades", k.from.str() + "->" + k.to.str()}, nullptr);
          } else {
            if (!net_.is_live(k.id)) throw Error(Errc::PeerUnknown, k.id.str());
            timeline_.notifications.push_back(
                ContractNotification{k.id, t, ContractStatus::OutContract, ContractCause::Injected});
            if (current && current->assembly.contains(k.id)) reassemble({"out_contract", k.id.str()}, &k.id);
          }
        },
        event.kind);
  }

  Timeline take() { return std::move(timeline_); }

 private:
  netsim::Simulator& net_;
  const ApplicationTemplate& tmpl_;
  const RuntimeOptions& options_;
  CommittedAssembly& committed_;
  Timeline timeline_;
};

}  // namespace

Timeline run_scenario(netsim::Simulator& net, std::span<const ServiceDescriptor> initial,
                      const ApplicationTemplate& tmpl, std::span<const ScenarioEvent> events,
                      const RuntimeOptions& options, CommittedAssembly* committed) {
  for (std::size_t i = 1; i < events.size(); ++i)
    if (events[i].at < events[i - 1].at) throw Error(Errc::InvalidArgument, "events are not sorted by time");

  CommittedAssembly local;
  Loop loop(net, tmpl, options, committed ? *committed : local);
  const Millis t0 = net.now_ms();
  for (const auto& s : initial) net.announce(netsim::DiscoveryRecord{s, t0, {}}, t0);
  loop.reassemble({"initial", ""}, nullptr);
  for (const auto& e : events) loop.apply(e);
  return loop.take();
}

std::map<ServiceId, std::uint32_t> inflight_load(const AssemblyResult& assembly) {
  std::map<ServiceId, std::uint32_t> load;
  for (const auto& n : assembly.assembly.nodes) load[n] = 0;
  for (const auto& e : assembly.assembly.edges) ++load[e.to];
  return load;
}

}  // namespace selfasm::runtime
