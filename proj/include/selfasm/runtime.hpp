#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "selfasm/assembler.hpp"
#include "selfasm/netsim.hpp"

namespace selfasm::runtime {

enum class ContractStatus { InContract, OutContract };
enum class ContractCause { ResponseTimeExceeded, ThresholdExceeded, Injected };

std::string_view to_string(ContractStatus s) noexcept;
std::string_view to_string(ContractCause c) noexcept;

struct ContractNotification {
  ServiceId service_id;
  Millis at = 0.0;
  ContractStatus status = ContractStatus::InContract;
  std::optional<ContractCause> cause;  // set iff OutContract
};

ContractNotification check_contract(const ServiceDescriptor& service, Millis observed_response_ms,
                                    std::uint64_t inflight, Millis at = 0.0, double tolerance = 0.0);

struct ServiceAppears {
  ServiceDescriptor service;
};
struct ServiceDisappears {
  ServiceId id;
};
struct LinkDegrades {
  ServiceId from;
  ServiceId to;
  Millis new_ms = 0.0;
};
struct InjectOutContract {
  ServiceId id;
};

struct ScenarioEvent {
  Millis at = 0.0;
  std::variant<ServiceAppears, ServiceDisappears, LinkDegrades, InjectOutContract> kind;
};

std::string event_kind_name(const ScenarioEvent& e);

struct Trigger {
  std::string kind;     // "initial", "service_appears", ...
  std::string subject;  // service id or "from->to"; empty for the initial run

  std::string str() const { return subject.empty() ? kind : kind + ":" + subject; }
};

struct TimelineEntry {
  Millis t = 0.0;
  Trigger trigger;
  AssemblyStatus status = AssemblyStatus::Infeasible;
  std::optional<AssemblyResult> result;
  std::uint64_t combinations_tested = 0;
  // Why no assembly could be built, when the failure was structural.
  std::string reason;

  bool feasible() const noexcept { return status == AssemblyStatus::Feasible; }
};

struct Timeline {
  std::vector<TimelineEntry> entries;
  std::vector<ContractNotification> notifications;

  std::string to_jsonl() const;
};

// Holds the committed assembly. Readers get either the previous or the new
// snapshot, never a partial one.
class CommittedAssembly {
 public:
  std::shared_ptr<const AssemblyResult> load() const;
  void store(std::shared_ptr<const AssemblyResult> next);

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const AssemblyResult> current_;
};

struct RuntimeOptions {
  AssembleOptions assemble;
  double response_tolerance = 0.0;
};

// Announces `initial` at the simulator's current time, assembles, then replays
// `events` and re-assembles whenever one can invalidate or improve the
// committed assembly.
Timeline run_scenario(netsim::Simulator& net, std::span<const ServiceDescriptor> initial,
                      const ApplicationTemplate& tmpl, std::span<const ScenarioEvent> events,
                      const RuntimeOptions& options = {}, CommittedAssembly* committed = nullptr);

// Distinct inbound bindings per assembled service.
std::map<ServiceId, std::uint32_t> inflight_load(const AssemblyResult& assembly);

}  // namespace selfasm::runtime
