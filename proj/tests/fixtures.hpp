#pragma once

#include <string>
#include <vector>

#include "selfasm/assembler.hpp"
#include "selfasm/netsim.hpp"
#include "selfasm/scenario.hpp"

namespace fixtures {

using namespace selfasm;

inline ServiceDescriptor svc(const std::string& id, const std::string& type, double qos, std::uint32_t thr) {
  return ServiceDescriptor{ServiceId{id}, ServiceTypeId{type}, qos, thr};
}

// Three tA starts, three tB, one tC, with the published QoS and thresholds.
inline std::vector<ServiceDescriptor> seven_services() {
  return {svc("A1", "tA", 1, 1), svc("A2", "tA", 1, 1), svc("A3", "tA", 1, 1), svc("B1", "tB", 2, 2),
          svc("B2", "tB", 3, 3), svc("B3", "tB", 4, 1), svc("C1", "tC", 5, 3)};
}

inline ApplicationTemplate chain_template(Constraint first = Constraint::choose(2),
                                          Constraint second = Constraint::choose(1)) {
  return ApplicationTemplate{{{ServiceTypeId{"tA"}, ServiceTypeId{"tB"}}, {ServiceTypeId{"tB"}, ServiceTypeId{"tC"}}},
                             {first, second}};
}

inline netsim::Simulator live(std::span<const ServiceDescriptor> services,
                              netsim::LatencySpec links = netsim::UniformLatency{0.0}) {
  netsim::Simulator net{netsim::LatencyModel(std::move(links)), netsim::SimulatorConfig{0.0, false}};
  scenario::announce_all(net, services);
  return net;
}

inline AssembleOutcome assemble_seven(std::vector<ServiceDescriptor> services = seven_services(),
                                      netsim::LatencySpec links = netsim::UniformLatency{0.0}) {
  auto net = live(services, std::move(links));
  return assemble(services, chain_template(), net);
}

inline Binding edge(const std::string& a, const std::string& b) { return Binding{ServiceId{a}, ServiceId{b}}; }

}  // namespace fixtures
