#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "selfasm/assembler.hpp"
#include "selfasm/model.hpp"
#include "selfasm/netsim.hpp"
#include "selfasm/runtime.hpp"

namespace selfasm::scenario {

struct Scenario {
  std::vector<ServiceDescriptor> services;
  ApplicationTemplate tmpl;
  netsim::LatencySpec links = netsim::UniformLatency{0.0};
  std::vector<runtime::ScenarioEvent> events;
  Millis announce_latency_ms = 0.0;
};

// Strict: unknown keys, wrong types and invalid values raise ParseError.
Scenario parse_json(const std::string& text);
Scenario load_file(const std::string& path);

// Keys are emitted sorted, so equal scenarios serialise to equal bytes.
std::string to_json(const Scenario& s);

// Constraint rule for generated layouts.
struct KRule {
  enum class Kind { Fixed, All, Half };
  Kind kind = Kind::Fixed;
  std::uint32_t k = 1;

  static KRule fixed(std::uint32_t k) { return {Kind::Fixed, k}; }
  static KRule all() { return {Kind::All, 0}; }
  static KRule half() { return {Kind::Half, 0}; }

  // Constraint for a layer edge whose target layer has `width` services.
  Constraint resolve(std::uint32_t width, bool clamp) const;
  std::string str() const;
};

// Throws InvalidArgument on "0", negative or unparseable text.
KRule parse_krule(const std::string& text);

// One start of type tA bound to n services of type tB.
Scenario generate_one_layer(std::uint32_t n, KRule k, std::uint64_t seed);

// Layers of width top_width, top_width-1, ..., 1, one type per layer, adjacent
// layers chained. Fixed k is clamped to the next layer's width.
Scenario generate_pyramidal(std::uint32_t top_width, KRule k, std::uint64_t seed);

// 10 sensors, 9 gateways, 5 hospitals, 2 rescue teams.
Scenario generate_medical(std::uint64_t seed);

// Small random instance for oracle cross-checks: 2 or 3 layers, at most
// max_services services, mixed k / ALL constraints.
Scenario generate_random_small(std::uint64_t seed, std::uint32_t max_services);

netsim::Simulator make_simulator(const Scenario& s, bool record_trace = true);

// Announces every service at `at`.
void announce_all(netsim::Simulator& net, std::span<const ServiceDescriptor> services, Millis at = 0.0);

}  // namespace selfasm::scenario
