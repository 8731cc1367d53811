#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "selfasm/assembler.hpp"
#include "selfasm/scenario.hpp"

namespace selfasm::tools {

// digraph with one node per assembled service, labelled "id\ntype qos=<ms>
// thr=<k>", and one edge per binding labelled with its link time.
std::string to_dot(const AssembleOutcome& outcome, std::span<const ServiceDescriptor> services);

// {nodes, edges, chosen, loads, combinations_tested, total_cost_per_start}
std::string to_json(const AssembleOutcome& outcome, std::span<const ServiceDescriptor> services);

struct BenchRow {
  std::string layout;
  std::uint64_t n = 0;
  std::string k;
  std::uint64_t candidates = 0;
  double wall_ms = 0.0;
  std::uint64_t mem_estimate = 0;
  AssemblyStatus status = AssemblyStatus::Infeasible;
};

BenchRow run_bench(const std::string& layout, std::uint64_t n, const std::string& k,
                   const scenario::Scenario& s, const AssembleOptions& options);

std::string bench_csv_header();
std::string to_csv(const BenchRow& row);

struct VerifyReport {
  std::uint32_t instances = 0;
  std::uint32_t feasible = 0;
  std::uint32_t infeasible = 0;
  std::uint32_t mismatches = 0;
  std::vector<std::string> details;
};

// Oracle agreement on one scenario: feasibility must match, and a returned
// assembly must be among the oracle's feasible ones.
VerifyReport verify_scenario(const scenario::Scenario& s, const AssembleOptions& options = {});

VerifyReport verify_random(std::uint32_t count, std::uint64_t seed, std::uint32_t max_services,
                           const AssembleOptions& options = {});

}  // namespace selfasm::tools
