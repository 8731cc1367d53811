#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "selfasm/model.hpp"
#include "selfasm/netsim.hpp"

namespace selfasm {

// The template-compliant graph with every binding allowed, plus the link
// times measured while building it.
struct AtCompliantGraph {
  AssemblyGraph graph;
  QoSMatrix mqos;
};

struct CandidateSubgraph {
  ServiceId start;
  AssemblyGraph graph;
  Millis cost = 0.0;
  std::size_t rank = 0;
};

struct AssemblyResult {
  AssemblyGraph assembly;
  std::map<ServiceId, CandidateSubgraph> chosen;
  std::uint64_t combinations_tested = 0;
  std::map<ServiceId, std::uint32_t> per_service_load;
};

enum class AssemblyStatus { Feasible, Infeasible, BudgetExceeded };

std::string_view to_string(AssemblyStatus s) noexcept;

struct SearchOutcome {
  AssemblyStatus status = AssemblyStatus::Infeasible;
  std::optional<AssemblyResult> result;
  std::uint64_t combinations_tested = 0;
};

struct AssembleOptions {
  // Cap on rejected combinations before the search gives up.
  std::uint64_t combination_budget = 10'000'000;
  // Cap on candidate subgraphs held in memory for one start.
  std::uint64_t candidate_budget = 20'000'000;
  bool parallel = false;
};

// Floods requests along the template from every starting service through the
// simulator; each receiver records the transfer time of the request it got.
// `services` restricts who takes part; all of them must be live in `net`.
AtCompliantGraph build_at_compliant(std::span<const ServiceDescriptor> services,
                                    const ApplicationTemplate& tmpl, netsim::Simulator& net);

// Every template-shaped subgraph rooted at `start`, sorted by cost and then by
// the lexicographic order of the sorted edge list.
std::vector<CandidateSubgraph> enumerate_subgraphs(const AtCompliantGraph& g_at,
                                                   std::span<const ServiceDescriptor> services,
                                                   const ApplicationTemplate& tmpl,
                                                   const ServiceId& start,
                                                   const AssembleOptions& options = {});

// First combination, one candidate per start in odometer order over the given
// lists, whose union respects every threshold and every structural constraint.
SearchOutcome find_atsf_assembly(const std::map<ServiceId, std::vector<CandidateSubgraph>>& per_start,
                                 std::span<const ServiceDescriptor> services,
                                 const ApplicationTemplate& tmpl,
                                 const AssembleOptions& options = {});

struct AssembleStats {
  std::size_t n_services = 0;
  std::uint64_t candidate_count = 0;
  std::uint64_t peak_candidate_count = 0;
  std::uint64_t mem_estimate_bytes = 0;
  std::uint64_t combinations_tested = 0;
};

struct AssembleOutcome {
  AssemblyStatus status = AssemblyStatus::Infeasible;
  std::optional<AssemblyResult> result;
  AtCompliantGraph g_at;
  // Sorted candidate costs per start, for callers that want to post-optimise.
  std::map<ServiceId, std::vector<Millis>> candidate_costs;
  AssembleStats stats;
};

// Runs the three stages end to end on the given live set.
AssembleOutcome assemble(std::span<const ServiceDescriptor> services, const ApplicationTemplate& tmpl,
                         netsim::Simulator& net, const AssembleOptions& options = {});

// n choose k; ALL yields 1. Throws DomainError when k > n or on overflow.
std::uint64_t count_combinations(std::uint64_t n, const Constraint& k);

}  // namespace selfasm
