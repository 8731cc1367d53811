#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "selfasm/model.hpp"

namespace selfasm::oracle {

// Brute-force reference used to cross-check the assembler. Nothing here
// shares code with the assembler's enumeration or search.

struct OracleReport {
  std::vector<AssemblyGraph> feasible_assemblies;
  std::optional<Millis> min_max_F;
  std::map<ServiceId, std::size_t> count_candidates_per_start;
};

// Enumerates every per-start subgraph and every combination of them. The
// bindings available are the keys of `mqos`.
OracleReport exhaustive_assemblies(std::span<const ServiceDescriptor> services,
                                   const ApplicationTemplate& tmpl, const QoSMatrix& mqos,
                                   std::size_t max_services = 14);

// Explicit enumeration of all start-to-sink paths.
Millis exhaustive_F(const AssemblyGraph& subgraph, const ServiceId& start,
                    const ServiceCatalog& services, const QoSMatrix& mqos);

// Pascal's triangle, rows 0..n_max, built by addition. n_max <= 60.
std::vector<std::vector<std::uint64_t>> binomial_table(unsigned n_max);

// Independent check of a finished assembly: every starting service present,
// every reached node binds exactly its required successors (all available ones
// under ALL), and every node's distinct inbound bindings stay within threshold.
// Returns a description of the first problem found, or nothing.
std::optional<std::string> check_atsf(const AssemblyGraph& assembly,
                                      std::span<const ServiceDescriptor> services,
                                      const ApplicationTemplate& tmpl, const QoSMatrix& mqos);

}  // namespace selfasm::oracle
