#pragma once

// Dense integer view of one assembly problem. Services are numbered in id
// order and edges in (from, to) order, so comparing index sequences is the
// same as comparing id sequences.

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "selfasm/model.hpp"

namespace selfasm::detail {

struct IndexedEdge {
  std::uint32_t from;
  std::uint32_t to;
  Millis link_ms;
  std::uint32_t choice_point;
};

// One (node, body edge) pair: the node must bind `limit` of `edges`.
struct ChoicePoint {
  std::uint32_t node;
  std::uint32_t body_index;
  std::uint32_t to_type;
  Constraint constraint;
  std::vector<std::uint32_t> edges;  // ascending, so ascending by target id
};

struct Instance {
  std::vector<ServiceId> ids;
  std::vector<std::uint32_t> type_index;  // types are numbered in topological order
  std::vector<ServiceTypeId> type_names;
  std::vector<Millis> qos;
  std::vector<std::uint32_t> threshold;
  std::vector<IndexedEdge> edges;
  std::vector<ChoicePoint> choice_points;
  std::vector<std::vector<std::uint32_t>> node_choice_points;  // in body order
  std::map<ServiceId, std::uint32_t> index_of;

  // `links` supplies the available bindings and their link times. Every
  // service type must appear in the body; every binding must match a body
  // edge and join two of `services`.
  static Instance build(std::span<const ServiceDescriptor> services, const ApplicationTemplate& tmpl,
                        const std::map<Binding, Millis>& links);

  std::uint32_t index(const ServiceId& id) const;
  std::uint32_t limit(const ChoicePoint& cp) const {
    return cp.constraint.is_all() ? std::numeric_limits<std::uint32_t>::max() : cp.constraint.k();
  }
};

struct IndexedCandidate {
  Millis cost;
  std::vector<std::uint32_t> edges;  // ascending
};

bool candidate_less(const IndexedCandidate& a, const IndexedCandidate& b);

// All template-shaped subgraphs rooted at `start`, unsorted.
std::vector<IndexedCandidate> enumerate_candidates(const Instance& inst, std::uint32_t start,
                                                   std::uint64_t candidate_budget);

enum class SearchStatus { Feasible, Infeasible, BudgetExceeded };

struct SearchResult {
  SearchStatus status = SearchStatus::Infeasible;
  std::vector<std::size_t> choice;  // position in each list
  std::uint64_t combinations_tested = 0;
};

// Depth-first walk of the odometer (last list fastest). A prefix that already
// breaks a threshold or a structural limit discards all its completions at
// once; since adding edges never lowers a count, the first feasible
// combination is the same one a plain odometer stops at.
SearchResult search_first_feasible(const Instance& inst,
                                   std::span<const std::vector<IndexedCandidate>* const> lists,
                                   std::uint64_t combination_budget);

}  // namespace selfasm::detail
