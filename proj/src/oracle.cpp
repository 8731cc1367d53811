#include "selfasm/oracle.hpp"

#include <algorithm>
#include <bit>
#include <functional>

#include "selfasm/error.hpp"

namespace selfasm::oracle {

namespace {

// Successors of every node per template edge, read off the measured links.
struct Structure {
  ServiceCatalog catalog;
  std::set<ServiceTypeId> types_with_inbound;
  // (node, body index) -> successors of the body edge's target type
  std::map<std::pair<ServiceId, std::size_t>, std::vector<ServiceId>> successors;
  std::vector<ServiceId> starts;
};

Structure read_structure(std::span<const ServiceDescriptor> services, const ApplicationTemplate& tmpl,
                         const QoSMatrix& mqos) {
  Structure st;
  st.catalog = make_catalog(services);
  for (const auto& e : tmpl.body) st.types_with_inbound.insert(e.to);
  for (const auto& [id, d] : st.catalog) {
    for (std::size_t b = 0; b < tmpl.body.size(); ++b)
      if (tmpl.body[b].from == d.type) st.successors[{id, b}];
    if (!st.types_with_inbound.contains(d.type)) st.starts.push_back(id);
  }
  for (const auto& [link, ms] : mqos.entries()) {
    const auto& from = st.catalog.at(link.from);
    const auto& to = st.catalog.at(link.to);
    for (std::size_t b = 0; b < tmpl.body.size(); ++b)
      if (tmpl.body[b].from == from.type && tmpl.body[b].to == to.type) st.successors[{link.from, b}].push_back(link.to);
  }
  return st;
}

// Every size-k subset of `items`, by bitmask.
std::vector<std::vector<ServiceId>> subsets_of_size(const std::vector<ServiceId>& items, std::size_t k) {
  std::vector<std::vector<ServiceId>> out;
  const std::size_t n = items.size();
  if (n >= 31) throw Error(Errc::InstanceTooLarge, "too many successors for bitmask enumeration");
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != k) continue;
    std::vector<ServiceId> pick;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) pick.push_back(items[i]);
    out.push_back(std::move(pick));
  }
  return out;
}

using EdgeSet = std::set<Binding>;

// Fix a choice for every (node, body edge) reachable from the start, then keep
// only the part actually reached. Different global choices that agree on the
// reached part collapse in the set.
std::set<EdgeSet> subgraphs_from(const ServiceId& start, const Structure& st, const ApplicationTemplate& tmpl) {
  std::set<ServiceId> reachable{start};
  std::vector<ServiceId> stack{start};
  while (!stack.empty()) {
    auto u = stack.back();
    stack.pop_back();
    for (const auto& [key, succ] : st.successors)
      if (key.first == u)
        for (const auto& v : succ)
          if (reachable.insert(v).second) stack.push_back(v);
  }

  struct Slot {
    ServiceId node;
    std::size_t body;
    std::vector<std::vector<ServiceId>> options;
  };
  std::vector<Slot> slots;
  for (const auto& [key, succ] : st.successors) {
    if (!reachable.contains(key.first)) continue;
    const auto& c = tmpl.constraints[key.second];
    Slot slot{key.first, key.second, {}};
    if (c.is_all()) slot.options.push_back(succ);
    else if (c.k() <= succ.size()) slot.options = subsets_of_size(succ, c.k());
    // One reachable node short of successors rules out the whole start.
    if (slot.options.empty()) return {};
    slots.push_back(std::move(slot));
  }

  double product = 1;
  for (const auto& s : slots) product *= std::max<std::size_t>(1, s.options.size());
  if (product > 5e6) throw Error(Errc::InstanceTooLarge, "too many choice functions for " + start.str());

  std::set<EdgeSet> found;
  std::vector<std::size_t> pick(slots.size(), 0);
  std::map<std::pair<ServiceId, std::size_t>, std::size_t> slot_of;
  for (std::size_t i = 0; i < slots.size(); ++i) slot_of[{slots[i].node, slots[i].body}] = i;

  std::function<void(std::size_t)> assign = [&](std::size_t i) {
    if (i < slots.size()) {
      for (std::size_t o = 0; o < slots[i].options.size(); ++o) {
        pick[i] = o;
        assign(i + 1);
      }
      return;
    }
    EdgeSet edges;
    std::set<ServiceId> seen{start};
    std::vector<ServiceId> frontier{start};
    while (!frontier.empty()) {
      auto u = frontier.back();
      frontier.pop_back();
      for (std::size_t b = 0; b < tmpl.body.size(); ++b) {
        auto it = slot_of.find({u, b});
        if (it == slot_of.end()) continue;
        for (const auto& v : slots[it->second].options[pick[it->second]]) {
          edges.insert(Binding{u, v});
          if (seen.insert(v).second) frontier.push_back(v);
        }
      }
    }
    found.insert(std::move(edges));
  };
  assign(0);
  return found;
}

AssemblyGraph graph_of(const ServiceId& start, const EdgeSet& edges) {
  AssemblyGraph g;
  g.add_node(start);
  for (const auto& e : edges) g.add_edge(e.from, e.to);
  return g;
}

}  // namespace

std::optional<std::string> check_atsf(const AssemblyGraph& assembly, std::span<const ServiceDescriptor> services,
                                      const ApplicationTemplate& tmpl, const QoSMatrix& mqos) {
  const auto st = read_structure(services, tmpl, mqos);
  for (const auto& s : st.starts)
    if (!assembly.contains(s)) return "starting service " + s.str() + " is not served";

  std::map<ServiceId, std::uint32_t> inbound;
  for (const auto& e : assembly.edges) {
    if (!assembly.contains(e.from) || !assembly.contains(e.to)) return "dangling edge " + e.from.str() + "->" + e.to.str();
    if (!mqos.find(e)) return "binding " + e.from.str() + "->" + e.to.str() + " is not template compliant";
    ++inbound[e.to];
  }
  for (const auto& n : assembly.nodes) {
    const auto it = st.catalog.find(n);
    if (it == st.catalog.end()) return "unknown service " + n.str();
    if (inbound[n] > it->second.threshold)
      return n.str() + " has " + std::to_string(inbound[n]) + " bindings, threshold " + std::to_string(it->second.threshold);
    for (std::size_t b = 0; b < tmpl.body.size(); ++b) {
      if (tmpl.body[b].from != it->second.type) continue;
      std::size_t bound = 0;
      for (const auto& e : assembly.edges)
        if (e.from == n && st.catalog.at(e.to).type == tmpl.body[b].to) ++bound;
      const auto& c = tmpl.constraints[b];
      const std::size_t required = c.is_all() ? st.successors.at({n, b}).size() : c.k();
      if (bound != required)
        return n.str() + " binds " + std::to_string(bound) + " services of type " + tmpl.body[b].to.str() +
               ", template requires " + std::to_string(required);
    }
  }
  return std::nullopt;
}

OracleReport exhaustive_assemblies(std::span<const ServiceDescriptor> services, const ApplicationTemplate& tmpl,
                                   const QoSMatrix& mqos, std::size_t max_services) {
  if (services.size() > max_services)
    throw Error(Errc::InstanceTooLarge, std::to_string(services.size()) + " services exceed the bound of " +
                                            std::to_string(max_services));
  const auto st = read_structure(services, tmpl, mqos);
  OracleReport report;

  std::vector<std::vector<AssemblyGraph>> per_start;
  std::vector<std::vector<Millis>> costs;
  for (const auto& s : st.starts) {
    auto& graphs = per_start.emplace_back();
    auto& c = costs.emplace_back();
    for (const auto& edges : subgraphs_from(s, st, tmpl)) {
      graphs.push_back(graph_of(s, edges));
      c.push_back(exhaustive_F(graphs.back(), s, st.catalog, mqos));
    }
    report.count_candidates_per_start[s] = graphs.size();
  }
  if (per_start.empty()) return report;

  std::vector<std::size_t> pick(per_start.size(), 0);
  std::function<void(std::size_t)> combine = [&](std::size_t level) {
    if (level < per_start.size()) {
      for (std::size_t i = 0; i < per_start[level].size(); ++i) {
        pick[level] = i;
        combine(level + 1);
      }
      return;
    }
    AssemblyGraph u;
    Millis worst = 0.0;
    for (std::size_t l = 0; l < per_start.size(); ++l) {
      const auto& g = per_start[l][pick[l]];
      u.nodes.insert(g.nodes.begin(), g.nodes.end());
      u.edges.insert(g.edges.begin(), g.edges.end());
      worst = std::max(worst, costs[l][pick[l]]);
    }
    if (check_atsf(u, services, tmpl, mqos)) return;
    report.feasible_assemblies.push_back(std::move(u));
    if (!report.min_max_F || worst < *report.min_max_F) report.min_max_F = worst;
  };
  combine(0);
  return report;
}

Millis exhaustive_F(const AssemblyGraph& subgraph, const ServiceId& start, const ServiceCatalog& services,
                    const QoSMatrix& mqos) {
  Millis worst = 0.0;
  std::vector<ServiceId> path{start};
  std::function<void()> walk = [&] {
    const auto succ = subgraph.successors(path.back());
    if (succ.empty()) {
      Millis total = 0.0;
      for (std::size_t i = 0; i < path.size(); ++i) {
        total += services.at(path[i]).qos_ms;
        if (i + 1 < path.size()) {
          const Millis* link = mqos.find(Binding{path[i], path[i + 1]});
          if (!link) throw Error(Errc::MissingLinkQoS, path[i].str() + "->" + path[i + 1].str());
          total += *link;
        }
      }
      worst = std::max(worst, total);
      return;
    }
    for (const auto& v : succ) {
      path.push_back(v);
      walk();
      path.pop_back();
    }
  };
  walk();
  return worst;
}

std::vector<std::vector<std::uint64_t>> binomial_table(unsigned n_max) {
  if (n_max > 60) throw Error(Errc::DomainError, "binomial table limited to 60 rows");
  std::vector<std::vector<std::uint64_t>> rows;
  for (unsigned n = 0; n <= n_max; ++n) {
    std::vector<std::uint64_t> row(n + 1, 1);
    for (unsigned k = 1; k < n; ++k) row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace selfasm::oracle
