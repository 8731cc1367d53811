#include "selfasm/model.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>

#include "selfasm/error.hpp"

namespace selfasm {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::UnknownType: return "UnknownType";
    case Errc::TemplateInvalid: return "TemplateInvalid";
    case Errc::MissingLinkQoS: return "MissingLinkQoS";
    case Errc::DisconnectedNode: return "DisconnectedNode";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::PeerUnknown: return "PeerUnknown";
    case Errc::NoStartingService: return "NoStartingService";
    case Errc::InsufficientServices: return "InsufficientServices";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::DomainError: return "DomainError";
    case Errc::InstanceTooLarge: return "InstanceTooLarge";
    case Errc::ParseError: return "ParseError";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

ServiceCatalog make_catalog(std::span<const ServiceDescriptor> services) {
  ServiceCatalog catalog;
  for (const auto& s : services) {
    if (s.id.empty()) throw Error(Errc::InvalidArgument, "service with empty id");
    if (s.type.empty()) throw Error(Errc::InvalidArgument, "service " + s.id.str() + " has empty type");
    if (s.threshold < 1) throw Error(Errc::InvalidArgument, "service " + s.id.str() + " has threshold 0");
    if (!(s.qos_ms >= 0.0)) throw Error(Errc::InvalidArgument, "service " + s.id.str() + " has negative qos");
    if (!catalog.emplace(s.id, s).second) throw Error(Errc::DuplicateId, s.id.str());
  }
  return catalog;
}

std::string to_string(const Constraint& c) { return c.is_all() ? "ALL" : std::to_string(c.k()); }

void AssemblyGraph::add_edge(const ServiceId& from, const ServiceId& to) {
  nodes.insert(from);
  nodes.insert(to);
  edges.insert(Binding{from, to});
}

std::vector<ServiceId> AssemblyGraph::successors(const ServiceId& id) const {
  std::vector<ServiceId> out;
  for (auto it = edges.lower_bound(Binding{id, ServiceId{}}); it != edges.end() && it->from == id; ++it)
    out.push_back(it->to);
  return out;
}

void QoSMatrix::set(const Binding& link, Millis ms) {
  if (!(ms >= 0.0))
    throw Error(Errc::InvalidArgument, "negative link time for " + link.from.str() + "->" + link.to.str());
  entries_[link] = ms;
}

const Millis* QoSMatrix::find(const Binding& link) const {
  auto it = entries_.find(link);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::Starting: return "Starting";
    case Role::Intermediate: return "Intermediate";
    case Role::Ending: return "Ending";
  }
  return "?";
}

std::set<ServiceTypeId> body_types(const ApplicationTemplate& tmpl) {
  std::set<ServiceTypeId> types;
  for (const auto& e : tmpl.body) {
    types.insert(e.from);
    types.insert(e.to);
  }
  return types;
}

std::map<ServiceId, Role> classify_roles(std::span<const ServiceDescriptor> services,
                                         const ApplicationTemplate& tmpl) {
  std::set<ServiceTypeId> has_in, has_out;
  for (const auto& e : tmpl.body) {
    has_out.insert(e.from);
    has_in.insert(e.to);
  }
  std::map<ServiceId, Role> roles;
  for (const auto& s : services) {
    const bool in = has_in.contains(s.type);
    const bool out = has_out.contains(s.type);
    if (!in && !out)
      throw Error(Errc::UnknownType, "type " + s.type.str() + " of " + s.id.str() + " is not in the template body");
    roles[s.id] = !in ? Role::Starting : (!out ? Role::Ending : Role::Intermediate);
  }
  return roles;
}

std::string_view to_string(TemplateViolation::Kind k) noexcept {
  using K = TemplateViolation::Kind;
  switch (k) {
    case K::EmptyBody: return "EmptyBody";
    case K::LengthMismatch: return "LengthMismatch";
    case K::ZeroConstraint: return "ZeroConstraint";
    case K::DuplicatePair: return "DuplicatePair";
    case K::Cycle: return "Cycle";
    case K::NoStartingType: return "NoStartingType";
    case K::MultipleStartingTypes: return "MultipleStartingTypes";
    case K::DanglingType: return "DanglingType";
  }
  return "?";
}

namespace {

// Kahn's algorithm over the type graph; returns the order found, which is
// shorter than the type count iff the body has a cycle.
std::vector<ServiceTypeId> kahn_order(const ApplicationTemplate& tmpl) {
  const auto types = body_types(tmpl);
  std::map<ServiceTypeId, std::size_t> indegree;
  std::map<ServiceTypeId, std::vector<ServiceTypeId>> out;
  for (const auto& t : types) indegree[t] = 0;
  std::set<TypeEdge> seen;
  for (const auto& e : tmpl.body) {
    if (!seen.insert(e).second) continue;
    ++indegree[e.to];
    out[e.from].push_back(e.to);
  }
  std::priority_queue<ServiceTypeId, std::vector<ServiceTypeId>, std::greater<>> ready;
  for (const auto& [t, d] : indegree)
    if (d == 0) ready.push(t);
  std::vector<ServiceTypeId> order;
  while (!ready.empty()) {
    auto t = ready.top();
    ready.pop();
    order.push_back(t);
    for (const auto& n : out[t])
      if (--indegree[n] == 0) ready.push(n);
  }
  return order;
}

}  // namespace

std::vector<TemplateViolation> validate_template(const ApplicationTemplate& tmpl,
                                                 const std::set<ServiceTypeId>& types_present) {
  using K = TemplateViolation::Kind;
  std::vector<TemplateViolation> report;
  if (tmpl.body.empty()) report.push_back({K::EmptyBody, "template body is empty"});
  if (tmpl.body.size() != tmpl.constraints.size())
    report.push_back({K::LengthMismatch, "body has " + std::to_string(tmpl.body.size()) + " edges but " +
                                             std::to_string(tmpl.constraints.size()) + " constraints"});
  for (std::size_t i = 0; i < tmpl.constraints.size(); ++i)
    if (!tmpl.constraints[i].is_all() && tmpl.constraints[i].k() == 0)
      report.push_back({K::ZeroConstraint, "constraint " + std::to_string(i) + " is 0"});

  std::set<TypeEdge> seen;
  for (const auto& e : tmpl.body)
    if (!seen.insert(e).second)
      report.push_back({K::DuplicatePair, "(" + e.from.str() + "," + e.to.str() + ") appears twice"});

  const auto types = body_types(tmpl);
  if (kahn_order(tmpl).size() != types.size()) report.push_back({K::Cycle, "type graph has a cycle"});

  std::set<ServiceTypeId> has_in;
  for (const auto& e : tmpl.body) has_in.insert(e.to);
  std::vector<std::string> starts;
  for (const auto& t : types)
    if (!has_in.contains(t)) starts.push_back(t.str());
  if (!tmpl.body.empty() && starts.empty())
    report.push_back({K::NoStartingType, "every type has an inbound edge"});
  if (starts.size() > 1) {
    std::string names;
    for (const auto& s : starts) names += (names.empty() ? "" : ",") + s;
    report.push_back({K::MultipleStartingTypes, "starting types: " + names});
  }

  for (const auto& t : types)
    if (!types_present.contains(t)) report.push_back({K::DanglingType, "type " + t.str() + " is not in the type set"});
  return report;
}

ServiceTypeId starting_type(const ApplicationTemplate& tmpl) {
  std::set<ServiceTypeId> has_in;
  for (const auto& e : tmpl.body) has_in.insert(e.to);
  for (const auto& e : tmpl.body)
    if (!has_in.contains(e.from)) return e.from;
  throw Error(Errc::TemplateInvalid, "no starting type");
}

std::vector<ServiceTypeId> topological_types(const ApplicationTemplate& tmpl) {
  auto order = kahn_order(tmpl);
  if (order.size() != body_types(tmpl).size()) throw Error(Errc::TemplateInvalid, "type graph has a cycle");
  return order;
}

Millis path_cost(const AssemblyGraph& subgraph, const ServiceId& start, const ServiceCatalog& services,
                 const QoSMatrix& mqos) {
  if (!subgraph.contains(start)) throw Error(Errc::DisconnectedNode, "start " + start.str() + " not in subgraph");
  for (const auto& e : subgraph.edges)
    if (!mqos.find(e)) throw Error(Errc::MissingLinkQoS, e.from.str() + "->" + e.to.str());

  auto qos_of = [&](const ServiceId& id) {
    auto it = services.find(id);
    if (it == services.end()) throw Error(Errc::InvalidArgument, "no descriptor for " + id.str());
    return it->second.qos_ms;
  };

  enum class Mark : char { None, Active, Done };
  std::map<ServiceId, Mark> mark;
  std::map<ServiceId, Millis> best;
  std::function<Millis(const ServiceId&)> visit = [&](const ServiceId& u) -> Millis {
    auto& m = mark[u];
    if (m == Mark::Done) return best[u];
    if (m == Mark::Active) throw Error(Errc::InvalidArgument, "subgraph has a cycle through " + u.str());
    m = Mark::Active;
    Millis tail = 0.0;
    for (const auto& v : subgraph.successors(u))
      tail = std::max(tail, *mqos.find(Binding{u, v}) + visit(v));
    mark[u] = Mark::Done;
    return best[u] = qos_of(u) + tail;
  };
  const Millis cost = visit(start);

  for (const auto& n : subgraph.nodes)
    if (mark[n] != Mark::Done) throw Error(Errc::DisconnectedNode, n.str() + " is unreachable from " + start.str());
  return cost;
}

bool is_acyclic(const AssemblyGraph& g) {
  std::map<ServiceId, std::size_t> indegree;
  for (const auto& n : g.nodes) indegree[n] = 0;
  for (const auto& e : g.edges) ++indegree[e.to];
  std::vector<ServiceId> ready;
  for (const auto& [n, d] : indegree)
    if (d == 0) ready.push_back(n);
  std::size_t visited = 0;
  while (!ready.empty()) {
    auto u = ready.back();
    ready.pop_back();
    ++visited;
    for (const auto& v : g.successors(u))
      if (--indegree[v] == 0) ready.push_back(v);
  }
  return visited == g.nodes.size();
}

}  // namespace selfasm
