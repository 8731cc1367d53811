#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace selfasm {

// Durations are milliseconds.
using Millis = double;

template <class Tag>
struct StrongId {
  std::string value;

  StrongId() = default;
  explicit StrongId(std::string v) : value(std::move(v)) {}

  bool empty() const noexcept { return value.empty(); }
  const std::string& str() const noexcept { return value; }

  friend auto operator<=>(const StrongId&, const StrongId&) = default;
  friend bool operator==(const StrongId&, const StrongId&) = default;
};

using ServiceTypeId = StrongId<struct ServiceTypeTag>;
using ServiceId = StrongId<struct ServiceTag>;

struct ServiceDescriptor {
  ServiceId id;
  ServiceTypeId type;
  Millis qos_ms = 0.0;
  std::uint32_t threshold = 1;

  friend bool operator==(const ServiceDescriptor&, const ServiceDescriptor&) = default;
};

using ServiceCatalog = std::map<ServiceId, ServiceDescriptor>;

// Throws DuplicateId on repeated ids and InvalidArgument on a descriptor that
// breaks threshold >= 1, qos >= 0 or has an empty id/type.
ServiceCatalog make_catalog(std::span<const ServiceDescriptor> services);

// Structural constraint attached to one template edge: pick exactly k
// successors, or bind to all available ones.
class Constraint {
 public:
  static Constraint all() noexcept { return Constraint(0, true); }
  static Constraint choose(std::uint32_t k) noexcept { return Constraint(k, false); }

  bool is_all() const noexcept { return all_; }
  std::uint32_t k() const noexcept { return k_; }

  friend bool operator==(const Constraint&, const Constraint&) = default;

 private:
  Constraint(std::uint32_t k, bool all) : k_(k), all_(all) {}
  std::uint32_t k_;
  bool all_;
};

std::string to_string(const Constraint& c);

struct TypeEdge {
  ServiceTypeId from;
  ServiceTypeId to;

  friend auto operator<=>(const TypeEdge&, const TypeEdge&) = default;
  friend bool operator==(const TypeEdge&, const TypeEdge&) = default;
};

struct ApplicationTemplate {
  std::vector<TypeEdge> body;
  std::vector<Constraint> constraints;

  friend bool operator==(const ApplicationTemplate&, const ApplicationTemplate&) = default;
};

struct Binding {
  ServiceId from;
  ServiceId to;

  friend auto operator<=>(const Binding&, const Binding&) = default;
  friend bool operator==(const Binding&, const Binding&) = default;
};

struct AssemblyGraph {
  std::set<ServiceId> nodes;
  std::set<Binding> edges;

  void add_node(const ServiceId& id) { nodes.insert(id); }
  // Inserts both endpoints; duplicates collapse.
  void add_edge(const ServiceId& from, const ServiceId& to);

  bool contains(const ServiceId& id) const { return nodes.contains(id); }
  bool contains(const Binding& b) const { return edges.contains(b); }

  std::vector<ServiceId> successors(const ServiceId& id) const;

  friend bool operator==(const AssemblyGraph&, const AssemblyGraph&) = default;
};

// Measured link transfer times, keyed by directed service pair.
class QoSMatrix {
 public:
  void set(const Binding& link, Millis ms);
  const Millis* find(const Binding& link) const;
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<Binding, Millis>& entries() const noexcept { return entries_; }

  friend bool operator==(const QoSMatrix&, const QoSMatrix&) = default;

 private:
  std::map<Binding, Millis> entries_;
};

enum class Role { Starting, Intermediate, Ending };

std::string_view to_string(Role r) noexcept;

// Starting iff the service's type has no inbound body edge, Ending iff it has
// no outbound one. Throws UnknownType for a service whose type is absent from
// the body (which includes every service when the body is empty).
std::map<ServiceId, Role> classify_roles(std::span<const ServiceDescriptor> services,
                                         const ApplicationTemplate& tmpl);

struct TemplateViolation {
  enum class Kind {
    EmptyBody,
    LengthMismatch,
    ZeroConstraint,
    DuplicatePair,
    Cycle,
    NoStartingType,
    MultipleStartingTypes,
    DanglingType,
  };
  Kind kind;
  std::string detail;
};

std::string_view to_string(TemplateViolation::Kind k) noexcept;

// Empty result iff the template is valid against the supplied type universe.
std::vector<TemplateViolation> validate_template(const ApplicationTemplate& tmpl,
                                                 const std::set<ServiceTypeId>& types_present);

// All types named in the body.
std::set<ServiceTypeId> body_types(const ApplicationTemplate& tmpl);

// The unique type without inbound body edges. Only meaningful on a template
// that passed validation.
ServiceTypeId starting_type(const ApplicationTemplate& tmpl);

// Body types in a topological order (ties by name). Throws TemplateInvalid on
// a cyclic body.
std::vector<ServiceTypeId> topological_types(const ApplicationTemplate& tmpl);

// Worst-case end-to-end processing time of a subgraph rooted at `start`: the
// maximum, over paths from `start` to a sink, of node QoS plus link time
// summed along the path. Both endpoints' QoS are included.
Millis path_cost(const AssemblyGraph& subgraph, const ServiceId& start,
                 const ServiceCatalog& services, const QoSMatrix& mqos);

bool is_acyclic(const AssemblyGraph& g);

}  // namespace selfasm
