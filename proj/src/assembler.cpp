#include "selfasm/assembler.hpp"

#include <algorithm>
#include <future>
#include <numeric>
#include <thread>

#include "indexed.hpp"
#include "selfasm/error.hpp"

namespace selfasm {

std::string_view to_string(AssemblyStatus s) noexcept {
  switch (s) {
    case AssemblyStatus::Feasible: return "Feasible";
    case AssemblyStatus::Infeasible: return "Infeasible";
    case AssemblyStatus::BudgetExceeded: return "BudgetExceeded";
  }
  return "?";
}

namespace {

void require_valid(const ApplicationTemplate& tmpl, std::span<const ServiceDescriptor> services) {
  auto universe = body_types(tmpl);
  for (const auto& s : services) universe.insert(s.type);
  const auto violations = validate_template(tmpl, universe);
  if (violations.empty()) return;
  std::string msg;
  for (const auto& v : violations) msg += (msg.empty() ? "" : "; ") + v.detail;
  throw Error(Errc::TemplateInvalid, msg);
}

std::vector<ServiceId> starting_services(std::span<const ServiceDescriptor> services,
                                         const ApplicationTemplate& tmpl) {
  std::vector<ServiceId> starts;
  for (const auto& [id, role] : classify_roles(services, tmpl))
    if (role == Role::Starting) starts.push_back(id);
  if (starts.empty()) throw Error(Errc::NoStartingService, "no live service of the starting type");
  return starts;
}

CandidateSubgraph to_candidate(const detail::Instance& inst, std::uint32_t start,
                               const detail::IndexedCandidate& c, std::size_t rank) {
  CandidateSubgraph out;
  out.start = inst.ids[start];
  out.graph.add_node(out.start);
  for (auto e : c.edges) out.graph.add_edge(inst.ids[inst.edges[e].from], inst.ids[inst.edges[e].to]);
  out.cost = c.cost;
  out.rank = rank;
  return out;
}

AssemblyResult make_result(std::map<ServiceId, CandidateSubgraph> chosen, std::uint64_t tested) {
  AssemblyResult r;
  for (const auto& [start, cand] : chosen) {
    r.assembly.nodes.insert(cand.graph.nodes.begin(), cand.graph.nodes.end());
    r.assembly.edges.insert(cand.graph.edges.begin(), cand.graph.edges.end());
  }
  for (const auto& n : r.assembly.nodes) r.per_service_load[n] = 0;
  for (const auto& e : r.assembly.edges) ++r.per_service_load[e.to];
  r.chosen = std::move(chosen);
  r.combinations_tested = tested;
  return r;
}

AssemblyStatus to_status(detail::SearchStatus s) {
  switch (s) {
    case detail::SearchStatus::Feasible: return AssemblyStatus::Feasible;
    case detail::SearchStatus::Infeasible: return AssemblyStatus::Infeasible;
    case detail::SearchStatus::BudgetExceeded: return AssemblyStatus::BudgetExceeded;
  }
  return AssemblyStatus::Infeasible;
}

std::vector<detail::IndexedCandidate> sorted_candidates(const detail::Instance& inst, std::uint32_t start,
                                                        std::uint64_t budget) {
  auto list = detail::enumerate_candidates(inst, start, budget);
  std::ranges::sort(list, detail::candidate_less);
  return list;
}

}  // namespace

AtCompliantGraph build_at_compliant(std::span<const ServiceDescriptor> services, const ApplicationTemplate& tmpl,
                                    netsim::Simulator& net) {
  require_valid(tmpl, services);
  const auto catalog = make_catalog(services);
  const auto starts = starting_services(services, tmpl);

  AtCompliantGraph out;
  for (const auto& [id, desc] : catalog) out.graph.add_node(id);

  std::set<ServiceId> activated;
  auto activate = [&](const ServiceId& id) {
    activated.insert(id);
    const auto& type = catalog.at(id).type;
    std::vector<netsim::DiscoveryRecord> view;
    bool have_view = false;
    for (std::size_t b = 0; b < tmpl.body.size(); ++b) {
      if (tmpl.body[b].from != type) continue;
      if (!have_view) {
        view = net.surrounding_services(id, net.now_ms());
        have_view = true;
      }
      for (const auto& rec : view)
        if (rec.service.type == tmpl.body[b].to && catalog.contains(rec.service.id))
          net.send(id, rec.service.id, netsim::MessageKind::Request, std::to_string(b));
    }
  };

  for (const auto& s : starts) activate(s);
  while (auto msg = net.deliver_next()) {
    if (msg->kind != netsim::MessageKind::Request) continue;
    if (!catalog.contains(msg->from) || !catalog.contains(msg->to)) continue;
    // The receiver's input monitor stamped t3 on a message whose t2 came from
    // the sender's output monitor.
    out.mqos.set(Binding{msg->from, msg->to}, msg->transfer_ms());
    out.graph.add_edge(msg->from, msg->to);
    if (!activated.contains(msg->to)) activate(msg->to);
  }
  return out;
}

std::vector<CandidateSubgraph> enumerate_subgraphs(const AtCompliantGraph& g_at,
                                                   std::span<const ServiceDescriptor> services,
                                                   const ApplicationTemplate& tmpl, const ServiceId& start,
                                                   const AssembleOptions& options) {
  require_valid(tmpl, services);
  const auto inst = detail::Instance::build(services, tmpl, g_at.mqos.entries());
  const auto roles = classify_roles(services, tmpl);
  auto role = roles.find(start);
  if (role == roles.end() || role->second != Role::Starting)
    throw Error(Errc::InvalidArgument, start.str() + " is not a starting service");
  for (const auto& e : g_at.graph.edges)
    if (!g_at.mqos.find(e)) throw Error(Errc::MissingLinkQoS, e.from.str() + "->" + e.to.str());

  const auto s = inst.index(start);
  const auto list = sorted_candidates(inst, s, options.candidate_budget);
  std::vector<CandidateSubgraph> out;
  out.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) out.push_back(to_candidate(inst, s, list[i], i));
  return out;
}

SearchOutcome find_atsf_assembly(const std::map<ServiceId, std::vector<CandidateSubgraph>>& per_start,
                                 std::span<const ServiceDescriptor> services, const ApplicationTemplate& tmpl,
                                 const AssembleOptions& options) {
  require_valid(tmpl, services);
  std::map<Binding, Millis> links;
  for (const auto& [start, list] : per_start)
    for (const auto& c : list)
      for (const auto& e : c.graph.edges) links.emplace(e, 0.0);
  const auto inst = detail::Instance::build(services, tmpl, links);

  std::map<Binding, std::uint32_t> edge_index;
  for (std::uint32_t e = 0; e < inst.edges.size(); ++e)
    edge_index[Binding{inst.ids[inst.edges[e].from], inst.ids[inst.edges[e].to]}] = e;

  std::vector<std::vector<detail::IndexedCandidate>> lists;
  for (const auto& [start, list] : per_start) {
    auto& converted = lists.emplace_back();
    for (const auto& c : list) {
      detail::IndexedCandidate ic{c.cost, {}};
      for (const auto& e : c.graph.edges) ic.edges.push_back(edge_index.at(e));
      std::ranges::sort(ic.edges);
      converted.push_back(std::move(ic));
    }
  }
  std::vector<const std::vector<detail::IndexedCandidate>*> refs;
  for (const auto& l : lists) refs.push_back(&l);

  const auto found = detail::search_first_feasible(inst, refs, options.combination_budget);
  SearchOutcome out;
  out.status = to_status(found.status);
  out.combinations_tested = found.combinations_tested;
  if (found.status == detail::SearchStatus::Feasible) {
    std::map<ServiceId, CandidateSubgraph> chosen;
    std::size_t level = 0;
    for (const auto& [start, list] : per_start) chosen[start] = list[found.choice[level++]];
    out.result = make_result(std::move(chosen), found.combinations_tested);
  }
  return out;
}

AssembleOutcome assemble(std::span<const ServiceDescriptor> services, const ApplicationTemplate& tmpl,
                         netsim::Simulator& net, const AssembleOptions& options) {
  if (services.empty()) throw Error(Errc::NoStartingService, "empty service set");
  AssembleOutcome out;
  out.g_at = build_at_compliant(services, tmpl, net);
  const auto inst = detail::Instance::build(services, tmpl, out.g_at.mqos.entries());

  std::vector<std::uint32_t> starts;
  for (const auto& id : starting_services(services, tmpl)) starts.push_back(inst.index(id));

  std::vector<std::vector<detail::IndexedCandidate>> lists(starts.size());
  if (options.parallel && starts.size() > 1) {
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::exception_ptr> errors(starts.size());
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < std::min(workers, starts.size()); ++w)
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < starts.size(); i += workers) {
          try {
            lists[i] = sorted_candidates(inst, starts[i], options.candidate_budget);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      }));
    for (auto& j : jobs) j.get();
    // Same error a sequential run would have raised first.
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    for (std::size_t i = 0; i < starts.size(); ++i)
      lists[i] = sorted_candidates(inst, starts[i], options.candidate_budget);
  }

  auto& stats = out.stats;
  stats.n_services = services.size();
  for (std::size_t i = 0; i < lists.size(); ++i) {
    stats.candidate_count += lists[i].size();
    stats.peak_candidate_count = std::max<std::uint64_t>(stats.peak_candidate_count, lists[i].size());
    auto& costs = out.candidate_costs[inst.ids[starts[i]]];
    costs.reserve(lists[i].size());
    for (const auto& c : lists[i]) {
      costs.push_back(c.cost);
      stats.mem_estimate_bytes += sizeof(detail::IndexedCandidate) + c.edges.capacity() * sizeof(std::uint32_t);
    }
  }

  std::vector<const std::vector<detail::IndexedCandidate>*> refs;
  for (const auto& l : lists) refs.push_back(&l);
  const auto found = detail::search_first_feasible(inst, refs, options.combination_budget);
  out.status = to_status(found.status);
  stats.combinations_tested = found.combinations_tested;
  if (found.status == detail::SearchStatus::Feasible) {
    std::map<ServiceId, CandidateSubgraph> chosen;
    for (std::size_t i = 0; i < starts.size(); ++i)
      chosen[inst.ids[starts[i]]] = to_candidate(inst, starts[i], lists[i][found.choice[i]], found.choice[i]);
    out.result = make_result(std::move(chosen), found.combinations_tested);
  }
  return out;
}

std::uint64_t count_combinations(std::uint64_t n, const Constraint& k) {
  if (k.is_all()) return 1;
  std::uint64_t r = k.k();
  if (r > n) throw Error(Errc::DomainError, "k=" + std::to_string(r) + " exceeds n=" + std::to_string(n));
  r = std::min(r, n - r);
  // acc * m is divisible by i at step i, so after removing gcd(acc, i) the
  // rest of i divides m.
  std::uint64_t acc = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    const std::uint64_t m = n - r + i;
    const std::uint64_t g = std::gcd(acc, i);
    if (__builtin_mul_overflow(acc / g, m / (i / g), &acc))
      throw Error(Errc::DomainError, "C(" + std::to_string(n) + "," + std::to_string(k.k()) + ") overflows 64 bits");
  }
  return acc;
}

}  // namespace selfasm
