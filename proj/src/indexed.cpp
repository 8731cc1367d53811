#include "indexed.hpp"

#include <algorithm>
#include <numeric>

#include "selfasm/error.hpp"

namespace selfasm::detail {

std::uint32_t Instance::index(const ServiceId& id) const {
  auto it = index_of.find(id);
  if (it == index_of.end()) throw Error(Errc::PeerUnknown, id.str());
  return it->second;
}

Instance Instance::build(std::span<const ServiceDescriptor> services, const ApplicationTemplate& tmpl,
                         const std::map<Binding, Millis>& links) {
  Instance inst;
  const auto catalog = make_catalog(services);
  const auto order = topological_types(tmpl);

  std::map<ServiceTypeId, std::uint32_t> type_id;
  for (std::uint32_t i = 0; i < order.size(); ++i) {
    type_id[order[i]] = i;
    inst.type_names.push_back(order[i]);
  }

  for (const auto& [id, desc] : catalog) {
    auto t = type_id.find(desc.type);
    if (t == type_id.end())
      throw Error(Errc::UnknownType, "type " + desc.type.str() + " of " + id.str() + " is not in the template body");
    inst.index_of[id] = static_cast<std::uint32_t>(inst.ids.size());
    inst.ids.push_back(id);
    inst.type_index.push_back(t->second);
    inst.qos.push_back(desc.qos_ms);
    inst.threshold.push_back(desc.threshold);
  }

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> body_of;
  for (std::uint32_t b = 0; b < tmpl.body.size(); ++b)
    body_of[{type_id.at(tmpl.body[b].from), type_id.at(tmpl.body[b].to)}] = b;

  // Choice points for every node, in body order.
  inst.node_choice_points.resize(inst.ids.size());
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> cp_of;  // (node, body) -> cp
  for (std::uint32_t u = 0; u < inst.ids.size(); ++u) {
    for (std::uint32_t b = 0; b < tmpl.body.size(); ++b) {
      if (type_id.at(tmpl.body[b].from) != inst.type_index[u]) continue;
      const auto cp = static_cast<std::uint32_t>(inst.choice_points.size());
      inst.choice_points.push_back(ChoicePoint{u, b, type_id.at(tmpl.body[b].to), tmpl.constraints[b], {}});
      inst.node_choice_points[u].push_back(cp);
      cp_of[{u, b}] = cp;
    }
  }

  // std::map iteration is already (from, to) ascending by id, which matches
  // index order.
  for (const auto& [link, ms] : links) {
    auto f = inst.index_of.find(link.from);
    auto t = inst.index_of.find(link.to);
    if (f == inst.index_of.end() || t == inst.index_of.end())
      throw Error(Errc::InvalidArgument, "binding " + link.from.str() + "->" + link.to.str() + " names an unknown service");
    auto b = body_of.find({inst.type_index[f->second], inst.type_index[t->second]});
    if (b == body_of.end())
      throw Error(Errc::InvalidArgument, "binding " + link.from.str() + "->" + link.to.str() + " matches no template edge");
    const auto cp = cp_of.at({f->second, b->second});
    const auto e = static_cast<std::uint32_t>(inst.edges.size());
    inst.edges.push_back(IndexedEdge{f->second, t->second, ms, cp});
    inst.choice_points[cp].edges.push_back(e);
  }
  return inst;
}

bool candidate_less(const IndexedCandidate& a, const IndexedCandidate& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  return std::ranges::lexicographical_compare(a.edges, b.edges);
}

namespace {

class Enumerator {
 public:
  Enumerator(const Instance& inst, std::uint32_t start, std::uint64_t budget)
      : inst_(inst), budget_(budget), reached_(inst.ids.size(), 0), best_(inst.ids.size(), 0.0) {
    order_.push_back(start);
    reached_[start] = 1;
  }

  std::vector<IndexedCandidate> run() {
    visit(0, 0);
    return std::move(out_);
  }

 private:
  // Node order_[pos] is making choice number `slot` among its choice points.
  void visit(std::size_t pos, std::size_t slot) {
    while (pos < order_.size() && slot == inst_.node_choice_points[order_[pos]].size()) {
      ++pos;
      slot = 0;
    }
    if (pos == order_.size()) {
      emit();
      return;
    }
    const auto u = order_[pos];
    const auto& cps = inst_.node_choice_points[u];
    const auto& cp = inst_.choice_points[cps[slot]];
    const std::size_t avail = cp.edges.size();
    std::size_t k = avail;
    if (!cp.constraint.is_all()) {
      k = cp.constraint.k();
      if (k > avail) {
        throw Error(Errc::InsufficientServices,
                    inst_.ids[u].str() + " needs " + std::to_string(k) + " services of type " +
                        inst_.type_names[cp.to_type].str() + " but " + std::to_string(avail) + " are available");
      }
    }

    std::vector<std::size_t> pick(k);
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    while (true) {
      const std::size_t mark_edges = chosen_.size();
      const std::size_t mark_order = order_.size();
      for (auto p : pick) {
        const auto e = cp.edges[p];
        chosen_.push_back(e);
        const auto v = inst_.edges[e].to;
        if (!reached_[v]) {
          reached_[v] = 1;
          order_.push_back(v);
        }
      }
      visit(pos, slot + 1);
      for (std::size_t i = mark_order; i < order_.size(); ++i) reached_[order_[i]] = 0;
      order_.resize(mark_order);
      chosen_.resize(mark_edges);

      // Next k-combination of [0, avail) in lexicographic order.
      std::size_t i = k;
      while (i > 0 && pick[i - 1] == avail - k + (i - 1)) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }

  void emit() {
    if (out_.size() >= budget_)
      throw Error(Errc::BudgetExceeded, "more than " + std::to_string(budget_) + " candidate subgraphs for " +
                                            inst_.ids[order_.front()].str());
    IndexedCandidate c;
    c.edges = chosen_;
    std::ranges::sort(c.edges);

    // Longest path: successors always have a later type index, so relaxing
    // edges by descending source rank finalises every successor first.
    for (auto v : order_) best_[v] = inst_.qos[v];
    by_rank_ = c.edges;
    std::ranges::sort(by_rank_, [this](std::uint32_t a, std::uint32_t b) {
      return inst_.type_index[inst_.edges[a].from] > inst_.type_index[inst_.edges[b].from];
    });
    for (auto e : by_rank_) {
      const auto& edge = inst_.edges[e];
      best_[edge.from] = std::max(best_[edge.from], inst_.qos[edge.from] + edge.link_ms + best_[edge.to]);
    }
    c.cost = best_[order_.front()];
    out_.push_back(std::move(c));
  }

  const Instance& inst_;
  std::uint64_t budget_;
  std::vector<char> reached_;
  std::vector<Millis> best_;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint32_t> chosen_;
  std::vector<std::uint32_t> by_rank_;
  std::vector<IndexedCandidate> out_;
};

}  // namespace

std::vector<IndexedCandidate> enumerate_candidates(const Instance& inst, std::uint32_t start,
                                                   std::uint64_t candidate_budget) {
  return Enumerator(inst, start, candidate_budget).run();
}

namespace {

class LoadState {
 public:
  explicit LoadState(const Instance& inst)
      : inst_(inst),
        multiplicity_(inst.edges.size(), 0),
        inbound_(inst.ids.size(), 0),
        outbound_(inst.choice_points.size(), 0) {}

  // Returns true if the union still respects every bound.
  bool add(const IndexedCandidate& c) {
    for (auto e : c.edges) {
      if (multiplicity_[e]++ != 0) continue;
      const auto& edge = inst_.edges[e];
      if (++inbound_[edge.to] == inst_.threshold[edge.to] + 1) ++violations_;
      const auto& cp = inst_.choice_points[edge.choice_point];
      if (++outbound_[edge.choice_point] == std::uint64_t{inst_.limit(cp)} + 1) ++violations_;
    }
    return violations_ == 0;
  }

  void remove(const IndexedCandidate& c) {
    for (auto e : c.edges) {
      if (--multiplicity_[e] != 0) continue;
      const auto& edge = inst_.edges[e];
      if (inbound_[edge.to]-- == inst_.threshold[edge.to] + 1) --violations_;
      const auto& cp = inst_.choice_points[edge.choice_point];
      if (outbound_[edge.choice_point]-- == std::uint64_t{inst_.limit(cp)} + 1) --violations_;
    }
  }

 private:
  const Instance& inst_;
  std::vector<std::uint32_t> multiplicity_;
  std::vector<std::uint64_t> inbound_;
  std::vector<std::uint64_t> outbound_;
  std::uint64_t violations_ = 0;
};

}  // namespace

SearchResult search_first_feasible(const Instance& inst,
                                   std::span<const std::vector<IndexedCandidate>* const> lists,
                                   std::uint64_t combination_budget) {
  SearchResult result;
  const std::size_t depth = lists.size();
  if (depth == 0) {
    result.status = SearchStatus::Feasible;
    result.combinations_tested = 1;
    return result;
  }
  for (const auto* l : lists)
    if (l->empty()) return result;

  LoadState state(inst);
  std::vector<std::size_t> pos(depth, 0);
  std::size_t level = 0;
  std::uint64_t rejected = 0;
  while (true) {
    if (level == depth) {
      result.status = SearchStatus::Feasible;
      result.choice = pos;
      result.combinations_tested = rejected + 1;
      return result;
    }
    const auto& list = *lists[level];
    if (pos[level] == list.size()) {
      if (level == 0) {
        result.combinations_tested = rejected;
        return result;
      }
      --level;
      state.remove((*lists[level])[pos[level]]);
      ++pos[level];
      continue;
    }
    const auto& cand = list[pos[level]];
    if (!state.add(cand)) {
      state.remove(cand);
      if (++rejected >= combination_budget) {
        result.status = SearchStatus::BudgetExceeded;
        result.combinations_tested = rejected;
        return result;
      }
      ++pos[level];
      continue;
    }
    ++level;
    if (level < depth) pos[level] = 0;
  }
}

}  // namespace selfasm::detail
