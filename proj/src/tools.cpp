#include "selfasm/tools.hpp"

#include <chrono>
#include <cstdio>

#include <json.hpp>

#include "selfasm/error.hpp"
#include "selfasm/oracle.hpp"

namespace selfasm::tools {

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string to_dot(const AssembleOutcome& outcome, std::span<const ServiceDescriptor> services) {
  const auto catalog = make_catalog(services);
  std::string out = "digraph assembly {\n  rankdir=LR;\n  node [shape=box];\n";
  if (outcome.result) {
    const auto& g = outcome.result->assembly;
    for (const auto& n : g.nodes) {
      const auto& d = catalog.at(n);
      out += "  " + quoted(n.str()) + " [label=" +
             quoted(n.str() + "\n" + d.type.str() + " qos=" + fixed3(d.qos_ms) + " thr=" + std::to_string(d.threshold)) +
             "];\n";
    }
    for (const auto& e : g.edges) {
      const Millis* link = outcome.g_at.mqos.find(e);
      out += "  " + quoted(e.from.str()) + " -> " + quoted(e.to.str()) + " [label=" +
             quoted(link ? fixed3(*link) + " ms" : "?") + "];\n";
    }
  }
  out += "}\n";
  return out;
}

std::string to_json(const AssembleOutcome& outcome, std::span<const ServiceDescriptor>) {
  nlohmann::ordered_json j;
  j["status"] = std::string(to_string(outcome.status));
  j["feasible"] = outcome.result.has_value();
  j["nodes"] = nlohmann::ordered_json::array();
  j["edges"] = nlohmann::ordered_json::array();
  j["chosen"] = nlohmann::ordered_json::object();
  j["loads"] = nlohmann::ordered_json::object();
  j["combinations_tested"] = outcome.stats.combinations_tested;
  j["total_cost_per_start"] = nlohmann::ordered_json::object();
  if (outcome.result) {
    const auto& r = *outcome.result;
    for (const auto& n : r.assembly.nodes) j["nodes"].push_back(n.str());
    for (const auto& e : r.assembly.edges) {
      const Millis* link = outcome.g_at.mqos.find(e);
      j["edges"].push_back({{"from", e.from.str()}, {"to", e.to.str()}, {"link_ms", link ? *link : 0.0}});
    }
    for (const auto& [start, c] : r.chosen) {
      nlohmann::ordered_json edges = nlohmann::ordered_json::array();
      for (const auto& e : c.graph.edges) edges.push_back({e.from.str(), e.to.str()});
      j["chosen"][start.str()] = {{"rank", c.rank}, {"cost_ms", c.cost}, {"edges", std::move(edges)}};
      j["total_cost_per_start"][start.str()] = c.cost;
    }
    for (const auto& [id, load] : r.per_service_load) j["loads"][id.str()] = load;
  }
  return j.dump(2) + "\n";
}

BenchRow run_bench(const std::string& layout, std::uint64_t n, const std::string& k, const scenario::Scenario& s,
                   const AssembleOptions& options) {
  BenchRow row{layout, n, k, 0, 0.0, 0, AssemblyStatus::Infeasible};
  auto net = scenario::make_simulator(s, false);
  scenario::announce_all(net, s.services);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto outcome = assemble(s.services, s.tmpl, net, options);
    row.candidates = outcome.stats.candidate_count;
    row.mem_estimate = outcome.stats.mem_estimate_bytes;
    row.status = outcome.status;
  } catch (const Error& e) {
    if (e.code() != Errc::BudgetExceeded) throw;
    row.status = AssemblyStatus::BudgetExceeded;
  }
  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

std::string bench_csv_header() { return "layout,n,k,candidates,wall_ms,mem_estimate,status"; }

std::string to_csv(const BenchRow& r) {
  return r.layout + "," + std::to_string(r.n) + "," + r.k + "," + std::to_string(r.candidates) + "," +
         fixed3(r.wall_ms) + "," + std::to_string(r.mem_estimate) + "," + std::string(to_string(r.status));
}

namespace {

bool unsatisfiable(const Error& e) {
  return e.code() == Errc::NoStartingService || e.code() == Errc::InsufficientServices;
}

void note(VerifyReport& report, const std::string& label, const std::string& what) {
  ++report.mismatches;
  report.details.push_back(label + ": " + what);
}

void verify_into(VerifyReport& report, const scenario::Scenario& s, const AssembleOptions& options,
                 const std::string& label) {
  ++report.instances;

  // The oracle gets its own network so the two sides share nothing but the
  // scenario description.
  QoSMatrix mqos;
  bool no_start = false;
  {
    auto net = scenario::make_simulator(s, false);
    scenario::announce_all(net, s.services);
    try {
      mqos = build_at_compliant(s.services, s.tmpl, net).mqos;
    } catch (const Error& e) {
      if (e.code() != Errc::NoStartingService) throw;
      no_start = true;
    }
  }
  oracle::OracleReport truth;
  if (!no_start) truth = oracle::exhaustive_assemblies(s.services, s.tmpl, mqos);
  const bool oracle_feasible = !truth.feasible_assemblies.empty();

  auto net = scenario::make_simulator(s, false);
  scenario::announce_all(net, s.services);
  std::optional<AssembleOutcome> outcome;
  try {
    outcome = assemble(s.services, s.tmpl, net, options);
  } catch (const Error& e) {
    if (!unsatisfiable(e)) throw;
  }

  if (outcome && outcome->status == AssemblyStatus::BudgetExceeded) {
    note(report, label, "assembler ran out of budget");
    return;
  }
  const bool feasible = outcome && outcome->result;
  if (feasible) ++report.feasible;
  else ++report.infeasible;

  if (feasible != oracle_feasible) {
    note(report, label,
         std::string("assembler says ") + (feasible ? "feasible" : "infeasible") + ", oracle says " +
             (oracle_feasible ? "feasible" : "infeasible"));
    return;
  }
  if (outcome) {
    for (const auto& [start, costs] : outcome->candidate_costs) {
      const auto it = truth.count_candidates_per_start.find(start);
      const auto expected = it == truth.count_candidates_per_start.end() ? 0 : it->second;
      if (costs.size() != expected)
        note(report, label,
             start.str() + " has " + std::to_string(costs.size()) + " candidates, oracle counts " +
                 std::to_string(expected));
    }
  }
  if (!feasible) return;

  const auto& g = outcome->result->assembly;
  if (auto why = oracle::check_atsf(g, s.services, s.tmpl, mqos)) {
    note(report, label, "returned assembly fails the checker: " + *why);
    return;
  }
  const bool listed = std::ranges::any_of(truth.feasible_assemblies, [&](const AssemblyGraph& a) {
    return a.nodes == g.nodes && a.edges == g.edges;
  });
  if (!listed) note(report, label, "returned assembly is not among the oracle's feasible assemblies");
}

}  // namespace

VerifyReport verify_scenario(const scenario::Scenario& s, const AssembleOptions& options) {
  VerifyReport report;
  verify_into(report, s, options, "scenario");
  return report;
}

VerifyReport verify_random(std::uint32_t count, std::uint64_t seed, std::uint32_t max_services,
                           const AssembleOptions& options) {
  VerifyReport report;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint64_t instance_seed = seed * 1'000'003ull + i;
    verify_into(report, scenario::generate_random_small(instance_seed, max_services), options,
                "instance " + std::to_string(i) + " (seed " + std::to_string(instance_seed) + ")");
  }
  return report;
}

}  // namespace selfasm::tools
