#include "selfasm/selfasm.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "selfasm/error.hpp"
#include "selfasm/scenario.hpp"
#include "selfasm/tools.hpp"

struct sa_scenario {
  selfasm::scenario::Scenario value;
};

struct sa_result {
  std::vector<selfasm::ServiceDescriptor> services;
  selfasm::AssembleOutcome outcome;
};

struct sa_timeline {
  selfasm::runtime::Timeline timeline;
  std::string trace;
};

namespace {

thread_local std::string last_error;

sa_status status_of(selfasm::Errc code) {
  using selfasm::Errc;
  switch (code) {
    case Errc::ParseError: return SA_ERR_PARSE;
    case Errc::BudgetExceeded: return SA_BUDGET_EXCEEDED;
    case Errc::UnknownType:
    case Errc::TemplateInvalid: return SA_ERR_TEMPLATE;
    case Errc::NoStartingService:
    case Errc::InsufficientServices: return SA_ERR_UNSATISFIABLE;
    case Errc::InstanceTooLarge: return SA_ERR_INSTANCE_TOO_LARGE;
    case Errc::MissingLinkQoS:
    case Errc::DisconnectedNode: return SA_ERR_INTERNAL;
    case Errc::DuplicateId:
    case Errc::PeerUnknown:
    case Errc::DomainError:
    case Errc::InvalidArgument: return SA_ERR_INVALID_ARGUMENT;
  }
  return SA_ERR_INTERNAL;
}

sa_status fail(sa_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <typename F>
sa_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const selfasm::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SA_ERR_INTERNAL, e.what());
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

sa_status give_string(const std::string& s, char** out) {
  if (!out) return fail(SA_ERR_INVALID_ARGUMENT, "null output pointer");
  *out = duplicate(s);
  return SA_OK;
}

selfasm::scenario::KRule rule_of(sa_k_kind kind, std::uint32_t k) {
  switch (kind) {
    case SA_K_ALL: return selfasm::scenario::KRule::all();
    case SA_K_HALF: return selfasm::scenario::KRule::half();
    case SA_K_FIXED:
      if (k == 0) throw selfasm::Error(selfasm::Errc::InvalidArgument, "k must be positive");
      return selfasm::scenario::KRule::fixed(k);
  }
  throw selfasm::Error(selfasm::Errc::InvalidArgument, "unknown k kind");
}

selfasm::AssembleOptions assemble_options(const sa_options* o) {
  selfasm::AssembleOptions out;
  if (o) {
    out.combination_budget = o->combination_budget;
    out.candidate_budget = o->candidate_budget;
    out.parallel = o->parallel != 0;
  }
  return out;
}

sa_status give_scenario(selfasm::scenario::Scenario s, sa_scenario** out) {
  if (!out) return fail(SA_ERR_INVALID_ARGUMENT, "null output pointer");
  *out = new sa_scenario{std::move(s)};
  return SA_OK;
}

sa_status verify_status(const selfasm::tools::VerifyReport& r, sa_verify_report* out) {
  if (out) *out = sa_verify_report{r.instances, r.feasible, r.infeasible, r.mismatches};
  if (r.mismatches == 0) return SA_OK;
  return fail(SA_ORACLE_MISMATCH, r.details.front());
}

}  // namespace

extern "C" {

const char* sa_version(void) { return "1.0.0"; }

const char* sa_last_error(void) { return last_error.c_str(); }

const char* sa_status_name(sa_status status) {
  switch (status) {
    case SA_OK: return "ok";
    case SA_ERR_PARSE: return "parse error";
    case SA_INFEASIBLE: return "infeasible";
    case SA_BUDGET_EXCEEDED: return "budget exceeded";
    case SA_ORACLE_MISMATCH: return "oracle mismatch";
    case SA_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SA_ERR_TEMPLATE: return "invalid template";
    case SA_ERR_UNSATISFIABLE: return "unsatisfiable";
    case SA_ERR_IO: return "i/o error";
    case SA_ERR_INSTANCE_TOO_LARGE: return "instance too large";
    case SA_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void sa_string_free(char* s) { std::free(s); }

sa_options sa_options_default(void) {
  const selfasm::AssembleOptions d;
  return sa_options{d.combination_budget, d.candidate_budget, d.parallel ? 1 : 0, 0.0};
}

sa_status sa_scenario_load_file(const char* path, sa_scenario** out) {
  return guarded([&] {
    if (!path) return fail(SA_ERR_INVALID_ARGUMENT, "null path");
    try {
      return give_scenario(selfasm::scenario::load_file(path), out);
    } catch (const selfasm::Error& e) {
      if (e.code() == selfasm::Errc::InvalidArgument) return fail(SA_ERR_IO, e.what());
      throw;
    }
  });
}

sa_status sa_scenario_parse_json(const char* json, sa_scenario** out) {
  return guarded([&] {
    if (!json) return fail(SA_ERR_INVALID_ARGUMENT, "null text");
    return give_scenario(selfasm::scenario::parse_json(json), out);
  });
}

sa_status sa_scenario_generate_one_layer(uint32_t n, sa_k_kind kind, uint32_t k, uint64_t seed, sa_scenario** out) {
  return guarded([&] { return give_scenario(selfasm::scenario::generate_one_layer(n, rule_of(kind, k), seed), out); });
}

sa_status sa_scenario_generate_pyramidal(uint32_t top_width, sa_k_kind kind, uint32_t k, uint64_t seed,
                                         sa_scenario** out) {
  return guarded(
      [&] { return give_scenario(selfasm::scenario::generate_pyramidal(top_width, rule_of(kind, k), seed), out); });
}

sa_status sa_scenario_generate_medical(uint64_t seed, sa_scenario** out) {
  return guarded([&] { return give_scenario(selfasm::scenario::generate_medical(seed), out); });
}

sa_status sa_scenario_to_json(const sa_scenario* s, char** out) {
  return guarded([&] {
    if (!s) return fail(SA_ERR_INVALID_ARGUMENT, "null scenario");
    return give_string(selfasm::scenario::to_json(s->value), out);
  });
}

size_t sa_scenario_service_count(const sa_scenario* s) { return s ? s->value.services.size() : 0; }

void sa_scenario_free(sa_scenario* s) { delete s; }

sa_status sa_assemble(const sa_scenario* s, const sa_options* options, sa_result** out) {
  return guarded([&] {
    if (!s || !out) return fail(SA_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    const auto& sc = s->value;
    auto net = selfasm::scenario::make_simulator(sc, false);
    selfasm::scenario::announce_all(net, sc.services);
    auto r = std::make_unique<sa_result>();
    r->services = sc.services;
    r->outcome = selfasm::assemble(sc.services, sc.tmpl, net, assemble_options(options));
    const auto status = r->outcome.status;
    *out = r.release();
    switch (status) {
      case selfasm::AssemblyStatus::Feasible: return SA_OK;
      case selfasm::AssemblyStatus::Infeasible:
        return fail(SA_INFEASIBLE, "no combination of candidates respects every threshold");
      case selfasm::AssemblyStatus::BudgetExceeded:
        return fail(SA_BUDGET_EXCEEDED, "combination budget exhausted");
    }
    return SA_ERR_INTERNAL;
  });
}

int sa_result_feasible(const sa_result* r) { return r && r->outcome.result ? 1 : 0; }
uint64_t sa_result_combinations_tested(const sa_result* r) { return r ? r->outcome.stats.combinations_tested : 0; }
uint64_t sa_result_candidate_count(const sa_result* r) { return r ? r->outcome.stats.candidate_count : 0; }
uint64_t sa_result_peak_candidate_count(const sa_result* r) { return r ? r->outcome.stats.peak_candidate_count : 0; }
uint64_t sa_result_mem_estimate(const sa_result* r) { return r ? r->outcome.stats.mem_estimate_bytes : 0; }

size_t sa_result_node_count(const sa_result* r) {
  return r && r->outcome.result ? r->outcome.result->assembly.nodes.size() : 0;
}

size_t sa_result_edge_count(const sa_result* r) {
  return r && r->outcome.result ? r->outcome.result->assembly.edges.size() : 0;
}

size_t sa_result_at_edge_count(const sa_result* r) { return r ? r->outcome.g_at.graph.edges.size() : 0; }

int64_t sa_result_load(const sa_result* r, const char* service_id) {
  if (!r || !service_id || !r->outcome.result) return -1;
  const auto& loads = r->outcome.result->per_service_load;
  const auto it = loads.find(selfasm::ServiceId{service_id});
  return it == loads.end() ? -1 : static_cast<int64_t>(it->second);
}

sa_status sa_result_to_dot(const sa_result* r, char** out) {
  return guarded([&] {
    if (!r) return fail(SA_ERR_INVALID_ARGUMENT, "null result");
    return give_string(selfasm::tools::to_dot(r->outcome, r->services), out);
  });
}

sa_status sa_result_to_json(const sa_result* r, char** out) {
  return guarded([&] {
    if (!r) return fail(SA_ERR_INVALID_ARGUMENT, "null result");
    return give_string(selfasm::tools::to_json(r->outcome, r->services), out);
  });
}

void sa_result_free(sa_result* r) { delete r; }

sa_status sa_simulate(const sa_scenario* s, const sa_options* options, sa_timeline** out) {
  return guarded([&] {
    if (!s || !out) return fail(SA_ERR_INVALID_ARGUMENT, "null argument");
    const auto& sc = s->value;
    auto net = selfasm::scenario::make_simulator(sc, true);
    selfasm::runtime::RuntimeOptions ro;
    ro.assemble = assemble_options(options);
    if (options) ro.response_tolerance = options->response_tolerance;
    auto t = std::make_unique<sa_timeline>();
    t->timeline = selfasm::runtime::run_scenario(net, sc.services, sc.tmpl, sc.events, ro);
    t->trace = net.trace_jsonl();
    *out = t.release();
    return SA_OK;
  });
}

size_t sa_timeline_entry_count(const sa_timeline* t) { return t ? t->timeline.entries.size() : 0; }

int sa_timeline_entry_feasible(const sa_timeline* t, size_t index) {
  if (!t || index >= t->timeline.entries.size()) return -1;
  return t->timeline.entries[index].feasible() ? 1 : 0;
}

sa_status sa_timeline_to_jsonl(const sa_timeline* t, char** out) {
  return guarded([&] {
    if (!t) return fail(SA_ERR_INVALID_ARGUMENT, "null timeline");
    return give_string(t->timeline.to_jsonl(), out);
  });
}

sa_status sa_timeline_trace_jsonl(const sa_timeline* t, char** out) {
  return guarded([&] {
    if (!t) return fail(SA_ERR_INVALID_ARGUMENT, "null timeline");
    return give_string(t->trace, out);
  });
}

void sa_timeline_free(sa_timeline* t) { delete t; }

sa_status sa_bench(const sa_scenario* s, const char* layout, uint64_t n, const char* k, const sa_options* options,
                   sa_bench_row* out, char** csv_row) {
  return guarded([&] {
    if (!s || !layout || !k) return fail(SA_ERR_INVALID_ARGUMENT, "null argument");
    const auto row = selfasm::tools::run_bench(layout, n, k, s->value, assemble_options(options));
    sa_status status = SA_OK;
    if (row.status == selfasm::AssemblyStatus::Infeasible) status = SA_INFEASIBLE;
    if (row.status == selfasm::AssemblyStatus::BudgetExceeded) status = SA_BUDGET_EXCEEDED;
    if (out) *out = sa_bench_row{row.candidates, row.wall_ms, row.mem_estimate, status};
    if (csv_row) *csv_row = duplicate(selfasm::tools::to_csv(row));
    return SA_OK;
  });
}

const char* sa_bench_csv_header(void) {
  static const std::string header = selfasm::tools::bench_csv_header();
  return header.c_str();
}

sa_status sa_verify_random(uint32_t count, uint64_t seed, uint32_t max_services, sa_verify_report* out) {
  return guarded([&] { return verify_status(selfasm::tools::verify_random(count, seed, max_services), out); });
}

sa_status sa_verify_scenario(const sa_scenario* s, sa_verify_report* out) {
  return guarded([&] {
    if (!s) return fail(SA_ERR_INVALID_ARGUMENT, "null scenario");
    return verify_status(selfasm::tools::verify_scenario(s->value), out);
  });
}

sa_status sa_count_combinations(uint64_t n, sa_k_kind kind, uint64_t k, uint64_t* out) {
  return guarded([&] {
    if (!out) return fail(SA_ERR_INVALID_ARGUMENT, "null output pointer");
    if (kind == SA_K_HALF) return fail(SA_ERR_INVALID_ARGUMENT, "half is a layout rule, not a constraint");
    if (kind == SA_K_FIXED && (k == 0 || k > UINT32_MAX)) return fail(SA_ERR_INVALID_ARGUMENT, "k out of range");
    const auto c = kind == SA_K_ALL ? selfasm::Constraint::all()
                                    : selfasm::Constraint::choose(static_cast<std::uint32_t>(k));
    *out = selfasm::count_combinations(n, c);
    return SA_OK;
  });
}

}  // extern "C"
