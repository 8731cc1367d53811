#ifndef SELFASM_SELFASM_H
#define SELFASM_SELFASM_H

/*
 * C interface to the self-assembly engine. Objects are opaque handles owned
 * by the caller and released with the matching *_free function. Every call
 * that can fail returns an sa_status; on failure a description is available
 * from sa_last_error() on the calling thread. Strings handed out through
 * char** parameters are heap allocated and released with sa_string_free.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SELFASM_BUILDING)
#    define SELFASM_API __declspec(dllexport)
#  else
#    define SELFASM_API __declspec(dllimport)
#  endif
#else
#  define SELFASM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* The first four codes double as the command-line tool's exit status. */
typedef enum sa_status {
  SA_OK = 0,
  SA_ERR_PARSE = 1,
  SA_INFEASIBLE = 2,
  SA_BUDGET_EXCEEDED = 3,
  SA_ORACLE_MISMATCH = 4,
  SA_ERR_INVALID_ARGUMENT = 5,
  SA_ERR_TEMPLATE = 6,
  SA_ERR_UNSATISFIABLE = 7, /* no starting service, or too few successors */
  SA_ERR_IO = 8,
  SA_ERR_INSTANCE_TOO_LARGE = 9,
  SA_ERR_INTERNAL = 10
} sa_status;

typedef enum sa_k_kind { SA_K_FIXED = 0, SA_K_ALL = 1, SA_K_HALF = 2 } sa_k_kind;

typedef struct sa_scenario sa_scenario;
typedef struct sa_result sa_result;
typedef struct sa_timeline sa_timeline;

typedef struct sa_options {
  uint64_t combination_budget;
  uint64_t candidate_budget;
  int parallel;
  double response_tolerance;
} sa_options;

typedef struct sa_bench_row {
  uint64_t candidates;
  double wall_ms;
  uint64_t mem_estimate;
  sa_status status;
} sa_bench_row;

typedef struct sa_verify_report {
  uint32_t instances;
  uint32_t feasible;
  uint32_t infeasible;
  uint32_t mismatches;
} sa_verify_report;

SELFASM_API const char* sa_version(void);
SELFASM_API const char* sa_last_error(void);
SELFASM_API const char* sa_status_name(sa_status status);
SELFASM_API void sa_string_free(char* s);

SELFASM_API sa_options sa_options_default(void);

/* Scenarios */
SELFASM_API sa_status sa_scenario_load_file(const char* path, sa_scenario** out);
SELFASM_API sa_status sa_scenario_parse_json(const char* json, sa_scenario** out);
SELFASM_API sa_status sa_scenario_generate_one_layer(uint32_t n, sa_k_kind kind, uint32_t k,
                                                      uint64_t seed, sa_scenario** out);
SELFASM_API sa_status sa_scenario_generate_pyramidal(uint32_t top_width, sa_k_kind kind, uint32_t k,
                                                      uint64_t seed, sa_scenario** out);
SELFASM_API sa_status sa_scenario_generate_medical(uint64_t seed, sa_scenario** out);
SELFASM_API sa_status sa_scenario_to_json(const sa_scenario* s, char** out);
SELFASM_API size_t sa_scenario_service_count(const sa_scenario* s);
SELFASM_API void sa_scenario_free(sa_scenario* s);

/* Assembly. SA_OK and SA_INFEASIBLE both produce a result handle carrying the
 * statistics; the graph accessors are empty for an infeasible result. */
SELFASM_API sa_status sa_assemble(const sa_scenario* s, const sa_options* options, sa_result** out);
SELFASM_API int sa_result_feasible(const sa_result* r);
SELFASM_API uint64_t sa_result_combinations_tested(const sa_result* r);
SELFASM_API uint64_t sa_result_candidate_count(const sa_result* r);
SELFASM_API uint64_t sa_result_peak_candidate_count(const sa_result* r);
SELFASM_API uint64_t sa_result_mem_estimate(const sa_result* r);
SELFASM_API size_t sa_result_node_count(const sa_result* r);
SELFASM_API size_t sa_result_edge_count(const sa_result* r);
SELFASM_API size_t sa_result_at_edge_count(const sa_result* r);
/* Distinct inbound bindings of `service_id` in the assembly, or -1 if absent. */
SELFASM_API int64_t sa_result_load(const sa_result* r, const char* service_id);
SELFASM_API sa_status sa_result_to_dot(const sa_result* r, char** out);
SELFASM_API sa_status sa_result_to_json(const sa_result* r, char** out);
SELFASM_API void sa_result_free(sa_result* r);

/* Scenario replay with re-assembly on events. */
SELFASM_API sa_status sa_simulate(const sa_scenario* s, const sa_options* options, sa_timeline** out);
SELFASM_API size_t sa_timeline_entry_count(const sa_timeline* t);
SELFASM_API int sa_timeline_entry_feasible(const sa_timeline* t, size_t index);
SELFASM_API sa_status sa_timeline_to_jsonl(const sa_timeline* t, char** out);
SELFASM_API sa_status sa_timeline_trace_jsonl(const sa_timeline* t, char** out);
SELFASM_API void sa_timeline_free(sa_timeline* t);

/* Benchmark one scenario; `layout`, `n` and `k` only label the CSV row. */
SELFASM_API sa_status sa_bench(const sa_scenario* s, const char* layout, uint64_t n, const char* k,
                               const sa_options* options, sa_bench_row* out, char** csv_row);
SELFASM_API const char* sa_bench_csv_header(void);

/* Oracle cross-checks. A mismatch yields SA_ORACLE_MISMATCH with the first
 * disagreement in sa_last_error(). */
SELFASM_API sa_status sa_verify_random(uint32_t count, uint64_t seed, uint32_t max_services,
                                       sa_verify_report* out);
SELFASM_API sa_status sa_verify_scenario(const sa_scenario* s, sa_verify_report* out);

SELFASM_API sa_status sa_count_combinations(uint64_t n, sa_k_kind kind, uint64_t k, uint64_t* out);

#ifdef __cplusplus
}
#endif

#endif
