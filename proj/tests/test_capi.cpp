#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "selfasm/selfasm.h"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  sa_string_free(s);
  return out;
}

const char* kExample = SELFASM_TEST_DATA "/example7.json";

}  // namespace

TEST_CASE("assemble the example through the C interface") {
  sa_scenario* s = nullptr;
  REQUIRE(sa_scenario_load_file(kExample, &s) == SA_OK);
  CHECK(sa_scenario_service_count(s) == 7);

  const auto opts = sa_options_default();
  sa_result* r = nullptr;
  REQUIRE(sa_assemble(s, &opts, &r) == SA_OK);
  CHECK(sa_result_feasible(r) == 1);
  CHECK(sa_result_node_count(r) == 7);
  CHECK(sa_result_edge_count(r) == 9);
  CHECK(sa_result_at_edge_count(r) == 12);
  CHECK(sa_result_candidate_count(r) == 9);
  CHECK(sa_result_peak_candidate_count(r) == 3);
  CHECK(sa_result_load(r, "B1") <= 2);
  CHECK(sa_result_load(r, "C1") == 3);
  CHECK(sa_result_load(r, "nope") == -1);

  char* dot = nullptr;
  REQUIRE(sa_result_to_dot(r, &dot) == SA_OK);
  CHECK(take(dot).rfind("digraph", 0) == 0);
  char* json = nullptr;
  REQUIRE(sa_result_to_json(r, &json) == SA_OK);
  CHECK(take(json).find("\"feasible\": true") != std::string::npos);

  sa_result_free(r);
  sa_scenario_free(s);
}

TEST_CASE("error codes and messages") {
  sa_scenario* s = nullptr;
  CHECK(sa_scenario_parse_json("{\"services\": 3}", &s) == SA_ERR_PARSE);
  CHECK(s == nullptr);
  CHECK(std::string(sa_last_error()).find("ParseError") != std::string::npos);

  CHECK(sa_scenario_load_file("/nonexistent.json", &s) == SA_ERR_IO);
  CHECK(sa_scenario_parse_json(nullptr, &s) == SA_ERR_INVALID_ARGUMENT);
  CHECK(sa_assemble(nullptr, nullptr, nullptr) == SA_ERR_INVALID_ARGUMENT);
  CHECK(std::string(sa_status_name(SA_INFEASIBLE)) == "infeasible");

  const char* under =
      R"({"services":[{"id":"A1","type":"tA","qos_ms":1,"threshold":1},{"id":"B1","type":"tB","qos_ms":1,"threshold":1}],
          "template":{"body":[["tA","tB"]],"constraints":[2]}})";
  REQUIRE(sa_scenario_parse_json(under, &s) == SA_OK);
  sa_result* r = nullptr;
  CHECK(sa_assemble(s, nullptr, &r) == SA_ERR_UNSATISFIABLE);
  CHECK(r == nullptr);
  sa_scenario_free(s);

  const char* cyclic =
      R"({"services":[{"id":"A1","type":"tA","qos_ms":1,"threshold":1}],
          "template":{"body":[["tA","tB"],["tB","tA"]],"constraints":[1,1]}})";
  REQUIRE(sa_scenario_parse_json(cyclic, &s) == SA_OK);
  CHECK(sa_assemble(s, nullptr, &r) == SA_ERR_TEMPLATE);
  sa_scenario_free(s);
}

TEST_CASE("infeasible result still carries statistics") {
  const char* tight =
      R"({"services":[{"id":"A1","type":"tA","qos_ms":1,"threshold":1},{"id":"A2","type":"tA","qos_ms":1,"threshold":1},
                      {"id":"B1","type":"tB","qos_ms":1,"threshold":1}],
          "template":{"body":[["tA","tB"]],"constraints":[1]}})";
  sa_scenario* s = nullptr;
  REQUIRE(sa_scenario_parse_json(tight, &s) == SA_OK);
  sa_result* r = nullptr;
  CHECK(sa_assemble(s, nullptr, &r) == SA_INFEASIBLE);
  REQUIRE(r != nullptr);
  CHECK(sa_result_feasible(r) == 0);
  CHECK(sa_result_node_count(r) == 0);
  CHECK(sa_result_candidate_count(r) == 2);
  sa_result_free(r);
  sa_scenario_free(s);
}

TEST_CASE("simulate the self-healing scenario") {
  sa_scenario* s = nullptr;
  REQUIRE(sa_scenario_load_file(SELFASM_TEST_DATA "/example7_heal.json", &s) == SA_OK);
  sa_timeline* t = nullptr;
  REQUIRE(sa_simulate(s, nullptr, &t) == SA_OK);
  REQUIRE(sa_timeline_entry_count(t) == 3);
  CHECK(sa_timeline_entry_feasible(t, 0) == 1);
  CHECK(sa_timeline_entry_feasible(t, 1) == 0);
  CHECK(sa_timeline_entry_feasible(t, 2) == 1);
  CHECK(sa_timeline_entry_feasible(t, 3) == -1);
  char* lines = nullptr;
  REQUIRE(sa_timeline_to_jsonl(t, &lines) == SA_OK);
  CHECK(take(lines).find("service_disappears:B3") != std::string::npos);
  char* trace = nullptr;
  REQUIRE(sa_timeline_trace_jsonl(t, &trace) == SA_OK);
  CHECK(take(trace).find("\"withdraw\"") != std::string::npos);
  sa_timeline_free(t);
  sa_scenario_free(s);
}

TEST_CASE("generators, bench and counting") {
  sa_scenario* s = nullptr;
  REQUIRE(sa_scenario_generate_one_layer(40, SA_K_FIXED, 2, 1, &s) == SA_OK);
  sa_bench_row row{};
  char* csv = nullptr;
  const auto opts = sa_options_default();
  REQUIRE(sa_bench(s, "one-layer", 40, "2", &opts, &row, &csv) == SA_OK);
  CHECK(row.candidates == 780);
  CHECK(take(csv).rfind("one-layer,40,2,780,", 0) == 0);
  char* json = nullptr;
  REQUIRE(sa_scenario_to_json(s, &json) == SA_OK);
  sa_scenario* back = nullptr;
  CHECK(sa_scenario_parse_json(take(json).c_str(), &back) == SA_OK);
  CHECK(sa_scenario_service_count(back) == 41);
  sa_scenario_free(back);
  sa_scenario_free(s);

  CHECK(sa_scenario_generate_one_layer(0, SA_K_FIXED, 1, 1, &s) == SA_ERR_INVALID_ARGUMENT);
  CHECK(sa_scenario_generate_pyramidal(4, SA_K_FIXED, 0, 1, &s) == SA_ERR_INVALID_ARGUMENT);
  REQUIRE(sa_scenario_generate_pyramidal(4, SA_K_ALL, 0, 1, &s) == SA_OK);
  CHECK(sa_scenario_service_count(s) == 10);
  sa_scenario_free(s);
  REQUIRE(sa_scenario_generate_medical(2, &s) == SA_OK);
  CHECK(sa_scenario_service_count(s) == 26);
  sa_scenario_free(s);

  std::uint64_t n = 0;
  CHECK(sa_count_combinations(1000, SA_K_FIXED, 2, &n) == SA_OK);
  CHECK(n == 499500);
  CHECK(sa_count_combinations(5, SA_K_ALL, 0, &n) == SA_OK);
  CHECK(n == 1);
  CHECK(sa_count_combinations(5, SA_K_FIXED, 6, &n) == SA_ERR_INVALID_ARGUMENT);
}

TEST_CASE("verify through the C interface") {
  sa_verify_report report{};
  CHECK(sa_verify_random(20, 5, 12, &report) == SA_OK);
  CHECK(report.instances == 20);
  CHECK(report.mismatches == 0);
  CHECK(report.feasible + report.infeasible == 20);
}
