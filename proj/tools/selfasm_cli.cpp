// Command-line driver. Talks to the engine only through the C interface.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "selfasm/selfasm.h"

namespace {

struct ScenarioDeleter {
  void operator()(sa_scenario* s) const { sa_scenario_free(s); }
};
struct ResultDeleter {
  void operator()(sa_result* r) const { sa_result_free(r); }
};
struct TimelineDeleter {
  void operator()(sa_timeline* t) const { sa_timeline_free(t); }
};
using ScenarioPtr = std::unique_ptr<sa_scenario, ScenarioDeleter>;
using ResultPtr = std::unique_ptr<sa_result, ResultDeleter>;
using TimelinePtr = std::unique_ptr<sa_timeline, TimelineDeleter>;

// Thrown to unwind with a specific exit status after printing a message.
struct Exit {
  int code;
};

int exit_code(sa_status s) {
  switch (s) {
    case SA_OK: return 0;
    case SA_INFEASIBLE:
    case SA_ERR_UNSATISFIABLE: return 2;
    case SA_BUDGET_EXCEEDED: return 3;
    case SA_ORACLE_MISMATCH: return 4;
    default: return 1;
  }
}

void check(sa_status s) {
  if (s == SA_OK) return;
  std::cerr << "selfasm: " << sa_status_name(s);
  if (*sa_last_error()) std::cerr << ": " << sa_last_error();
  std::cerr << "\n";
  throw Exit{exit_code(s)};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  sa_string_free(s);
  return out;
}

// "-" writes to stdout.
void write_file(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content)) {
    std::cerr << "selfasm: cannot write " << path << "\n";
    throw Exit{1};
  }
}

struct KArg {
  sa_k_kind kind = SA_K_FIXED;
  std::uint32_t k = 1;
};

KArg parse_k(const std::string& text) {
  if (text == "all" || text == "ALL") return {SA_K_ALL, 0};
  if (text == "half" || text == "HALF") return {SA_K_HALF, 0};
  try {
    std::size_t used = 0;
    const auto v = std::stoul(text, &used);
    if (used == text.size() && v >= 1 && v <= 0xFFFFFFFFul) return {SA_K_FIXED, static_cast<std::uint32_t>(v)};
  } catch (const std::exception&) {
  }
  std::cerr << "selfasm: --k expects a positive integer, all or half\n";
  throw Exit{1};
}

struct Source {
  std::string scenario;
  std::string layout;
  std::uint64_t seed = 1;
  std::uint32_t n = 10;
  std::string k = "1";
  std::uint32_t top_width = 10;
};

void add_generator_flags(CLI::App* cmd, Source& src, bool with_n = true) {
  cmd->add_option("--seed", src.seed, "Seed for generated layouts");
  if (with_n) cmd->add_option("--n", src.n, "Width of the one-layer layout");
  cmd->add_option("--k", src.k, "Constraint: integer, all or half");
  if (with_n) cmd->add_option("--top-width", src.top_width, "Top layer width of the pyramidal layout");
}

ScenarioPtr generate(const std::string& layout, std::uint32_t n, std::uint32_t top_width, const KArg& k,
                     std::uint64_t seed) {
  sa_scenario* raw = nullptr;
  if (layout == "one-layer") check(sa_scenario_generate_one_layer(n, k.kind, k.k, seed, &raw));
  else if (layout == "pyramidal") check(sa_scenario_generate_pyramidal(top_width, k.kind, k.k, seed, &raw));
  else if (layout == "medical") check(sa_scenario_generate_medical(seed, &raw));
  else {
    std::cerr << "selfasm: unknown layout " << layout << " (one-layer, pyramidal, medical)\n";
    throw Exit{1};
  }
  return ScenarioPtr(raw);
}

ScenarioPtr load(const Source& src) {
  if (!src.scenario.empty()) {
    sa_scenario* raw = nullptr;
    check(sa_scenario_load_file(src.scenario.c_str(), &raw));
    return ScenarioPtr(raw);
  }
  if (src.layout.empty()) {
    std::cerr << "selfasm: give --scenario or --layout\n";
    throw Exit{1};
  }
  return generate(src.layout, src.n, src.top_width, parse_k(src.k), src.seed);
}

sa_options make_options(std::uint64_t budget, bool parallel) {
  auto o = sa_options_default();
  if (budget) o.combination_budget = budget;
  o.parallel = parallel ? 1 : 0;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Template-driven service self-assembly"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sa_version()));

  Source src;
  std::uint64_t budget = 0;
  bool parallel = false;
  std::string dot_path, json_path, timeline_path, trace_path, out_path;

  auto* assemble = app.add_subcommand("assemble", "Assemble a scenario and report statistics");
  assemble->add_option("--scenario", src.scenario, "Scenario JSON file");
  assemble->add_option("--layout", src.layout, "Generate instead: one-layer, pyramidal or medical");
  add_generator_flags(assemble, src);
  assemble->add_option("--budget", budget, "Combination budget");
  assemble->add_flag("--parallel", parallel, "Enumerate starting services in parallel");
  assemble->add_option("--dot", dot_path, "Write the assembly as DOT");
  assemble->add_option("--json", json_path, "Write the assembly as JSON");

  auto* simulate = app.add_subcommand("simulate", "Replay a scenario's events with self-healing");
  simulate->add_option("--scenario", src.scenario, "Scenario JSON file")->required();
  simulate->add_option("--budget", budget, "Combination budget");
  simulate->add_flag("--parallel", parallel, "Enumerate starting services in parallel");
  simulate->add_option("--timeline", timeline_path, "Write the timeline as JSON lines (default: stdout)");
  simulate->add_option("--trace", trace_path, "Write the network event trace as JSON lines");

  std::string bench_layout = "one-layer";
  std::vector<std::uint32_t> sizes;
  auto* bench = app.add_subcommand("bench", "Time assembly on generated layouts, CSV output");
  bench->add_option("layout", bench_layout, "one-layer, pyramidal or medical");
  bench->add_option("--n", sizes, "Layout sizes (n, or top width for pyramidal)")->delimiter(',');
  add_generator_flags(bench, src, false);
  bench->add_option("--budget", budget, "Combination budget");
  bench->add_flag("--parallel", parallel, "Enumerate starting services in parallel");
  bench->add_option("--out", out_path, "Write CSV here instead of stdout");

  std::uint32_t random_count = 0;
  std::uint32_t max_services = 12;
  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "Cross-check the assembler against the exhaustive oracle");
  verify->add_option("--scenario", src.scenario, "Scenario JSON file");
  verify->add_option("--random", random_count, "Number of random instances");
  verify->add_option("--seed", verify_seed, "Seed for random instances");
  verify->add_option("--max-services", max_services, "Largest random instance");

  std::string gen_layout;
  auto* gen = app.add_subcommand("generate", "Write a generated scenario as JSON");
  gen->add_option("layout", gen_layout, "one-layer, pyramidal or medical")->required();
  add_generator_flags(gen, src);
  gen->add_option("--out", out_path, "Output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*assemble) {
      const auto scenario = load(src);
      const auto options = make_options(budget, parallel);
      sa_result* raw = nullptr;
      const auto t0 = std::chrono::steady_clock::now();
      const sa_status status = sa_assemble(scenario.get(), &options, &raw);
      const double wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      ResultPtr result(raw);
      if (!result) check(status);

      char* text = nullptr;
      if (!dot_path.empty()) {
        check(sa_result_to_dot(result.get(), &text));
        write_file(dot_path, take(text));
      }
      if (!json_path.empty()) {
        check(sa_result_to_json(result.get(), &text));
        write_file(json_path, take(text));
      }
      std::printf("status=%s n_services=%zu combinations_tested=%llu wall_ms=%.3f peak_candidate_count=%llu\n",
                  status == SA_OK ? "feasible" : sa_status_name(status), sa_scenario_service_count(scenario.get()),
                  static_cast<unsigned long long>(sa_result_combinations_tested(result.get())), wall_ms,
                  static_cast<unsigned long long>(sa_result_peak_candidate_count(result.get())));
      return exit_code(status);
    }

    if (*simulate) {
      const auto scenario = load(src);
      const auto options = make_options(budget, parallel);
      sa_timeline* raw = nullptr;
      check(sa_simulate(scenario.get(), &options, &raw));
      TimelinePtr timeline(raw);
      char* text = nullptr;
      check(sa_timeline_to_jsonl(timeline.get(), &text));
      const auto lines = take(text);
      if (timeline_path.empty()) std::fputs(lines.c_str(), stdout);
      else write_file(timeline_path, lines);
      if (!trace_path.empty()) {
        check(sa_timeline_trace_jsonl(timeline.get(), &text));
        write_file(trace_path, take(text));
      }
      return 0;
    }

    if (*bench) {
      if (sizes.empty()) sizes.push_back(bench_layout == "pyramidal" ? 10 : 1000);
      if (bench_layout == "medical") sizes = {26};
      const auto k = parse_k(src.k);
      const auto options = make_options(budget, parallel);
      std::string csv = std::string(sa_bench_csv_header()) + "\n";
      for (auto n : sizes) {
        const auto scenario = generate(bench_layout, n, n, k, src.seed);
        sa_bench_row row{};
        char* line = nullptr;
        check(sa_bench(scenario.get(), bench_layout.c_str(), n, src.k.c_str(), &options, &row, &line));
        csv += take(line) + "\n";
      }
      if (out_path.empty()) std::fputs(csv.c_str(), stdout);
      else write_file(out_path, csv);
      return 0;
    }

    if (*verify) {
      sa_verify_report report{};
      sa_status status;
      if (!src.scenario.empty()) {
        const auto scenario = load(src);
        status = sa_verify_scenario(scenario.get(), &report);
      } else if (random_count > 0) {
        status = sa_verify_random(random_count, verify_seed, max_services, &report);
      } else {
        std::cerr << "selfasm: give --scenario or --random N\n";
        return 1;
      }
      if (status != SA_OK && status != SA_ORACLE_MISMATCH) check(status);
      std::printf("instances=%u feasible=%u infeasible=%u mismatches=%u\n", report.instances, report.feasible,
                  report.infeasible, report.mismatches);
      if (status == SA_ORACLE_MISMATCH) std::fprintf(stderr, "selfasm: first mismatch: %s\n", sa_last_error());
      return exit_code(status);
    }

    if (*gen) {
      const auto scenario = generate(gen_layout, src.n, src.top_width, parse_k(src.k), src.seed);
      char* text = nullptr;
      check(sa_scenario_to_json(scenario.get(), &text));
      const auto json = take(text);
      if (out_path.empty()) std::fputs(json.c_str(), stdout);
      else write_file(out_path, json);
      return 0;
    }
  } catch (const Exit& e) {
    return e.code;
  }
  return 1;
}
