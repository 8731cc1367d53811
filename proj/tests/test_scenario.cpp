#include <doctest.h>

#include <cctype>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "selfasm/error.hpp"
#include "selfasm/oracle.hpp"
#include "selfasm/tools.hpp"

using namespace selfasm;
using namespace selfasm::scenario;

namespace {

// Recursive-descent checker for the DOT language grammar (graph, stmt_list,
// node/edge/attr statements, attribute lists, subgraphs, the three ID forms).
// HTML strings are not supported. Counts node and edge statements.
class DotChecker {
 public:
  explicit DotChecker(std::string text) : s_(std::move(text)) {}

  bool parse() {
    try {
      skip();
      if (keyword("strict")) skip();
      if (keyword("digraph")) directed_ = true;
      else if (!keyword("graph")) return false;
      skip();
      if (peek() != '{') id();
      expect('{');
      stmt_list();
      expect('}');
      skip();
      return pos_ == s_.size();
    } catch (const std::runtime_error&) {
      return false;
    }
  }

  int nodes = 0;
  int edges = 0;

 private:
  char peek() {
    skip();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  void skip() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_.compare(pos_, 2, "//") == 0 || s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (s_.compare(pos_, 2, "/*") == 0) {
        const auto end = s_.find("*/", pos_ + 2);
        if (end == std::string::npos) throw std::runtime_error("unterminated comment");
        pos_ = end + 2;
      } else {
        break;
      }
    }
  }

  bool keyword(const char* kw) {
    const std::size_t n = std::strlen(kw);
    if (s_.size() - pos_ < n) return false;
    for (std::size_t i = 0; i < n; ++i)
      if (std::tolower(static_cast<unsigned char>(s_[pos_ + i])) != kw[i]) return false;
    if (pos_ + n < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_ + n])) || s_[pos_ + n] == '_'))
      return false;
    pos_ += n;
    return true;
  }

  void expect(char c) {
    if (peek() != c) throw std::runtime_error(std::string("expected ") + c);
    ++pos_;
  }

  void id() {
    const char c = peek();
    if (c == '"') {
      ++pos_;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        if (s_[pos_] == '\\') ++pos_;
        ++pos_;
      }
      if (pos_ >= s_.size()) throw std::runtime_error("unterminated string");
      ++pos_;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.') {
      ++pos_;
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    } else {
      throw std::runtime_error("expected ID");
    }
  }

  void attr_list() {
    while (peek() == '[') {
      ++pos_;
      while (peek() != ']') {
        id();
        expect('=');
        id();
        if (peek() == ';' || peek() == ',') ++pos_;
      }
      ++pos_;
    }
  }

  void node_id() {
    id();
    if (peek() == ':') {
      ++pos_;
      id();
      if (peek() == ':') {
        ++pos_;
        id();
      }
    }
  }

  bool edge_op() {
    skip();
    if (s_.compare(pos_, 2, directed_ ? "->" : "--") == 0) {
      pos_ += 2;
      return true;
    }
    return false;
  }

  void operand() {
    skip();
    if (peek() == '{' || keyword("subgraph")) subgraph_body();
    else node_id();
  }

  void subgraph_body() {
    if (peek() != '{') id();
    expect('{');
    stmt_list();
    expect('}');
  }

  void stmt_list() {
    while (peek() != '}' && peek() != '\0') {
      stmt();
      if (peek() == ';') ++pos_;
    }
  }

  void stmt() {
    skip();
    if (keyword("graph") || keyword("node") || keyword("edge")) {
      attr_list();
      return;
    }
    operand();
    if (edge_op()) {
      do operand();
      while (edge_op());
      ++edges;
      attr_list();
      return;
    }
    if (peek() == '=') {
      ++pos_;
      id();
      return;
    }
    ++nodes;
    attr_list();
  }

  std::string s_;
  std::size_t pos_ = 0;
  bool directed_ = false;
};

Scenario example7() { return load_file(SELFASM_TEST_DATA "/example7.json"); }

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("example file parses to the worked example") {
    const auto s = example7();
    CHECK(s.services == fixtures::seven_services());
    CHECK(s.tmpl == fixtures::chain_template());
    CHECK(std::holds_alternative<netsim::MatrixLatency>(s.links));
    CHECK(std::get<netsim::MatrixLatency>(s.links).entries.size() == 12);
  }

  TEST_CASE("round trip is value-preserving and stable") {
    for (const auto& s : {example7(), load_file(SELFASM_TEST_DATA "/example7_heal.json"), generate_medical(4),
                          generate_pyramidal(5, KRule::half(), 2), generate_one_layer(9, KRule::all(), 8)}) {
      const auto text = to_json(s);
      const auto back = parse_json(text);
      CHECK(back.services == s.services);
      CHECK(back.tmpl == s.tmpl);
      CHECK(to_json(back) == text);
      CHECK(back.events.size() == s.events.size());
    }
  }

  TEST_CASE("seeded latency round trip") {
    Scenario s = example7();
    s.links = netsim::SeededLatency{5.0, 1.5, 18446744073709551615ull};
    const auto back = parse_json(to_json(s));
    const auto& l = std::get<netsim::SeededLatency>(back.links);
    CHECK(l.seed == 18446744073709551615ull);
    CHECK(l.jitter_ms == 1.5);
  }

  TEST_CASE("strict parsing") {
    auto base = nlohmann::json::parse(to_json(example7()));
    auto rejects = [](const nlohmann::json& j) {
      try {
        parse_json(j.dump());
      } catch (const Error& e) {
        return e.code() == Errc::ParseError;
      }
      return false;
    };
    CHECK(rejects(nlohmann::json::parse("[]")));
    auto extra = base;
    extra["colour"] = "blue";
    CHECK(rejects(extra));
    auto svc_extra = base;
    svc_extra["services"][0]["owner"] = "x";
    CHECK(rejects(svc_extra));
    auto bad_thr = base;
    bad_thr["services"][0]["threshold"] = 0;
    CHECK(rejects(bad_thr));
    auto bad_k = base;
    bad_k["template"]["constraints"][0] = "SOME";
    CHECK(rejects(bad_k));
    auto zero_k = base;
    zero_k["template"]["constraints"][0] = 0;
    CHECK(rejects(zero_k));
    auto dup = base;
    dup["services"].push_back(dup["services"][0]);
    CHECK(rejects(dup));
    auto unsorted = base;
    unsorted["events"] = nlohmann::json::array({{{"at_ms", 5}, {"kind", "service_disappears"}, {"id", "B1"}},
                                                {{"at_ms", 1}, {"kind", "service_disappears"}, {"id", "B2"}}});
    CHECK(rejects(unsorted));
    auto bad_kind = base;
    bad_kind["links"]["kind"] = "gaussian";
    CHECK(rejects(bad_kind));
    CHECK_THROWS_AS(parse_json("{ not json"), Error);
    CHECK_THROWS_AS(load_file("/nonexistent/file.json"), Error);
  }

  TEST_CASE("generators are seed-deterministic") {
    CHECK(to_json(generate_one_layer(50, KRule::fixed(2), 3)) == to_json(generate_one_layer(50, KRule::fixed(2), 3)));
    CHECK(to_json(generate_one_layer(50, KRule::fixed(2), 3)) != to_json(generate_one_layer(50, KRule::fixed(2), 4)));
    CHECK(to_json(generate_pyramidal(6, KRule::all(), 1)) == to_json(generate_pyramidal(6, KRule::all(), 1)));
    CHECK(to_json(generate_medical(7)) == to_json(generate_medical(7)));
    CHECK(to_json(generate_random_small(99, 12)) == to_json(generate_random_small(99, 12)));
  }

  TEST_CASE("layout sizes") {
    CHECK(generate_pyramidal(13, KRule::fixed(1), 1).services.size() == 91);
    CHECK(generate_pyramidal(7, KRule::fixed(1), 1).services.size() == 28);
    const auto ten = generate_pyramidal(10, KRule::all(), 1);
    CHECK(ten.services.size() == 55);
    CHECK(body_types(ten.tmpl).size() == 10);
    CHECK(ten.tmpl.body.size() == 9);

    const auto med = generate_medical(1);
    CHECK(med.services.size() == 26);
    for (const auto& s : med.services)
      if (s.type.str() == "tB") CHECK(s.threshold == 10);

    const auto one = generate_one_layer(20, KRule::half(), 1);
    CHECK(one.services.size() == 21);
    CHECK(one.tmpl.constraints[0] == Constraint::choose(10));
  }

  TEST_CASE("generated ranges") {
    const auto s = generate_one_layer(400, KRule::fixed(1), 5);
    for (const auto& d : s.services) {
      CHECK(d.qos_ms >= 1.0);
      CHECK(d.qos_ms <= 10.0);
      CHECK(d.threshold >= 1);
      CHECK(d.threshold <= 200);
    }
    for (const auto& [b, ms] : std::get<netsim::MatrixLatency>(s.links).entries) {
      CHECK(ms >= 0.1);
      CHECK(ms <= 5.0);
    }
  }

  TEST_CASE("random instances stay within bounds") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto s = generate_random_small(seed, 12);
      CHECK(s.services.size() <= 12);
      const auto types = body_types(s.tmpl);
      CHECK(types.size() >= 2);
      CHECK(types.size() <= 3);
      CHECK(validate_template(s.tmpl, types).empty());
    }
  }

  TEST_CASE("k rules") {
    CHECK(parse_krule("all").kind == KRule::Kind::All);
    CHECK(parse_krule("HALF").kind == KRule::Kind::Half);
    CHECK(parse_krule("7").k == 7);
    CHECK_THROWS_AS(parse_krule("0"), Error);
    CHECK_THROWS_AS(parse_krule("-2"), Error);
    CHECK_THROWS_AS(parse_krule("two"), Error);
    CHECK(KRule::half().resolve(1, false) == Constraint::choose(1));
    CHECK(KRule::fixed(5).resolve(3, true) == Constraint::choose(3));
    CHECK(KRule::fixed(5).resolve(3, false) == Constraint::choose(5));
  }
}

TEST_SUITE("tools") {
  TEST_CASE("DOT export parses and has one statement per node and edge") {
    const auto s = example7();
    auto net = fixtures::live(s.services, s.links);
    const auto out = assemble(s.services, s.tmpl, net);
    DotChecker dot(tools::to_dot(out, s.services));
    REQUIRE(dot.parse());
    CHECK(dot.nodes == 7);
    CHECK(dot.edges == 9);

    DotChecker empty(tools::to_dot(AssembleOutcome{}, s.services));
    CHECK(empty.parse());
    CHECK(empty.nodes == 0);
  }

  TEST_CASE("DOT checker rejects malformed input") {
    CHECK_FALSE(DotChecker("digraph { a -> }").parse());
    CHECK_FALSE(DotChecker("digraph { \"a }").parse());
    CHECK_FALSE(DotChecker("graph { a -> b }").parse());
    CHECK_FALSE(DotChecker("digraph { a [label=] }").parse());
    CHECK(DotChecker("strict digraph g { node [shape=box]; a -> b -> c; subgraph s { d } x = y }").parse());
  }

  TEST_CASE("JSON export") {
    const auto out = fixtures::assemble_seven();
    const auto j = nlohmann::json::parse(tools::to_json(out, fixtures::seven_services()));
    CHECK(j["feasible"] == true);
    CHECK(j["nodes"].size() == 7);
    CHECK(j["edges"].size() == 9);
    CHECK(j["loads"]["B2"] == 3);
    CHECK(j["combinations_tested"] == 3);
    CHECK(j["total_cost_per_start"]["A3"] == 10.0);
  }

  TEST_CASE("bench rows") {
    const auto s = generate_one_layer(30, KRule::fixed(2), 1);
    const auto row = tools::run_bench("one-layer", 30, "2", s, {});
    CHECK(row.candidates == 435);
    CHECK(tools::to_csv(row).rfind("one-layer,30,2,435,", 0) == 0);
    CHECK(tools::bench_csv_header() == "layout,n,k,candidates,wall_ms,mem_estimate,status");

    AssembleOptions tiny;
    tiny.candidate_budget = 10;
    CHECK(tools::run_bench("one-layer", 30, "2", s, tiny).status == AssemblyStatus::BudgetExceeded);
  }

  TEST_CASE("verify on the example scenario") {
    const auto r = tools::verify_scenario(example7());
    CHECK(r.instances == 1);
    CHECK(r.feasible == 1);
    CHECK(r.mismatches == 0);
  }
}
