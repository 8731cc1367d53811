#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "selfasm/error.hpp"
#include "selfasm/model.hpp"
#include "selfasm/oracle.hpp"

using namespace selfasm;
using fixtures::svc;

namespace {

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::InvalidArgument;
}

bool has_kind(const std::vector<TemplateViolation>& v, TemplateViolation::Kind k) {
  return std::ranges::any_of(v, [&](const auto& x) { return x.kind == k; });
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("roles of the seven-service example") {
    const auto services = fixtures::seven_services();
    const auto roles = classify_roles(services, fixtures::chain_template());
    for (auto id : {"A1", "A2", "A3"}) CHECK(roles.at(ServiceId{id}) == Role::Starting);
    for (auto id : {"B1", "B2", "B3"}) CHECK(roles.at(ServiceId{id}) == Role::Intermediate);
    CHECK(roles.at(ServiceId{"C1"}) == Role::Ending);
  }

  TEST_CASE("two-node chain roles") {
    const std::vector services{svc("A1", "tA", 1, 1), svc("B1", "tB", 1, 1)};
    ApplicationTemplate t{{{ServiceTypeId{"tA"}, ServiceTypeId{"tB"}}}, {Constraint::choose(1)}};
    const auto roles = classify_roles(services, t);
    CHECK(roles.at(ServiceId{"A1"}) == Role::Starting);
    CHECK(roles.at(ServiceId{"B1"}) == Role::Ending);
  }

  TEST_CASE("empty body gives no roles") {
    const std::vector services{svc("X1", "tX", 1, 1)};
    CHECK(code_of([&] { classify_roles(services, ApplicationTemplate{}); }) == Errc::UnknownType);
  }

  TEST_CASE("template validation") {
    const std::set<ServiceTypeId> abc{ServiceTypeId{"tA"}, ServiceTypeId{"tB"}, ServiceTypeId{"tC"}};
    CHECK(validate_template(fixtures::chain_template(), abc).empty());

    ApplicationTemplate two_starts{{{ServiceTypeId{"tA"}, ServiceTypeId{"tB"}}, {ServiceTypeId{"tC"}, ServiceTypeId{"tB"}}},
                                   {Constraint::choose(1), Constraint::choose(1)}};
    CHECK(has_kind(validate_template(two_starts, abc), TemplateViolation::Kind::MultipleStartingTypes));

    ApplicationTemplate cycle{{{ServiceTypeId{"tA"}, ServiceTypeId{"tB"}}, {ServiceTypeId{"tB"}, ServiceTypeId{"tA"}}},
                              {Constraint::choose(1), Constraint::choose(1)}};
    CHECK(has_kind(validate_template(cycle, abc), TemplateViolation::Kind::Cycle));

    CHECK(has_kind(validate_template(ApplicationTemplate{}, abc), TemplateViolation::Kind::EmptyBody));

    auto mismatch = fixtures::chain_template();
    mismatch.constraints.pop_back();
    CHECK(has_kind(validate_template(mismatch, abc), TemplateViolation::Kind::LengthMismatch));

    auto zero = fixtures::chain_template(Constraint::choose(0));
    CHECK(has_kind(validate_template(zero, abc), TemplateViolation::Kind::ZeroConstraint));

    auto dup = fixtures::chain_template();
    dup.body.push_back(dup.body.front());
    dup.constraints.push_back(Constraint::choose(1));
    CHECK(has_kind(validate_template(dup, abc), TemplateViolation::Kind::DuplicatePair));

    const std::set<ServiceTypeId> ab{ServiceTypeId{"tA"}, ServiceTypeId{"tB"}};
    CHECK(has_kind(validate_template(fixtures::chain_template(), ab), TemplateViolation::Kind::DanglingType));
  }

  TEST_CASE("topological order and start type") {
    const auto t = fixtures::chain_template();
    const auto order = topological_types(t);
    REQUIRE(order.size() == 3);
    CHECK(order[0].str() == "tA");
    CHECK(order[1].str() == "tB");
    CHECK(order[2].str() == "tC");
    CHECK(starting_type(t).str() == "tA");
  }

  TEST_CASE("catalog rejects bad descriptors") {
    const std::vector dup{svc("A1", "tA", 1, 1), svc("A1", "tB", 1, 1)};
    CHECK(code_of([&] { make_catalog(dup); }) == Errc::DuplicateId);
    const std::vector zero_thr{svc("A1", "tA", 1, 0)};
    CHECK(code_of([&] { make_catalog(zero_thr); }) == Errc::InvalidArgument);
    const std::vector negative{svc("A1", "tA", -1, 1)};
    CHECK(code_of([&] { make_catalog(negative); }) == Errc::InvalidArgument);
  }

  TEST_CASE("path cost") {
    const auto catalog = make_catalog(fixtures::seven_services());
    QoSMatrix zero;
    AssemblyGraph fork;
    for (auto [a, b] : {std::pair{"A1", "B1"}, {"A1", "B3"}, {"B1", "C1"}, {"B3", "C1"}}) {
      fork.add_edge(ServiceId{a}, ServiceId{b});
      zero.set(fixtures::edge(a, b), 0.0);
    }
    CHECK(path_cost(fork, ServiceId{"A1"}, catalog, zero) == doctest::Approx(10.0));

    AssemblyGraph single;
    single.add_node(ServiceId{"A1"});
    CHECK(path_cost(single, ServiceId{"A1"}, catalog, QoSMatrix{}) == doctest::Approx(1.0));

    // Value frozen from the path-enumerating oracle.
    AssemblyGraph chain;
    chain.add_edge(ServiceId{"A1"}, ServiceId{"B1"});
    chain.add_edge(ServiceId{"B1"}, ServiceId{"C1"});
    QoSMatrix links;
    links.set(fixtures::edge("A1", "B1"), 3.0);
    links.set(fixtures::edge("B1", "C1"), 7.0);
    CHECK(path_cost(chain, ServiceId{"A1"}, catalog, links) == doctest::Approx(18.0));
    CHECK(oracle::exhaustive_F(chain, ServiceId{"A1"}, catalog, links) == doctest::Approx(18.0));

    QoSMatrix missing;
    missing.set(fixtures::edge("A1", "B1"), 3.0);
    CHECK(code_of([&] { path_cost(chain, ServiceId{"A1"}, catalog, missing); }) == Errc::MissingLinkQoS);

    AssemblyGraph disconnected = chain;
    disconnected.add_node(ServiceId{"B2"});
    CHECK(code_of([&] { path_cost(disconnected, ServiceId{"A1"}, catalog, links); }) == Errc::DisconnectedNode);
  }

  TEST_CASE("path cost agrees with path enumeration on random DAGs") {
    std::mt19937_64 rng(11);
    for (int round = 0; round < 200; ++round) {
      const int n = 2 + static_cast<int>(rng() % 7);
      std::vector<ServiceDescriptor> services;
      for (int i = 0; i < n; ++i)
        services.push_back(svc("S" + std::to_string(i), "t", static_cast<double>(rng() % 100) / 10.0, 1));
      const auto catalog = make_catalog(services);
      AssemblyGraph g;
      QoSMatrix links;
      g.add_node(services[0].id);
      // Edges only go from lower to higher index, and every node hangs off an
      // earlier one so the graph stays connected from S0.
      for (int j = 1; j < n; ++j) {
        const int parent = static_cast<int>(rng() % j);
        g.add_edge(services[parent].id, services[j].id);
        links.set(Binding{services[parent].id, services[j].id}, static_cast<double>(rng() % 50) / 10.0);
        for (int i = 0; i < j; ++i) {
          if (i == parent || rng() % 3 != 0) continue;
          g.add_edge(services[i].id, services[j].id);
          links.set(Binding{services[i].id, services[j].id}, static_cast<double>(rng() % 50) / 10.0);
        }
      }
      CHECK(is_acyclic(g));
      CHECK(path_cost(g, services[0].id, catalog, links) ==
            doctest::Approx(oracle::exhaustive_F(g, services[0].id, catalog, links)));
    }
  }

  TEST_CASE("acyclicity") {
    AssemblyGraph g;
    g.add_edge(ServiceId{"a"}, ServiceId{"b"});
    CHECK(is_acyclic(g));
    g.add_edge(ServiceId{"b"}, ServiceId{"a"});
    CHECK_FALSE(is_acyclic(g));
  }

  TEST_CASE("constraint rendering") {
    CHECK(to_string(Constraint::all()) == "ALL");
    CHECK(to_string(Constraint::choose(3)) == "3");
  }
}
