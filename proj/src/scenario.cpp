#include "selfasm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "selfasm/error.hpp"

namespace selfasm::scenario {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(Errc::ParseError, where + ": " + what);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(where, "unknown key \"" + key + "\"");
}

const json& field(const json& j, const std::string& where, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing key \"") + key + "\"");
  return *it;
}

std::string string_field(const json& j, const std::string& where, const char* key) {
  const auto& v = field(j, where, key);
  if (!v.is_string() || v.get_ref<const std::string&>().empty())
    fail(where, std::string("\"") + key + "\" must be a non-empty string");
  return v.get<std::string>();
}

double number_field(const json& j, const std::string& where, const char* key) {
  const auto& v = field(j, where, key);
  if (!v.is_number()) fail(where, std::string("\"") + key + "\" must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d) || d < 0) fail(where, std::string("\"") + key + "\" must be finite and non-negative");
  return d;
}

std::uint64_t unsigned_field(const json& j, const std::string& where, const char* key) {
  const auto& v = field(j, where, key);
  if (!v.is_number_unsigned()) fail(where, std::string("\"") + key + "\" must be a non-negative integer");
  return v.get<std::uint64_t>();
}

ServiceDescriptor parse_service(const json& j, const std::string& where) {
  only_keys(j, where, {"id", "type", "qos_ms", "threshold"});
  ServiceDescriptor s;
  s.id = ServiceId{string_field(j, where, "id")};
  s.type = ServiceTypeId{string_field(j, where, "type")};
  s.qos_ms = number_field(j, where, "qos_ms");
  const auto thr = unsigned_field(j, where, "threshold");
  if (thr < 1 || thr > std::numeric_limits<std::uint32_t>::max()) fail(where, "threshold must be >= 1");
  s.threshold = static_cast<std::uint32_t>(thr);
  return s;
}

json service_json(const ServiceDescriptor& s) {
  return json{{"id", s.id.str()}, {"type", s.type.str()}, {"qos_ms", s.qos_ms}, {"threshold", s.threshold}};
}

Constraint parse_constraint(const json& j, const std::string& where) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "ALL" || s == "all") return Constraint::all();
    fail(where, "constraint string must be \"ALL\"");
  }
  if (!j.is_number_unsigned() || j.get<std::uint64_t>() < 1 || j.get<std::uint64_t>() > 1'000'000'000)
    fail(where, "constraint must be a positive integer or \"ALL\"");
  return Constraint::choose(static_cast<std::uint32_t>(j.get<std::uint64_t>()));
}

netsim::LatencySpec parse_links(const json& j) {
  const std::string where = "links";
  const auto kind = string_field(j, where, "kind");
  if (kind == "uniform") {
    only_keys(j, where, {"kind", "base_ms"});
    return netsim::UniformLatency{number_field(j, where, "base_ms")};
  }
  if (kind == "matrix") {
    only_keys(j, where, {"kind", "entries", "default_ms"});
    netsim::MatrixLatency m;
    const auto& entries = field(j, where, "entries");
    if (!entries.is_array()) fail(where, "\"entries\" must be an array");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto w = "links.entries[" + std::to_string(i) + "]";
      only_keys(entries[i], w, {"from", "to", "ms"});
      Binding b{ServiceId{string_field(entries[i], w, "from")}, ServiceId{string_field(entries[i], w, "to")}};
      if (!m.entries.emplace(b, number_field(entries[i], w, "ms")).second) fail(w, "duplicate pair");
    }
    if (j.contains("default_ms")) m.default_ms = number_field(j, where, "default_ms");
    return m;
  }
  if (kind == "seeded") {
    only_keys(j, where, {"kind", "base_ms", "jitter_ms", "seed"});
    return netsim::SeededLatency{number_field(j, where, "base_ms"), number_field(j, where, "jitter_ms"),
                                 unsigned_field(j, where, "seed")};
  }
  fail(where, "unknown kind \"" + kind + "\"");
}

json links_json(const netsim::LatencySpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, netsim::UniformLatency>) {
          return json{{"kind", "uniform"}, {"base_ms", s.base_ms}};
        } else if constexpr (std::is_same_v<T, netsim::MatrixLatency>) {
          json entries = json::array();
          for (const auto& [b, ms] : s.entries) entries.push_back({{"from", b.from.str()}, {"to", b.to.str()}, {"ms", ms}});
          json j{{"kind", "matrix"}, {"entries", std::move(entries)}};
          if (s.default_ms) j["default_ms"] = *s.default_ms;
          return j;
        } else {
          return json{{"kind", "seeded"}, {"base_ms", s.base_ms}, {"jitter_ms", s.jitter_ms}, {"seed", s.seed}};
        }
      },
      spec);
}

runtime::ScenarioEvent parse_event(const json& j, const std::string& where) {
  runtime::ScenarioEvent e;
  const auto kind = string_field(j, where, "kind");
  e.at = number_field(j, where, "at_ms");
  if (kind == "service_appears") {
    only_keys(j, where, {"at_ms", "kind", "service"});
    e.kind = runtime::ServiceAppears{parse_service(field(j, where, "service"), where + ".service")};
  } else if (kind == "service_disappears") {
    only_keys(j, where, {"at_ms", "kind", "id"});
    e.kind = runtime::ServiceDisappears{ServiceId{string_field(j, where, "id")}};
  } else if (kind == "link_degrades") {
    only_keys(j, where, {"at_ms", "kind", "from", "to", "ms"});
    e.kind = runtime::LinkDegrades{ServiceId{string_field(j, where, "from")}, ServiceId{string_field(j, where, "to")},
                                   number_field(j, where, "ms")};
  } else if (kind == "inject_out_contract") {
    only_keys(j, where, {"at_ms", "kind", "id"});
    e.kind = runtime::InjectOutContract{ServiceId{string_field(j, where, "id")}};
  } else {
    fail(where, "unknown event kind \"" + kind + "\"");
  }
  return e;
}

json event_json(const runtime::ScenarioEvent& e) {
  json j{{"at_ms", e.at}, {"kind", runtime::event_kind_name(e)}};
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, runtime::ServiceAppears>) {
          j["service"] = service_json(k.service);
        } else if constexpr (std::is_same_v<T, runtime::LinkDegrades>) {
          j["from"] = k.from.str();
          j["to"] = k.to.str();
          j["ms"] = k.new_ms;
        } else {
          j["id"] = k.id.str();
        }
      },
      e.kind);
  return j;
}

}  // namespace

Scenario parse_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("scenario", e.what());
  }
  only_keys(root, "scenario", {"services", "template", "links", "events", "announce_latency_ms"});
  Scenario s;

  const auto& services = field(root, "scenario", "services");
  if (!services.is_array()) fail("services", "expected an array");
  for (std::size_t i = 0; i < services.size(); ++i)
    s.services.push_back(parse_service(services[i], "services[" + std::to_string(i) + "]"));
  try {
    make_catalog(s.services);
  } catch (const Error& e) {
    fail("services", e.what());
  }

  const auto& tmpl = field(root, "scenario", "template");
  only_keys(tmpl, "template", {"body", "constraints"});
  const auto& body = field(tmpl, "template", "body");
  const auto& constraints = field(tmpl, "template", "constraints");
  if (!body.is_array() || !constraints.is_array()) fail("template", "body and constraints must be arrays");
  for (std::size_t i = 0; i < body.size(); ++i) {
    const auto& pair = body[i];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
      fail("template.body[" + std::to_string(i) + "]", "expected [from_type, to_type]");
    s.tmpl.body.push_back(TypeEdge{ServiceTypeId{pair[0].get<std::string>()}, ServiceTypeId{pair[1].get<std::string>()}});
  }
  for (std::size_t i = 0; i < constraints.size(); ++i)
    s.tmpl.constraints.push_back(parse_constraint(constraints[i], "template.constraints[" + std::to_string(i) + "]"));

  if (root.contains("links")) s.links = parse_links(root["links"]);
  if (root.contains("announce_latency_ms")) s.announce_latency_ms = number_field(root, "scenario", "announce_latency_ms");
  if (root.contains("events")) {
    const auto& events = root["events"];
    if (!events.is_array()) fail("events", "expected an array");
    for (std::size_t i = 0; i < events.size(); ++i)
      s.events.push_back(parse_event(events[i], "events[" + std::to_string(i) + "]"));
    for (std::size_t i = 1; i < s.events.size(); ++i)
      if (s.events[i].at < s.events[i - 1].at) fail("events", "events must be sorted by at_ms");
  }
  return s;
}

Scenario load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str());
}

std::string to_json(const Scenario& s) {
  json root;
  root["services"] = json::array();
  for (const auto& svc : s.services) root["services"].push_back(service_json(svc));
  json body = json::array();
  for (const auto& e : s.tmpl.body) body.push_back({e.from.str(), e.to.str()});
  json constraints = json::array();
  for (const auto& c : s.tmpl.constraints) {
    if (c.is_all()) constraints.push_back("ALL");
    else constraints.push_back(c.k());
  }
  root["template"] = {{"body", std::move(body)}, {"constraints", std::move(constraints)}};
  root["links"] = links_json(s.links);
  root["events"] = json::array();
  for (const auto& e : s.events) root["events"].push_back(event_json(e));
  root["announce_latency_ms"] = s.announce_latency_ms;
  return root.dump(2) + "\n";
}

Constraint KRule::resolve(std::uint32_t width, bool clamp) const {
  switch (kind) {
    case Kind::All: return Constraint::all();
    case Kind::Half: return Constraint::choose(std::max<std::uint32_t>(1, width / 2));
    case Kind::Fixed: return Constraint::choose(clamp ? std::min(k, std::max<std::uint32_t>(1, width)) : k);
  }
  return Constraint::all();
}

std::string KRule::str() const {
  switch (kind) {
    case Kind::All: return "all";
    case Kind::Half: return "half";
    case Kind::Fixed: return std::to_string(k);
  }
  return "?";
}

KRule parse_krule(const std::string& text) {
  std::string lower = text;
  std::ranges::transform(lower, lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "all") return KRule::all();
  if (lower == "half") return KRule::half();
  std::uint64_t k = 0;
  if (lower.empty() || lower.size() > 9 || !std::ranges::all_of(lower, [](unsigned char c) { return std::isdigit(c); }))
    throw Error(Errc::InvalidArgument, "k must be a positive integer, all or half: " + text);
  k = std::stoull(lower);
  if (k == 0) throw Error(Errc::InvalidArgument, "k must be positive");
  return KRule::fixed(static_cast<std::uint32_t>(k));
}

namespace {

// Fixed mappings from raw engine output, so generated files are identical on
// every standard library.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  // Uniform in [lo, hi] at microsecond resolution.
  Millis millis(double lo, double hi) { return std::round((lo + (hi - lo) * unit()) * 1000.0) / 1000.0; }
  std::uint32_t integer(std::uint32_t lo, std::uint32_t hi) {
    return lo + static_cast<std::uint32_t>(rng_() % (std::uint64_t{hi} - lo + 1));
  }

 private:
  std::mt19937_64 rng_;
};

constexpr double kQosLo = 1.0, kQosHi = 10.0;
constexpr double kLinkLo = 0.1, kLinkHi = 5.0;

std::string padded(std::uint64_t value, std::size_t width) {
  auto s = std::to_string(value);
  return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

std::size_t digits(std::uint64_t n) { return std::to_string(n).size(); }

std::uint32_t max_threshold(std::size_t n_services) {
  return std::max<std::uint32_t>(2, static_cast<std::uint32_t>(n_services / 2));
}

void link_layers(netsim::MatrixLatency& m, Draw& draw, const std::vector<ServiceDescriptor>& from,
                 const std::vector<ServiceDescriptor>& to) {
  for (const auto& a : from)
    for (const auto& b : to) m.entries[Binding{a.id, b.id}] = draw.millis(kLinkLo, kLinkHi);
}

}  // namespace

Scenario generate_one_layer(std::uint32_t n, KRule k, std::uint64_t seed) {
  if (n < 1) throw Error(Errc::InvalidArgument, "one-layer layout needs n >= 1");
  Draw draw(seed);
  Scenario s;
  const std::size_t total = std::size_t{n} + 1;
  const ServiceTypeId ta{"tA"}, tb{"tB"};
  std::vector<ServiceDescriptor> top{{ServiceId{"A0"}, ta, draw.millis(kQosLo, kQosHi), draw.integer(1, max_threshold(total))}};
  std::vector<ServiceDescriptor> layer;
  layer.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i)
    layer.push_back({ServiceId{"B" + padded(i, digits(n - 1))}, tb, draw.millis(kQosLo, kQosHi),
                     draw.integer(1, max_threshold(total))});
  netsim::MatrixLatency m;
  link_layers(m, draw, top, layer);

  s.services = top;
  s.services.insert(s.services.end(), layer.begin(), layer.end());
  s.tmpl.body = {{ta, tb}};
  s.tmpl.constraints = {k.resolve(n, false)};
  s.links = std::move(m);
  return s;
}

Scenario generate_pyramidal(std::uint32_t top_width, KRule k, std::uint64_t seed) {
  if (top_width < 2) throw Error(Errc::InvalidArgument, "pyramidal layout needs top_width >= 2");
  Draw draw(seed);
  Scenario s;
  const std::size_t total = std::size_t{top_width} * (top_width + 1) / 2;
  const auto w = std::max<std::size_t>(2, digits(top_width - 1));
  std::vector<std::vector<ServiceDescriptor>> layers;
  for (std::uint32_t l = 0; l < top_width; ++l) {
    const ServiceTypeId type{"t" + padded(l, w)};
    auto& layer = layers.emplace_back();
    for (std::uint32_t i = 0; i < top_width - l; ++i)
      layer.push_back({ServiceId{"S" + padded(l, w) + "_" + padded(i, w)}, type, draw.millis(kQosLo, kQosHi),
                       draw.integer(1, max_threshold(total))});
  }
  netsim::MatrixLatency m;
  for (std::uint32_t l = 0; l + 1 < top_width; ++l) {
    link_layers(m, draw, layers[l], layers[l + 1]);
    s.tmpl.body.push_back({layers[l].front().type, layers[l + 1].front().type});
    s.tmpl.constraints.push_back(k.resolve(top_width - l - 1, true));
  }
  for (auto& layer : layers) s.services.insert(s.services.end(), layer.begin(), layer.end());
  s.links = std::move(m);
  return s;
}

Scenario generate_medical(std::uint64_t seed) {
  Draw draw(seed);
  Scenario s;
  const ServiceTypeId sensor{"tA"}, gateway{"tB"}, hospital{"tC"}, rescue{"tD"};
  constexpr std::size_t total = 26;
  auto make = [&](const std::string& prefix, std::size_t count, std::size_t width, const ServiceTypeId& type,
                  std::optional<std::uint32_t> threshold) {
    std::vector<ServiceDescriptor> out;
    for (std::size_t i = 1; i <= count; ++i)
      out.push_back({ServiceId{prefix + padded(i, width)}, type, draw.millis(kQosLo, kQosHi),
                     threshold ? *threshold : draw.integer(1, max_threshold(total))});
    return out;
  };
  const auto sensors = make("A", 10, 2, sensor, std::nullopt);
  const auto gateways = make("B", 9, 1, gateway, 10u);
  const auto hospitals = make("C", 5, 1, hospital, std::nullopt);
  const auto rescues = make("D", 2, 1, rescue, std::nullopt);

  netsim::MatrixLatency m;
  link_layers(m, draw, sensors, gateways);
  link_layers(m, draw, gateways, hospitals);
  link_layers(m, draw, gateways, rescues);

  for (const auto* group : {&sensors, &gateways, &hospitals, &rescues})
    s.services.insert(s.services.end(), group->begin(), group->end());
  s.tmpl.body = {{sensor, gateway}, {gateway, hospital}, {gateway, rescue}};
  s.tmpl.constraints = {Constraint::choose(1), Constraint::choose(1), Constraint::choose(1)};
  s.links = std::move(m);
  return s;
}

Scenario generate_random_small(std::uint64_t seed, std::uint32_t max_services) {
  if (max_services < 2) throw Error(Errc::InvalidArgument, "random instances need at least 2 services");
  Draw draw(seed);
  // Retry until the brute-force work stays small; the draw stream keeps
  // advancing, so different seeds still give different instances.
  while (true) {
    const bool three = draw.unit() < 0.5 && max_services >= 3;
    std::vector<std::uint32_t> sizes{draw.integer(1, 3), draw.integer(1, 5)};
    if (three) sizes.push_back(draw.integer(1, 4));
    while (std::accumulate(sizes.begin(), sizes.end(), 0u) > max_services) {
      auto biggest = std::ranges::max_element(sizes);
      --*biggest;
    }
    if (std::ranges::any_of(sizes, [](auto v) { return v == 0; })) continue;

    const std::vector<ServiceTypeId> types{ServiceTypeId{"tA"}, ServiceTypeId{"tB"}, ServiceTypeId{"tC"}};
    ApplicationTemplate tmpl;
    tmpl.body.push_back({types[0], types[1]});
    if (three) {
      tmpl.body.push_back({types[1], types[2]});
      if (draw.unit() < 0.35) tmpl.body.push_back({types[0], types[2]});
    }
    auto target_size = [&](const TypeEdge& e) { return sizes[e.to == types[1] ? 1 : 2]; };
    for (const auto& e : tmpl.body) {
      const double r = draw.unit();
      const auto width = target_size(e);
      if (r < 0.25) tmpl.constraints.push_back(Constraint::all());
      else if (r < 0.33) tmpl.constraints.push_back(Constraint::choose(width + 1));
      else tmpl.constraints.push_back(Constraint::choose(draw.integer(1, width)));
    }

    // Upper bound on candidates per start: every node of a source type makes
    // its own choice.
    double per_start = 1;
    for (std::size_t b = 0; b < tmpl.body.size(); ++b) {
      const auto& c = tmpl.constraints[b];
      const auto width = target_size(tmpl.body[b]);
      if (c.is_all() || c.k() > width) continue;
      const double options = static_cast<double>(count_combinations(width, c));
      const auto from_count = tmpl.body[b].from == types[0] ? 1u : sizes[1];
      per_start *= std::pow(options, from_count);
    }
    if (std::pow(per_start, sizes[0]) > 20000) continue;

    Scenario s;
    s.tmpl = std::move(tmpl);
    std::vector<std::vector<ServiceDescriptor>> layers(sizes.size());
    const char* prefix[] = {"A", "B", "C"};
    for (std::size_t l = 0; l < sizes.size(); ++l)
      for (std::uint32_t i = 1; i <= sizes[l]; ++i)
        layers[l].push_back({ServiceId{prefix[l] + std::to_string(i)}, types[l], draw.millis(kQosLo, kQosHi),
                             draw.integer(1, 3)});
    netsim::MatrixLatency m;
    for (const auto& e : s.tmpl.body) {
      const auto from = e.from == types[0] ? 0 : 1;
      const auto to = e.to == types[1] ? 1 : 2;
      link_layers(m, draw, layers[from], layers[to]);
    }
    for (auto& layer : layers) s.services.insert(s.services.end(), layer.begin(), layer.end());
    s.links = std::move(m);
    return s;
  }
}

netsim::Simulator make_simulator(const Scenario& s, bool record_trace) {
  return netsim::Simulator(netsim::LatencyModel(s.links), netsim::SimulatorConfig{s.announce_latency_ms, record_trace});
}

void announce_all(netsim::Simulator& net, std::span<const ServiceDescriptor> services, Millis at) {
  for (const auto& svc : services) net.announce(netsim::DiscoveryRecord{svc, at, {}}, at);
}

}  // namespace selfasm::scenario
