#include <doctest.h>

#include <string>

#include "hydro_adp/errors.hpp"
#include "hydro_adp/system.hpp"

using namespace hydro_adp;

namespace {

const std::string data_dir = HYDRO_ADP_DATA_DIR;

std::string message_of(const std::string& json) {
  try {
    parse_system(json, "cfg.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("shipped cascade") {
  const ReservoirSystem s = load_system(data_dir + "/norwegian_cascade.json");
  REQUIRE(s.is_cascade());
  REQUIRE(s.num_reservoirs() == 2);
  const DenseMatrix& r = s.cascade_matrix();
  CHECK(r(0, 0) == -1.0);
  CHECK(r(1, 1) == -1.0);
  CHECK(r(1, 0) == 1.0);
  CHECK(r(0, 1) == 0.0);
  CHECK(s.reservoirs()[0].discharge_max == 57.96);
  CHECK(s.reservoirs()[1].conversion_rate == 0.5051);
  CHECK(s.head_reservoirs() == std::vector<bool>{true, false});
  CHECK(s.terminal_conversion() == std::vector<double>{0.1101, 0.5051});
}

TEST_CASE("cascade column sums are -1 or 0") {
  const ReservoirSystem s = load_system(data_dir + "/norwegian_cascade.json");
  for (std::size_t k = 0; k < s.num_reservoirs(); ++k) {
    double sum = 0.0;
    for (std::size_t j = 0; j < s.num_reservoirs(); ++j) sum += s.cascade_matrix()(j, k);
    CHECK((sum == -1.0 || sum == 0.0));
  }
}

TEST_CASE("shipped network") {
  const ReservoirSystem s = load_system(data_dir + "/kwo_network.json");
  REQUIRE_FALSE(s.is_cascade());
  CHECK(s.num_reservoirs() == 6);
  CHECK(s.num_tunnels() == 10);
  CHECK(s.pump_efficiency() == 0.6);
  // Every column moves water from one reservoir to another.
  for (std::size_t k = 0; k < s.num_tunnels(); ++k) {
    double out = 0.0, in = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
      const double v = s.network_balance()(j, k);
      (v < 0 ? out : in) += v;
    }
    CHECK(out == -1.0);
    CHECK(in == (s.tunnel_sign(k) > 0 ? 1.0 : 0.6));
  }
  CHECK(s.head_reservoirs() == std::vector<bool>{true, true, true, false, false, false});
  const auto g = s.terminal_conversion();
  CHECK(g[0] == 0.1);
  CHECK(g[3] == 0.1);
  CHECK(g[4] == 0.0);
  CHECK(g[5] == 0.0);
}

TEST_CASE("json round trip keeps the hash") {
  const ReservoirSystem s = load_system(data_dir + "/kwo_network.json");
  const ReservoirSystem t = parse_system(to_json(s));
  CHECK(t.hash() == s.hash());
  CHECK(t.network_balance() == s.network_balance());
  const ReservoirSystem c = load_system(data_dir + "/norwegian_cascade.json");
  CHECK(c.hash() != s.hash());
  CHECK(c.hash().size() == 16);
}

TEST_CASE("configuration errors name the file and field") {
  CHECK(message_of("{").find("cfg.json") != std::string::npos);
  const std::string missing = message_of(R"({"kind":"cascade","reservoirs":[{"id":1,"level_min":0,"discharge_max":1,"level_initial":0}],"cascade_topology":[]})");
  CHECK(missing.find("cfg.json") != std::string::npos);
  CHECK(missing.find("level_max") != std::string::npos);
  const std::string bad_kind = message_of(R"({"kind":"lake","reservoirs":[]})");
  CHECK(bad_kind.find("kind") != std::string::npos);
  CHECK_THROWS_AS(load_system(data_dir + "/does_not_exist.json"), ConfigError);
}

TEST_CASE("reservoir invariants are enforced") {
  ReservoirSpec r{1, 10.0, 100.0, 0.0, 5.0, 50.0, 1.0, 0.0};
  CHECK_NOTHROW(ReservoirSystem::make_cascade({r}, {}));
  ReservoirSpec low = r;
  low.level_initial = 5.0;
  CHECK_THROWS_AS(ReservoirSystem::make_cascade({low}, {}), ConfigError);
  ReservoirSpec neg = r;
  neg.discharge_min = 6.0;
  CHECK_THROWS_AS(ReservoirSystem::make_cascade({neg}, {}), ConfigError);
  ReservoirSpec gneg = r;
  gneg.conversion_rate = -1.0;
  CHECK_THROWS_AS(ReservoirSystem::make_cascade({gneg}, {}), ConfigError);
}

TEST_CASE("cascade topology checks") {
  ReservoirSpec a{1, 0.0, 10.0, 0.0, 1.0, 5.0, 1.0, 0.0};
  ReservoirSpec b = a;
  b.id = 2;
  ReservoirSpec c = a;
  c.id = 3;
  // 1 feeds both 2 and 3: water would be counted twice.
  CHECK_THROWS_AS(ReservoirSystem::make_cascade({a, b, c}, {{2, 1}, {3, 1}}), ConfigError);
  CHECK_THROWS_AS(ReservoirSystem::make_cascade({a, b}, {{2, 1}, {1, 2}}), ConfigError);
  CHECK_THROWS_AS(ReservoirSystem::make_cascade({a, b}, {{2, 7}}), ConfigError);
  CHECK_NOTHROW(ReservoirSystem::make_cascade({a, b, c}, {{3, 1}, {3, 2}}));
}

TEST_CASE("tunnel checks") {
  ReservoirSpec a{1, 0.0, 10.0, 0.0, 1.0, 5.0, 0.0, 0.0};
  ReservoirSpec b = a;
  b.id = 2;
  TunnelSpec t{1, 2, TunnelDirection::release, 0.1, 1.0};
  CHECK_NOTHROW(ReservoirSystem::make_network({a, b}, {t}, 0.6));
  CHECK_THROWS_AS(ReservoirSystem::make_network({a, b}, {t}, 0.0), ConfigError);
  CHECK_THROWS_AS(ReservoirSystem::make_network({a, b}, {t}, 1.5), ConfigError);
  TunnelSpec self = t;
  self.to_reservoir = 1;
  CHECK_THROWS_AS(ReservoirSystem::make_network({a, b}, {self}, 0.6), ConfigError);
  TunnelSpec closed = t;
  closed.flow_max = 0.0;
  CHECK_THROWS_AS(ReservoirSystem::make_network({a, b}, {closed}, 0.6), ConfigError);
}
