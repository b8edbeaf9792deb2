#include <gtest/gtest.h>

#include <random>

#include "hubflow/error.hpp"
#include "hubflow/transit.hpp"
#include "unit/support.hpp"
#include "unit/transit_oracle.hpp"

using namespace hubflow;

namespace {

BusNetwork network(const std::vector<std::string>& stations, std::vector<BusRoute> routes) {
  std::vector<Station> st;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    st.push_back({stations[i], "Station " + stations[i], {114.0 + 0.01 * i, 22.5}});
  }
  return BusNetwork(std::move(st), std::move(routes));
}

void expect_chained(const TransferPlan& p, const std::string& origin, const std::string& dest) {
  ASSERT_FALSE(p.legs.empty());
  EXPECT_EQ(p.legs.front().board_station, origin);
  EXPECT_EQ(p.legs.back().alight_station, dest);
  std::set<std::string> seen = {origin};
  for (std::size_t i = 0; i < p.legs.size(); ++i) {
    EXPECT_NE(p.legs[i].board_station, p.legs[i].alight_station);
    EXPECT_GT(p.legs[i].stops, 0);
    if (i > 0) {
      EXPECT_EQ(p.legs[i].board_station, p.legs[i - 1].alight_station);
      EXPECT_NE(p.legs[i].route_id, p.legs[i - 1].route_id);
    }
    EXPECT_TRUE(seen.insert(p.legs[i].alight_station).second);
  }
}

}  // namespace

TEST(TransitLoad, ValidAndInvalidNetworks) {
  EXPECT_NO_THROW(network({"S1", "S2"}, {{"A", {"S1", "S2"}, false}}));
  try {
    network({"S1", "S2"}, {{"A", {"S1", "S9"}, false}});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("S9"), std::string::npos);
  }
  EXPECT_THROW(network({"S1", "S1"}, {}), ValidationError);
  EXPECT_THROW(network({"S1", "S2"}, {{"A", {"S1"}, false}}), ValidationError);
  EXPECT_THROW(network({"S1", "S2"}, {{"A", {"S1", "S1", "S2"}, false}}), ValidationError);
  EXPECT_THROW(network({"S1", "S2"}, {{"A", {"S1", "S2"}, false}, {"A", {"S2", "S1"}, false}}),
               ValidationError);
}

TEST(TransitLoad, EmptyRoutesGiveNoPlans) {
  const auto net = network({"S1", "S2"}, {});
  EXPECT_TRUE(find_plans(net, "S1", "S2").empty());
}

TEST(TransitLoad, JsonRoundTripAndFileErrors) {
  const auto net = network({"S1", "S2", "S3"}, {{"A", {"S1", "S2", "S3"}, true}});
  const auto back = parse_network_json(network_to_json(net).dump());
  EXPECT_EQ(back.routes().size(), 1u);
  EXPECT_TRUE(back.routes()[0].one_way);
  EXPECT_EQ(back.stations().size(), 3u);
  try {
    load_network("/nonexistent/net.json");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/net.json"), std::string::npos);
  }
  EXPECT_THROW(parse_network_json("[1,2"), FormatError);
}

TEST(Transfer, DirectRoute) {
  const auto net = network({"S1", "S2", "S3"}, {{"A", {"S1", "S2", "S3"}, false}});
  const auto plans = find_plans(net, "S1", "S3");
  ASSERT_EQ(plans.size(), 1u);
  EXPECT_EQ(plans[0].num_transfers(), 0);
  EXPECT_EQ(plans[0].legs[0], (TransferLeg{"A", "S1", "S3", 2}));
}

TEST(Transfer, OneTransfer) {
  const auto net =
      network({"S1", "S2", "S3", "S4"}, {{"A", {"S1", "S2", "S3"}, false}, {"B", {"S3", "S4"}, false}});
  const auto plans = find_plans(net, "S1", "S4");
  ASSERT_EQ(plans.size(), 1u);
  EXPECT_EQ(plans[0].num_transfers(), 1);
  EXPECT_EQ(plans[0].legs[0], (TransferLeg{"A", "S1", "S3", 2}));
  EXPECT_EQ(plans[0].legs[1], (TransferLeg{"B", "S3", "S4", 1}));
  EXPECT_EQ(plans[0].total_stops(), 3);
}

TEST(Transfer, DisconnectedAndErrors) {
  const auto net = network({"S1", "S2", "S3", "S4"}, {{"A", {"S1", "S2"}, false}, {"B", {"S3", "S4"}, false}});
  EXPECT_TRUE(find_plans(net, "S1", "S4").empty());
  EXPECT_THROW(find_plans(net, "S1", "S1"), ArgumentError);
  EXPECT_THROW(find_plans(net, "S1", "S9"), UnknownStationError);
  EXPECT_THROW(find_plans(net, "S0", "S2"), UnknownStationError);
  EXPECT_THROW(find_plans(net, "S1", "S2", -1), ArgumentError);
}

TEST(Transfer, OneWayRoutes) {
  const auto net = network({"S1", "S2", "S3"}, {{"A", {"S1", "S2", "S3"}, true}});
  EXPECT_EQ(find_plans(net, "S1", "S3").size(), 1u);
  EXPECT_TRUE(find_plans(net, "S3", "S1").empty());
}

TEST(Transfer, RankingPrefersFewerTransfersThenStops) {
  const auto net = network({"S1", "S2", "S3", "S4", "S5"},
                           {{"L", {"S1", "S2", "S3", "S4", "S5"}, false},
                            {"A", {"S1", "S5"}, false},
                            {"B", {"S1", "S3"}, false},
                            {"C", {"S3", "S5"}, false}});
  const auto plans = find_plans(net, "S1", "S5");
  ASSERT_GE(plans.size(), 3u);
  EXPECT_EQ(plans[0].legs[0].route_id, "A");
  EXPECT_EQ(plans[1].legs[0].route_id, "L");
  EXPECT_EQ(plans[2].num_transfers(), 1);
  for (std::size_t i = 1; i < plans.size(); ++i) EXPECT_TRUE(plan_ranks_before(plans[i - 1], plans[i]));
  EXPECT_EQ(find_plans(net, "S1", "S5", 0).size(), 2u);
  EXPECT_EQ(find_plans(net, "S1", "S5", 2, 1).size(), 1u);
}

TEST(Transfer, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(606);
  for (int round = 0; round < 150; ++round) {
    const int n_stations = std::uniform_int_distribution<int>(4, 14)(rng);
    std::vector<std::string> ids;
    for (int i = 0; i < n_stations; ++i) ids.push_back("S" + std::to_string(i));
    std::vector<BusRoute> routes;
    const int n_routes = std::uniform_int_distribution<int>(1, 7)(rng);
    for (int r = 0; r < n_routes; ++r) {
      BusRoute route{"R" + std::to_string(r), {}, std::bernoulli_distribution(0.2)(rng)};
      const int len = std::uniform_int_distribution<int>(2, 8)(rng);
      std::uniform_int_distribution<int> pick(0, n_stations - 1);
      while (static_cast<int>(route.stops.size()) < len) {
        const auto s = ids[pick(rng)];
        if (route.stops.empty() || route.stops.back() != s) route.stops.push_back(s);
      }
      routes.push_back(route);
    }
    const auto net = network(ids, routes);
    const std::string origin = ids[0], dest = ids[1];
    const auto oracle = hubflow::testing::enumerate_plans(net, origin, dest, 3);
    const auto plans = find_plans(net, origin, dest, 2, 1000);
    ASSERT_EQ(plans.size(), oracle.size()) << "round " << round;
    for (std::size_t i = 0; i < plans.size(); ++i) {
      ASSERT_EQ(plans[i], oracle[i]) << "round " << round << " plan " << i;
      expect_chained(plans[i], origin, dest);
    }
    const auto top = find_plans(net, origin, dest, 2, 10);
    ASSERT_EQ(top.size(), std::min<std::size_t>(10, oracle.size()));
    for (std::size_t i = 0; i < top.size(); ++i) ASSERT_EQ(top[i], oracle[i]);
  }
}
