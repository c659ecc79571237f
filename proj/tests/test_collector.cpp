#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "dtoprank/collector.hpp"
#include "dtoprank/errors.hpp"
#include "test_support.hpp"

using namespace dtoprank;

namespace {

MonitorReport report(int monitor, std::vector<ReportEntry> entries, WindowId window = 0) {
  return {monitor, window, std::move(entries)};
}

CensoredSeries step_series(int bins, int change, Count before, Count after) {
  std::vector<Count> v(static_cast<std::size_t>(bins), before);
  std::fill(v.begin() + change, v.end(), after);
  return CensoredSeries::exact(v);
}

}  // namespace

TEST_CASE("aggregate") {
  SUBCASE("elementwise bound sums") {
    const std::vector<MonitorReport> reports{
        report(1, {{"x", CensoredSeries({2, 0}, {2, 3}), 0.1}}),
        report(2, {{"x", CensoredSeries({1, 4}, {1, 4}), 0.2}})};
    const auto agg = aggregate(reports);
    REQUIRE(agg.size() == 1);
    CHECK(agg.at("x").series.lower == std::vector<Count>{3, 4});
    CHECK(agg.at("x").series.upper == std::vector<Count>{3, 7});
    CHECK(agg.at("x").monitors == std::vector<int>{1, 2});
  }
  SUBCASE("single reporter is the identity") {
    const CensoredSeries s({0, 5, 2}, {3, 5, 2});
    const std::vector<MonitorReport> reports{report(4, {{"y", s, 0.3}}),
                                             report(5, {{"z", s, 0.3}})};
    const auto agg = aggregate(reports);
    CHECK(agg.at("y").series == s);
    CHECK(agg.at("y").monitors == std::vector<int>{4});
  }
  SUBCASE("eleven contributing monitors") {
    std::vector<MonitorReport> reports;
    for (int k = 1; k <= 11; ++k) {
      reports.push_back(report(k, {{"target", CensoredSeries::exact({1, 2, 3}), 0.01}}));
    }
    const auto agg = aggregate(reports);
    CHECK(agg.at("target").monitors.size() == 11);
    CHECK(agg.at("target").series == CensoredSeries::exact({11, 22, 33}));
  }
  SUBCASE("order independent and bound-preserving") {
    std::mt19937_64 rng(8);
    std::vector<MonitorReport> reports;
    for (int k = 1; k <= 6; ++k) {
      std::vector<ReportEntry> entries;
      for (const char* dst : {"a", "b", "c"}) {
        if (std::bernoulli_distribution(0.6)(rng)) {
          entries.push_back({dst, testing::random_censored_series(rng, 20, 4.0, 0.4), 0.5});
        }
      }
      reports.push_back(report(k, std::move(entries)));
    }
    const auto forward = aggregate(reports);
    std::reverse(reports.begin(), reports.end());
    const auto backward = aggregate(reports);
    REQUIRE(forward.size() == backward.size());
    for (const auto& [dst, agg] : forward) {
      CHECK(agg.series == backward.at(dst).series);
      CHECK(agg.monitors == backward.at(dst).monitors);
      CHECK(agg.series.valid());
    }
  }
  SUBCASE("mismatched P is a protocol error") {
    const std::vector<MonitorReport> reports{
        report(1, {{"x", CensoredSeries::exact({1, 2}), 0.1}}),
        report(2, {{"y", CensoredSeries::exact({1, 2, 3}), 0.1}})};
    CHECK_THROWS_AS(aggregate(reports), ProtocolError);
  }
  SUBCASE("mixed windows are a protocol error") {
    const std::vector<MonitorReport> reports{
        report(1, {{"x", CensoredSeries::exact({1, 2}), 0.1}}, 0),
        report(2, {{"x", CensoredSeries::exact({1, 2}), 0.1}}, 1)};
    CHECK_THROWS_AS(aggregate(reports), ProtocolError);
  }
}

TEST_CASE("global_detect") {
  SUBCASE("step aggregate raises an alarm at the change") {
    std::map<Address, Aggregate> agg;
    agg["victim"] = {step_series(60, 30, 3, 90), {1, 2}};
    const auto alarms = global_detect(agg, 0.05, 7);
    REQUIRE(alarms.size() == 1);
    CHECK(alarms[0].dst == "victim");
    CHECK(alarms[0].change_point == 30);
    CHECK(alarms[0].window_id == 7);
    CHECK(alarms[0].contributing_monitors == std::vector<int>{1, 2});
    CHECK(alarms[0].method == Method::dtoprank);
  }
  SUBCASE("constant aggregate never alarms") {
    std::map<Address, Aggregate> agg;
    agg["flat"] = {CensoredSeries::exact(std::vector<Count>(60, 4)), {1}};
    CHECK(global_detect(agg, 0.5).empty());
  }
  SUBCASE("threshold is strict") {
    // Y = [-1/sqrt2, 0, 1/sqrt2] gives W = 1/sqrt2.
    std::map<Address, Aggregate> agg;
    agg["x"] = {CensoredSeries::exact({1, 2, 3}), {1}};
    const double p = test_series(agg["x"].series).p_value;
    CHECK(global_detect(agg, p).empty());
    CHECK(global_detect(agg, std::nextafter(p, 1.0)).size() == 1);
    CHECK_THROWS_AS(global_detect(agg, 1.0), ValidationError);
    CHECK_THROWS_AS(global_detect(agg, 0.0), ValidationError);
  }
}

TEST_CASE("btoprank_decide") {
  const auto entry = [](const char* dst, double p) {
    return ReportEntry{dst, step_series(10, 5, 1, 9), p};
  };
  SUBCASE("Bonferroni factor is the full monitor count") {
    const std::vector<MonitorReport> reports{report(1, {entry("x", 0.002)}),
                                             report(2, {entry("x", 0.3)})};
    const auto alarms = btoprank_decide(reports, 0.05, 15);
    REQUIRE(alarms.size() == 1);
    CHECK(alarms[0].p_value == doctest::Approx(0.03));
    CHECK(alarms[0].change_point == 5);
    CHECK(alarms[0].method == Method::btoprank);
  }
  SUBCASE("0.004 * 15 misses 0.05") {
    const std::vector<MonitorReport> reports{report(1, {entry("x", 0.004)})};
    CHECK(btoprank_decide(reports, 0.05, 15).empty());
  }
  SUBCASE("unreported destinations never alarm") {
    const std::vector<MonitorReport> reports{report(1, {entry("x", 1e-9)})};
    const auto alarms = btoprank_decide(reports, 0.05, 15);
    REQUIRE(alarms.size() == 1);
    CHECK(alarms[0].dst == "x");
  }
  SUBCASE("scores clamp at one") {
    const std::vector<MonitorReport> reports{report(1, {entry("x", 0.5)})};
    CHECK(btoprank_scores(reports, 15)[0].p_value == 1.0);
  }
  SUBCASE("K = 1 matches DTopRank on the same single series") {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 50; ++rep) {
      const auto s = testing::random_censored_series(rng, 40, 5.0, 0.3);
      const auto r = test_series(s);
      const std::vector<MonitorReport> reports{report(1, {{"x", s, r.p_value}})};
      for (double alpha : {0.01, 0.05, 0.2}) {
        CHECK(btoprank_decide(reports, alpha, 1).size() ==
              global_detect(aggregate(reports), alpha).size());
      }
    }
  }
  SUBCASE("argument checks") {
    CHECK_THROWS_AS(btoprank_decide({}, 0.05, 0), ValidationError);
    CHECK_THROWS_AS(btoprank_decide({}, 1.0, 3), ValidationError);
  }
}

TEST_CASE("alarm CSV") {
  std::vector<Alarm> alarms{{3, "10.0.0.7", 1.5e-7, 30, {1, 4}, Method::dtoprank},
                            {3, "10.0.0.9", 0.01, 12, {2}, Method::btoprank}};
  std::ostringstream out;
  write_alarms_header(out);
  write_alarms(out, alarms);
  CHECK(out.str() ==
        "window_id,dst,p_value,change_point,method\n"
        "3,10.0.0.7,1.5e-07,30,dtoprank\n"
        "3,10.0.0.9,0.01,12,btoprank\n");
}

TEST_CASE("btoprank change point on tied minima follows the smaller monitor id") {
  const auto at = [](int change) {
    std::vector<Count> v(20, 1);
    std::fill(v.begin() + change, v.end(), 30);
    return CensoredSeries::exact(v);
  };
  std::vector<MonitorReport> reports{report(5, {{"x", at(12), 0.001}}),
                                     report(2, {{"x", at(6), 0.001}})};
  CHECK(btoprank_scores(reports, 15)[0].change_point == 6);
  std::reverse(reports.begin(), reports.end());
  CHECK(btoprank_scores(reports, 15)[0].change_point == 6);
}
