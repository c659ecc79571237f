#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "dtoprank/errors.hpp"
#include "dtoprank/eval_harness.hpp"

using namespace dtoprank;
using namespace dtoprank::eval;

namespace {

ScoredItem item(double p, bool positive, bool tested = true) {
  return {0, positive ? "t" : "n", p, positive, tested};
}

netsim::SimConfig small_config(double eta) {
  netsim::SimConfig c;
  c.hosts = 200;
  c.series = 2100;
  c.attackers = 50;
  c.eta = eta;
  return c;
}

}  // namespace

TEST_CASE("alpha grid") {
  const auto g = log_alpha_grid();
  REQUIRE(g.size() == 60);
  CHECK(g.front() == doctest::Approx(1e-6));
  CHECK(g.back() == doctest::Approx(0.5));
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]));
  }
}

TEST_CASE("roc_curve") {
  const auto grid = log_alpha_grid();
  SUBCASE("perfect separation") {
    std::vector<ScoredItem> items;
    for (int i = 0; i < 20; ++i) items.push_back(item(1e-9, true));
    for (int i = 0; i < 200; ++i) items.push_back(item(0.9, false));
    const auto c = roc_curve(items, grid);
    CHECK(c.positives == 20);
    CHECK(c.negatives == 200);
    CHECK(auc(c) == doctest::Approx(1.0));
  }
  SUBCASE("uniform scores sit on the diagonal") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ScoredItem> items;
    for (int i = 0; i < 10000; ++i) items.push_back(item(u(rng), i % 2 == 0));
    const auto c = roc_curve(items, grid);
    CHECK(std::abs(auc(c) - 0.5) < 0.05);
    const auto at = rates_at(items, 0.05);
    CHECK(std::abs(at.detection_rate - 0.05) < 0.015);
    CHECK(std::abs(at.false_alarm_rate - 0.05) < 0.015);
  }
  SUBCASE("closure points and monotone rates") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ScoredItem> items;
    for (int i = 0; i < 500; ++i) items.push_back(item(u(rng) * u(rng), i % 5 == 0));
    const auto c = roc_curve(items, grid);
    REQUIRE(c.points.size() == grid.size() + 2);
    CHECK(c.points.front().alpha == 0.0);
    CHECK(c.points.front().false_alarm_rate == 0.0);
    CHECK(c.points.front().detection_rate == 0.0);
    CHECK(c.points.back().alpha == 1.0);
    CHECK(c.points.back().false_alarm_rate == 1.0);
    CHECK(c.points.back().detection_rate == 1.0);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      CHECK(c.points[i].false_alarm_rate >= c.points[i - 1].false_alarm_rate);
      CHECK(c.points[i].detection_rate >= c.points[i - 1].detection_rate);
    }
  }
  SUBCASE("untested positives count as misses, untested negatives are ignored") {
    const std::vector<ScoredItem> items{item(1e-4, true), item(1.0, true, false),
                                        item(0.5, false), item(1e-4, false, false)};
    const auto r = rates_at(items, 0.01);
    CHECK(r.detection_rate == 0.5);
    CHECK(r.false_alarm_rate == 0.0);
  }
  SUBCASE("strict threshold") {
    const std::vector<ScoredItem> items{item(0.01, true), item(0.5, false)};
    CHECK(rates_at(items, 0.01).detection_rate == 0.0);
  }
  SUBCASE("one class missing") {
    const std::vector<ScoredItem> only_pos{item(0.1, true)};
    const std::vector<ScoredItem> only_neg{item(0.1, false)};
    CHECK_THROWS_AS(roc_curve(only_pos, grid), ValidationError);
    CHECK_THROWS_AS(roc_curve(only_neg, grid), ValidationError);
  }
  SUBCASE("trapezoid area of a known polyline") {
    RocCurve c;
    c.points = {{0, 0, 0}, {0.1, 0.5, 1.0}, {1, 1, 1}};
    CHECK(auc(c) == doctest::Approx(0.25 + 0.5));
  }
}

TEST_CASE("comms_accounting") {
  SUBCASE("one entry from each of fifteen monitors") {
    std::vector<MonitorReport> reports;
    for (int k = 1; k <= 15; ++k) {
      reports.push_back({k, 0, {{"x", CensoredSeries::exact(std::vector<Count>(60, 1)), 0.1}}});
    }
    const auto v = comms_accounting(reports, 34000);
    CHECK(v.dtoprank_scalars == 1800);
    CHECK(v.btoprank_scalars == 15);
    CHECK(v.centralized_scalars == 170000);
    CHECK(v.reduction() == doctest::Approx(170000.0 / 1800.0));
  }
  SUBCASE("nothing reported") {
    const std::vector<MonitorReport> reports{{1, 0, {}}};
    const auto v = comms_accounting(reports, 10);
    CHECK(v.dtoprank_scalars == 0);
    CHECK(v.btoprank_scalars == 0);
    CHECK(v.reduction() == 0.0);
  }
}

TEST_CASE("replications") {
  const auto config = small_config(2.0);
  const auto graph = netsim::gen_graph(config.n_nodes, config.edge_prob, config.graph_seed);
  const netsim::Routes routes(graph);
  HarnessOptions options;
  options.jobs = 2;

  SUBCASE("one result per replication, independent of worker count") {
    const auto a = run_replications(config, graph, options, 6);
    options.jobs = 1;
    const auto b = run_replications(config, graph, options, 6);
    REQUIRE(a.size() == 6);
    for (std::size_t r = 0; r < a.size(); ++r) {
      CHECK(a[r].replication == r);
      CHECK(a[r].dtoprank.size() == b[r].dtoprank.size());
      for (std::size_t i = 0; i < a[r].dtoprank.size(); ++i) {
        CHECK(a[r].dtoprank[i].dst == b[r].dtoprank[i].dst);
        CHECK(a[r].dtoprank[i].p_value == b[r].dtoprank[i].p_value);
      }
      CHECK(a[r].volume.dtoprank_scalars == b[r].volume.dtoprank_scalars);
    }
  }
  SUBCASE("exactly one positive per replication and method") {
    const auto r = run_replication(config, graph, routes, options, 0);
    for (const auto* items : {&r.dtoprank, &r.btoprank}) {
      CHECK(std::count_if(items->begin(), items->end(), [](const ScoredItem& i) {
              return i.positive;
            }) == 1);
      for (const auto& i : *items) {
        CHECK(i.p_value >= 0.0);
        CHECK(i.p_value <= 1.0);
      }
    }
    CHECK(r.volume.dtoprank_scalars <= 15u * 2u * 60u);
    CHECK(r.volume.centralized_scalars > r.volume.dtoprank_scalars);
  }
  SUBCASE("more reports per monitor means more tested negatives") {
    options.reports = 1;
    const auto one = run_replications(config, graph, options, 4);
    options.reports = 10;
    const auto ten = run_replications(config, graph, options, 4);
    std::size_t neg_one = 0, neg_ten = 0;
    for (const auto& i : collect_scores(one, Method::dtoprank)) neg_one += !i.positive && i.tested;
    for (const auto& i : collect_scores(ten, Method::dtoprank)) neg_ten += !i.positive && i.tested;
    CHECK(neg_ten > neg_one);
  }
}

TEST_CASE("CSV output") {
  RocCurve c;
  c.points = {{0, 0, 0}, {0.05, 0.1, 0.8}, {1, 1, 1}};
  std::ostringstream roc, area;
  write_roc_header(roc);
  write_roc(roc, Method::dtoprank, 1.5, c);
  write_auc_header(area);
  write_auc(area, Method::btoprank, 1.2, 0.875);
  CHECK(roc.str() ==
        "method,eta,alpha,fa_rate,det_rate\n"
        "dtoprank,1.5,0,0,0\n"
        "dtoprank,1.5,0.05,0.1,0.8\n"
        "dtoprank,1.5,1,1,1\n");
  CHECK(area.str() == "method,eta,auc\nbtoprank,1.2,0.875\n");
}
