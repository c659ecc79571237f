#include "dtoprank/eval_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "dtoprank/collector.hpp"
#include "dtoprank/errors.hpp"

namespace dtoprank::eval {
namespace {

std::vector<ScoredItem> label_scores(std::span<const DestinationScore> scores,
                                     const netsim::GroundTruth& truth) {
  std::vector<ScoredItem> items;
  items.reserve(scores.size() + 1);
  bool target_tested = false;
  for (const auto& s : scores) {
    const bool positive = s.dst == truth.attacked_dst;
    target_tested = target_tested || positive;
    items.push_back({truth.replication, s.dst, s.p_value, positive, true, s.monitors.size()});
  }
  if (!target_tested) items.push_back({truth.replication, truth.attacked_dst, 1.0, true, false, 0});
  return items;
}

}  // namespace

CommsVolume comms_accounting(std::span<const MonitorReport> reports, std::size_t flow_count) {
  CommsVolume v;
  for (const auto& r : reports) {
    for (const auto& e : r.entries) {
      v.dtoprank_scalars += 2 * e.series.length();
      v.btoprank_scalars += 1;
    }
  }
  v.centralized_scalars = 5 * flow_count;
  return v;
}

ReplicationResult run_replication(const netsim::SimConfig& config, const netsim::Graph& graph,
                                  const netsim::Routes& routes, const HarnessOptions& options,
                                  std::uint64_t replication) {
  const auto sim = netsim::gen_traffic(config, graph, routes, replication);

  MonitorParams params{.top_m = options.top_m,
                       .series_count = options.series_count,
                       .reports = options.reports,
                       .bin_width = config.bin_width,
                       .bins = config.bins};
  std::vector<MonitorReport> reports;
  reports.reserve(sim.monitor_flows.size());
  for (std::size_t k = 0; k < sim.monitor_flows.size(); ++k) {
    reports.push_back(process_window(sim.monitor_flows[k], params, static_cast<int>(k) + 1, 0, 0.0));
  }

  ReplicationResult result;
  result.replication = replication;
  result.dtoprank = label_scores(dtoprank_scores(aggregate(reports)), sim.truth);
  result.btoprank = label_scores(btoprank_scores(reports, config.monitors), sim.truth);
  result.volume = comms_accounting(reports, sim.flow_count);
  result.target_link_monitored =
      std::any_of(sim.monitor_edges.begin(), sim.monitor_edges.end(), [&](const netsim::Edge& e) {
        return e.a == config.target_node || e.b == config.target_node;
      });
  return result;
}

std::vector<ReplicationResult> run_replications(const netsim::SimConfig& config,
                                                const netsim::Graph& graph,
                                                const HarnessOptions& options, int count) {
  if (count < 1) throw ValidationError("need at least one replication");
  config.validate();
  const netsim::Routes routes(graph);

  std::vector<ReplicationResult> results(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&] {
    for (int r = next++; r < count; r = next++) {
      try {
        results[static_cast<std::size_t>(r)] =
            run_replication(config, graph, routes, options, static_cast<std::uint64_t>(r));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };

  int jobs = options.jobs > 0 ? options.jobs
                              : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, count);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<ScoredItem> collect_scores(std::span<const ReplicationResult> results, Method method) {
  std::vector<ScoredItem> items;
  for (const auto& r : results) {
    const auto& src = method == Method::dtoprank ? r.dtoprank : r.btoprank;
    items.insert(items.end(), src.begin(), src.end());
  }
  return items;
}

std::vector<double> log_alpha_grid(int count, double lo, double hi) {
  if (count < 2 || !(lo > 0.0) || !(hi > lo)) throw ValidationError("bad alpha grid");
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double step = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  grid.back() = hi;
  return grid;
}

RocPoint rates_at(std::span<const ScoredItem> items, double alpha) {
  std::size_t pos = 0, neg = 0, tp = 0, fp = 0;
  for (const auto& it : items) {
    if (it.positive) {
      ++pos;
      if (it.p_value < alpha) ++tp;
    } else if (it.tested) {
      ++neg;
      if (it.p_value < alpha) ++fp;
    }
  }
  return {alpha, neg == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(neg),
          pos == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(pos)};
}

RocCurve roc_curve(std::span<const ScoredItem> items, std::span<const double> alpha_grid) {
  RocCurve curve;
  std::vector<double> pos_p, neg_p;
  for (const auto& it : items) {
    if (it.positive) pos_p.push_back(it.p_value);
    else if (it.tested) neg_p.push_back(it.p_value);
  }
  curve.positives = pos_p.size();
  curve.negatives = neg_p.size();
  if (pos_p.empty() || neg_p.empty()) {
    throw ValidationError("ROC needs at least one positive and one tested negative");
  }
  std::sort(pos_p.begin(), pos_p.end());
  std::sort(neg_p.begin(), neg_p.end());
  const auto rate_below = [](const std::vector<double>& sorted, double alpha) {
    const auto n = std::lower_bound(sorted.begin(), sorted.end(), alpha) - sorted.begin();
    return static_cast<double>(n) / static_cast<double>(sorted.size());
  };

  std::vector<double> grid(alpha_grid.begin(), alpha_grid.end());
  std::sort(grid.begin(), grid.end());
  curve.points.push_back({0.0, 0.0, 0.0});
  for (double a : grid) {
    if (!(a > 0.0 && a < 1.0)) continue;
    curve.points.push_back({a, rate_below(neg_p, a), rate_below(pos_p, a)});
  }
  curve.points.push_back({1.0, 1.0, 1.0});
  return curve;
}

double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    area += (b.false_alarm_rate - a.false_alarm_rate) * (a.detection_rate + b.detection_rate) / 2.0;
  }
  return area;
}

void write_roc_header(std::ostream& out) { out << "method,eta,alpha,fa_rate,det_rate\n"; }

void write_roc(std::ostream& out, Method method, double eta, const RocCurve& curve) {
  for (const auto& p : curve.points) {
    out << method_name(method) << ',' << format_double(eta) << ',' << format_double(p.alpha)
        << ',' << format_double(p.false_alarm_rate) << ',' << format_double(p.detection_rate)
        << '\n';
  }
  if (!out) throw IoError("write error");
}

void write_auc_header(std::ostream& out) { out << "method,eta,auc\n"; }

void write_auc(std::ostream& out, Method method, double eta, double value) {
  out << method_name(method) << ',' << format_double(eta) << ',' << format_double(value) << '\n';
  if (!out) throw IoError("write error");
}

}  // namespace dtoprank::eval
