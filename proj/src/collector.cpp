#include "dtoprank/collector.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "dtoprank/errors.hpp"

namespace dtoprank {
namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("alpha must lie in (0, 1), got " + format_double(alpha));
  }
}

void check_same_window(std::span<const MonitorReport> reports) {
  for (const auto& r : reports) {
    if (r.window_id != reports.front().window_id) {
      throw ProtocolError("reports from different windows (" +
                          std::to_string(reports.front().window_id) + " and " +
                          std::to_string(r.window_id) + ") cannot be combined");
    }
  }
}

void add_monitor(std::vector<int>& monitors, int id) {
  const auto it = std::lower_bound(monitors.begin(), monitors.end(), id);
  if (it == monitors.end() || *it != id) monitors.insert(it, id);
}

}  // namespace

std::map<Address, Aggregate> aggregate(std::span<const MonitorReport> reports) {
  std::map<Address, Aggregate> out;
  if (reports.empty()) return out;
  check_same_window(reports);

  std::size_t bins = 0;
  for (const auto& report : reports) {
    for (const auto& e : report.entries) {
      const std::size_t n = e.series.length();
      if (bins == 0) bins = n;
      if (n != bins || e.series.upper.size() != n) {
        throw ProtocolError("series length mismatch in window " +
                            std::to_string(report.window_id) + ": " + std::to_string(n) +
                            " vs " + std::to_string(bins));
      }
      auto [it, inserted] = out.try_emplace(e.dst);
      auto& agg = it->second;
      if (inserted) {
        agg.series = e.series;
      } else {
        for (std::size_t t = 0; t < n; ++t) {
          agg.series.lower[t] += e.series.lower[t];
          agg.series.upper[t] += e.series.upper[t];
        }
      }
      add_monitor(agg.monitors, report.monitor_id);
    }
  }
  return out;
}

std::vector<DestinationScore> dtoprank_scores(const std::map<Address, Aggregate>& aggregated) {
  std::vector<DestinationScore> scores;
  scores.reserve(aggregated.size());
  for (const auto& [dst, agg] : aggregated) {
    const auto result = test_series(agg.series);
    scores.push_back({dst, result.p_value, result.change_point, agg.monitors});
  }
  return scores;
}

std::vector<Alarm> global_detect(const std::map<Address, Aggregate>& aggregated, double alpha,
                                 WindowId window_id) {
  check_alpha(alpha);
  std::vector<Alarm> alarms;
  for (auto& s : dtoprank_scores(aggregated)) {
    if (s.p_value < alpha) {
      alarms.push_back({window_id, std::move(s.dst), s.p_value, s.change_point,
                        std::move(s.monitors), Method::dtoprank});
    }
  }
  return alarms;
}

std::vector<DestinationScore> btoprank_scores(std::span<const MonitorReport> reports,
                                              int monitor_count) {
  if (monitor_count < 1) throw ValidationError("K must be at least 1");
  check_same_window(reports);

  struct Best {
    double p_value = 2.0;
    int monitor = 0;
    const CensoredSeries* series = nullptr;
    std::vector<int> monitors;
  };
  std::map<Address, Best> best;
  for (const auto& report : reports) {
    for (const auto& e : report.entries) {
      auto& b = best[e.dst];
      // Equal p-values go to the smaller monitor id, whatever the arrival order.
      if (e.p_value < b.p_value || (e.p_value == b.p_value && report.monitor_id < b.monitor)) {
        b.p_value = e.p_value;
        b.monitor = report.monitor_id;
        b.series = &e.series;
      }
      add_monitor(b.monitors, report.monitor_id);
    }
  }

  std::vector<DestinationScore> scores;
  scores.reserve(best.size());
  for (auto& [dst, b] : best) {
    const double corrected = std::min(1.0, monitor_count * b.p_value);
    scores.push_back({dst, corrected, test_series(*b.series).change_point, std::move(b.monitors)});
  }
  return scores;
}

std::vector<Alarm> btoprank_decide(std::span<const MonitorReport> reports, double alpha,
                                   int monitor_count) {
  check_alpha(alpha);
  const WindowId window_id = reports.empty() ? 0 : reports.front().window_id;
  std::vector<Alarm> alarms;
  for (auto& s : btoprank_scores(reports, monitor_count)) {
    if (s.p_value < alpha) {
      alarms.push_back({window_id, std::move(s.dst), s.p_value, s.change_point,
                        std::move(s.monitors), Method::btoprank});
    }
  }
  return alarms;
}

void write_alarms_header(std::ostream& out) {
  out << "window_id,dst,p_value,change_point,method\n";
}

void write_alarms(std::ostream& out, std::span<const Alarm> alarms) {
  for (const auto& a : alarms) {
    out << a.window_id << ',' << a.dst << ',' << format_double(a.p_value) << ','
        << a.change_point << ',' << method_name(a.method) << '\n';
  }
  if (!out) throw IoError("write error");
}

}  // namespace dtoprank
