#include "dtoprank/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "dtoprank/errors.hpp"

namespace dtoprank {

BinnedWindow bin_flows(std::span<const FlowRecord> flows, double window_start,
                       double bin_width, int bins, WindowId window_id) {
  if (!(bin_width > 0.0)) throw ValidationError("bin width must be positive");
  if (bins < 2) throw ValidationError("P must be at least 2, got " + std::to_string(bins));

  BinnedWindow window{.window_id = window_id, .bin_width = bin_width, .bins = bins, .counts = {}};
  for (const auto& flow : flows) {
    const double offset = (flow.start_time - window_start) / bin_width;
    if (!(offset >= 0.0) || offset >= bins) continue;
    const auto bin = std::min(static_cast<std::size_t>(std::floor(offset)),
                              static_cast<std::size_t>(bins - 1));
    auto [it, inserted] = window.counts.try_emplace(flow.dst);
    if (inserted) it->second.assign(static_cast<std::size_t>(bins), 0);
    it->second[bin] += flow.syn_count;
  }
  return window;
}

bool TopMFilter::retained(std::size_t bin, const Address& dst) const {
  const auto& kept = top[bin];
  return std::any_of(kept.begin(), kept.end(),
                     [&](const TopEntry& e) { return e.dst == dst; });
}

std::size_t TopMFilter::stored_values() const {
  std::size_t n = 0;
  for (const auto& kept : top) n += kept.size();
  return n;
}

TopMFilter top_m_filter(const BinnedWindow& window, int max_kept) {
  if (max_kept < 1) throw ValidationError("M must be at least 1");

  const auto bins = static_cast<std::size_t>(window.bins);
  TopMFilter filter;
  filter.top.resize(bins);
  filter.threshold.assign(bins, 0);

  const auto by_count_then_address = [](const TopEntry& a, const TopEntry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.dst < b.dst;
  };

  std::vector<TopEntry> candidates;
  for (std::size_t t = 0; t < bins; ++t) {
    candidates.clear();
    for (const auto& [dst, series] : window.counts) {
      if (series[t] > 0) candidates.push_back({dst, series[t]});
    }
    const auto keep = std::min(candidates.size(), static_cast<std::size_t>(max_kept));
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), by_count_then_address);
    filter.top[t].assign(candidates.begin(),
                         candidates.begin() + static_cast<std::ptrdiff_t>(keep));
    if (keep > 0) filter.threshold[t] = filter.top[t].back().count;
  }
  return filter;
}

std::vector<NamedSeries> build_censored_series(const BinnedWindow& window,
                                               const TopMFilter& filter,
                                               int max_series) {
  std::vector<NamedSeries> out;
  if (max_series < 1) return out;

  const std::size_t bins = filter.top.size();
  std::size_t max_rank = 0;
  for (const auto& kept : filter.top) max_rank = std::max(max_rank, kept.size());

  std::unordered_set<Address> seen;
  const auto wanted = static_cast<std::size_t>(max_series);
  for (std::size_t rank = 0; rank < max_rank && out.size() < wanted; ++rank) {
    for (std::size_t t = 0; t < bins && out.size() < wanted; ++t) {
      if (rank >= filter.top[t].size()) continue;
      const Address& dst = filter.top[t][rank].dst;
      if (!seen.insert(dst).second) continue;

      const auto& counts = window.counts.at(dst);
      CensoredSeries series;
      series.lower.resize(bins);
      series.upper.resize(bins);
      for (std::size_t b = 0; b < bins; ++b) {
        if (filter.retained(b, dst)) {
          series.lower[b] = series.upper[b] = counts[b];
        } else {
          series.lower[b] = 0;
          series.upper[b] = filter.threshold[b];
        }
      }
      out.push_back({dst, std::move(series)});
    }
  }
  return out;
}

std::vector<LocalResult> local_detect(const BinnedWindow& window, int max_kept,
                                      int max_series) {
  const auto filter = top_m_filter(window, max_kept);
  auto built = build_censored_series(window, filter, max_series);

  std::vector<LocalResult> results;
  results.reserve(built.size());
  for (auto& named : built) {
    auto result = test_series(named.series);
    results.push_back({std::move(named.dst), std::move(named.series), result});
  }
  return results;
}

MonitorReport select_top_d(std::vector<LocalResult> results, int d, int monitor_id,
                           WindowId window_id) {
  if (d < 1) throw ValidationError("d must be at least 1");

  const auto keep = std::min(results.size(), static_cast<std::size_t>(d));
  std::partial_sort(results.begin(), results.begin() + static_cast<std::ptrdiff_t>(keep),
                    results.end(), [](const LocalResult& a, const LocalResult& b) {
                      if (a.result.p_value != b.result.p_value)
                        return a.result.p_value < b.result.p_value;
                      return a.dst < b.dst;
                    });

  MonitorReport report{.monitor_id = monitor_id, .window_id = window_id, .entries = {}};
  report.entries.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    report.entries.push_back(
        {std::move(results[i].dst), std::move(results[i].series), results[i].result.p_value});
  }
  return report;
}

void MonitorParams::validate() const {
  if (top_m < 1) throw ValidationError("M must be at least 1");
  if (series_count < 1) throw ValidationError("S must be at least 1");
  if (reports < 1) throw ValidationError("d must be at least 1");
  if (!(bin_width > 0.0)) throw ValidationError("bin width must be positive");
  if (bins < 2) throw ValidationError("P must be at least 2, got " + std::to_string(bins));
}

MonitorReport process_window(std::span<const FlowRecord> flows, const MonitorParams& params,
                             int monitor_id, WindowId window_id, double window_start) {
  params.validate();
  const auto window = bin_flows(flows, window_start, params.bin_width, params.bins, window_id);
  return select_top_d(local_detect(window, params.top_m, params.series_count), params.reports,
                      monitor_id, window_id);
}

std::map<WindowId, std::vector<FlowRecord>> split_windows(std::span<const FlowRecord> flows,
                                                          double origin,
                                                          double window_length) {
  if (!(window_length > 0.0)) throw ValidationError("window length must be positive");
  std::map<WindowId, std::vector<FlowRecord>> windows;
  for (const auto& flow : flows) {
    const double offset = (flow.start_time - origin) / window_length;
    if (!(offset >= 0.0)) continue;
    windows[static_cast<WindowId>(std::floor(offset))].push_back(flow);
  }
  return windows;
}

}  // namespace dtoprank
