#pragma once

// Local processing inside one monitor: per-destination SYN binning, Top-M
// record filtering, censored-series construction, local testing and the
// selection of the d series forwarded to the collector.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dtoprank/censored_rank_test.hpp"

namespace dtoprank {

// Opaque host identifier (IP address string, simulated host number, ...).
// Ordering is plain string ordering and is used for every tie-break.
using Address = std::string;

using WindowId = std::int64_t;

struct FlowRecord {
  double start_time = 0.0;
  double end_time = 0.0;
  Address src;
  Address dst;
  Count syn_count = 0;

  friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

struct BinnedWindow {
  WindowId window_id = 0;
  double bin_width = 1.0;
  int bins = 0;
  // Sparse: destinations without any SYN in the window are absent.
  std::map<Address, std::vector<Count>> counts;
};

// SYNs of a flow are attributed to the bin holding its start time. Flows
// starting outside [window_start, window_start + bins * bin_width) are
// dropped.
BinnedWindow bin_flows(std::span<const FlowRecord> flows, double window_start,
                       double bin_width, int bins, WindowId window_id = 0);

struct TopEntry {
  Address dst;
  Count count = 0;
};

// Per bin, the retained destinations ordered by decreasing count (ties by
// ascending address) and the censoring threshold, i.e. the smallest
// retained count (0 when nothing was retained).
struct TopMFilter {
  std::vector<std::vector<TopEntry>> top;
  std::vector<Count> threshold;

  bool retained(std::size_t bin, const Address& dst) const;
  // Number of count values kept; bounded by M * P.
  std::size_t stored_values() const;
};

TopMFilter top_m_filter(const BinnedWindow& window, int max_kept);

struct NamedSeries {
  Address dst;
  CensoredSeries series;
};

// Candidates are enumerated rank-major: the top destination of every bin,
// then the second of every bin, and so on, skipping repeats, until
// max_series distinct destinations are found.
std::vector<NamedSeries> build_censored_series(const BinnedWindow& window,
                                               const TopMFilter& filter,
                                               int max_series);

struct LocalResult {
  Address dst;
  CensoredSeries series;
  TestResult result;
};

std::vector<LocalResult> local_detect(const BinnedWindow& window, int max_kept,
                                      int max_series);

struct ReportEntry {
  Address dst;
  CensoredSeries series;
  double p_value = 1.0;

  friend bool operator==(const ReportEntry&, const ReportEntry&) = default;
};

struct MonitorReport {
  int monitor_id = 0;
  WindowId window_id = 0;
  std::vector<ReportEntry> entries;  // ascending p-value, at most d
};

// The d smallest p-values, ties broken by ascending address.
MonitorReport select_top_d(std::vector<LocalResult> results, int d, int monitor_id,
                           WindowId window_id);

struct MonitorParams {
  int top_m = 10;
  int series_count = 60;  // S
  int reports = 1;        // d
  double bin_width = 1.0;
  int bins = 60;          // P

  double window_length() const { return bin_width * bins; }
  void validate() const;
};

// bin -> filter -> build -> test -> select, for one window of one monitor.
MonitorReport process_window(std::span<const FlowRecord> flows, const MonitorParams& params,
                             int monitor_id, WindowId window_id, double window_start);

// Groups flows into consecutive disjoint windows of params.window_length()
// seconds starting at origin. Flows before origin are dropped.
std::map<WindowId, std::vector<FlowRecord>> split_windows(std::span<const FlowRecord> flows,
                                                          double origin,
                                                          double window_length);

}  // namespace dtoprank
