#pragma once

// Central decision site. DTopRank sums the censored bounds each monitor
// forwarded for a destination and re-runs the rank test on the aggregate;
// BTopRank only Bonferroni-corrects the smallest local p-value.

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "dtoprank/censored_rank_test.hpp"
#include "dtoprank/monitor.hpp"
#include "dtoprank/wire_format.hpp"

namespace dtoprank {

struct Aggregate {
  CensoredSeries series;
  std::vector<int> monitors;  // ascending ids of the monitors that reported the destination
};

// Elementwise bound sums over the monitors that reported each destination.
// All reports must share one window id and one series length, otherwise
// ProtocolError.
std::map<Address, Aggregate> aggregate(std::span<const MonitorReport> reports);

struct Alarm {
  WindowId window_id = 0;
  Address dst;
  double p_value = 1.0;
  int change_point = 1;
  std::vector<int> contributing_monitors;
  Method method = Method::dtoprank;
};

// Per-destination score before thresholding; what ROC evaluation consumes.
struct DestinationScore {
  Address dst;
  double p_value = 1.0;
  int change_point = 1;
  std::vector<int> monitors;
};

std::vector<DestinationScore> dtoprank_scores(const std::map<Address, Aggregate>& aggregated);

// Alarm iff p < alpha (strict).
std::vector<Alarm> global_detect(const std::map<Address, Aggregate>& aggregated, double alpha,
                                 WindowId window_id = 0);

// min(1, K * min_k p_k) per destination. K is the total number of monitors
// in the system, not the number that reported the destination. The change
// point is re-estimated from the series of the minimizing monitor.
std::vector<DestinationScore> btoprank_scores(std::span<const MonitorReport> reports,
                                              int monitor_count);

std::vector<Alarm> btoprank_decide(std::span<const MonitorReport> reports, double alpha,
                                   int monitor_count);

void write_alarms_header(std::ostream& out);
void write_alarms(std::ostream& out, std::span<const Alarm> alarms);

}  // namespace dtoprank
