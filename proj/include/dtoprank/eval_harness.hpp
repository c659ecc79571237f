#pragma once

// Monte-Carlo evaluation: replicate the synthetic scenario, score every
// destination the collector tested with both methods, and turn the scores
// into ROC curves, AUCs and transmitted-volume counts.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dtoprank/monitor.hpp"
#include "dtoprank/netsim.hpp"
#include "dtoprank/wire_format.hpp"

namespace dtoprank::eval {

struct ScoredItem {
  std::uint64_t replication = 0;
  Address dst;
  double p_value = 1.0;
  bool positive = false;
  // False for an attacked destination no monitor reported; it keeps p = 1.
  bool tested = true;
  std::size_t reporters = 0;  // monitors whose report carried dst
};

struct CommsVolume {
  std::size_t dtoprank_scalars = 0;     // entries * 2P
  std::size_t btoprank_scalars = 0;     // one p-value per entry
  std::size_t centralized_scalars = 0;  // flows * 5
  double reduction() const {
    return dtoprank_scalars == 0 ? 0.0
                                 : static_cast<double>(centralized_scalars) /
                                       static_cast<double>(dtoprank_scalars);
  }
};

CommsVolume comms_accounting(std::span<const MonitorReport> reports, std::size_t flow_count);

struct ReplicationResult {
  std::uint64_t replication = 0;
  std::vector<ScoredItem> dtoprank;
  std::vector<ScoredItem> btoprank;
  CommsVolume volume;
  bool target_link_monitored = false;  // some monitor sits on a link of the target node
};

struct HarnessOptions {
  int top_m = 10;
  int series_count = 60;
  int reports = 1;
  int jobs = 0;  // 0: hardware concurrency
};

// One replication end to end: traffic, every monitor, both collector rules.
ReplicationResult run_replication(const netsim::SimConfig& config, const netsim::Graph& graph,
                                  const netsim::Routes& routes, const HarnessOptions& options,
                                  std::uint64_t replication);

// Replications 0..count-1, results ordered by replication index whatever
// the number of workers.
std::vector<ReplicationResult> run_replications(const netsim::SimConfig& config,
                                                const netsim::Graph& graph,
                                                const HarnessOptions& options, int count);

std::vector<ScoredItem> collect_scores(std::span<const ReplicationResult> results, Method method);

struct RocPoint {
  double alpha = 0.0;
  double false_alarm_rate = 0.0;
  double detection_rate = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  std::size_t positives = 0;
  std::size_t negatives = 0;  // tested negatives only
};

// `count` log-spaced values from lo to hi inclusive.
std::vector<double> log_alpha_grid(int count = 60, double lo = 1e-6, double hi = 0.5);

// Rates of p < alpha pooled over all replications. Detection is over every
// positive, false alarms over tested negatives. The curve is closed by
// (0, 0) at alpha = 0 and by the alarm-everything point (1, 1) at alpha = 1.
// ValidationError when either class is empty.
RocCurve roc_curve(std::span<const ScoredItem> items, std::span<const double> alpha_grid);

// Rates at a single level (no curve closure).
RocPoint rates_at(std::span<const ScoredItem> items, double alpha);

// Trapezoid rule along the false-alarm axis.
double auc(const RocCurve& curve);

void write_roc_header(std::ostream& out);
void write_roc(std::ostream& out, Method method, double eta, const RocCurve& curve);
void write_auc_header(std::ostream& out);
void write_auc(std::ostream& out, Method method, double eta, double value);

}  // namespace dtoprank::eval
