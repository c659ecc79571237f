#pragma once

// Line-oriented text formats exchanged between the pipeline stages.
//
//   flows    start_time,end_time,src,dst,syn_count
//   reports  monitor_id,window_id,dst,p_value,lower[0..P-1],upper[0..P-1]
//   alarms   window_id,dst,p_value,change_point,method
//
// Lines starting with '#' are comments. A header line is optional on input
// and recognized by its first column name.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dtoprank/monitor.hpp"

namespace dtoprank {

std::vector<FlowRecord> read_flows_csv(std::istream& in);
void write_flows_csv(std::ostream& out, std::span<const FlowRecord> flows,
                     bool with_header = true);

// One wire record: a single report entry tagged with its origin.
struct WireRecord {
  int monitor_id = 0;
  WindowId window_id = 0;
  ReportEntry entry;
};

std::vector<WireRecord> read_reports(std::istream& in);
void write_report(std::ostream& out, const MonitorReport& report);
void write_report_header(std::ostream& out);

// Regroups wire records into per-(window, monitor) reports, entries kept in
// file order.
std::vector<MonitorReport> group_reports(std::span<const WireRecord> records);

enum class Method { dtoprank, btoprank };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace dtoprank
