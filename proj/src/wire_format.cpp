#include "dtoprank/wire_format.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <system_error>
#include <tuple>

#include "dtoprank/errors.hpp"

namespace dtoprank {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    fields.push_back(trim(line.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return fields;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw ValidationError("line " + std::to_string(line_no) + ": " + what);
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no, const char* name) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || field.empty()) {
    fail(line_no, std::string("cannot parse ") + name + " '" + std::string(field) + "'");
  }
  return value;
}

// Calls fn(fields, line_no) for every data line.
template <typename Fn>
void for_each_record(std::istream& in, std::string_view header_first_column, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto fields = split_fields(body);
    if (first_data_line) {
      first_data_line = false;
      if (fields.front() == header_first_column) continue;
    }
    fn(fields, line_no);
  }
  if (in.bad()) throw IoError("read error");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<FlowRecord> read_flows_csv(std::istream& in) {
  std::vector<FlowRecord> flows;
  for_each_record(in, "start_time", [&](const auto& f, std::size_t line_no) {
    if (f.size() != 5) {
      fail(line_no, "expected 5 fields (start_time,end_time,src,dst,syn_count), got " +
                        std::to_string(f.size()));
    }
    FlowRecord r;
    r.start_time = parse_number<double>(f[0], line_no, "start_time");
    r.end_time = parse_number<double>(f[1], line_no, "end_time");
    r.src = std::string(f[2]);
    r.dst = std::string(f[3]);
    r.syn_count = parse_number<Count>(f[4], line_no, "syn_count");
    if (r.end_time < r.start_time) fail(line_no, "end_time before start_time");
    if (r.syn_count < 0) fail(line_no, "negative syn_count");
    if (r.dst.empty()) fail(line_no, "empty dst");
    flows.push_back(std::move(r));
  });
  return flows;
}

void write_flows_csv(std::ostream& out, std::span<const FlowRecord> flows, bool with_header) {
  if (with_header) out << "start_time,end_time,src,dst,syn_count\n";
  for (const auto& f : flows) {
    out << format_double(f.start_time) << ',' << format_double(f.end_time) << ',' << f.src
        << ',' << f.dst << ',' << f.syn_count << '\n';
  }
  if (!out) throw IoError("write error");
}

void write_report_header(std::ostream& out) {
  out << "monitor_id,window_id,dst,p_value,lower...,upper...\n";
}

void write_report(std::ostream& out, const MonitorReport& report) {
  for (const auto& e : report.entries) {
    out << report.monitor_id << ',' << report.window_id << ',' << e.dst << ','
        << format_double(e.p_value);
    for (auto v : e.series.lower) out << ',' << v;
    for (auto v : e.series.upper) out << ',' << v;
    out << '\n';
  }
  if (!out) throw IoError("write error");
}

std::vector<WireRecord> read_reports(std::istream& in) {
  std::vector<WireRecord> records;
  for_each_record(in, "monitor_id", [&](const auto& f, std::size_t line_no) {
    if (f.size() < 8 || (f.size() - 4) % 2 != 0) {
      fail(line_no, "expected 4 + 2P fields with P >= 2, got " + std::to_string(f.size()));
    }
    const std::size_t bins = (f.size() - 4) / 2;
    WireRecord r;
    r.monitor_id = parse_number<int>(f[0], line_no, "monitor_id");
    r.window_id = parse_number<WindowId>(f[1], line_no, "window_id");
    r.entry.dst = std::string(f[2]);
    r.entry.p_value = parse_number<double>(f[3], line_no, "p_value");
    r.entry.series.lower.resize(bins);
    r.entry.series.upper.resize(bins);
    for (std::size_t t = 0; t < bins; ++t) {
      r.entry.series.lower[t] = parse_number<Count>(f[4 + t], line_no, "lower bound");
      r.entry.series.upper[t] = parse_number<Count>(f[4 + bins + t], line_no, "upper bound");
    }
    if (!r.entry.series.valid()) fail(line_no, "bounds violate 0 <= lower <= upper");
    if (!(r.entry.p_value >= 0.0 && r.entry.p_value <= 1.0)) fail(line_no, "p_value outside [0,1]");
    records.push_back(std::move(r));
  });
  return records;
}

std::vector<MonitorReport> group_reports(std::span<const WireRecord> records) {
  std::map<std::pair<WindowId, int>, MonitorReport> grouped;
  for (const auto& r : records) {
    auto& report = grouped[{r.window_id, r.monitor_id}];
    report.monitor_id = r.monitor_id;
    report.window_id = r.window_id;
    report.entries.push_back(r.entry);
  }
  std::vector<MonitorReport> out;
  out.reserve(grouped.size());
  for (auto& [key, report] : grouped) out.push_back(std::move(report));
  return out;
}

std::string_view method_name(Method m) {
  return m == Method::dtoprank ? "dtoprank" : "btoprank";
}

Method parse_method(std::string_view name) {
  if (name == "dtoprank") return Method::dtoprank;
  if (name == "btoprank") return Method::btoprank;
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

}  // namespace dtoprank
