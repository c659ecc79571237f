#include "dtoprank/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "dtoprank/collector.hpp"
#include "dtoprank/errors.hpp"
#include "dtoprank/eval_harness.hpp"
#include "dtoprank/monitor.hpp"
#include "dtoprank/netsim.hpp"
#include "dtoprank/wire_format.hpp"

namespace fs = std::filesystem;

namespace dtoprank::cli {
namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

// Output goes to a file when a path is given, to `fallback` otherwise.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) file_ = open_out(path);
    stream_ = path.empty() ? &fallback : &*file_;
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::optional<std::ofstream> file_;
  std::ostream* stream_;
};

struct SimFlags {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<double> eta;
  std::vector<std::string> excluded;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value simulation config file");
    app->add_option("--set", overrides, "override one config entry, key=value");
    app->add_option("--seed", seed, "replication seed");
    app->add_option("--eta", eta, "attack rate multiplier");
    app->add_option("--exclude-edge", excluded, "link u-v that may not carry a monitor");
  }

  netsim::SimConfig resolve() const {
    netsim::SimConfig config;
    if (!config_path.empty()) {
      auto in = open_in(config_path);
      config = netsim::read_sim_config(in);
    }
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) config.seed = *seed;
    if (eta) config.eta = *eta;
    for (const auto& e : excluded) config.excluded_edges.push_back(netsim::parse_edge(e));
    config.validate();
    return config;
  }
};

struct DetectorFlags {
  int top_m = 10;
  int series_count = 60;
  int reports = 1;
  double bin_width = 1.0;
  int bins = 60;

  void attach(CLI::App* app, bool with_window) {
    app->add_option("-M,--top-m", top_m, "destinations kept per bin")->capture_default_str();
    app->add_option("-S,--series", series_count, "series built per monitor")->capture_default_str();
    app->add_option("-d,--reports", reports, "series forwarded per monitor")->capture_default_str();
    if (with_window) {
      app->add_option("--bin-width", bin_width, "bin width in seconds")->capture_default_str();
      app->add_option("-P,--bins", bins, "bins per window")->capture_default_str();
    }
  }
};

int cmd_simulate(const netsim::SimConfig& config, int replications, const std::string& out_dir,
                 std::ostream& log) {
  if (replications < 1) throw ValidationError("replications must be at least 1");
  fs::create_directories(out_dir);
  const auto graph = netsim::gen_graph(config.n_nodes, config.edge_prob, config.graph_seed);
  const netsim::Routes routes(graph);

  {
    auto cfg = open_out(fs::path(out_dir) / "sim_config.txt");
    cfg << "# seed=" << config.seed << '\n';
    netsim::write_sim_config(cfg, config);
  }
  auto truth = open_out(fs::path(out_dir) / "ground_truth.csv");
  truth << "# seed=" << config.seed << '\n' << "replication,attacked_dst,tau,attacker_count\n";

  for (int r = 0; r < replications; ++r) {
    const auto rep = netsim::gen_traffic(config, graph, routes, static_cast<std::uint64_t>(r));
    for (std::size_t k = 0; k < rep.monitor_flows.size(); ++k) {
      const auto name = "flows_r" + std::to_string(r) + "_m" + std::to_string(k + 1) + ".csv";
      auto out = open_out(fs::path(out_dir) / name);
      out << "# seed=" << config.seed << " replication=" << r << " monitor=" << k + 1;
      if (k < rep.monitor_edges.size()) out << " link=" << netsim::to_string(rep.monitor_edges[k]);
      out << '\n';
      write_flows_csv(out, rep.monitor_flows[k]);
    }
    truth << r << ',' << rep.truth.attacked_dst << ',' << rep.truth.change_bin << ','
          << rep.truth.attacker_srcs.size() << '\n';
  }
  if (!truth) throw IoError("write error on ground truth");
  log << "wrote " << replications << " replication(s) x " << config.monitors
      << " monitor flow files to " << out_dir << " (seed " << config.seed << ")\n";
  return kSuccess;
}

int cmd_detect(const std::vector<std::string>& flow_files, const DetectorFlags& flags,
               double origin, int first_monitor_id, const std::string& out_path,
               std::ostream& out) {
  MonitorParams params{.top_m = flags.top_m,
                       .series_count = flags.series_count,
                       .reports = flags.reports,
                       .bin_width = flags.bin_width,
                       .bins = flags.bins};
  params.validate();

  Sink sink(out_path, out);
  write_report_header(*sink);
  for (std::size_t i = 0; i < flow_files.size(); ++i) {
    auto in = open_in(flow_files[i]);
    std::vector<FlowRecord> flows;
    try {
      flows = read_flows_csv(in);
    } catch (const ValidationError& e) {
      throw ValidationError(flow_files[i] + ": " + e.what());
    }
    const int monitor_id = first_monitor_id + static_cast<int>(i);
    for (const auto& [window_id, window_flows] :
         split_windows(flows, origin, params.window_length())) {
      const double start = origin + static_cast<double>(window_id) * params.window_length();
      write_report(*sink, process_window(window_flows, params, monitor_id, window_id, start));
    }
  }
  return kSuccess;
}

int cmd_collect(const std::vector<std::string>& report_files, double alpha, Method method,
                std::optional<int> monitor_count, const std::string& out_path, std::ostream& out) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("--alpha must lie in (0, 1)");
  if (method == Method::btoprank && !monitor_count) {
    throw ValidationError("btoprank needs the total monitor count, pass -K");
  }

  std::vector<WireRecord> records;
  for (const auto& path : report_files) {
    auto in = open_in(path);
    try {
      auto more = read_reports(in);
      records.insert(records.end(), std::make_move_iterator(more.begin()),
                     std::make_move_iterator(more.end()));
    } catch (const ValidationError& e) {
      throw ValidationError(path + ": " + e.what());
    }
  }
  const auto reports = group_reports(records);

  Sink sink(out_path, out);
  write_alarms_header(*sink);
  auto first = reports.begin();
  while (first != reports.end()) {
    const auto last = std::find_if(first, reports.end(), [&](const MonitorReport& r) {
      return r.window_id != first->window_id;
    });
    const std::span<const MonitorReport> window(&*first, static_cast<std::size_t>(last - first));
    const auto alarms = method == Method::dtoprank
                            ? global_detect(aggregate(window), alpha, first->window_id)
                            : btoprank_decide(window, alpha, *monitor_count);
    write_alarms(*sink, alarms);
    first = last;
  }
  return kSuccess;
}

int cmd_evaluate(const netsim::SimConfig& base, int replications, std::vector<double> etas,
                 const DetectorFlags& flags, int jobs, const std::string& out_dir,
                 std::ostream& log) {
  if (etas.empty()) etas = {base.eta};
  fs::create_directories(out_dir);
  const auto graph = netsim::gen_graph(base.n_nodes, base.edge_prob, base.graph_seed);
  const eval::HarnessOptions options{.top_m = flags.top_m,
                                     .series_count = flags.series_count,
                                     .reports = flags.reports,
                                     .jobs = jobs};
  const auto grid = eval::log_alpha_grid();

  auto roc = open_out(fs::path(out_dir) / "roc.csv");
  auto auc = open_out(fs::path(out_dir) / "auc.csv");
  auto comms = open_out(fs::path(out_dir) / "comms.csv");
  for (auto* s : {&roc, &auc, &comms}) {
    *s << "# seed=" << base.seed << " replications=" << replications
       << " false alarms over destinations tested at the collector\n";
  }
  eval::write_roc_header(roc);
  eval::write_auc_header(auc);
  comms << "eta,replication,dtoprank_scalars,btoprank_scalars,centralized_scalars\n";

  for (double eta : etas) {
    auto config = base;
    config.eta = eta;
    const auto results = eval::run_replications(config, graph, options, replications);
    for (auto method : {Method::dtoprank, Method::btoprank}) {
      const auto items = eval::collect_scores(results, method);
      const auto curve = eval::roc_curve(items, grid);
      const double area = eval::auc(curve);
      eval::write_roc(roc, method, eta, curve);
      eval::write_auc(auc, method, eta, area);
      log << method_name(method) << " eta=" << format_double(eta) << " auc=" << area
          << " (positives " << curve.positives << ", tested negatives " << curve.negatives
          << ")\n";
    }
    for (const auto& r : results) {
      comms << format_double(eta) << ',' << r.replication << ',' << r.volume.dtoprank_scalars
            << ',' << r.volume.btoprank_scalars << ',' << r.volume.centralized_scalars << '\n';
    }
  }
  if (!roc || !auc || !comms) throw IoError("write error in " + out_dir);
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributed change-point detection of SYN-flood targets", "dtoprank"};
  app.require_subcommand(1);

  auto* simulate = app.add_subcommand("simulate", "generate per-monitor flow files");
  SimFlags sim_flags;
  sim_flags.attach(simulate);
  int sim_replications = 1;
  std::string sim_out;
  simulate->add_option("-R,--replications", sim_replications)->capture_default_str();
  simulate->add_option("-o,--out", sim_out, "output directory")->required();

  auto* detect = app.add_subcommand("detect", "run monitors over flow files");
  DetectorFlags det_flags;
  det_flags.attach(detect, true);
  std::vector<std::string> flow_files;
  double origin = 0.0;
  int first_monitor_id = 1;
  std::string det_out;
  detect->add_option("flows", flow_files, "one flow CSV per monitor")->required();
  detect->add_option("--origin", origin, "start time of window 0")->capture_default_str();
  detect->add_option("--first-monitor-id", first_monitor_id)->capture_default_str();
  detect->add_option("-o,--out", det_out, "report file (default stdout)");

  auto* collect = app.add_subcommand("collect", "aggregate reports and raise alarms");
  std::vector<std::string> report_files;
  double alpha = 0.05;
  std::string method_text = "dtoprank";
  std::optional<int> monitor_count;
  std::string col_out;
  collect->add_option("reports", report_files, "report files")->required();
  collect->add_option("-a,--alpha", alpha)->capture_default_str();
  collect->add_option("-m,--method", method_text)
      ->check(CLI::IsMember({"dtoprank", "btoprank"}))
      ->capture_default_str();
  collect->add_option("-K,--monitors", monitor_count, "total monitor count (btoprank)");
  collect->add_option("-o,--out", col_out, "alarm file (default stdout)");

  auto* evaluate = app.add_subcommand("evaluate", "Monte-Carlo ROC evaluation");
  SimFlags eval_sim_flags;
  eval_sim_flags.attach(evaluate);
  DetectorFlags eval_det_flags;
  eval_det_flags.attach(evaluate, false);
  int eval_replications = 200;
  std::vector<double> etas;
  int jobs = 0;
  std::string eval_out;
  evaluate->add_option("-R,--replications", eval_replications)->capture_default_str();
  evaluate->add_option("--etas", etas, "attack multipliers to sweep")->delimiter(',');
  evaluate->add_option("-j,--jobs", jobs, "worker threads (0: all cores)")->capture_default_str();
  evaluate->add_option("-o,--out", eval_out, "output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kValidationError;
  }

  try {
    if (*simulate) return cmd_simulate(sim_flags.resolve(), sim_replications, sim_out, err);
    if (*detect) return cmd_detect(flow_files, det_flags, origin, first_monitor_id, det_out, out);
    if (*collect) {
      return cmd_collect(report_files, alpha, parse_method(method_text), monitor_count, col_out,
                         out);
    }
    if (*evaluate) {
      return cmd_evaluate(eval_sim_flags.resolve(), eval_replications, etas, eval_det_flags, jobs,
                          eval_out, err);
    }
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidationError;
  } catch (const GenerationError& e) {
    err << "generation error: " << e.what() << '\n';
    return kValidationError;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const ProtocolError& e) {
    err << "protocol error: " << e.what() << '\n';
    return kProtocolError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace dtoprank::cli
