#pragma once

// Synthetic DDoS scenario: Erdos-Renyi topology, shortest-path routes,
// monitors on random links, heavy-tailed per-pair Poisson SYN rates and a
// multiplicative rate increase from N_a attackers towards one target host.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dtoprank/monitor.hpp"

namespace dtoprank::netsim {

using Rng = std::mt19937_64;

// Undirected link between 1-based nodes, stored with a < b.
struct Edge {
  int a = 0;
  int b = 0;

  static Edge between(int u, int v) { return u < v ? Edge{u, v} : Edge{v, u}; }
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Parses "u-v".
Edge parse_edge(std::string_view text);
std::string to_string(const Edge& e);

struct Graph {
  int nodes = 0;
  std::vector<Edge> edges;  // sorted

  std::vector<std::vector<int>> adjacency() const;  // index 0 unused
  bool connected() const;
  bool has_edge(Edge e) const;
  int degree(int node) const;
};

// G(n, p) redrawn until connected; GenerationError after 10^4 attempts.
Graph gen_graph(int nodes, double edge_prob, std::uint64_t seed);

// All-pairs shortest paths (unit weights). Among equally short paths the
// lexicographically smallest node sequence wins.
class Routes {
 public:
  explicit Routes(const Graph& graph);

  const std::vector<Edge>& route(int from, int to) const {
    return table_[static_cast<std::size_t>(from) * stride_ + static_cast<std::size_t>(to)];
  }
  int nodes() const { return static_cast<int>(stride_) - 1; }

 private:
  std::size_t stride_;
  std::vector<std::vector<Edge>> table_;
};

inline Routes compute_routes(const Graph& graph) { return Routes(graph); }

// Uniform K-subset of the links not listed in `excluded`.
std::vector<Edge> place_monitors(const Graph& graph, int monitor_count, Rng& rng,
                                 std::span<const Edge> excluded = {});

// Inverse CDF of the density g*a / (1 + g*x)^(1+a), x > 0.
double pareto_quantile(double u, double alpha, double gamma);

// N i.i.d. Pareto draws sorted in decreasing order.
std::vector<double> gen_intensities(int count, double alpha, double gamma, Rng& rng);
std::vector<double> gen_intensities(int count, double alpha, double gamma, std::uint64_t seed);

enum class Placement {
  topology,  // monitors on links, a flow is seen by every monitor on its route
  hash,      // every (src, dst) pair is assigned to one random monitor
};

struct SimConfig {
  int n_nodes = 15;
  double edge_prob = 0.15;
  int hosts = 1000;        // D
  int monitors = 15;       // K
  int series = 10100;      // N, number of active (src, dst) pairs
  int attackers = 100;     // N_a
  int bins = 60;           // P
  int tau = 30;            // last pre-change bin
  double eta = 1.5;
  double pareto_alpha = 2.5;
  double pareto_gamma = 0.72;
  int target_node = 7;
  double bin_width = 1.0;
  std::uint64_t seed = 1;
  // Graph drawn once per experiment; this seed gives a 24-link graph in
  // which node 7 hangs off node 10.
  std::uint64_t graph_seed = 2614;
  std::vector<Edge> excluded_edges;
  Placement placement = Placement::topology;

  void validate() const;
  // Applies one `key = value` setting; ValidationError names unknown keys.
  void set(std::string_view key, std::string_view value);
};

// `key = value` lines, '#' comments.
SimConfig read_sim_config(std::istream& in, SimConfig base = {});
void write_sim_config(std::ostream& out, const SimConfig& config);

struct GroundTruth {
  std::uint64_t replication = 0;
  Address attacked_dst;
  std::vector<Address> attacker_srcs;
  int change_bin = 0;  // tau
};

struct Replication {
  std::vector<Edge> monitor_edges;                    // empty in hash mode
  std::vector<std::vector<FlowRecord>> monitor_flows;  // one stream per monitor
  std::vector<int> host_node;                          // host h sits on node host_node[h]; [0] unused
  GroundTruth truth;
  std::size_t flow_count = 0;  // nonzero (pair, bin) flows generated network-wide
};

// Host placement, monitor placement, intensities and counts are redrawn from
// a stream seeded by (config.seed, replication). Hosts are named "1".."D".
Replication gen_traffic(const SimConfig& config, const Graph& graph, const Routes& routes,
                        std::uint64_t replication);

Rng replication_rng(std::uint64_t seed, std::uint64_t replication);

}  // namespace dtoprank::netsim
