#include "dtoprank/netsim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "dtoprank/errors.hpp"
#include "dtoprank/wire_format.hpp"

namespace dtoprank::netsim {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_value(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ValidationError("config key '" + std::string(key) + "': cannot parse '" +
                          std::string(text) + "'");
  }
  return value;
}

}  // namespace

Edge parse_edge(std::string_view text) {
  const auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    throw ValidationError("edge must be written u-v, got '" + std::string(text) + "'");
  }
  const int u = parse_value<int>("edge", trim(text.substr(0, dash)));
  const int v = parse_value<int>("edge", trim(text.substr(dash + 1)));
  return Edge::between(u, v);
}

std::string to_string(const Edge& e) { return std::to_string(e.a) + "-" + std::to_string(e.b); }

std::vector<std::vector<int>> Graph::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(nodes) + 1);
  for (const auto& e : edges) {
    adj[static_cast<std::size_t>(e.a)].push_back(e.b);
    adj[static_cast<std::size_t>(e.b)].push_back(e.a);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

bool Graph::connected() const {
  if (nodes <= 1) return true;
  const auto adj = adjacency();
  std::vector<bool> seen(static_cast<std::size_t>(nodes) + 1, false);
  std::vector<int> stack{1};
  seen[1] = true;
  int reached = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == nodes;
}

bool Graph::has_edge(Edge e) const { return std::binary_search(edges.begin(), edges.end(), e); }

int Graph::degree(int node) const {
  return static_cast<int>(std::count_if(edges.begin(), edges.end(), [node](const Edge& e) {
    return e.a == node || e.b == node;
  }));
}

Graph gen_graph(int nodes, double edge_prob, std::uint64_t seed) {
  if (nodes < 2) throw ValidationError("graph needs at least 2 nodes");
  if (!(edge_prob > 0.0 && edge_prob <= 1.0)) {
    throw ValidationError("edge probability must lie in (0, 1]");
  }
  constexpr int kMaxAttempts = 10000;
  Rng rng(seed);
  std::bernoulli_distribution coin(edge_prob);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Graph g{nodes, {}};
    for (int u = 1; u <= nodes; ++u) {
      for (int v = u + 1; v <= nodes; ++v) {
        if (coin(rng)) g.edges.push_back({u, v});
      }
    }
    if (g.connected()) return g;
  }
  throw GenerationError("no connected G(" + std::to_string(nodes) + ", " +
                        format_double(edge_prob) + ") graph after " +
                        std::to_string(kMaxAttempts) + " attempts");
}

Routes::Routes(const Graph& graph)
    : stride_(static_cast<std::size_t>(graph.nodes) + 1), table_(stride_ * stride_) {
  const auto adj = graph.adjacency();
  const int n = graph.nodes;
  std::vector<int> dist(stride_);
  for (int to = 1; to <= n; ++to) {
    // Hop distances towards `to`; walking from any source to the smallest
    // neighbour one hop closer yields the lexicographically smallest
    // shortest path.
    std::fill(dist.begin(), dist.end(), -1);
    std::deque<int> queue{to};
    dist[static_cast<std::size_t>(to)] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : adj[static_cast<std::size_t>(u)]) {
        if (dist[static_cast<std::size_t>(v)] < 0) {
          dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
          queue.push_back(v);
        }
      }
    }
    for (int from = 1; from <= n; ++from) {
      if (from == to || dist[static_cast<std::size_t>(from)] < 0) continue;
      auto& path = table_[static_cast<std::size_t>(from) * stride_ + static_cast<std::size_t>(to)];
      int u = from;
      while (u != to) {
        for (int v : adj[static_cast<std::size_t>(u)]) {
          if (dist[static_cast<std::size_t>(v)] == dist[static_cast<std::size_t>(u)] - 1) {
            path.push_back(Edge::between(u, v));
            u = v;
            break;
          }
        }
      }
    }
  }
}

std::vector<Edge> place_monitors(const Graph& graph, int monitor_count, Rng& rng,
                                 std::span<const Edge> excluded) {
  if (monitor_count < 0) throw ValidationError("K must be non-negative");
  std::vector<Edge> allowed;
  for (const auto& e : graph.edges) {
    if (std::find(excluded.begin(), excluded.end(), e) == excluded.end()) allowed.push_back(e);
  }
  if (static_cast<std::size_t>(monitor_count) > allowed.size()) {
    throw ValidationError("cannot place " + std::to_string(monitor_count) + " monitors on " +
                          std::to_string(allowed.size()) + " eligible links");
  }
  std::shuffle(allowed.begin(), allowed.end(), rng);
  allowed.resize(static_cast<std::size_t>(monitor_count));
  return allowed;
}

double pareto_quantile(double u, double alpha, double gamma) {
  return (std::pow(1.0 - u, -1.0 / alpha) - 1.0) / gamma;
}

std::vector<double> gen_intensities(int count, double alpha, double gamma, Rng& rng) {
  if (!(alpha > 1.0)) throw ValidationError("pareto alpha must exceed 1");
  if (!(gamma > 0.0)) throw ValidationError("pareto gamma must be positive");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> mu(static_cast<std::size_t>(std::max(count, 0)));
  for (auto& m : mu) m = pareto_quantile(unif(rng), alpha, gamma);
  std::sort(mu.begin(), mu.end(), std::greater<>());
  return mu;
}

std::vector<double> gen_intensities(int count, double alpha, double gamma, std::uint64_t seed) {
  Rng rng(seed);
  return gen_intensities(count, alpha, gamma, rng);
}

void SimConfig::validate() const {
  const auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
  };
  need(n_nodes >= 2, "n_nodes must be at least 2");
  need(edge_prob > 0.0 && edge_prob <= 1.0, "edge_prob must lie in (0, 1]");
  need(hosts >= 2, "hosts must be at least 2");
  need(monitors >= 1, "monitors must be at least 1");
  need(attackers >= 1 && attackers < series, "attackers must satisfy 1 <= N_a < N");
  need(attackers <= hosts - 1, "attackers cannot exceed hosts - 1");
  // Attack rates come from the decreasing-rank band [40 N_a, 41 N_a).
  need(41LL * attackers <= series, "series must be at least 41 * attackers");
  const long long pair_capacity = static_cast<long long>(hosts - 1) * (hosts - 1);
  need(series - attackers <= pair_capacity, "too many background pairs for the host count");
  need(bins >= 2, "bins must be at least 2");
  need(tau >= 1 && tau < bins, "tau must satisfy 1 <= tau < bins");
  need(eta > 0.0, "eta must be positive");
  need(pareto_alpha > 1.0, "pareto_alpha must exceed 1");
  need(pareto_gamma > 0.0, "pareto_gamma must be positive");
  need(target_node >= 1 && target_node <= n_nodes, "target_node must be a graph node");
  need(bin_width > 0.0, "bin_width must be positive");
}

void SimConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "n_nodes") n_nodes = parse_value<int>(key, value);
  else if (key == "edge_prob") edge_prob = parse_value<double>(key, value);
  else if (key == "hosts") hosts = parse_value<int>(key, value);
  else if (key == "monitors") monitors = parse_value<int>(key, value);
  else if (key == "series") series = parse_value<int>(key, value);
  else if (key == "attackers") attackers = parse_value<int>(key, value);
  else if (key == "bins") bins = parse_value<int>(key, value);
  else if (key == "tau") tau = parse_value<int>(key, value);
  else if (key == "eta") eta = parse_value<double>(key, value);
  else if (key == "pareto_alpha") pareto_alpha = parse_value<double>(key, value);
  else if (key == "pareto_gamma") pareto_gamma = parse_value<double>(key, value);
  else if (key == "target_node") target_node = parse_value<int>(key, value);
  else if (key == "bin_width") bin_width = parse_value<double>(key, value);
  else if (key == "seed") seed = parse_value<std::uint64_t>(key, value);
  else if (key == "graph_seed") graph_seed = parse_value<std::uint64_t>(key, value);
  else if (key == "exclude_edge") {
    if (!value.empty()) excluded_edges.push_back(parse_edge(value));
  } else if (key == "placement") {
    if (value == "topology") placement = Placement::topology;
    else if (value == "hash") placement = Placement::hash;
    else throw ValidationError("config key 'placement': expected topology or hash");
  } else {
    throw ValidationError("unknown config key '" + std::string(key) + "'");
  }
}

SimConfig read_sim_config(std::istream& in, SimConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    base.set(trim(body.substr(0, eq)), body.substr(eq + 1));
  }
  if (in.bad()) throw IoError("config read error");
  base.validate();
  return base;
}

void write_sim_config(std::ostream& out, const SimConfig& c) {
  out << "n_nodes = " << c.n_nodes << '\n'
      << "edge_prob = " << format_double(c.edge_prob) << '\n'
      << "hosts = " << c.hosts << '\n'
      << "monitors = " << c.monitors << '\n'
      << "series = " << c.series << '\n'
      << "attackers = " << c.attackers << '\n'
      << "bins = " << c.bins << '\n'
      << "tau = " << c.tau << '\n'
      << "eta = " << format_double(c.eta) << '\n'
      << "pareto_alpha = " << format_double(c.pareto_alpha) << '\n'
      << "pareto_gamma = " << format_double(c.pareto_gamma) << '\n'
      << "target_node = " << c.target_node << '\n'
      << "bin_width = " << format_double(c.bin_width) << '\n'
      << "seed = " << c.seed << '\n'
      << "graph_seed = " << c.graph_seed << '\n'
      << "placement = " << (c.placement == Placement::hash ? "hash" : "topology") << '\n';
  for (const auto& e : c.excluded_edges) out << "exclude_edge = " << to_string(e) << '\n';
}

Rng replication_rng(std::uint64_t seed, std::uint64_t replication) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replication),
                    static_cast<std::uint32_t>(replication >> 32)};
  return Rng(seq);
}

Replication gen_traffic(const SimConfig& config, const Graph& graph, const Routes& routes,
                        std::uint64_t replication) {
  config.validate();
  if (graph.nodes != config.n_nodes || routes.nodes() != graph.nodes) {
    throw ValidationError("topology does not match n_nodes");
  }
  Rng rng = replication_rng(config.seed, replication);

  const auto hosts = static_cast<std::size_t>(config.hosts);
  std::uniform_int_distribution<int> pick_node(1, config.n_nodes);
  std::uniform_int_distribution<int> pick_host(1, config.hosts);

  // Host placement; index 0 unused.
  std::vector<int> node_of(hosts + 1, 0);
  for (std::size_t h = 1; h <= hosts; ++h) node_of[h] = pick_node(rng);
  const int target = pick_host(rng);
  node_of[static_cast<std::size_t>(target)] = config.target_node;

  Replication rep;
  rep.monitor_flows.resize(static_cast<std::size_t>(config.monitors));
  rep.truth.replication = replication;
  rep.truth.attacked_dst = std::to_string(target);
  rep.truth.change_bin = config.tau;

  // observers[u * stride + v]: monitors seeing traffic from node u to node v.
  const auto stride = static_cast<std::size_t>(config.n_nodes) + 1;
  std::vector<std::vector<int>> observers(stride * stride);
  if (config.placement == Placement::topology) {
    rep.monitor_edges = place_monitors(graph, config.monitors, rng, config.excluded_edges);
    for (int u = 1; u <= config.n_nodes; ++u) {
      for (int v = 1; v <= config.n_nodes; ++v) {
        const auto& path = routes.route(u, v);
        auto& seen_by = observers[static_cast<std::size_t>(u) * stride + static_cast<std::size_t>(v)];
        for (std::size_t k = 0; k < rep.monitor_edges.size(); ++k) {
          if (std::find(path.begin(), path.end(), rep.monitor_edges[k]) != path.end()) {
            seen_by.push_back(static_cast<int>(k));
          }
        }
      }
    }
  }

  const auto mu = gen_intensities(config.series, config.pareto_alpha, config.pareto_gamma, rng);
  const auto band_begin = static_cast<std::size_t>(40) * static_cast<std::size_t>(config.attackers);
  const auto band_end = band_begin + static_cast<std::size_t>(config.attackers);
  std::vector<double> attack_rates(mu.begin() + static_cast<std::ptrdiff_t>(band_begin),
                                   mu.begin() + static_cast<std::ptrdiff_t>(band_end));
  std::vector<double> background_rates(mu.begin(), mu.begin() + static_cast<std::ptrdiff_t>(band_begin));
  background_rates.insert(background_rates.end(), mu.begin() + static_cast<std::ptrdiff_t>(band_end),
                          mu.end());
  std::shuffle(attack_rates.begin(), attack_rates.end(), rng);
  std::shuffle(background_rates.begin(), background_rates.end(), rng);

  struct Pair {
    int src;
    int dst;
    double rate;
    bool attack;
  };
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(config.series));

  std::unordered_set<int> attacker_set;
  while (attacker_set.size() < static_cast<std::size_t>(config.attackers)) {
    const int src = pick_host(rng);
    if (src != target && attacker_set.insert(src).second) {
      pairs.push_back({src, target, attack_rates[attacker_set.size() - 1], true});
      rep.truth.attacker_srcs.push_back(std::to_string(src));
    }
  }

  std::unordered_set<std::uint64_t> used;
  for (double rate : background_rates) {
    while (true) {
      const int src = pick_host(rng);
      const int dst = pick_host(rng);
      if (src == dst || dst == target) continue;
      const auto key = static_cast<std::uint64_t>(src) * (hosts + 1) + static_cast<std::uint64_t>(dst);
      if (!used.insert(key).second) continue;
      pairs.push_back({src, dst, rate, false});
      break;
    }
  }

  std::uniform_int_distribution<int> pick_monitor(0, config.monitors - 1);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  std::vector<int> hashed_monitor(1);
  for (const auto& pair : pairs) {
    const std::vector<int>* seen_by = nullptr;
    if (config.placement == Placement::hash) {
      hashed_monitor[0] = pick_monitor(rng);
      seen_by = &hashed_monitor;
    } else {
      seen_by = &observers[static_cast<std::size_t>(node_of[static_cast<std::size_t>(pair.src)]) * stride +
                           static_cast<std::size_t>(node_of[static_cast<std::size_t>(pair.dst)])];
    }
    const std::string src = std::to_string(pair.src);
    const std::string dst = std::to_string(pair.dst);
    std::poisson_distribution<Count> before(pair.rate);
    std::poisson_distribution<Count> after(pair.attack ? config.eta * pair.rate : pair.rate);
    for (int t = 1; t <= config.bins; ++t) {
      const Count syn = (t <= config.tau) ? before(rng) : after(rng);
      if (syn == 0) continue;
      ++rep.flow_count;
      if (seen_by->empty()) continue;
      const double start = (t - 1 + jitter(rng)) * config.bin_width;
      for (int k : *seen_by) {
        rep.monitor_flows[static_cast<std::size_t>(k)].push_back({start, start, src, dst, syn});
      }
    }
  }
  rep.host_node = std::move(node_of);
  return rep;
}

}  // namespace dtoprank::netsim
