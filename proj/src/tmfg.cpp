#include "icc/tmfg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "icc/errors.hpp"

namespace icc {

namespace {

using json = nlohmann::json;

Eigen::MatrixXd squared_correlation(const Eigen::MatrixXd& obs,
                                    const std::vector<std::string>& tickers) {
  const auto m = obs.rows();
  const auto n = obs.cols();
  if (m < 2) throw std::invalid_argument("similarity needs at least two observations");

  const Eigen::MatrixXd centered = obs.rowwise() - obs.colwise().mean();
  const Eigen::VectorXd ss = centered.colwise().squaredNorm();
  for (int i = 0; i < n; ++i) {
    if (!(ss(i) > 0.0)) {
      const std::string name =
          (i < static_cast<int>(tickers.size())) ? tickers[i] : std::to_string(i);
      throw DataError("zero-variance column: " + name);
    }
  }
  const Eigen::MatrixXd cov = centered.transpose() * centered;  // unnormalized
  Eigen::MatrixXd sim(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double r = cov(i, j) / std::sqrt(ss(i) * ss(j));
      sim(i, j) = r * r;
    }
    sim(i, i) = 0.0;
  }
  return sim;
}

}  // namespace

SimilarityMatrix prepare_similarity(const ReturnsPanel& panel) {
  return squared_correlation(panel.returns, panel.tickers);
}

SimilarityMatrix prepare_similarity(const Eigen::MatrixXd& obs,
                                    const std::vector<std::string>& tickers) {
  return squared_correlation(obs, tickers);
}

bool TmfgGraph::has_edge(int i, int j) const {
  if (i == j || i < 0 || j < 0 || i >= n || j >= n) return false;
  return adj_[static_cast<std::size_t>(i) * n + j] != 0;
}

double TmfgGraph::total_weight(const SimilarityMatrix& sim) const {
  double w = 0.0;
  for (const auto& [i, j] : edges) w += sim(i, j);
  return w;
}

TmfgGraph build_tmfg(const SimilarityMatrix& sim) {
  const int n = static_cast<int>(sim.rows());
  if (n < 4) throw std::invalid_argument("TMFG needs n >= 4 vertices");
  if (sim.cols() != n) throw std::invalid_argument("similarity matrix must be square");

  TmfgGraph g;
  g.n = n;
  g.adj_.assign(static_cast<std::size_t>(n) * n, 0);
  auto connect = [&](int a, int b) {
    g.adj_[static_cast<std::size_t>(a) * n + b] = 1;
    g.adj_[static_cast<std::size_t>(b) * n + a] = 1;
    g.edges.emplace_back(std::min(a, b), std::max(a, b));
  };

  // Seed: exhaustive search for the tetrahedron of maximum total pairwise
  // weight. Lexicographic enumeration with strict improvement keeps ties on
  // the lowest indices.
  double best = -std::numeric_limits<double>::infinity();
  std::array<int, 4> seed{0, 1, 2, 3};
  for (int a = 0; a < n - 3; ++a) {
    for (int b = a + 1; b < n - 2; ++b) {
      const double wab = sim(a, b);
      for (int c = b + 1; c < n - 1; ++c) {
        const double wabc = wab + sim(a, c) + sim(b, c);
        for (int d = c + 1; d < n; ++d) {
          const double w = wabc + sim(a, d) + sim(b, d) + sim(c, d);
          if (w > best) {
            best = w;
            seed = {a, b, c, d};
          }
        }
      }
    }
  }
  g.seed = seed;
  g.cliques.push_back(seed);
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) connect(seed[i], seed[j]);
  }

  // triangular faces, kept in creation order
  std::vector<std::array<int, 3>> faces = {
      {seed[0], seed[1], seed[2]},
      {seed[0], seed[1], seed[3]},
      {seed[0], seed[2], seed[3]},
      {seed[1], seed[2], seed[3]},
  };

  std::vector<int> remaining;
  {
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    for (int v : seed) used[v] = 1;
    for (int v = 0; v < n; ++v) {
      if (!used[v]) remaining.push_back(v);
    }
  }

  while (!remaining.empty()) {
    double best_gain = -std::numeric_limits<double>::infinity();
    std::size_t best_v = 0, best_f = 0;
    for (std::size_t vi = 0; vi < remaining.size(); ++vi) {
      const int v = remaining[vi];
      for (std::size_t fi = 0; fi < faces.size(); ++fi) {
        const auto& f = faces[fi];
        const double gain = sim(v, f[0]) + sim(v, f[1]) + sim(v, f[2]);
        if (gain > best_gain) {
          best_gain = gain;
          best_v = vi;
          best_f = fi;
        }
      }
    }

    const int v = remaining[best_v];
    const std::array<int, 3> f = faces[best_f];
    connect(v, f[0]);
    connect(v, f[1]);
    connect(v, f[2]);

    std::array<int, 4> clique{v, f[0], f[1], f[2]};
    std::sort(clique.begin(), clique.end());
    g.cliques.push_back(clique);
    std::array<int, 3> sep = f;
    std::sort(sep.begin(), sep.end());
    g.separators.push_back(sep);
    g.steps.push_back({v, f, best_gain});

    // the chosen face is replaced by its three splits
    faces[best_f] = {v, f[0], f[1]};
    faces.push_back({v, f[0], f[2]});
    faces.push_back({v, f[1], f[2]});
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_v));
  }

  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

bool is_chordal(const TmfgGraph& g) {
  const int n = g.n;
  if (n == 0) return true;
  // self-contained adjacency from the edge list, so the check also works on
  // graphs assembled by hand rather than by build_tmfg
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  std::vector<char> am(static_cast<std::size_t>(n) * n, 0);
  for (const auto& [i, j] : g.edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw std::invalid_argument("edge endpoint outside 0..n-1");
    }
    adj[i].push_back(j);
    adj[j].push_back(i);
    am[static_cast<std::size_t>(i) * n + j] = 1;
    am[static_cast<std::size_t>(j) * n + i] = 1;
  }

  // maximum cardinality search
  std::vector<int> weight(static_cast<std::size_t>(n), 0);
  std::vector<int> order;
  std::vector<int> pos(static_cast<std::size_t>(n), -1);
  std::vector<char> visited(static_cast<std::size_t>(n), 0);
  for (int step = 0; step < n; ++step) {
    int best = -1;
    for (int v = 0; v < n; ++v) {
      if (!visited[v] && (best == -1 || weight[v] > weight[best])) best = v;
    }
    visited[best] = 1;
    pos[best] = step;
    order.push_back(best);
    for (int u : adj[best]) {
      if (!visited[u]) ++weight[u];
    }
  }

  // For each vertex, earlier-visited neighbors minus the most recent one must
  // all be adjacent to that most recent one.
  for (int v = 0; v < n; ++v) {
    int parent = -1;
    for (int u : adj[v]) {
      if (pos[u] < pos[v] && (parent == -1 || pos[u] > pos[parent])) parent = u;
    }
    if (parent == -1) continue;
    for (int u : adj[v]) {
      if (u == parent || pos[u] >= pos[v]) continue;
      if (!am[static_cast<std::size_t>(u) * n + parent]) return false;
    }
  }
  return true;
}

void write_edge_csv(const TmfgGraph& g, const SimilarityMatrix& sim,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "vertex_i,vertex_j,weight\n";
  for (const auto& [i, j] : g.edges) {
    out << i << ',' << j << ',' << format_double(sim(i, j)) << '\n';
  }
}

void write_clique_json(const TmfgGraph& g, const std::string& path) {
  json doc;
  doc["schema_version"] = 1;
  doc["n"] = g.n;
  doc["cliques"] = g.cliques;
  doc["separators"] = g.separators;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace icc
