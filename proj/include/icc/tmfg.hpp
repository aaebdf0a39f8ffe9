#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <utility>
#include <vector>

#include "icc/panel.hpp"

namespace icc {

// Symmetric non-negative edge weights with zero diagonal.
using SimilarityMatrix = Eigen::MatrixXd;

// entry (i,j) = squared Pearson correlation of columns i and j
SimilarityMatrix prepare_similarity(const ReturnsPanel& panel);
SimilarityMatrix prepare_similarity(const Eigen::MatrixXd& obs,
                                    const std::vector<std::string>& tickers);

// one vertex insertion into a triangular face
struct TmfgStep {
  int vertex;
  std::array<int, 3> face;
  double gain;  // w(v,a) + w(v,b) + w(v,c)
};

// Planar chordal graph with 3n-6 edges, n-3 four-cliques and n-4
// three-clique separators.
struct TmfgGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;       // i < j, lexicographic
  std::vector<std::array<int, 4>> cliques;      // ascending within each
  std::vector<std::array<int, 3>> separators;   // ascending within each
  std::array<int, 4> seed{};                    // initial tetrahedron
  std::vector<TmfgStep> steps;                  // insertion trace, in order

  bool has_edge(int i, int j) const;
  double total_weight(const SimilarityMatrix& sim) const;

 private:
  friend TmfgGraph build_tmfg(const SimilarityMatrix& sim);
  std::vector<char> adj_;  // n*n adjacency
};

// Greedy construction: seed with the 4-clique of maximum total pairwise
// weight, then repeatedly insert the (vertex, face) pair of maximum gain,
// splitting the face into three. Ties break to the lowest vertex index,
// then the earliest created face.
TmfgGraph build_tmfg(const SimilarityMatrix& sim);

// maximum-cardinality-search chordality check
bool is_chordal(const TmfgGraph& g);

// edge-list CSV (vertex_i, vertex_j, weight)
void write_edge_csv(const TmfgGraph& g, const SimilarityMatrix& sim,
                    const std::string& path);
// cliques and separators as a JSON document
void write_clique_json(const TmfgGraph& g, const std::string& path);

}  // namespace icc
