#pragma once

#include <functional>
#include <vector>

#include "selfmap/dataset.hpp"
#include "selfmap/mlp.hpp"
#include "selfmap/rprop.hpp"

namespace selfmap {

// Symmetric k-nearest-neighbor graph over the normalized exteroceptive set.
struct GeodesicGraph {
  int n_nodes = 0;
  int k_used = 0;
  std::vector<std::vector<std::pair<int, double>>> adjacency;
};

// Desired network outputs from the unfolding, one row per dataset sample.
// targets = raw_embedding * scale_applied, so dividing the scale back out
// recovers the distance-faithful coordinates.
struct EmbeddingTargets {
  MatX targets;
  double scale_applied = 1.0;
};

// points: one row per sample. If the kNN graph is disconnected, k doubles
// until it connects (all-identical points cannot connect and fail).
GeodesicGraph build_graph(const MatX& points, int k);

// All-pairs shortest paths by one Dijkstra run per source node.
MatX geodesic_distances(const GeodesicGraph& graph);

// Double-centers the squared distances, embeds with the top eigenpairs, and
// rescales so the max-abs coordinate is 0.4. Eigenvalues that should be zero
// may come out slightly negative and are clamped; materially negative ones
// mean D is too far from Euclidean for the requested dimension.
EmbeddingTargets classical_mds(const MatX& D, int dim);

struct PretrainResult {
  NetworkParams params;
  double initial_error = 0.0;
  double final_error = 0.0;
};

// Supervised fit of the network to the embedding targets, full-batch RPROP
// on the summed quadratic error.
PretrainResult pretrain(NetworkParams params, const Dataset& dataset,
                        const EmbeddingTargets& targets, int iterations,
                        const RpropSettings& settings);

void write_targets_csv(const EmbeddingTargets& targets,
                       const std::string& path);

}  // namespace selfmap
