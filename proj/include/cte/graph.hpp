#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Sparse>

#include "cte/error.hpp"

namespace cte {

/// Sparse operators are stored compressed column-major; explicit zeros are
/// pruned on construction.
using SparseOperator = Eigen::SparseMatrix<double>;

struct Edge {
    std::size_t i = 0;
    std::size_t j = 0;
    double w = 1.0;
};

/// Undirected weighted graph over densely indexed nodes with optional class
/// labels and a mapping back to external string IDs.
///
/// Canonical form: each undirected edge is stored once with i <= j, weights
/// of duplicate inputs summed, and node indices in [0, N).
struct LabeledGraph {
    std::size_t node_count = 0;
    std::vector<Edge> edges;
    std::unordered_map<std::size_t, int> labels;  // node index -> class id
    std::vector<std::string> ids;                 // dense index -> external ID
    std::unordered_map<std::string, std::size_t> id_to_index;

    bool has_labels() const { return !labels.empty(); }

    /// Symmetric weighted adjacency as a sparse matrix (both triangles).
    SparseOperator adjacency() const;
};

/// Degrees d_i = sum_j a_ij, volume = sum_i d_i and the stationary
/// distribution pi_i = d_i / volume of the random walk.
struct DegreeData {
    Eigen::VectorXd degrees;
    double volume = 0.0;
    Eigen::VectorXd stationary;
};

struct EdgeListOptions {
    /// Field separator; '\0' means "any run of whitespace".
    char delimiter = '\0';
    double default_weight = 1.0;
    /// Self-loops in the input are dropped unless enabled here.
    bool keep_self_loops = false;
};

/// Parse a whitespace-delimited edge list ("src dst [weight]"; '#' starts a
/// comment). String IDs are re-indexed densely in order of first appearance
/// and duplicate edges (either orientation) have their weights summed.
LabeledGraph load_edge_list(std::istream& in, const EdgeListOptions& options = {});
LabeledGraph load_edge_list_file(const std::string& path, const EdgeListOptions& options = {});

/// Read "node_id<TAB>class_label" lines and attach class ids to g. Class ids
/// are assigned by sorted order of the distinct label strings. Unknown node
/// ids are reported in the error message.
void load_labels_file(LabeledGraph& g, const std::string& path);

/// Induced subgraph on the largest connected component, re-indexed densely;
/// ties between equal-sized components go to the one containing the lowest
/// original index. dropped_nodes, if given, receives the number of removed
/// nodes.
LabeledGraph giant_component(const LabeledGraph& g, std::size_t* dropped_nodes = nullptr);

/// Random-walk transition matrix T = D^{-1} A (row-stochastic) plus degree
/// data. Requires every node to have positive degree.
std::pair<SparseOperator, DegreeData> transition_matrix(const LabeledGraph& g);

/// L = I - T for a row-stochastic T; rows of L sum to zero.
SparseOperator random_walk_laplacian(const SparseOperator& T);

struct KernelOptions {
    /// Gaussian bandwidth; <= 0 selects the median retained pairwise distance.
    double sigma = 0.0;
    /// Number of nearest neighbors kept per point before symmetrization.
    std::size_t neighbors = 10;
};

/// Build a weighted graph from feature vectors: Gaussian kernel
/// exp(-|x_i - x_j|^2 / sigma^2) restricted to each point's m nearest
/// neighbors, symmetrized by max.
LabeledGraph dense_vectors_to_graph(const std::vector<Eigen::VectorXd>& vectors,
                                    const KernelOptions& kernel = {});

}  // namespace cte
