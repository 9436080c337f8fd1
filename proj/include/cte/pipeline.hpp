#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cte/graph.hpp"
#include "cte/green.hpp"
#include "cte/multiscale.hpp"
#include "cte/sgd.hpp"

namespace cte {

/// End-to-end settings: component extraction -> walk -> compression chain ->
/// Green function -> embedding -> optional SGD refinement.
struct PipelineOptions {
    ChainBackend backend = ChainBackend::Svd;
    std::size_t levels = 4;
    TruncationPolicy::Mode mode = TruncationPolicy::Mode::RetainFraction;
    double retain_fraction = 0.5;
    double threshold = 0.0;
    Eigen::Index dim = 16;
    bool lazy_walk = false;
    double basis_drop_tolerance = 0.0;
    bool refine = false;
    PairSource pair_source = PairSource::Edges;
    TrainConfig train;
    std::uint64_t seed = 0;
    /// Reuse/write a chain cache at this path when non-empty.
    std::string chain_cache_path;

    TruncationPolicy policy() const;
    std::string method_name() const;  // "svd-ct" / "dwa-ct"
};

struct PipelineResult {
    LabeledGraph component;
    std::size_t dropped_nodes = 0;
    DegreeData degrees;
    SparseOperator walk;  // possibly lazy
    BasisChain chain;
    GreenApprox green;
    EmbeddingMatrix embedding;  // before refinement
    EmbeddingMatrix refined;    // equals `embedding` when refinement is off
    std::vector<double> loss_trace;
    bool chain_from_cache = false;
    /// Chain + Green + embedding (+ training) wall clock; file I/O excluded.
    double construct_seconds = 0.0;
};

PipelineResult run_pipeline(const LabeledGraph& g, const PipelineOptions& options);

}  // namespace cte
