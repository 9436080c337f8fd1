#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cte/graph.hpp"
#include "cte/pipeline.hpp"

namespace cte {

/// Train/test split protocol for classification trials.
struct SplitSpec {
    double train_fraction = 0.9;  // in (0, 1)
    bool stratified = true;
    std::uint64_t seed = 0;
    std::size_t trials = 10;

    void validate() const;
};

struct MetricsReport {
    std::string method;
    Eigen::Index dimension = 0;
    double runtime_seconds = 0.0;  // wall clock of embedding construction
    std::vector<double> f1_trials;
    double f1_mean = 0.0;
};

/// One stratified (or plain shuffled) split of the labeled node indices.
struct Split {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
};
Split make_split(const std::vector<Eigen::Index>& nodes, const std::vector<int>& labels,
                 const SplitSpec& spec, std::uint64_t trial_seed);

/// Majority vote over the k nearest training embeddings (columns of
/// `embeddings`) by Euclidean distance. Distance ties prefer the lower node
/// index; vote ties prefer the smaller class id.
std::vector<int> knn_classify(const Eigen::MatrixXd& embeddings, const std::vector<int>& labels,
                              const std::vector<Eigen::Index>& train,
                              const std::vector<Eigen::Index>& test, std::size_t k = 5);

/// Unweighted mean over classes present in `truth` of
/// F1 = TP / (TP + (FP + FN)/2), with 0/0 counted as 0.
double f1_macro(const std::vector<int>& predicted, const std::vector<int>& truth);

struct McEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Monte Carlo round-trip walk times i -> j -> i under the random walk;
/// simulation reference for the commute-time pipeline.
McEstimate mc_commute_oracle(const LabeledGraph& g, Eigen::Index i, Eigen::Index j,
                             std::size_t trials, std::uint64_t seed);

/// Build embeddings once (timed), then run `spec.trials` classification
/// trials with per-trial seeds derived from (seed, trial index).
MetricsReport benchmark_run(const LabeledGraph& dataset, const PipelineOptions& options,
                            const SplitSpec& spec);
MetricsReport evaluate_embedding(const std::string& method, const Eigen::MatrixXd& embeddings,
                                 const std::vector<int>& labels, const SplitSpec& spec);

/// Aligned text table; one row per report ("Method  Runtime  F1").
std::string render_comparison_table(const std::vector<MetricsReport>& reports,
                                    bool show_runtime = true);

}  // namespace cte
