#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cte/graph.hpp"
#include "cte/green.hpp"
#include "cte/multiscale.hpp"
#include "cte/rng.hpp"

namespace cte {

/// SGD hyperparameters. Bounds are checked by validate(); eta = 0 and
/// delta = 0 are allowed so the no-op branches stay testable.
struct TrainConfig {
    double eta = 0.025;           // learning rate, >= 0
    double delta = 0.05;          // residual-reintroduction probability, in [0, 1)
    std::size_t negatives = 5;    // negative samples per positive pair, >= 1
    std::size_t epochs = 10;      // >= 1
    std::size_t batch_size = 32;  // positive pairs per SGD step, >= 1
    std::size_t window = 1;       // walk/context length for walk-mode sampling, >= 1
    std::uint64_t seed = 0;

    void validate() const;
};

/// Per-coordinate scaling weights; one entry per row of the embedding.
using ScalingDiag = Eigen::VectorXd;

/// p_i = d_i^{3/4} / sum_j d_j^{3/4}
Eigen::VectorXd negative_distribution(const DegreeData& deg);

enum class PairSource { Edges, Walks };

/// Positive/negative pair source for the cross-entropy loss. Positives come
/// from weighted edge sampling (default) or from all co-window pairs of short
/// simulated walks; negatives follow the 3/4-power unigram distribution.
class PairSampler {
public:
    PairSampler(const LabeledGraph& g, const DegreeData& deg,
                PairSource source = PairSource::Edges, std::size_t window = 1);

    std::pair<Eigen::Index, Eigen::Index> next_pair(Rng& rng);
    Eigen::Index sample_negative(Rng& rng) const { return static_cast<Eigen::Index>(negative_sampler_.sample(rng)); }

    const Eigen::VectorXd& negative_probabilities() const { return negative_probs_; }
    std::size_t positive_pool_size() const { return edges_.size(); }
    PairSource source() const { return source_; }

    /// Deterministic full positive set (edges), used for the per-epoch loss.
    const std::vector<Edge>& edges() const { return edges_; }

private:
    void refill_from_walk(Rng& rng);

    PairSource source_;
    std::size_t window_;
    std::vector<Edge> edges_;
    DiscreteSampler edge_sampler_;
    Eigen::VectorXd negative_probs_;
    DiscreteSampler negative_sampler_;
    // per-node neighbor lists with cumulative weights for walk simulation
    std::vector<std::vector<Eigen::Index>> neighbors_;
    std::vector<std::vector<double>> neighbor_cdf_;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> queued_;
};

struct SampledPair {
    Eigen::Index i = 0;
    Eigen::Index j = 0;
    std::vector<Eigen::Index> negatives;
};

/// Negative log of the negative-sampling likelihood for one positive pair,
/// with z_n = C * theta column n:
///   -log sigma(z_i . z_j) - sum_l log sigma(-z_i . z_l)
/// evaluated in an overflow-safe (softplus) form.
double pair_loss(const ScalingDiag& scaling, const Eigen::MatrixXd& theta, Eigen::Index i,
                 Eigen::Index j, const std::vector<Eigen::Index>& negatives);

/// Analytic d/dC of the summed pair_loss over a batch; dot products are
/// quadratic in C (z_i . z_j = sum_m C_m^2 theta_mi theta_mj).
Eigen::VectorXd loss_gradient(const ScalingDiag& scaling, const Eigen::MatrixXd& theta,
                              const std::vector<SampledPair>& batch);

/// Draws residual basis columns (without replacement) from the level below
/// the coarsest one and projects them onto the coarsest basis; each draw
/// appends one row to theta and a unit entry to the scaling.
class ResidualPool {
public:
    explicit ResidualPool(const BasisChain& chain);

    std::size_t remaining() const { return remaining_.size(); }
    bool exhausted() const { return remaining_.empty(); }

    /// One uniform draw; returns false (leaving theta untouched) when no
    /// columns remain.
    bool draw(Eigen::MatrixXd& theta, ScalingDiag& scaling, Rng& rng);

private:
    Eigen::MatrixXd projector_;   // lifted coarsest basis U_K (N x m_K)
    Eigen::MatrixXd candidates_;  // lifted U_{K-1}; empty => original axes
    std::vector<Eigen::Index> remaining_;
};

/// Spec'd single-draw form of the reintroduction step.
bool reintroduce_residual(Eigen::MatrixXd& theta, ScalingDiag& scaling, ResidualPool& pool,
                          Rng& rng);

struct TrainResult {
    EmbeddingMatrix refined;         // coordinates = C * theta
    Eigen::MatrixXd theta;           // possibly extended by reintroduced rows
    ScalingDiag scaling;
    std::vector<double> loss_trace;  // mean full-set loss after each epoch
};

/// Algorithm: C starts at ones; every batch re-introduces a residual row with
/// probability delta, then takes one SGD step on the sampled batch. The loss
/// trace re-evaluates the mean loss over every edge with a fixed negative
/// stream, so traces are comparable across epochs and constant when eta = 0.
/// Fully deterministic for a fixed seed.
TrainResult train(const EmbeddingMatrix& embedding, const BasisChain& chain,
                  PairSampler& sampler, const TrainConfig& cfg);

}  // namespace cte
