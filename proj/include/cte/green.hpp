#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "cte/graph.hpp"
#include "cte/multiscale.hpp"

namespace cte {

/// T - 1 pi^T as an implicit sparse-plus-rank-1 operator (the view references
/// the caller's transition matrix). Removing the stationary direction leaves
/// the rest of the spectrum untouched, so powers of the result converge to
/// zero on connected non-bipartite graphs.
RankOneDeflatedOp deflate_stationary(const SparseOperator& walk,
                                     const Eigen::VectorXd& stationary);

/// Power-iteration estimate of the spectral radius (deterministic start).
double spectral_radius_estimate(const LinearOp& op, int iterations = 200);

/// Compressed Green-function approximation
///   G_K = (I + T_d) * (I + B H B^T)  ~=  prod_{k=0..K} (I + T_d^(2^k)),
/// where B lifts the finest compression level and H accumulates the deeper
/// factors in level-1 coordinates. Immutable after construction; safe for
/// concurrent queries.
struct GreenApprox {
    std::size_t depth = 0;        // product depth K
    std::size_t chain_depth = 0;  // levels actually present in the chain
    Eigen::MatrixXd basis;        // B, N x m, orthonormal columns
    Eigen::MatrixXd compressed;   // H, m x m
    Eigen::MatrixXd walk_image;   // F = (I + T_d) B H, cached for entry queries
    SparseOperator walk;          // owned copy of T
    Eigen::VectorXd stationary;   // pi; empty when no deflation was applied
    bool deflated = false;
    /// Commute times computed from this object are multiplied by this factor;
    /// 0.5 when the pipeline ran on the lazy walk (I + T)/2.
    double ct_scale = 1.0;

    Eigen::Index dim() const { return walk.rows(); }

    /// Raw (unsymmetrized) entry of G_K.
    double entry(Eigen::Index i, Eigen::Index j) const;

    /// G_K x and G_K^T x without densifying.
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::VectorXd apply_adjoint(const Eigen::VectorXd& x) const;

    /// Entry of the symmetrized commute-time kernel
    ///   M = sym(vol * G_K * D^{-1}),
    /// the object whose quadratic form yields commute times and whose
    /// factorization yields the embedding.
    double kernel_entry(Eigen::Index i, Eigen::Index j, const DegreeData& deg) const;

    /// Dense G_K (small problems / tests).
    Eigen::MatrixXd materialize() const;
};

/// Green-function approximation via the dyadic Schultz product evaluated
/// through a prebuilt compression chain. Factors beyond the chain's depth
/// square the coarsest compressed operator in place. Fails with a divergence
/// error when the spectral-radius estimate reaches 1 - 1e-6 (bipartite
/// graphs; the lazy-walk option is suggested).
GreenApprox schultz_green(const RankOneDeflatedOp& walk, std::size_t depth,
                          const BasisChain& chain);

/// Convenience overload: builds the chain from the policy first.
GreenApprox schultz_green(const RankOneDeflatedOp& walk, const TruncationPolicy& policy,
                          ChainBackend backend = ChainBackend::Svd);

/// Expected round-trip steps i -> j -> i of the random walk, evaluated from
/// the compressed Green function:
///   CT(i,j) = vol * (G(i,i)/d_i + G(j,j)/d_j - G(i,j)/d_j - G(j,i)/d_i),
/// symmetric in (i, j) by construction.
double commute_time(const GreenApprox& green, Eigen::Index i, Eigen::Index j,
                    const DegreeData& deg);

/// Embedding coordinates, d x N with column n embedding node n. Squared
/// column distances approximate commute times.
struct EmbeddingMatrix {
    Eigen::MatrixXd coordinates;
    /// First omitted eigenvalue of the factored kernel (0 at full rank).
    double kernel_residual = 0.0;
    /// Most negative kernel eigenvalue clamped during PSD repair (>= 0 means none).
    double psd_defect = 0.0;

    Eigen::Index dimension() const { return coordinates.rows(); }
    Eigen::Index nodes() const { return coordinates.cols(); }
};

/// Rank-d factorization M ~= Theta^T Theta of the symmetrized commute-time
/// kernel M = vol * G_K D^{-1}. Negative eigenvalues are clamped to zero; a
/// defect beyond 1e-8 is reported through psd_defect (and a warning on
/// stderr).
EmbeddingMatrix embedding_from_green(const GreenApprox& green, const DegreeData& deg,
                                     Eigen::Index target_dim, std::uint64_t seed = 0);

/// Dense commute-time matrix via the pseudoinverse of the graph Laplacian.
/// Exact reference for validation; refuses graphs with more than 2000 nodes.
Eigen::MatrixXd exact_commute_oracle(const LabeledGraph& g);

}  // namespace cte
