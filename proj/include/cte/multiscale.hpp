#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cte/error.hpp"
#include "cte/graph.hpp"

namespace cte {

/// Square operator exposed through block matrix products, so a sparse walk,
/// a sparse walk with a rank-1 deflation and a small dense block all feed
/// the same compression code without being densified.
class LinearOp {
public:
    virtual ~LinearOp() = default;
    virtual Eigen::Index dim() const = 0;
    /// A * X
    virtual Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const = 0;
    /// A^T * X
    virtual Eigen::MatrixXd apply_adjoint(const Eigen::Ref<const Eigen::MatrixXd>& x) const = 0;
    /// Dense image of the operator (A * I); used by the small-dimension paths.
    Eigen::MatrixXd materialize() const;
};

class SparseOp final : public LinearOp {
public:
    explicit SparseOp(const SparseOperator& m) : m_(&m) {
        if (m.rows() != m.cols()) throw_dimension("SparseOp: operator is not square");
    }
    Eigen::Index dim() const override { return m_->rows(); }
    Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const override {
        return *m_ * x;
    }
    Eigen::MatrixXd apply_adjoint(const Eigen::Ref<const Eigen::MatrixXd>& x) const override {
        return m_->transpose() * x;
    }

private:
    const SparseOperator* m_;
};

class DenseOp final : public LinearOp {
public:
    explicit DenseOp(Eigen::MatrixXd m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols()) throw_dimension("DenseOp: operator is not square");
    }
    Eigen::Index dim() const override { return m_.rows(); }
    Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const override {
        return m_ * x;
    }
    Eigen::MatrixXd apply_adjoint(const Eigen::Ref<const Eigen::MatrixXd>& x) const override {
        return m_.transpose() * x;
    }
    const Eigen::MatrixXd& matrix() const { return m_; }

private:
    Eigen::MatrixXd m_;
};

/// S - u v^T with the rank-1 part applied implicitly.
class RankOneDeflatedOp final : public LinearOp {
public:
    RankOneDeflatedOp(const SparseOperator& base, Eigen::VectorXd u, Eigen::VectorXd v)
        : base_(&base), u_(std::move(u)), v_(std::move(v)) {
        if (base.rows() != base.cols()) throw_dimension("RankOneDeflatedOp: operator is not square");
        if (u_.size() != base.rows() || v_.size() != base.rows())
            throw_dimension("RankOneDeflatedOp: deflation vector size mismatch");
    }
    Eigen::Index dim() const override { return base_->rows(); }
    Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const override {
        return *base_ * x - u_ * (v_.transpose() * x);
    }
    Eigen::MatrixXd apply_adjoint(const Eigen::Ref<const Eigen::MatrixXd>& x) const override {
        return base_->transpose() * x - v_ * (u_.transpose() * x);
    }
    const SparseOperator& base() const { return *base_; }
    const Eigen::VectorXd& left() const { return u_; }
    const Eigen::VectorXd& right() const { return v_; }

private:
    const SparseOperator* base_;
    Eigen::VectorXd u_;
    Eigen::VectorXd v_;
};

/// Per-level truncation rule. Exactly one mode is active.
struct TruncationPolicy {
    enum class Mode { RetainFraction, Threshold };

    Mode mode = Mode::RetainFraction;
    double retain_fraction = 1.0;  // alpha in (0, 1]
    double threshold = 0.0;        // epsilon > 0
    std::size_t levels = 1;        // K >= 1
    std::uint64_t seed = 0;        // deterministic start for the iterative solver
    /// Basis entries below this magnitude are zeroed (then re-orthonormalized);
    /// 0 disables the cleanup.
    double basis_drop_tolerance = 0.0;

    static TruncationPolicy retain(double alpha, std::size_t levels = 1, std::uint64_t seed = 0);
    static TruncationPolicy by_threshold(double epsilon, std::size_t levels = 1,
                                         std::uint64_t seed = 0);

    /// ceil(alpha * dim), at least 1 (retain-fraction mode only).
    std::size_t target_rank(std::size_t dim) const;
};

struct TruncatedSvd {
    Eigen::MatrixXd u;      // orthonormal columns, deterministic sign
    Eigen::VectorXd sigma;  // sigma_1 >= ... >= sigma_j > 0
    Eigen::MatrixXd v;
    double residual = 0.0;  // sigma_{j+1}; 0 when j is the full rank
};

/// Rank-truncated SVD. Dimensions up to `kDenseSvdLimit` (and truncations
/// keeping more than a quarter of the spectrum) use a dense decomposition;
/// larger problems run a seeded block subspace iteration with convergence
/// tolerance 1e-8 on the requested singular values.
TruncatedSvd truncated_svd(const Eigen::MatrixXd& m, const TruncationPolicy& policy);
TruncatedSvd truncated_svd(const LinearOp& op, const TruncationPolicy& policy);

inline constexpr Eigen::Index kDenseSvdLimit = 512;

/// Top `count` singular triplets of a large operator via block subspace
/// iteration; throws a numeric error naming the iteration count when the
/// requested values fail to settle.
TruncatedSvd block_svd(const LinearOp& op, std::size_t count, double tol, int max_iterations,
                       std::uint64_t seed);

struct CompressedOperator {
    std::size_t level = 0;
    Eigen::MatrixXd matrix;  // square representation at this level
    Eigen::Index dimension() const { return matrix.rows(); }
};

struct ChainLevel {
    Eigen::MatrixXd basis;   // U_k expressed in level-(k-1) coordinates
    Eigen::VectorXd sigma;   // retained singular values (QR pivot magnitudes for DWA)
    double residual = 0.0;   // first discarded singular value / pivot
    CompressedOperator op;   // T_k = U_k^T T_{k-1}^2 U_k
};

enum class ChainBackend : std::uint8_t { Svd = 0, Dwa = 1 };

/// Orthonormal bases U_1..U_K with the compressed dyadic powers they carry.
/// Column counts are non-increasing with level.
struct BasisChain {
    std::vector<ChainLevel> levels;
    std::size_t requested_levels = 0;
    ChainBackend backend = ChainBackend::Svd;
    Eigen::Index original_dim = 0;

    std::size_t depth() const { return levels.size(); }
    Eigen::Index dim_at(std::size_t k) const;  // columns at level k (k >= 1)

    /// Change-of-basis product U_1 U_2 ... U_k mapping level-k coordinates to
    /// original coordinates; columns stay orthonormal.
    Eigen::MatrixXd lift(std::size_t k) const;
};

/// One compression level: basis from a truncated SVD of the current operator,
/// then the square projected into that basis (the square itself is never
/// formed when the operator is sparse; each basis column costs two
/// operator products).
ChainLevel compress_step(const LinearOp& prev, std::size_t next_level,
                         const TruncationPolicy& policy);

/// One diffusion-wavelet-style level: column-pivoted QR of the current
/// representation, keeping pivot columns with |r_kk| > epsilon (or the
/// retain-fraction count), then the square projected into the kept basis.
ChainLevel dwa_compress_step(const Eigen::MatrixXd& prev, std::size_t next_level,
                             const TruncationPolicy& policy);
ChainLevel dwa_compress_step(const Eigen::MatrixXd& prev, double epsilon);

/// Full multiscale chain: K applications of the per-level step. Stops early
/// (recording the achieved depth) once the dimension collapses to 1.
BasisChain build_chain(const LinearOp& op, const TruncationPolicy& policy,
                       ChainBackend backend = ChainBackend::Svd);
BasisChain build_chain(const SparseOperator& op, const TruncationPolicy& policy,
                       ChainBackend backend = ChainBackend::Svd);

/// lift() with range checking, level in [1, depth].
Eigen::MatrixXd lift_to_original(const BasisChain& chain, std::size_t level);

/// || U U^T w - w ||_2 for an orthonormal U.
double epsilon_span_residual(const Eigen::Ref<const Eigen::MatrixXd>& u,
                             const Eigen::Ref<const Eigen::VectorXd>& w);

/// Binary chain cache ("CTEB", little-endian, versioned) so long pipelines
/// can resume without recomputing the decompositions.
struct ChainCacheKey {
    ChainBackend backend = ChainBackend::Svd;
    TruncationPolicy::Mode mode = TruncationPolicy::Mode::RetainFraction;
    double retain_fraction = 1.0;
    double threshold = 0.0;
    std::uint64_t seed = 0;
    std::uint32_t requested_levels = 0;
    std::uint64_t original_dim = 0;

    bool operator==(const ChainCacheKey&) const = default;
};

void save_chain(const BasisChain& chain, const ChainCacheKey& key, const std::string& path);
/// Loads a cached chain; returns false (untouched outputs) when the file is
/// missing. A present-but-incompatible file throws an Io/Parse error.
bool load_chain(const std::string& path, BasisChain& chain, ChainCacheKey& key);

}  // namespace cte
