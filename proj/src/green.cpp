#include "cte/green.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "cte/rng.hpp"

namespace cte {

RankOneDeflatedOp deflate_stationary(const SparseOperator& walk,
                                     const Eigen::VectorXd& stationary) {
    if (walk.rows() != walk.cols()) throw_dimension("deflate_stationary: walk is not square");
    if (stationary.size() != walk.rows())
        throw_dimension("deflate_stationary: stationary vector size mismatch");
    const double fixed_point_gap =
        (walk.transpose() * stationary - stationary).lpNorm<Eigen::Infinity>();
    if (fixed_point_gap > 1e-8)
        throw_domain("deflate_stationary: pi is not a left fixed point of the walk (gap " +
                     std::to_string(fixed_point_gap) + ")");
    return RankOneDeflatedOp(walk, Eigen::VectorXd::Ones(walk.rows()), stationary);
}

double spectral_radius_estimate(const LinearOp& op, int iterations) {
    Rng rng(0x9e11);
    Eigen::VectorXd x(op.dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
    x.normalize();
    double rho = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd y = op.apply(x);
        const double norm = y.norm();
        if (norm == 0.0) return 0.0;
        rho = norm;
        x = y / norm;
    }
    return rho;
}

double GreenApprox::entry(Eigen::Index i, Eigen::Index j) const {
    double value = (i == j) ? 1.0 : 0.0;
    value += walk.coeff(i, j);
    if (deflated) value -= stationary[j];
    if (basis.cols() > 0) value += walk_image.row(i).dot(basis.row(j));
    return value;
}

Eigen::VectorXd GreenApprox::apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out = x + walk * x;
    if (deflated) out.array() -= stationary.dot(x);
    if (basis.cols() > 0) out += walk_image * (basis.transpose() * x);
    return out;
}

Eigen::VectorXd GreenApprox::apply_adjoint(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out = x + walk.transpose() * x;
    if (deflated) out -= stationary * x.sum();
    if (basis.cols() > 0) out += basis * (walk_image.transpose() * x);
    return out;
}

double GreenApprox::kernel_entry(Eigen::Index i, Eigen::Index j, const DegreeData& deg) const {
    const double gij = entry(i, j);
    if (i == j) return deg.volume * gij / deg.degrees[i];
    const double gji = entry(j, i);
    return 0.5 * deg.volume * (gij / deg.degrees[j] + gji / deg.degrees[i]);
}

Eigen::MatrixXd GreenApprox::materialize() const {
    const Eigen::Index n = dim();
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n) + Eigen::MatrixXd(walk);
    if (deflated) g.rowwise() -= stationary.transpose();
    if (basis.cols() > 0) g += walk_image * basis.transpose();
    return g;
}

GreenApprox schultz_green(const RankOneDeflatedOp& walk, std::size_t depth,
                          const BasisChain& chain) {
    const double rho = spectral_radius_estimate(walk);
    if (rho >= 1.0 - 1e-6)
        throw_numeric("schultz_green: deflated walk has spectral radius estimate " +
                      std::to_string(rho) +
                      "; the dyadic product diverges (bipartite graph?). Enable the lazy-walk "
                      "option to shift the spectrum.");
    if (chain.depth() == 0) throw_domain("schultz_green: chain is empty");
    if (depth == 0) throw_domain("schultz_green: depth must be >= 1");

    // prod_{k>=1} (I + B_k T_k B_k^T) = I + B_1 H B_1^T with H accumulated in
    // level-1 coordinates; nested bases make every later factor a level-1
    // update C T_k C^T with C = U_2 ... U_k.
    const Eigen::Index m1 = chain.levels[0].basis.cols();
    Eigen::MatrixXd h = chain.levels[0].op.matrix;
    Eigen::MatrixXd c = Eigen::MatrixXd::Identity(m1, m1);
    const std::size_t chained = std::min(depth, chain.depth());
    for (std::size_t k = 2; k <= chained; ++k) {
        c = c * chain.levels[k - 1].basis;
        const Eigen::MatrixXd p = c * chain.levels[k - 1].op.matrix * c.transpose();
        h = h + p + h * p;
    }
    if (depth > chain.depth()) {
        // The chain collapsed early; keep squaring its coarsest operator in
        // place (c already lifts it to level-1 coordinates).
        Eigen::MatrixXd coarse = chain.levels.back().op.matrix;
        for (std::size_t k = chain.depth() + 1; k <= depth; ++k) {
            coarse = coarse * coarse;
            const Eigen::MatrixXd p = c * coarse * c.transpose();
            h = h + p + h * p;
        }
    }

    GreenApprox out;
    out.depth = depth;
    out.chain_depth = chain.depth();
    out.basis = chain.levels[0].basis;
    out.compressed = std::move(h);
    out.walk = walk.base();
    out.stationary = walk.right();
    out.deflated = walk.right().size() > 0 && walk.right().cwiseAbs().sum() > 0.0;

    // F = (I + T_d) B H
    Eigen::MatrixXd wb = out.basis + out.walk * out.basis;
    if (out.deflated) wb -= walk.left() * (out.stationary.transpose() * out.basis);
    out.walk_image = wb * out.compressed;

    if (!out.walk_image.allFinite() || !out.compressed.allFinite())
        throw_numeric("schultz_green: non-finite Green approximation (diverging product)");
    return out;
}

GreenApprox schultz_green(const RankOneDeflatedOp& walk, const TruncationPolicy& policy,
                          ChainBackend backend) {
    const BasisChain chain = build_chain(walk, policy, backend);
    return schultz_green(walk, policy.levels, chain);
}

double commute_time(const GreenApprox& green, Eigen::Index i, Eigen::Index j,
                    const DegreeData& deg) {
    const Eigen::Index n = green.dim();
    if (i < 0 || i >= n || j < 0 || j >= n)
        throw_domain("commute_time: node index out of range [0, " + std::to_string(n) + ")");
    if (i == j) throw_domain("commute_time: commute time needs two distinct nodes");
    const double ct = green.kernel_entry(i, i, deg) + green.kernel_entry(j, j, deg) -
                      2.0 * green.kernel_entry(i, j, deg);
    return green.ct_scale * ct;
}

namespace {

/// Matvec view of the symmetrized kernel M = sym(vol G D^{-1}).
class KernelOp final : public LinearOp {
public:
    KernelOp(const GreenApprox& green, const DegreeData& deg) : green_(&green), deg_(&deg) {}
    Eigen::Index dim() const override { return green_->dim(); }
    Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const override {
        Eigen::MatrixXd out(x.rows(), x.cols());
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            const Eigen::VectorXd col = x.col(c);
            const Eigen::VectorXd scaled = col.cwiseQuotient(deg_->degrees);
            out.col(c) = 0.5 * deg_->volume *
                         (green_->apply(scaled) +
                          green_->apply_adjoint(col).cwiseQuotient(deg_->degrees));
        }
        return out;
    }
    Eigen::MatrixXd apply_adjoint(const Eigen::Ref<const Eigen::MatrixXd>& x) const override {
        return apply(x);  // symmetric
    }

private:
    const GreenApprox* green_;
    const DegreeData* deg_;
};

struct EigenPairs {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // matching columns
};

EigenPairs top_eigenpairs_dense(const Eigen::MatrixXd& m, Eigen::Index count) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success)
        throw_numeric("embedding_from_green: dense eigendecomposition failed");
    const Eigen::Index n = m.rows();
    EigenPairs out;
    out.values.resize(count);
    out.vectors.resize(n, count);
    for (Eigen::Index i = 0; i < count; ++i) {
        out.values[i] = solver.eigenvalues()[n - 1 - i];
        out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    return out;
}

EigenPairs top_eigenpairs_iterative(const LinearOp& op, Eigen::Index count, std::uint64_t seed) {
    const Eigen::Index n = op.dim();
    const Eigen::Index block = std::min<Eigen::Index>(n, count + 8);
    Rng rng(mix_seed(seed, 0xe16e));
    Eigen::MatrixXd x(n, block);
    for (Eigen::Index c = 0; c < block; ++c)
        for (Eigen::Index r = 0; r < n; ++r) x(r, c) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr0(x);
    x = qr0.householderQ() * Eigen::MatrixXd::Identity(n, block);

    Eigen::VectorXd prev;
    const int max_iterations = 500;
    for (int it = 1; it <= max_iterations; ++it) {
        const Eigen::MatrixXd y = op.apply(x);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
        x = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
        const Eigen::MatrixXd projected = x.transpose() * op.apply(x);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(
            0.5 * (projected + projected.transpose()));
        // Ritz pairs sorted by descending value.
        Eigen::VectorXd values(block);
        Eigen::MatrixXd rotation(block, block);
        for (Eigen::Index i = 0; i < block; ++i) {
            values[i] = small.eigenvalues()[block - 1 - i];
            rotation.col(i) = small.eigenvectors().col(block - 1 - i);
        }
        const double scale = std::max(std::abs(values[0]), 1.0);
        bool converged = prev.size() == values.size() && it > 2;
        if (converged) {
            for (Eigen::Index i = 0; i < count; ++i)
                if (std::abs(values[i] - prev[i]) > 1e-9 * scale) {
                    converged = false;
                    break;
                }
        }
        if (converged) {
            EigenPairs out;
            out.values = values.head(count);
            out.vectors = (x * rotation).leftCols(count);
            return out;
        }
        prev = values;
        x = x * rotation;
    }
    throw_numeric("embedding_from_green: eigenpairs did not converge within 500 iterations");
}

}  // namespace

EmbeddingMatrix embedding_from_green(const GreenApprox& green, const DegreeData& deg,
                                     Eigen::Index target_dim, std::uint64_t seed) {
    const Eigen::Index n = green.dim();
    if (target_dim < 1 || target_dim > n)
        throw_domain("embedding_from_green: target dimension must be in [1, N]");
    const Eigen::Index want = std::min<Eigen::Index>(target_dim + 1, n);

    EigenPairs pairs;
    if (n <= 1024) {
        Eigen::MatrixXd g = green.materialize();
        Eigen::MatrixXd m =
            deg.volume * (g * deg.degrees.cwiseInverse().asDiagonal()).eval();
        m = 0.5 * (m + m.transpose()).eval();
        pairs = top_eigenpairs_dense(m, want);
    } else {
        KernelOp op(green, deg);
        pairs = top_eigenpairs_iterative(op, want, seed);
    }

    EmbeddingMatrix out;
    const double defect = pairs.values.minCoeff();
    out.psd_defect = std::min(defect, 0.0);
    if (defect < -1e-8)
        std::cerr << "warning: commute-time kernel has negative eigenvalue " << defect
                  << "; clamping to zero\n";

    Eigen::VectorXd values = pairs.values.head(target_dim).cwiseMax(0.0);
    out.kernel_residual = want > target_dim ? std::max(pairs.values[target_dim], 0.0) : 0.0;
    out.coordinates = (green.ct_scale * values).cwiseSqrt().asDiagonal() *
                      pairs.vectors.leftCols(target_dim).transpose();
    if (!out.coordinates.allFinite())
        throw_numeric("embedding_from_green: non-finite embedding coordinates");
    return out;
}

Eigen::MatrixXd exact_commute_oracle(const LabeledGraph& g) {
    if (g.node_count > 2000)
        throw_size("exact_commute_oracle: dense oracle limited to 2000 nodes, got " +
                   std::to_string(g.node_count));
    if (g.node_count == 0) throw_domain("exact_commute_oracle: empty graph");
    const auto n = static_cast<Eigen::Index>(g.node_count);
    Eigen::MatrixXd a = Eigen::MatrixXd(g.adjacency());
    Eigen::VectorXd degrees = a.rowwise().sum();
    const double volume = degrees.sum();
    Eigen::MatrixXd laplacian = Eigen::MatrixXd(degrees.asDiagonal()) - a;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
    if (solver.info() != Eigen::Success)
        throw_numeric("exact_commute_oracle: eigendecomposition failed");
    const Eigen::VectorXd& values = solver.eigenvalues();
    const double cutoff = std::max(values.cwiseAbs().maxCoeff(), 1.0) * 1e-10;
    Eigen::VectorXd inverted(n);
    for (Eigen::Index i = 0; i < n; ++i)
        inverted[i] = std::abs(values[i]) > cutoff ? 1.0 / values[i] : 0.0;
    const Eigen::MatrixXd pinv =
        solver.eigenvectors() * inverted.asDiagonal() * solver.eigenvectors().transpose();

    Eigen::MatrixXd ct(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        ct(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double r_eff = pinv(i, i) + pinv(j, j) - 2.0 * pinv(i, j);
            ct(i, j) = ct(j, i) = volume * r_eff;
        }
    }
    return ct;
}

}  // namespace cte
