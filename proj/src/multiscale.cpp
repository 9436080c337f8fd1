#include "cte/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "cte/rng.hpp"

namespace cte {

Eigen::MatrixXd LinearOp::materialize() const {
    return apply(Eigen::MatrixXd::Identity(dim(), dim()));
}

TruncationPolicy TruncationPolicy::retain(double alpha, std::size_t levels, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw_domain("TruncationPolicy: retain fraction must be in (0, 1]");
    if (levels == 0) throw_domain("TruncationPolicy: levels must be >= 1");
    TruncationPolicy p;
    p.mode = Mode::RetainFraction;
    p.retain_fraction = alpha;
    p.levels = levels;
    p.seed = seed;
    return p;
}

TruncationPolicy TruncationPolicy::by_threshold(double epsilon, std::size_t levels,
                                                std::uint64_t seed) {
    if (!(epsilon > 0.0)) throw_domain("TruncationPolicy: threshold must be positive");
    if (levels == 0) throw_domain("TruncationPolicy: levels must be >= 1");
    TruncationPolicy p;
    p.mode = Mode::Threshold;
    p.threshold = epsilon;
    p.levels = levels;
    p.seed = seed;
    return p;
}

std::size_t TruncationPolicy::target_rank(std::size_t dim) const {
    const double raw = retain_fraction * static_cast<double>(dim);
    const auto j = static_cast<std::size_t>(std::ceil(raw - 1e-12));
    return std::max<std::size_t>(1, std::min(j, dim));
}

namespace {

// Largest-magnitude entry of each left singular vector made positive, so
// decompositions are reproducible across solvers.
void canonicalize_signs(Eigen::MatrixXd& u, Eigen::MatrixXd* v) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        Eigen::Index idx = 0;
        u.col(c).cwiseAbs().maxCoeff(&idx);
        if (u(idx, c) < 0.0) {
            u.col(c) = -u.col(c);
            if (v) v->col(c) = -v->col(c);
        }
    }
}

void apply_basis_drop(Eigen::MatrixXd& u, double tol) {
    if (tol <= 0.0) return;
    u = (u.cwiseAbs().array() < tol).select(Eigen::MatrixXd::Zero(u.rows(), u.cols()), u);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(u);
    u = qr.householderQ() * Eigen::MatrixXd::Identity(u.rows(), u.cols());
    canonicalize_signs(u, nullptr);
}

std::size_t select_rank(const Eigen::VectorXd& sigma, const TruncationPolicy& policy,
                        std::size_t dim) {
    std::size_t j;
    if (policy.mode == TruncationPolicy::Mode::RetainFraction) {
        j = policy.target_rank(dim);
    } else {
        j = 0;
        while (j < static_cast<std::size_t>(sigma.size()) &&
               sigma[static_cast<Eigen::Index>(j)] > policy.threshold)
            ++j;
        j = std::max<std::size_t>(j, 1);
    }
    // Never keep numerically-zero directions (except for a zero matrix,
    // where a single null direction stands in).
    const double tiny =
        sigma.size() > 0 ? sigma[0] * static_cast<double>(dim) *
                               std::numeric_limits<double>::epsilon()
                         : 0.0;
    while (j > 1 && sigma[static_cast<Eigen::Index>(j) - 1] <= tiny) --j;
    return j;
}

TruncatedSvd dense_truncated_svd(const Eigen::MatrixXd& m, const TruncationPolicy& policy) {
    if (!m.allFinite()) throw_numeric("truncated_svd: operator has non-finite entries");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const auto dim = static_cast<std::size_t>(std::min(m.rows(), m.cols()));
    const auto j = static_cast<Eigen::Index>(select_rank(sv, policy, dim));

    TruncatedSvd out;
    out.u = svd.matrixU().leftCols(j);
    out.sigma = sv.head(j);
    out.v = svd.matrixV().leftCols(j);
    out.residual = j < sv.size() ? sv[j] : 0.0;
    canonicalize_signs(out.u, &out.v);
    apply_basis_drop(out.u, policy.basis_drop_tolerance);
    return out;
}

Eigen::MatrixXd thin_q(const Eigen::MatrixXd& x) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    return qr.householderQ() * Eigen::MatrixXd::Identity(x.rows(), x.cols());
}

}  // namespace

TruncatedSvd block_svd(const LinearOp& op, std::size_t count, double tol, int max_iterations,
                       std::uint64_t seed) {
    const Eigen::Index dim = op.dim();
    count = std::min<std::size_t>(count, static_cast<std::size_t>(dim));
    if (count == 0) throw_domain("block_svd: count must be >= 1");
    const Eigen::Index block =
        std::min<Eigen::Index>(dim, static_cast<Eigen::Index>(count) + 10);

    Rng rng(mix_seed(seed, 0x51d0));
    Eigen::MatrixXd x(dim, block);
    for (Eigen::Index c = 0; c < block; ++c)
        for (Eigen::Index r = 0; r < dim; ++r) x(r, c) = rng.normal();
    x = thin_q(x);

    Eigen::VectorXd prev;
    for (int it = 1; it <= max_iterations; ++it) {
        const Eigen::MatrixXd w = op.apply(x);
        Eigen::BDCSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd sigma = svd.singularValues();
        const double scale = std::max(sigma.size() > 0 ? sigma[0] : 0.0, 1.0);
        bool converged = prev.size() == sigma.size();
        if (converged) {
            for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(count); ++i) {
                if (std::abs(sigma[i] - prev[i]) > tol * scale) {
                    converged = false;
                    break;
                }
            }
        }
        if (converged) {
            TruncatedSvd out;
            out.u = svd.matrixU().leftCols(static_cast<Eigen::Index>(count));
            out.sigma = sigma.head(static_cast<Eigen::Index>(count));
            out.v = (x * svd.matrixV()).leftCols(static_cast<Eigen::Index>(count));
            out.residual = 0.0;
            canonicalize_signs(out.u, &out.v);
            return out;
        }
        prev = sigma;
        x = thin_q(op.apply_adjoint(svd.matrixU()));
    }
    throw_numeric("block_svd: singular values did not converge within " +
                  std::to_string(max_iterations) + " iterations (tol " + std::to_string(tol) +
                  ")");
}

TruncatedSvd truncated_svd(const Eigen::MatrixXd& m, const TruncationPolicy& policy) {
    return dense_truncated_svd(m, policy);
}

TruncatedSvd truncated_svd(const LinearOp& op, const TruncationPolicy& policy) {
    const Eigen::Index dim = op.dim();
    if (dim <= kDenseSvdLimit) return dense_truncated_svd(op.materialize(), policy);

    if (policy.mode == TruncationPolicy::Mode::RetainFraction) {
        const std::size_t j = policy.target_rank(static_cast<std::size_t>(dim));
        // Iterative extraction only pays off for thin truncations.
        if (static_cast<Eigen::Index>(j) * 4 > dim)
            return dense_truncated_svd(op.materialize(), policy);
        const std::size_t want = std::min<std::size_t>(j + 1, static_cast<std::size_t>(dim));
        TruncatedSvd full = block_svd(op, want, 1e-8, 500, policy.seed);
        TruncatedSvd out;
        const auto keep = static_cast<Eigen::Index>(std::min<std::size_t>(
            select_rank(full.sigma, policy, static_cast<std::size_t>(dim)), j));
        out.u = full.u.leftCols(keep);
        out.sigma = full.sigma.head(keep);
        out.v = full.v.leftCols(keep);
        out.residual = keep < full.sigma.size() ? full.sigma[keep] : 0.0;
        apply_basis_drop(out.u, policy.basis_drop_tolerance);
        return out;
    }

    // Threshold mode on a large operator: grow the block until the cutoff
    // singular value is found.
    std::size_t want = 64;
    for (;;) {
        want = std::min<std::size_t>(want, static_cast<std::size_t>(dim));
        TruncatedSvd full = block_svd(op, want, 1e-8, 500, policy.seed);
        const bool found_cut = full.sigma[full.sigma.size() - 1] <= policy.threshold;
        if (found_cut || want == static_cast<std::size_t>(dim)) {
            const auto keep = static_cast<Eigen::Index>(
                select_rank(full.sigma, policy, static_cast<std::size_t>(dim)));
            TruncatedSvd out;
            out.u = full.u.leftCols(keep);
            out.sigma = full.sigma.head(keep);
            out.v = full.v.leftCols(keep);
            out.residual = keep < full.sigma.size() ? full.sigma[keep] : 0.0;
            apply_basis_drop(out.u, policy.basis_drop_tolerance);
            return out;
        }
        want *= 2;
    }
}

Eigen::Index BasisChain::dim_at(std::size_t k) const {
    if (k == 0 || k > levels.size()) throw_dimension("BasisChain: level out of range");
    return levels[k - 1].basis.cols();
}

Eigen::MatrixXd BasisChain::lift(std::size_t k) const {
    if (k == 0 || k > levels.size())
        throw_dimension("BasisChain::lift: level " + std::to_string(k) + " out of range [1, " +
                        std::to_string(levels.size()) + "]");
    Eigen::MatrixXd out = levels[0].basis;
    for (std::size_t i = 1; i < k; ++i) out = out * levels[i].basis;
    return out;
}

Eigen::MatrixXd lift_to_original(const BasisChain& chain, std::size_t level) {
    return chain.lift(level);
}

ChainLevel compress_step(const LinearOp& prev, std::size_t next_level,
                         const TruncationPolicy& policy) {
    TruncatedSvd svd = truncated_svd(prev, policy);
    ChainLevel out;
    out.basis = std::move(svd.u);
    out.sigma = std::move(svd.sigma);
    out.residual = svd.residual;
    out.op.level = next_level;
    out.op.matrix = out.basis.transpose() * prev.apply(prev.apply(out.basis));
    return out;
}

ChainLevel dwa_compress_step(const Eigen::MatrixXd& prev, std::size_t next_level,
                             const TruncationPolicy& policy) {
    if (!prev.allFinite()) throw_numeric("dwa_compress_step: operator has non-finite entries");
    if (policy.mode == TruncationPolicy::Mode::Threshold && policy.threshold <= 0.0)
        throw_domain("dwa_compress_step: epsilon must be positive");
    const Eigen::Index dim = prev.rows();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(prev);
    const Eigen::VectorXd pivots = qr.matrixQR().diagonal().cwiseAbs();

    Eigen::Index keep;
    if (policy.mode == TruncationPolicy::Mode::Threshold) {
        keep = 0;
        while (keep < pivots.size() && pivots[keep] > policy.threshold) ++keep;
        keep = std::max<Eigen::Index>(keep, 1);
    } else {
        keep = static_cast<Eigen::Index>(policy.target_rank(static_cast<std::size_t>(dim)));
    }

    ChainLevel out;
    out.basis = qr.householderQ() * Eigen::MatrixXd::Identity(dim, keep);
    canonicalize_signs(out.basis, nullptr);
    apply_basis_drop(out.basis, policy.basis_drop_tolerance);
    out.sigma = pivots.head(keep);
    out.residual = keep < pivots.size() ? pivots[keep] : 0.0;
    out.op.level = next_level;
    out.op.matrix = out.basis.transpose() * (prev * (prev * out.basis));
    return out;
}

ChainLevel dwa_compress_step(const Eigen::MatrixXd& prev, double epsilon) {
    return dwa_compress_step(prev, 1, TruncationPolicy::by_threshold(epsilon));
}

BasisChain build_chain(const LinearOp& op, const TruncationPolicy& policy, ChainBackend backend) {
    BasisChain chain;
    chain.requested_levels = policy.levels;
    chain.backend = backend;
    chain.original_dim = op.dim();

    for (std::size_t k = 1; k <= policy.levels; ++k) {
        ChainLevel level;
        if (k == 1) {
            if (backend == ChainBackend::Svd) {
                level = compress_step(op, k, policy);
            } else {
                // DWA orthogonalizes explicit columns; the first level
                // materializes the operator.
                level = dwa_compress_step(op.materialize(), k, policy);
            }
        } else {
            const Eigen::MatrixXd& prev = chain.levels.back().op.matrix;
            if (backend == ChainBackend::Svd) {
                DenseOp dense(prev);
                level = compress_step(dense, k, policy);
            } else {
                level = dwa_compress_step(prev, k, policy);
            }
        }
        const bool collapsed = level.op.dimension() <= 1;
        chain.levels.push_back(std::move(level));
        if (collapsed && k < policy.levels) break;  // deeper levels are unreachable
    }
    return chain;
}

BasisChain build_chain(const SparseOperator& op, const TruncationPolicy& policy,
                       ChainBackend backend) {
    SparseOp wrapped(op);
    return build_chain(wrapped, policy, backend);
}

double epsilon_span_residual(const Eigen::Ref<const Eigen::MatrixXd>& u,
                             const Eigen::Ref<const Eigen::VectorXd>& w) {
    if (u.rows() != w.size())
        throw_dimension("epsilon_span_residual: basis rows " + std::to_string(u.rows()) +
                        " != vector size " + std::to_string(w.size()));
    return (u * (u.transpose() * w) - w).norm();
}

namespace {

constexpr char kMagic[4] = {'C', 'T', 'E', 'B'};
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw_parse("chain cache: truncated file");
    return value;
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) write_pod<double>(out, m(r, c));
}

Eigen::MatrixXd read_matrix(std::istream& in) {
    const auto rows = read_pod<std::uint32_t>(in);
    const auto cols = read_pod<std::uint32_t>(in);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_pod<double>(in);
    return m;
}

}  // namespace

void save_chain(const BasisChain& chain, const ChainCacheKey& key, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_io("cannot write chain cache: " + path);
    out.write(kMagic, 4);
    write_pod<std::uint32_t>(out, kCacheVersion);
    write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(key.backend));
    write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(key.mode));
    write_pod<double>(out, key.retain_fraction);
    write_pod<double>(out, key.threshold);
    write_pod<std::uint64_t>(out, key.seed);
    write_pod<std::uint32_t>(out, key.requested_levels);
    write_pod<std::uint64_t>(out, key.original_dim);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(chain.levels.size()));
    for (const ChainLevel& level : chain.levels) {
        write_matrix(out, level.basis);
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(level.sigma.size()));
        for (Eigen::Index i = 0; i < level.sigma.size(); ++i)
            write_pod<double>(out, level.sigma[i]);
        write_pod<double>(out, level.residual);
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(level.op.level));
        write_matrix(out, level.op.matrix);
    }
    if (!out) throw_io("failed writing chain cache: " + path);
}

bool load_chain(const std::string& path, BasisChain& chain, ChainCacheKey& key) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw_parse("chain cache: bad magic in " + path);
    const auto version = read_pod<std::uint32_t>(in);
    if (version != kCacheVersion)
        throw_parse("chain cache: unsupported version " + std::to_string(version));
    key.backend = static_cast<ChainBackend>(read_pod<std::uint8_t>(in));
    key.mode = static_cast<TruncationPolicy::Mode>(read_pod<std::uint8_t>(in));
    key.retain_fraction = read_pod<double>(in);
    key.threshold = read_pod<double>(in);
    key.seed = read_pod<std::uint64_t>(in);
    key.requested_levels = read_pod<std::uint32_t>(in);
    key.original_dim = read_pod<std::uint64_t>(in);

    chain = BasisChain{};
    chain.backend = key.backend;
    chain.requested_levels = key.requested_levels;
    chain.original_dim = static_cast<Eigen::Index>(key.original_dim);
    const auto levels = read_pod<std::uint32_t>(in);
    chain.levels.reserve(levels);
    for (std::uint32_t k = 0; k < levels; ++k) {
        ChainLevel level;
        level.basis = read_matrix(in);
        const auto nsigma = read_pod<std::uint32_t>(in);
        level.sigma.resize(nsigma);
        for (std::uint32_t i = 0; i < nsigma; ++i) level.sigma[i] = read_pod<double>(in);
        level.residual = read_pod<double>(in);
        level.op.level = read_pod<std::uint32_t>(in);
        level.op.matrix = read_matrix(in);
        chain.levels.push_back(std::move(level));
    }
    return true;
}

}  // namespace cte
