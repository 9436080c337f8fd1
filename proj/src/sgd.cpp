#include "cte/sgd.hpp"

#include <algorithm>
#include <cmath>

namespace cte {

void TrainConfig::validate() const {
    if (eta < 0.0) throw_domain("TrainConfig: learning rate must be >= 0");
    if (delta < 0.0 || delta >= 1.0) throw_domain("TrainConfig: delta must be in [0, 1)");
    if (negatives < 1) throw_domain("TrainConfig: need at least one negative sample");
    if (epochs < 1) throw_domain("TrainConfig: epochs must be >= 1");
    if (batch_size < 1) throw_domain("TrainConfig: batch size must be >= 1");
    if (window < 1) throw_domain("TrainConfig: window must be >= 1");
}

Eigen::VectorXd negative_distribution(const DegreeData& deg) {
    for (Eigen::Index i = 0; i < deg.degrees.size(); ++i)
        if (deg.degrees[i] <= 0.0)
            throw_domain("negative_distribution: node " + std::to_string(i) +
                         " has zero degree");
    Eigen::VectorXd p = deg.degrees.array().pow(0.75);
    p /= p.sum();
    return p;
}

namespace {

std::vector<double> edge_weights(const std::vector<Edge>& edges) {
    std::vector<double> w;
    w.reserve(edges.size());
    for (const Edge& e : edges) w.push_back(e.w);
    return w;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

}  // namespace

PairSampler::PairSampler(const LabeledGraph& g, const DegreeData& deg, PairSource source,
                         std::size_t window)
    : source_(source),
      window_(window),
      edges_(g.edges),
      edge_sampler_(edge_weights(g.edges)),
      negative_probs_(negative_distribution(deg)),
      negative_sampler_(to_std(negative_probs_)) {
    if (edges_.empty()) throw_domain("PairSampler: graph has no edges");
    if (window_ < 1) throw_domain("PairSampler: window must be >= 1");
    if (source_ == PairSource::Walks) {
        neighbors_.resize(g.node_count);
        neighbor_cdf_.resize(g.node_count);
        for (const Edge& e : edges_) {
            neighbors_[e.i].push_back(static_cast<Eigen::Index>(e.j));
            neighbor_cdf_[e.i].push_back(e.w);
            if (e.i != e.j) {
                neighbors_[e.j].push_back(static_cast<Eigen::Index>(e.i));
                neighbor_cdf_[e.j].push_back(e.w);
            }
        }
        for (auto& cdf : neighbor_cdf_)
            for (std::size_t k = 1; k < cdf.size(); ++k) cdf[k] += cdf[k - 1];
    }
}

void PairSampler::refill_from_walk(Rng& rng) {
    const std::size_t n = neighbors_.size();
    std::vector<Eigen::Index> walk;
    walk.reserve(window_ + 1);
    walk.push_back(static_cast<Eigen::Index>(rng.index(n)));
    for (std::size_t s = 0; s < window_; ++s) {
        const auto u = static_cast<std::size_t>(walk.back());
        const auto& cdf = neighbor_cdf_[u];
        if (cdf.empty()) break;
        const double x = rng.real() * cdf.back();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
        const auto pick = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
            it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
        walk.push_back(neighbors_[u][pick]);
    }
    for (std::size_t a = 0; a < walk.size(); ++a)
        for (std::size_t b = a + 1; b < walk.size(); ++b)
            if (walk[a] != walk[b]) queued_.emplace_back(walk[a], walk[b]);
}

std::pair<Eigen::Index, Eigen::Index> PairSampler::next_pair(Rng& rng) {
    if (source_ == PairSource::Edges) {
        const Edge& e = edges_[edge_sampler_.sample(rng)];
        auto i = static_cast<Eigen::Index>(e.i);
        auto j = static_cast<Eigen::Index>(e.j);
        if (rng.real() < 0.5) std::swap(i, j);
        return {i, j};
    }
    while (queued_.empty()) refill_from_walk(rng);
    auto pair = queued_.back();
    queued_.pop_back();
    return pair;
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// -log sigma(x) = softplus(-x), stable on both tails.
inline double neg_log_sigmoid(double x) {
    return x > 0.0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

inline double scaled_dot(const ScalingDiag& scaling, const Eigen::MatrixXd& theta,
                         Eigen::Index i, Eigen::Index j) {
    return (scaling.array().square() * theta.col(i).array() * theta.col(j).array()).sum();
}

}  // namespace

double pair_loss(const ScalingDiag& scaling, const Eigen::MatrixXd& theta, Eigen::Index i,
                 Eigen::Index j, const std::vector<Eigen::Index>& negatives) {
    if (scaling.size() != theta.rows())
        throw_dimension("pair_loss: scaling length != embedding rows");
    double loss = neg_log_sigmoid(scaled_dot(scaling, theta, i, j));
    for (Eigen::Index neg : negatives)
        loss += neg_log_sigmoid(-scaled_dot(scaling, theta, i, neg));
    return loss;
}

Eigen::VectorXd loss_gradient(const ScalingDiag& scaling, const Eigen::MatrixXd& theta,
                              const std::vector<SampledPair>& batch) {
    if (batch.empty()) throw_domain("loss_gradient: empty batch");
    if (scaling.size() != theta.rows())
        throw_dimension("loss_gradient: scaling length != embedding rows");
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(scaling.size());
    for (const SampledPair& pair : batch) {
        const Eigen::ArrayXd zi = theta.col(pair.i).array();
        // d loss / d s = sigma(s) - 1 for the positive term
        const double pos = sigmoid(scaled_dot(scaling, theta, pair.i, pair.j)) - 1.0;
        grad.array() += pos * 2.0 * scaling.array() * zi * theta.col(pair.j).array();
        for (Eigen::Index neg : pair.negatives) {
            const double coef = sigmoid(scaled_dot(scaling, theta, pair.i, neg));
            grad.array() += coef * 2.0 * scaling.array() * zi * theta.col(neg).array();
        }
    }
    return grad;
}

ResidualPool::ResidualPool(const BasisChain& chain) {
    if (chain.depth() == 0) throw_domain("ResidualPool: empty chain");
    const std::size_t k = chain.depth();
    projector_ = chain.lift(k);
    Eigen::Index candidate_count;
    if (k >= 2) {
        candidates_ = chain.lift(k - 1);
        candidate_count = candidates_.cols();
    } else {
        // Previous level of the first compression is the original axis basis.
        candidate_count = projector_.rows();
    }
    remaining_.resize(static_cast<std::size_t>(candidate_count));
    for (Eigen::Index i = 0; i < candidate_count; ++i)
        remaining_[static_cast<std::size_t>(i)] = i;
}

bool ResidualPool::draw(Eigen::MatrixXd& theta, ScalingDiag& scaling, Rng& rng) {
    if (remaining_.empty()) return false;
    const std::size_t pick = rng.index(remaining_.size());
    const Eigen::Index col = remaining_[pick];
    remaining_[pick] = remaining_.back();
    remaining_.pop_back();

    Eigen::VectorXd u = candidates_.size() > 0
                            ? Eigen::VectorXd(candidates_.col(col))
                            : Eigen::VectorXd(Eigen::VectorXd::Unit(projector_.rows(), col));
    const Eigen::VectorXd row = projector_ * (projector_.transpose() * u);

    const Eigen::Index rows = theta.rows();
    theta.conservativeResize(rows + 1, Eigen::NoChange);
    theta.row(rows) = row.transpose();
    scaling.conservativeResize(rows + 1);
    scaling[rows] = 1.0;
    return true;
}

bool reintroduce_residual(Eigen::MatrixXd& theta, ScalingDiag& scaling, ResidualPool& pool,
                          Rng& rng) {
    return pool.draw(theta, scaling, rng);
}

TrainResult train(const EmbeddingMatrix& embedding, const BasisChain& chain,
                  PairSampler& sampler, const TrainConfig& cfg) {
    cfg.validate();
    const Eigen::Index nodes = embedding.coordinates.cols();

    TrainResult result;
    result.theta = embedding.coordinates;
    result.scaling = ScalingDiag::Ones(result.theta.rows());

    ResidualPool pool(chain);
    Rng rng(cfg.seed);

    const std::size_t pairs_per_epoch = std::max(sampler.edges().size(), cfg.batch_size);
    const std::size_t batches =
        (pairs_per_epoch + cfg.batch_size - 1) / cfg.batch_size;

    result.loss_trace.reserve(cfg.epochs);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t b = 0; b < batches; ++b) {
            if (cfg.delta > 0.0 && rng.real() < cfg.delta &&
                result.theta.rows() < nodes) {
                reintroduce_residual(result.theta, result.scaling, pool, rng);
            }
            std::vector<SampledPair> batch(cfg.batch_size);
            for (SampledPair& p : batch) {
                std::tie(p.i, p.j) = sampler.next_pair(rng);
                p.negatives.resize(cfg.negatives);
                for (auto& neg : p.negatives) neg = sampler.sample_negative(rng);
            }
            if (cfg.eta != 0.0) {
                const Eigen::VectorXd grad = loss_gradient(result.scaling, result.theta, batch);
                result.scaling -= cfg.eta * grad;
            }
            if (!result.scaling.allFinite())
                throw_numeric("train: scaling weights became non-finite at epoch " +
                              std::to_string(epoch) + ", batch " + std::to_string(b) +
                              " (learning rate too large?)");
        }

        // Full-edge loss with an epoch-independent negative stream, so the
        // trace is comparable across epochs (and constant when eta = 0).
        Rng eval_rng(mix_seed(cfg.seed, 0xe7a1));
        double total = 0.0;
        std::vector<Eigen::Index> negs(cfg.negatives);
        for (const Edge& e : sampler.edges()) {
            for (auto& neg : negs) neg = sampler.sample_negative(eval_rng);
            total += pair_loss(result.scaling, result.theta, static_cast<Eigen::Index>(e.i),
                               static_cast<Eigen::Index>(e.j), negs);
        }
        const double mean = total / static_cast<double>(sampler.edges().size());
        if (!std::isfinite(mean))
            throw_numeric("train: mean loss became non-finite at epoch " +
                          std::to_string(epoch) + " (learning rate too large?)");
        result.loss_trace.push_back(mean);
    }

    result.refined.coordinates = result.scaling.asDiagonal() * result.theta;
    result.refined.kernel_residual = embedding.kernel_residual;
    result.refined.psd_defect = embedding.psd_defect;
    return result;
}

}  // namespace cte
