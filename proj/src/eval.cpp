#include "cte/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "cte/rng.hpp"

namespace cte {

void SplitSpec::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw_domain("SplitSpec: train fraction must be in (0, 1)");
    if (trials < 1) throw_domain("SplitSpec: need at least one trial");
}

Split make_split(const std::vector<Eigen::Index>& nodes, const std::vector<int>& labels,
                 const SplitSpec& spec, std::uint64_t trial_seed) {
    spec.validate();
    Rng rng(trial_seed);
    Split split;
    auto shuffled = nodes;
    for (std::size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[rng.index(i)]);

    if (!spec.stratified) {
        const auto train_count = std::max<std::size_t>(
            1, static_cast<std::size_t>(
                   std::llround(spec.train_fraction * static_cast<double>(shuffled.size()))));
        for (std::size_t i = 0; i < shuffled.size(); ++i)
            (i < train_count ? split.train : split.test).push_back(shuffled[i]);
        return split;
    }

    std::map<int, std::vector<Eigen::Index>> by_class;
    for (Eigen::Index node : shuffled) by_class[labels[static_cast<std::size_t>(node)]].push_back(node);
    for (auto& [cls, members] : by_class) {
        // Every class keeps at least one training sample.
        const auto train_count = std::max<std::size_t>(
            1, static_cast<std::size_t>(
                   std::llround(spec.train_fraction * static_cast<double>(members.size()))));
        for (std::size_t i = 0; i < members.size(); ++i)
            (i < train_count ? split.train : split.test).push_back(members[i]);
    }
    return split;
}

std::vector<int> knn_classify(const Eigen::MatrixXd& embeddings, const std::vector<int>& labels,
                              const std::vector<Eigen::Index>& train,
                              const std::vector<Eigen::Index>& test, std::size_t k) {
    if (train.empty()) throw_domain("knn_classify: empty training set");
    if (k < 1 || k > train.size())
        throw_domain("knn_classify: k must be in [1, |train|]; got k=" + std::to_string(k) +
                     " with " + std::to_string(train.size()) + " training nodes");
    if (!embeddings.allFinite()) throw_numeric("knn_classify: non-finite embeddings");

    std::vector<int> predicted;
    predicted.reserve(test.size());
    std::vector<std::pair<double, Eigen::Index>> dist;
    for (Eigen::Index t : test) {
        dist.clear();
        dist.reserve(train.size());
        for (Eigen::Index s : train)
            dist.emplace_back((embeddings.col(t) - embeddings.col(s)).squaredNorm(), s);
        // Lexicographic order realizes the lower-node-index tie rule.
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                          dist.end());
        std::map<int, std::size_t> votes;
        for (std::size_t v = 0; v < k; ++v) ++votes[labels[static_cast<std::size_t>(dist[v].second)]];
        int best_class = votes.begin()->first;
        std::size_t best_votes = votes.begin()->second;
        for (const auto& [cls, count] : votes) {
            if (count > best_votes) {  // ties keep the smaller class id
                best_class = cls;
                best_votes = count;
            }
        }
        predicted.push_back(best_class);
    }
    return predicted;
}

double f1_macro(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size())
        throw_dimension("f1_macro: prediction and truth lengths differ");
    if (truth.empty()) throw_domain("f1_macro: empty truth");

    std::map<int, std::array<std::size_t, 3>> counts;  // class -> {TP, FP, FN}
    for (int t : truth) counts.emplace(t, std::array<std::size_t, 3>{0, 0, 0});
    for (std::size_t n = 0; n < truth.size(); ++n) {
        if (predicted[n] == truth[n]) {
            ++counts[truth[n]][0];
        } else {
            ++counts[truth[n]][2];
            auto it = counts.find(predicted[n]);
            if (it != counts.end()) ++it->second[1];
        }
    }
    double sum = 0.0;
    std::size_t classes = 0;
    for (const auto& [cls, c] : counts) {
        ++classes;
        const double denom = static_cast<double>(c[0]) + 0.5 * static_cast<double>(c[1] + c[2]);
        sum += denom > 0.0 ? static_cast<double>(c[0]) / denom : 0.0;
    }
    return sum / static_cast<double>(classes);
}

McEstimate mc_commute_oracle(const LabeledGraph& g, Eigen::Index i, Eigen::Index j,
                             std::size_t trials, std::uint64_t seed) {
    if (trials < 100) throw_domain("mc_commute_oracle: need at least 100 trials");
    const auto n = static_cast<Eigen::Index>(g.node_count);
    if (i < 0 || i >= n || j < 0 || j >= n || i == j)
        throw_domain("mc_commute_oracle: bad node pair");

    std::vector<std::vector<Eigen::Index>> neighbors(g.node_count);
    std::vector<std::vector<double>> cdf(g.node_count);
    for (const Edge& e : g.edges) {
        neighbors[e.i].push_back(static_cast<Eigen::Index>(e.j));
        cdf[e.i].push_back(e.w);
        if (e.i != e.j) {
            neighbors[e.j].push_back(static_cast<Eigen::Index>(e.i));
            cdf[e.j].push_back(e.w);
        }
    }
    for (std::size_t u = 0; u < g.node_count; ++u) {
        if (neighbors[u].empty()) throw_domain("mc_commute_oracle: isolated node");
        for (std::size_t s = 1; s < cdf[u].size(); ++s) cdf[u][s] += cdf[u][s - 1];
    }

    Rng rng(seed);
    auto step = [&](Eigen::Index u) {
        const auto& c = cdf[static_cast<std::size_t>(u)];
        const double x = rng.real() * c.back();
        const auto it = std::upper_bound(c.begin(), c.end(), x);
        const auto pick = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
            it - c.begin(), static_cast<std::ptrdiff_t>(c.size()) - 1));
        return neighbors[static_cast<std::size_t>(u)][pick];
    };

    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        Eigen::Index at = i;
        std::uint64_t steps = 0;
        while (at != j) {
            at = step(at);
            ++steps;
        }
        while (at != i) {
            at = step(at);
            ++steps;
        }
        const auto x = static_cast<double>(steps);
        sum += x;
        sum_sq += x * x;
    }
    McEstimate out;
    const auto nt = static_cast<double>(trials);
    out.mean = sum / nt;
    const double var = std::max(0.0, (sum_sq - nt * out.mean * out.mean) / (nt - 1.0));
    out.standard_error = std::sqrt(var / nt);
    return out;
}

MetricsReport evaluate_embedding(const std::string& method, const Eigen::MatrixXd& embeddings,
                                 const std::vector<int>& labels, const SplitSpec& spec) {
    spec.validate();
    std::vector<Eigen::Index> labeled;
    for (std::size_t n = 0; n < labels.size(); ++n)
        if (labels[n] >= 0) labeled.push_back(static_cast<Eigen::Index>(n));
    if (labeled.empty()) throw_domain("evaluate_embedding: no labeled nodes");

    MetricsReport report;
    report.method = method;
    report.dimension = embeddings.rows();
    report.f1_trials.reserve(spec.trials);
    for (std::size_t t = 0; t < spec.trials; ++t) {
        const Split split = make_split(labeled, labels, spec, mix_seed(spec.seed, t));
        std::vector<int> truth;
        truth.reserve(split.test.size());
        for (Eigen::Index node : split.test) truth.push_back(labels[static_cast<std::size_t>(node)]);
        if (truth.empty()) {
            report.f1_trials.push_back(1.0);  // nothing left to predict
            continue;
        }
        const auto k = std::min<std::size_t>(5, split.train.size());
        const std::vector<int> predicted =
            knn_classify(embeddings, labels, split.train, split.test, k);
        report.f1_trials.push_back(f1_macro(predicted, truth));
    }
    double total = 0.0;
    for (double f : report.f1_trials) total += f;
    report.f1_mean = total / static_cast<double>(report.f1_trials.size());
    return report;
}

MetricsReport benchmark_run(const LabeledGraph& dataset, const PipelineOptions& options,
                            const SplitSpec& spec) {
    if (!dataset.has_labels()) throw_domain("benchmark_run: dataset has no labels");
    const PipelineResult pipeline = run_pipeline(dataset, options);

    std::vector<int> labels(pipeline.component.node_count, -1);
    for (const auto& [node, cls] : pipeline.component.labels) labels[node] = cls;

    MetricsReport report =
        evaluate_embedding(options.method_name(), pipeline.refined.coordinates, labels, spec);
    report.runtime_seconds = pipeline.construct_seconds;
    return report;
}

std::string render_comparison_table(const std::vector<MetricsReport>& reports,
                                    bool show_runtime) {
    std::size_t name_width = 6;
    for (const auto& r : reports) name_width = std::max(name_width, r.method.size());
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(name_width + 2)) << "Method"
        << std::right << std::setw(6) << "d";
    if (show_runtime) out << std::setw(12) << "Runtime";
    out << std::setw(10) << "F1" << '\n';
    for (const auto& r : reports) {
        out << std::left << std::setw(static_cast<int>(name_width + 2)) << r.method
            << std::right << std::setw(6) << r.dimension;
        if (show_runtime) {
            std::ostringstream rt;
            rt << std::fixed << std::setprecision(2) << r.runtime_seconds << " s";
            out << std::setw(12) << rt.str();
        }
        out << std::setw(10) << std::fixed << std::setprecision(4) << r.f1_mean << '\n';
    }
    return out.str();
}

}  // namespace cte
