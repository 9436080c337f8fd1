#include "cte/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>

namespace cte {

SparseOperator LabeledGraph::adjacency() const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(edges.size() * 2);
    for (const Edge& e : edges) {
        trips.emplace_back(static_cast<int>(e.i), static_cast<int>(e.j), e.w);
        if (e.i != e.j)
            trips.emplace_back(static_cast<int>(e.j), static_cast<int>(e.i), e.w);
    }
    SparseOperator a(static_cast<int>(node_count), static_cast<int>(node_count));
    a.setFromTriplets(trips.begin(), trips.end());
    a.prune(0.0);
    a.makeCompressed();
    return a;
}

namespace {

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
    std::vector<std::string> out;
    if (delimiter == '\0') {
        std::istringstream iss(line);
        std::string tok;
        while (iss >> tok) out.push_back(tok);
    } else {
        std::string tok;
        std::istringstream iss(line);
        while (std::getline(iss, tok, delimiter))
            if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

std::size_t intern_id(LabeledGraph& g, const std::string& id) {
    auto it = g.id_to_index.find(id);
    if (it != g.id_to_index.end()) return it->second;
    const std::size_t idx = g.ids.size();
    g.ids.push_back(id);
    g.id_to_index.emplace(id, idx);
    return idx;
}

}  // namespace

LabeledGraph load_edge_list(std::istream& in, const EdgeListOptions& options) {
    LabeledGraph g;
    std::map<std::pair<std::size_t, std::size_t>, double> merged;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto fields = split_fields(line, options.delimiter);
        if (fields.empty()) continue;
        if (fields.size() < 2 || fields.size() > 3)
            throw_parse("edge list line " + std::to_string(line_no) +
                        ": expected 'src dst [weight]', got " + std::to_string(fields.size()) +
                        " fields");
        double w = options.default_weight;
        if (fields.size() == 3) {
            std::size_t consumed = 0;
            try {
                w = std::stod(fields[2], &consumed);
            } catch (const std::exception&) {
                consumed = 0;
            }
            if (consumed != fields[2].size())
                throw_parse("edge list line " + std::to_string(line_no) +
                            ": bad weight '" + fields[2] + "'");
        }
        if (w < 0.0)
            throw_domain("edge list line " + std::to_string(line_no) +
                         ": negative weight " + std::to_string(w));
        std::size_t i = intern_id(g, fields[0]);
        std::size_t j = intern_id(g, fields[1]);
        if (i == j && !options.keep_self_loops) continue;
        if (i > j) std::swap(i, j);
        merged[{i, j}] += w;
    }
    g.node_count = g.ids.size();
    g.edges.reserve(merged.size());
    for (const auto& [key, w] : merged) g.edges.push_back({key.first, key.second, w});
    return g;
}

LabeledGraph load_edge_list_file(const std::string& path, const EdgeListOptions& options) {
    std::ifstream in(path);
    if (!in) throw_io("cannot open edge list file: " + path);
    return load_edge_list(in, options);
}

void load_labels_file(LabeledGraph& g, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_io("cannot open label file: " + path);
    std::vector<std::pair<std::string, std::string>> raw;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw_parse("label file line " + std::to_string(line_no) +
                        ": expected 'node_id<TAB>class_label'");
        std::string id = line.substr(0, tab);
        std::string label = line.substr(tab + 1);
        while (!label.empty() && (label.back() == '\r' || label.back() == '\n')) label.pop_back();
        raw.emplace_back(std::move(id), std::move(label));
    }
    std::set<std::string> classes;
    for (const auto& [id, label] : raw) classes.insert(label);
    std::unordered_map<std::string, int> class_id;
    int next = 0;
    for (const auto& c : classes) class_id.emplace(c, next++);

    std::vector<std::string> missing;
    for (const auto& [id, label] : raw) {
        auto it = g.id_to_index.find(id);
        if (it == g.id_to_index.end()) {
            if (missing.size() < 5) missing.push_back(id);
            continue;
        }
        g.labels[it->second] = class_id[label];
    }
    if (g.labels.empty()) {
        std::string msg = "label file matches no graph node ids";
        if (!missing.empty()) {
            msg += "; first unmatched:";
            for (const auto& m : missing) msg += " " + m;
        }
        throw_domain(msg);
    }
}

LabeledGraph giant_component(const LabeledGraph& g, std::size_t* dropped_nodes) {
    if (g.node_count == 0) throw_domain("giant_component: empty graph");
    std::vector<std::vector<std::size_t>> adj(g.node_count);
    for (const Edge& e : g.edges) {
        if (e.i == e.j) continue;
        adj[e.i].push_back(e.j);
        adj[e.j].push_back(e.i);
    }
    std::vector<int> component(g.node_count, -1);
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < g.node_count; ++s) {
        if (component[s] >= 0) continue;
        const int c = static_cast<int>(sizes.size());
        std::size_t n = 0;
        stack.push_back(s);
        component[s] = c;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            ++n;
            for (std::size_t v : adj[u]) {
                if (component[v] < 0) {
                    component[v] = c;
                    stack.push_back(v);
                }
            }
        }
        sizes.push_back(n);
    }
    // Components are discovered in order of their lowest original index, so
    // the first maximal one realizes the tie rule.
    int best = 0;
    for (int c = 1; c < static_cast<int>(sizes.size()); ++c)
        if (sizes[c] > sizes[best]) best = c;

    LabeledGraph out;
    std::vector<std::size_t> old_to_new(g.node_count, SIZE_MAX);
    for (std::size_t u = 0; u < g.node_count; ++u) {
        if (component[u] != best) continue;
        const std::size_t nu = out.ids.size();
        old_to_new[u] = nu;
        out.ids.push_back(g.ids.empty() ? std::to_string(u) : g.ids[u]);
        out.id_to_index.emplace(out.ids.back(), nu);
        auto lab = g.labels.find(u);
        if (lab != g.labels.end()) out.labels[nu] = lab->second;
    }
    out.node_count = out.ids.size();
    for (const Edge& e : g.edges) {
        if (old_to_new[e.i] == SIZE_MAX || old_to_new[e.j] == SIZE_MAX) continue;
        out.edges.push_back({old_to_new[e.i], old_to_new[e.j], e.w});
    }
    if (dropped_nodes) *dropped_nodes = g.node_count - out.node_count;
    return out;
}

std::pair<SparseOperator, DegreeData> transition_matrix(const LabeledGraph& g) {
    SparseOperator a = g.adjacency();
    const auto n = a.rows();
    DegreeData deg;
    deg.degrees = a * Eigen::VectorXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i)
        if (deg.degrees[i] <= 0.0)
            throw_domain("transition_matrix: node " +
                         (g.ids.empty() ? std::to_string(i) : g.ids[static_cast<std::size_t>(i)]) +
                         " has zero degree");
    deg.volume = deg.degrees.sum();
    deg.stationary = deg.degrees / deg.volume;
    SparseOperator t = deg.degrees.cwiseInverse().asDiagonal() * a;
    t.prune(0.0);
    t.makeCompressed();
    return {std::move(t), std::move(deg)};
}

SparseOperator random_walk_laplacian(const SparseOperator& T) {
    if (T.rows() != T.cols())
        throw_dimension("random_walk_laplacian: operator is not square");
    SparseOperator identity(T.rows(), T.cols());
    identity.setIdentity();
    SparseOperator l = identity - T;
    l.prune(0.0);
    l.makeCompressed();
    return l;
}

LabeledGraph dense_vectors_to_graph(const std::vector<Eigen::VectorXd>& vectors,
                                    const KernelOptions& kernel) {
    const std::size_t n = vectors.size();
    if (n < 2) throw_domain("dense_vectors_to_graph: need at least 2 vectors");
    const Eigen::Index dim = vectors[0].size();
    for (const auto& v : vectors)
        if (v.size() != dim)
            throw_dimension("dense_vectors_to_graph: inconsistent vector dimensions");
    if (kernel.neighbors == 0 || kernel.neighbors >= n)
        throw_domain("dense_vectors_to_graph: neighbor count must be in [1, N)");

    const std::size_t m = kernel.neighbors;
    // m nearest neighbors per point by Euclidean distance, brute force.
    std::vector<std::vector<std::pair<double, std::size_t>>> nearest(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> dists;
        dists.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            dists.emplace_back((vectors[i] - vectors[j]).squaredNorm(), j);
        }
        std::partial_sort(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(m),
                          dists.end());
        dists.resize(m);
        nearest[i] = std::move(dists);
    }

    double sigma = kernel.sigma;
    if (sigma <= 0.0) {
        std::vector<double> retained;
        for (const auto& row : nearest)
            for (const auto& [d2, j] : row)
                if (d2 > 0.0) retained.push_back(std::sqrt(d2));
        if (retained.empty())
            throw_domain("dense_vectors_to_graph: all retained pairwise distances are zero; "
                         "cannot auto-select a bandwidth (pass sigma explicitly)");
        auto mid = retained.begin() + static_cast<std::ptrdiff_t>(retained.size() / 2);
        std::nth_element(retained.begin(), mid, retained.end());
        sigma = *mid;
    }

    // Symmetrize by max: an edge keeps the larger of the two directed weights.
    std::map<std::pair<std::size_t, std::size_t>, double> merged;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [d2, j] : nearest[i]) {
            const double w = std::exp(-d2 / (sigma * sigma));
            auto key = std::minmax(i, j);
            auto [it, inserted] = merged.emplace(std::pair{key.first, key.second}, w);
            if (!inserted) it->second = std::max(it->second, w);
        }
    }

    LabeledGraph g;
    g.node_count = n;
    g.ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.ids.push_back(std::to_string(i));
        g.id_to_index.emplace(g.ids.back(), i);
    }
    g.edges.reserve(merged.size());
    for (const auto& [key, w] : merged) g.edges.push_back({key.first, key.second, w});
    return g;
}

}  // namespace cte
