#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cte/graph.hpp"
#include "cte/rng.hpp"
#include "helpers.hpp"

using namespace cte;
using namespace cte::testing;

TEST_CASE("load_edge_list parses and symmetrizes") {
    auto in = lines({"a b", "b c"});
    LabeledGraph g = load_edge_list(in);
    CHECK(g.node_count == 3);
    REQUIRE(g.edges.size() == 2);
    CHECK(g.edges[0].i == 0);
    CHECK(g.edges[0].j == 1);
    CHECK(g.edges[0].w == doctest::Approx(1.0));
    CHECK(g.edges[1].i == 1);
    CHECK(g.edges[1].j == 2);
    // adjacency holds both triangles
    SparseOperator a = g.adjacency();
    CHECK(a.coeff(0, 1) == doctest::Approx(1.0));
    CHECK(a.coeff(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("load_edge_list sums duplicate edges across orientations") {
    auto in = lines({"0 1 2.5", "1 0 2.5"});
    LabeledGraph g = load_edge_list(in);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].w == doctest::Approx(5.0));
}

TEST_CASE("load_edge_list rejects negative weights and malformed lines") {
    auto bad_weight = lines({"a b -1"});
    CHECK_THROWS_AS(load_edge_list(bad_weight), Error);
    auto malformed = lines({"a"});
    CHECK_THROWS_WITH_AS(load_edge_list(malformed),
                         doctest::Contains("line 1"), Error);
    auto bad_real = lines({"a b xyz"});
    CHECK_THROWS_AS(load_edge_list(bad_real), Error);
}

TEST_CASE("load_edge_list handles comments, blank lines and self loops") {
    auto in = lines({"# header", "", "a b 2", "c c 3", "b a 1  # trailing"});
    LabeledGraph g = load_edge_list(in);
    CHECK(g.node_count == 3);  // c appears even though its self loop is dropped
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].w == doctest::Approx(3.0));

    auto in2 = lines({"c c 3"});
    EdgeListOptions opt;
    opt.keep_self_loops = true;
    LabeledGraph g2 = load_edge_list(in2, opt);
    REQUIRE(g2.edges.size() == 1);
    CHECK(g2.edges[0].i == g2.edges[0].j);
}

TEST_CASE("ingestion is orientation independent") {
    Rng rng(7);
    for (int t = 0; t < 20; ++t) {
        LabeledGraph g = random_connected_graph(12, 0.3, rng);
        std::string fwd, rev;
        for (const Edge& e : g.edges) {
            fwd += g.ids[e.i] + " " + g.ids[e.j] + " " + std::to_string(e.w) + "\n";
            rev += g.ids[e.j] + " " + g.ids[e.i] + " " + std::to_string(e.w) + "\n";
        }
        std::istringstream a(fwd), b(rev);
        LabeledGraph ga = load_edge_list(a);
        LabeledGraph gb = load_edge_list(b);
        REQUIRE(ga.node_count == gb.node_count);
        REQUIRE(ga.edges.size() == gb.edges.size());
        // same canonical edge set once ids are resolved
        auto key = [](const LabeledGraph& g, const Edge& e) {
            auto a = g.ids[e.i], b = g.ids[e.j];
            if (b < a) std::swap(a, b);
            return a + "|" + b;
        };
        std::set<std::string> sa, sb;
        for (const Edge& e : ga.edges) sa.insert(key(ga, e));
        for (const Edge& e : gb.edges) sb.insert(key(gb, e));
        CHECK(sa == sb);
    }
}

TEST_CASE("giant_component basics") {
    SUBCASE("identity on connected input") {
        std::size_t dropped = 99;
        LabeledGraph g = giant_component(triangle(), &dropped);
        CHECK(g.node_count == 3);
        CHECK(g.edges.size() == 3);
        CHECK(dropped == 0);
    }
    SUBCASE("largest component wins") {
        LabeledGraph g = from_edges(5, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}});
        std::size_t dropped = 0;
        LabeledGraph keep = giant_component(g, &dropped);
        CHECK(keep.node_count == 3);
        CHECK(dropped == 2);
    }
    SUBCASE("ties go to the lowest original index") {
        LabeledGraph g = from_edges(4, {{2, 3, 1}, {0, 1, 1}});
        LabeledGraph keep = giant_component(g);
        REQUIRE(keep.node_count == 2);
        CHECK(keep.ids[0] == "0");
        CHECK(keep.ids[1] == "1");
    }
    SUBCASE("empty graph is rejected") {
        LabeledGraph empty;
        CHECK_THROWS_AS(giant_component(empty), Error);
    }
    SUBCASE("labels and ids survive re-indexing") {
        LabeledGraph g = from_edges(4, {{1, 2, 1}, {2, 3, 1}});
        g.labels[2] = 7;
        LabeledGraph keep = giant_component(g);
        REQUIRE(keep.node_count == 3);
        CHECK(keep.ids[0] == "1");
        CHECK(keep.labels.at(keep.id_to_index.at("2")) == 7);
    }
}

TEST_CASE("giant_component is idempotent") {
    Rng rng(11);
    for (int t = 0; t < 10; ++t) {
        LabeledGraph g = from_edges(15, {});
        for (std::size_t i = 0; i < 15; ++i)
            for (std::size_t j = i + 1; j < 15; ++j)
                if (rng.real() < 0.12) g.edges.push_back({i, j, 1.0});
        if (g.edges.empty()) continue;
        LabeledGraph once = giant_component(g);
        LabeledGraph twice = giant_component(once);
        CHECK(once.node_count == twice.node_count);
        CHECK(once.edges.size() == twice.edges.size());
    }
}

TEST_CASE("transition_matrix on hand graphs") {
    SUBCASE("path 0-1-2") {
        auto [t, deg] = transition_matrix(path3());
        CHECK(deg.volume == doctest::Approx(4.0));
        CHECK(t.coeff(0, 1) == doctest::Approx(1.0));
        CHECK(t.coeff(1, 0) == doctest::Approx(0.5));
        CHECK(t.coeff(1, 2) == doctest::Approx(0.5));
        CHECK(t.coeff(2, 1) == doctest::Approx(1.0));
        CHECK(t.coeff(0, 0) == doctest::Approx(0.0));
    }
    SUBCASE("triangle") {
        auto [t, deg] = transition_matrix(triangle());
        CHECK(deg.volume == doctest::Approx(6.0));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(t.coeff(i, j) == doctest::Approx(i == j ? 0.0 : 0.5));
    }
    SUBCASE("edge weight cancels for single-neighbor rows") {
        LabeledGraph g = from_edges(2, {{0, 1, 7.0}});
        auto [t, deg] = transition_matrix(g);
        CHECK(t.coeff(0, 1) == doctest::Approx(1.0));
        CHECK(t.coeff(1, 0) == doctest::Approx(1.0));
        CHECK(deg.volume == doctest::Approx(14.0));
    }
    SUBCASE("zero-degree node is named") {
        LabeledGraph g = from_edges(3, {{0, 1, 1}});
        CHECK_THROWS_WITH_AS(transition_matrix(g), doctest::Contains("2"), Error);
    }
}

TEST_CASE("row stochasticity and stationary fixed point on random graphs") {
    Rng rng(23);
    for (int t = 0; t < 25; ++t) {
        LabeledGraph g = random_connected_graph(8 + rng.index(40), 0.25, rng);
        auto [walk, deg] = transition_matrix(g);
        const Eigen::VectorXd row_sums = walk * Eigen::VectorXd::Ones(walk.rows());
        CHECK((row_sums.array() - 1.0).abs().maxCoeff() <= 1e-12);
        CHECK(std::abs(deg.stationary.sum() - 1.0) <= 1e-12);
        const Eigen::VectorXd pi_t = walk.transpose() * deg.stationary;
        CHECK((pi_t - deg.stationary).lpNorm<Eigen::Infinity>() <= 1e-10);
    }
}

TEST_CASE("random_walk_laplacian") {
    SUBCASE("K2") {
        auto [t, deg] = transition_matrix(k2());
        SparseOperator l = random_walk_laplacian(t);
        CHECK(l.coeff(0, 0) == doctest::Approx(1.0));
        CHECK(l.coeff(0, 1) == doctest::Approx(-1.0));
        CHECK(l.coeff(1, 0) == doctest::Approx(-1.0));
        CHECK(l.coeff(1, 1) == doctest::Approx(1.0));
    }
    SUBCASE("identity walk gives zero Laplacian") {
        SparseOperator t(4, 4);
        t.setIdentity();
        SparseOperator l = random_walk_laplacian(t);
        CHECK(Eigen::MatrixXd(l).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    }
    SUBCASE("path row") {
        auto [t, deg] = transition_matrix(path3());
        SparseOperator l = random_walk_laplacian(t);
        CHECK(l.coeff(1, 0) == doctest::Approx(-0.5));
        CHECK(l.coeff(1, 1) == doctest::Approx(1.0));
        CHECK(l.coeff(1, 2) == doctest::Approx(-0.5));
        const Eigen::VectorXd row_sums = l * Eigen::VectorXd::Ones(3);
        CHECK(row_sums.cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("non-square input") {
        SparseOperator t(2, 3);
        CHECK_THROWS_AS(random_walk_laplacian(t), Error);
    }
}

TEST_CASE("dense_vectors_to_graph") {
    SUBCASE("identical vectors give unit weight") {
        std::vector<Eigen::VectorXd> x(2, Eigen::VectorXd::Zero(3));
        KernelOptions opt;
        opt.neighbors = 1;
        opt.sigma = 1.0;
        LabeledGraph g = dense_vectors_to_graph(x, opt);
        REQUIRE(g.edges.size() == 1);
        CHECK(g.edges[0].w == doctest::Approx(1.0));
    }
    SUBCASE("collinear points, explicit sigma") {
        std::vector<Eigen::VectorXd> x(3);
        for (int i = 0; i < 3; ++i) {
            x[static_cast<std::size_t>(i)] = Eigen::VectorXd::Constant(1, static_cast<double>(i));
        }
        KernelOptions opt;
        opt.neighbors = 2;
        opt.sigma = 1.0;
        LabeledGraph g = dense_vectors_to_graph(x, opt);
        SparseOperator a = g.adjacency();
        CHECK(a.coeff(0, 1) == doctest::Approx(std::exp(-1.0)));
        CHECK(a.coeff(0, 2) == doctest::Approx(std::exp(-4.0)));
        CHECK(a.coeff(1, 2) == doctest::Approx(std::exp(-1.0)));
    }
    SUBCASE("neighbor count out of range") {
        std::vector<Eigen::VectorXd> x(3, Eigen::VectorXd::Zero(2));
        KernelOptions opt;
        opt.neighbors = 3;
        CHECK_THROWS_AS(dense_vectors_to_graph(x, opt), Error);
    }
    SUBCASE("too few vectors") {
        std::vector<Eigen::VectorXd> x(1, Eigen::VectorXd::Zero(2));
        CHECK_THROWS_AS(dense_vectors_to_graph(x, {}), Error);
    }
    SUBCASE("degenerate kernel with auto bandwidth") {
        std::vector<Eigen::VectorXd> x(3, Eigen::VectorXd::Ones(2));
        KernelOptions opt;
        opt.neighbors = 2;
        opt.sigma = 0.0;  // auto
        CHECK_THROWS_AS(dense_vectors_to_graph(x, opt), Error);
    }
    SUBCASE("auto bandwidth uses median retained distance") {
        std::vector<Eigen::VectorXd> x(4);
        x[0] = Eigen::VectorXd::Constant(1, 0.0);
        x[1] = Eigen::VectorXd::Constant(1, 1.0);
        x[2] = Eigen::VectorXd::Constant(1, 10.0);
        x[3] = Eigen::VectorXd::Constant(1, 11.5);
        KernelOptions opt;
        opt.neighbors = 1;
        LabeledGraph g = dense_vectors_to_graph(x, opt);
        // retained distances: 1, 1, 1.5, 1.5 -> median 1.5
        SparseOperator a = g.adjacency();
        CHECK(a.coeff(0, 1) == doctest::Approx(std::exp(-1.0 / 2.25)));
    }
}
