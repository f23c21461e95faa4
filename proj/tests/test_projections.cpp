#include "ecx/error.hpp"
#include "ecx/projections.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

using namespace ecx;

namespace {

SimilarityMatrix theta(const std::vector<std::vector<double>>& w, std::vector<std::string> labels)
{
    SimilarityMatrix t;
    const auto n = static_cast<Eigen::Index>(w.size());
    t.values.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            t.values(i, j) = i == j ? 1.0 : w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    t.labels = std::move(labels);
    return t;
}

std::set<std::pair<std::string, std::string>> edge_set(const SpanningTree& tree)
{
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& e : tree.edges) {
        auto a = tree.labels[e.a];
        auto b = tree.labels[e.b];
        if (b < a) {
            std::swap(a, b);
        }
        out.emplace(a, b);
    }
    return out;
}

std::size_t count_lines(const std::string& s)
{
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_SUITE("projections")
{
    TEST_CASE("region and sector projections of [[1,1,1],[1,1,0]]")
    {
        const auto m = testing::matrix({{1, 1, 1}, {1, 1, 0}});
        const auto p = project(m, Entity::region);
        Eigen::MatrixXi expected_p(2, 2);
        expected_p << 3, 2, 2, 2;
        CHECK(p.values == expected_p);
        CHECK(p.labels == std::vector<std::string>{"R01", "R02"});

        const auto s = project(m, Entity::sector);
        Eigen::MatrixXi expected_s(3, 3);
        expected_s << 2, 2, 1, 2, 2, 1, 1, 1, 1;
        CHECK(s.values == expected_s);
    }

    TEST_CASE("identity projects to the identity")
    {
        const auto m = testing::matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
        CHECK(project(m, Entity::region).values.isIdentity());
        const auto t = similarity(project(m, Entity::region));
        CHECK(t.values.isIdentity());
    }

    TEST_CASE("similarity values")
    {
        const auto t = similarity(project(testing::matrix({{1, 1, 1}, {1, 1, 0}}), Entity::region));
        CHECK(t.values(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
        CHECK(t.values(1, 0) == t.values(0, 1));
        CHECK(t.values(0, 0) == 1.0);

        const auto same = similarity(project(testing::matrix({{1, 0, 1}, {1, 0, 1}, {0, 1, 0}}), Entity::region));
        CHECK(same.values(0, 1) == 1.0);
        CHECK(same.values(0, 2) == 0.0);
    }

    TEST_CASE("similarity is symmetric and bounded on random matrices")
    {
        std::mt19937_64 rng(10);
        for (int trial = 0; trial < 20; ++trial) {
            const auto m = testing::matrix(oracle::random_binary(rng, 2 + rng() % 12, 2 + rng() % 12, 0.4));
            for (auto kind : {Entity::region, Entity::sector}) {
                const auto t = similarity(project(m, kind));
                CHECK(t.values.isApprox(t.values.transpose()));
                CHECK((t.values.array() >= 0).all());
                CHECK((t.values.array() <= 1).all());
                CHECK((t.values.diagonal().array() == 1).all());
            }
        }
    }

    TEST_CASE("zero diagonal names the label")
    {
        ProjectionMatrix p;
        p.values = Eigen::MatrixXi::Zero(2, 2);
        p.values(0, 0) = 1;
        p.labels = {"A", "B"};
        CHECK_THROWS_WITH_AS(similarity(p), doctest::Contains("'B'"), InputError);
    }

    TEST_CASE("two nodes give the single edge")
    {
        const auto tree = max_similarity_tree(theta({{0, 0.3}, {0.3, 0}}, {"A", "B"}));
        REQUIRE(tree.edges.size() == 1);
        CHECK(tree.total_weight == doctest::Approx(0.3));
    }

    TEST_CASE("four-node example")
    {
        // AB 0.9, AC 0.8, AD 0.1, BC 0.5, BD 0.7, CD 0.2
        const auto tree = max_similarity_tree(theta(
            {{0, 0.9, 0.8, 0.1}, {0.9, 0, 0.5, 0.7}, {0.8, 0.5, 0, 0.2}, {0.1, 0.7, 0.2, 0}}, {"A", "B", "C", "D"}));
        CHECK(edge_set(tree) == std::set<std::pair<std::string, std::string>>{{"A", "B"}, {"A", "C"}, {"B", "D"}});
        CHECK(tree.total_weight == doctest::Approx(2.4).epsilon(1e-14));
    }

    TEST_CASE("equal weights give a star from the smallest label")
    {
        std::vector<std::vector<double>> w(5, std::vector<double>(5, 0.5));
        const auto tree = max_similarity_tree(theta(w, {"D", "B", "E", "A", "C"}));
        REQUIRE(tree.edges.size() == 4);
        for (const auto& e : tree.edges) {
            CHECK(tree.labels[e.a] == "A");
        }
        CHECK(tree.labels[tree.edges.front().b] == "B");
        CHECK(tree.labels[tree.edges.back().b] == "E");
    }

    TEST_CASE("disconnected support lists the components")
    {
        const auto t = theta({{0, 0.4, 0}, {0.4, 0, 0}, {0, 0, 0}}, {"A", "B", "C"});
        CHECK_THROWS_WITH_AS(max_similarity_tree(t), doctest::Contains("{A,B} {C}"), NumericalError);
    }

    TEST_CASE("greedy tree weight equals the Pruefer enumeration maximum")
    {
        std::mt19937_64 rng(11);
        std::uniform_int_distribution<int> level(1, 1000);
        for (int trial = 0; trial < 40; ++trial) {
            const std::size_t n = 2 + trial % 6;
            std::vector<std::vector<double>> w(n, std::vector<double>(n, 0));
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    // Coarse levels produce ties as well as distinct weights.
                    w[i][j] = w[j][i] = (trial % 2 ? level(rng) % 7 + 1 : level(rng)) / 1000.0;
                }
            }
            std::vector<std::string> labels;
            for (std::size_t i = 0; i < n; ++i) {
                labels.push_back(std::string(1, static_cast<char>('A' + i)));
            }
            const auto tree = max_similarity_tree(theta(w, labels));
            CHECK(tree.edges.size() == n - 1);
            CHECK(tree.total_weight == doctest::Approx(oracle::brute_force_max_tree(w)).epsilon(1e-12));
        }
    }

    TEST_CASE("tree is deterministic under relabelling order")
    {
        std::mt19937_64 rng(14);
        const auto m = testing::matrix(oracle::random_binary(rng, 12, 15, 0.5));
        const auto a = max_similarity_tree(similarity(project(m, Entity::region)));
        const auto b = max_similarity_tree(similarity(project(m, Entity::region)));
        CHECK(edge_set(a) == edge_set(b));
    }

    TEST_CASE("two-node DOT export")
    {
        const auto m = BinaryBipartiteMatrix(BinaryMatrix::Ones(2, 1),
                                             testing::regions({"HK", "AO"}), testing::sectors({"S01"}));
        const auto tree = max_similarity_tree(similarity(project(m, Entity::region)));
        std::ostringstream out;
        export_tree(out, tree, node_attributes(m, Entity::region), TreeFormat::dot);
        CHECK(out.str() ==
              "graph mst_region {\n"
              "  \"HK\" [label=\"name HK\", group=\"Kanto\"];\n"
              "  \"AO\" [label=\"name AO\", group=\"Kanto\"];\n"
              "  \"AO\" -- \"HK\" [weight=1];\n"
              "}\n");
        CHECK(count_lines(out.str()) == 5);
    }

    TEST_CASE("csv and graphml exports")
    {
        const auto m = testing::matrix({{1, 1, 0}, {1, 1, 1}, {0, 1, 1}});
        const auto tree = max_similarity_tree(similarity(project(m, Entity::sector)));
        const auto nodes = node_attributes(m, Entity::sector);
        std::ostringstream csv_out;
        export_tree(csv_out, tree, nodes, TreeFormat::csv);
        CHECK(csv_out.str().rfind("node_a,node_b,similarity\n", 0) == 0);
        CHECK(count_lines(csv_out.str()) == 3);

        std::ostringstream xml;
        export_tree(xml, tree, nodes, TreeFormat::graphml);
        const auto text = xml.str();
        CHECK(text.find("<graph id=\"mst_sector\" edgedefault=\"undirected\">") != std::string::npos);
        CHECK(count_lines(text) == 13);

        CHECK(parse_tree_format("graphml") == TreeFormat::graphml);
        CHECK(tree_format_extension(TreeFormat::dot) == "dot");
        CHECK_THROWS_AS(parse_tree_format("png"), InputError);
    }

    TEST_CASE("prefecture and sector trees carry catalog groups")
    {
        std::ifstream rf(ECX_SOURCE_DIR "/data/catalog/regions.csv");
        std::ifstream sf(ECX_SOURCE_DIR "/data/catalog/sectors.csv");
        const auto regions = read_regions(rf);
        const auto sectors = read_sectors(sf).kept();
        REQUIRE(regions.size() == 47);
        REQUIRE(sectors.size() == 91);

        std::mt19937_64 rng(47);
        const auto rows = oracle::random_binary(rng, 47, 91, 0.4);
        BinaryMatrix v(47, 91);
        for (Eigen::Index p = 0; p < 47; ++p) {
            for (Eigen::Index s = 0; s < 91; ++s) {
                v(p, s) = rows[static_cast<std::size_t>(p)][static_cast<std::size_t>(s)];
            }
        }
        const BinaryBipartiteMatrix m(v, regions, sectors);

        for (auto [kind, groups] : {std::pair{Entity::region, std::size_t{8}}, std::pair{Entity::sector, std::size_t{19}}}) {
            const auto tree = max_similarity_tree(similarity(project(m, kind)));
            const auto nodes = node_attributes(m, kind);
            CHECK(tree.edges.size() + 1 == tree.labels.size());
            CHECK(std::set<std::string>(nodes.groups.begin(), nodes.groups.end()).size() == groups);
            std::ostringstream out;
            export_tree(out, tree, nodes, TreeFormat::dot);
            CHECK(count_lines(out.str()) == 2 * tree.labels.size() + 1);
        }
        const auto nodes = node_attributes(m, Entity::region);
        CHECK(nodes.names.front() == "Hokkaido");
    }
}
