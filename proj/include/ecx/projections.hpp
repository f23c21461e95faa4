#pragma once

// Monopartite projections of M, the similarity matrix Theta and the
// maximum-similarity spanning tree.

#include "ecx/eci.hpp"
#include "ecx/rca.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ecx {

// P = M M^T (regions) or S = M^T M (sectors).
struct ProjectionMatrix {
    Eigen::MatrixXi values;
    Entity kind = Entity::region;
    std::vector<std::string> labels;
};

ProjectionMatrix project(const BinaryBipartiteMatrix& m, Entity kind);

// Theta_xy = 2 P_xy / (P_xx + P_yy).
struct SimilarityMatrix {
    Eigen::MatrixXd values;
    Entity kind = Entity::region;
    std::vector<std::string> labels;
};

SimilarityMatrix similarity(const ProjectionMatrix& proj);

struct TreeEdge {
    std::size_t a = 0; // endpoint already in the tree when the edge was added
    std::size_t b = 0;
    double weight = 0;
};

struct SpanningTree {
    Entity kind = Entity::region;
    std::vector<std::string> labels;
    std::vector<TreeEdge> edges; // in insertion order
    double total_weight = 0;
};

// Prim-style growth from the lexicographically smallest label, always adding
// the heaviest edge between the tree and the rest. Weights are compared after
// rounding to 1e-12; ties go to the smallest (tree label, new label) pair.
// Only edges with Theta > 0 are usable; a disconnected support throws
// NumericalError listing the components.
SpanningTree max_similarity_tree(const SimilarityMatrix& theta);

enum class TreeFormat { dot, graphml, csv };

TreeFormat parse_tree_format(std::string_view name);
std::string_view tree_format_extension(TreeFormat format);

// Display name and group per node, in label order: prefecture name and
// super region, or sector name and division.
struct NodeAttributes {
    std::vector<std::string> names;
    std::vector<std::string> groups;
};

NodeAttributes node_attributes(const BinaryBipartiteMatrix& m, Entity kind);

void export_tree(std::ostream& out, const SpanningTree& tree, const NodeAttributes& nodes, TreeFormat format);

} // namespace ecx
