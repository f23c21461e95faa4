#include "ecx/projections.hpp"

#include "ecx/csv.hpp"
#include "ecx/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace ecx {

ProjectionMatrix project(const BinaryBipartiteMatrix& m, Entity kind)
{
    ProjectionMatrix p;
    p.kind = kind;
    const auto& v = m.values();
    if (kind == Entity::region) {
        p.values = v * v.transpose();
        p.labels = m.regions().codes();
    } else {
        p.values = v.transpose() * v;
        p.labels = m.sectors().codes();
    }
    return p;
}

SimilarityMatrix similarity(const ProjectionMatrix& proj)
{
    const auto& v = proj.values;
    const auto n = v.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (v(i, i) <= 0) {
            throw InputError(fmt::format("zero diagonal in projection for '{}'", proj.labels[static_cast<std::size_t>(i)]));
        }
    }
    SimilarityMatrix s;
    s.kind = proj.kind;
    s.labels = proj.labels;
    s.values.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            s.values(i, j) = i == j ? 1.0 : 2.0 * v(i, j) / static_cast<double>(v(i, i) + v(j, j));
        }
    }
    return s;
}

namespace {

long long weight_key(double w)
{
    return std::llround(w * 1e12);
}

std::string components(const Eigen::MatrixXd& w, const std::vector<std::string>& labels)
{
    const auto n = static_cast<std::size_t>(w.rows());
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            x = parent[x] = parent[parent[x]];
        }
        return x;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0) {
                parent[find(i)] = find(j);
            }
        }
    }
    std::vector<std::vector<std::string>> groups;
    std::vector<std::size_t> slot(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto root = find(i);
        if (slot[root] == n) {
            slot[root] = groups.size();
            groups.emplace_back();
        }
        groups[slot[root]].push_back(labels[i]);
    }
    std::string out;
    for (auto& g : groups) {
        std::sort(g.begin(), g.end());
        out += fmt::format("{}{{{}}}", out.empty() ? "" : " ", fmt::join(g, ","));
    }
    return out;
}

} // namespace

SpanningTree max_similarity_tree(const SimilarityMatrix& theta)
{
    const auto& w = theta.values;
    const auto n = static_cast<std::size_t>(w.rows());
    if (n < 2 || w.cols() != w.rows() || theta.labels.size() != n) {
        throw InputError("spanning tree needs a square similarity matrix with at least 2 labelled nodes");
    }
    const auto& labels = theta.labels;
    const auto idx = [](std::size_t i) { return static_cast<Eigen::Index>(i); };

    std::vector<bool> in_tree(n, false);
    // Best known connection of each outside node to the tree.
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> via(n, none);
    std::vector<long long> key(n, 0);

    auto relax = [&](std::size_t u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (in_tree[v] || !(w(idx(u), idx(v)) > 0)) {
                continue;
            }
            const long long k = weight_key(w(idx(u), idx(v)));
            if (via[v] == none || k > key[v] || (k == key[v] && labels[u] < labels[via[v]])) {
                via[v] = u;
                key[v] = k;
            }
        }
    };

    const auto start = static_cast<std::size_t>(std::min_element(labels.begin(), labels.end()) - labels.begin());
    SpanningTree tree;
    tree.kind = theta.kind;
    tree.labels = labels;
    in_tree[start] = true;
    relax(start);
    for (std::size_t added = 1; added < n; ++added) {
        std::size_t best = none;
        for (std::size_t v = 0; v < n; ++v) {
            if (in_tree[v] || via[v] == none) {
                continue;
            }
            if (best == none || key[v] > key[best] ||
                (key[v] == key[best] && (labels[via[v]] < labels[via[best]] ||
                                         (labels[via[v]] == labels[via[best]] && labels[v] < labels[best])))) {
                best = v;
            }
        }
        if (best == none) {
            throw NumericalError(
                fmt::format("similarity graph is disconnected; components: {}", components(w, labels)));
        }
        const double weight = w(idx(via[best]), idx(best));
        tree.edges.push_back({via[best], best, weight});
        tree.total_weight += weight;
        in_tree[best] = true;
        relax(best);
    }
    return tree;
}

TreeFormat parse_tree_format(std::string_view name)
{
    if (name == "dot") {
        return TreeFormat::dot;
    }
    if (name == "graphml") {
        return TreeFormat::graphml;
    }
    if (name == "csv") {
        return TreeFormat::csv;
    }
    throw InputError(fmt::format("unknown tree format '{}' (expected dot|graphml|csv)", name));
}

std::string_view tree_format_extension(TreeFormat format)
{
    switch (format) {
    case TreeFormat::dot:
        return "dot";
    case TreeFormat::graphml:
        return "graphml";
    case TreeFormat::csv:
        return "csv";
    }
    return "txt";
}

NodeAttributes node_attributes(const BinaryBipartiteMatrix& m, Entity kind)
{
    NodeAttributes a;
    if (kind == Entity::region) {
        for (const auto& r : m.regions().entries()) {
            a.names.push_back(r.name.empty() ? r.code : r.name);
            a.groups.push_back(r.super_region);
        }
    } else {
        for (const auto& s : m.sectors().entries()) {
            a.names.push_back(s.name.empty() ? s.code : s.name);
            a.groups.push_back(s.division);
        }
    }
    return a;
}

namespace {

std::string dot_quote(std::string_view s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    return out + '"';
}

std::string xml_escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

void export_tree(std::ostream& out, const SpanningTree& tree, const NodeAttributes& nodes, TreeFormat format)
{
    const auto& labels = tree.labels;
    if (nodes.names.size() != labels.size() || nodes.groups.size() != labels.size()) {
        throw InputError("node attributes do not match the tree labels");
    }
    const auto graph_id = fmt::format("mst_{}", entity_name(tree.kind));
    switch (format) {
    case TreeFormat::dot:
        out << "graph " << graph_id << " {\n";
        for (std::size_t i = 0; i < labels.size(); ++i) {
            out << "  " << dot_quote(labels[i]) << " [label=" << dot_quote(nodes.names[i])
                << ", group=" << dot_quote(nodes.groups[i]) << "];\n";
        }
        for (const auto& e : tree.edges) {
            out << "  " << dot_quote(labels[e.a]) << " -- " << dot_quote(labels[e.b])
                << " [weight=" << csv::format_double(e.weight) << "];\n";
        }
        out << "}\n";
        break;
    case TreeFormat::graphml:
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
            << "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
            << "  <key id=\"group\" for=\"node\" attr.name=\"group\" attr.type=\"string\"/>\n"
            << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
            << "  <graph id=\"" << graph_id << "\" edgedefault=\"undirected\">\n";
        for (std::size_t i = 0; i < labels.size(); ++i) {
            out << "    <node id=\"" << xml_escape(labels[i]) << "\">"
                << "<data key=\"label\">" << xml_escape(nodes.names[i]) << "</data>"
                << "<data key=\"group\">" << xml_escape(nodes.groups[i]) << "</data></node>\n";
        }
        for (const auto& e : tree.edges) {
            out << "    <edge source=\"" << xml_escape(labels[e.a]) << "\" target=\"" << xml_escape(labels[e.b])
                << "\"><data key=\"weight\">" << csv::format_double(e.weight) << "</data></edge>\n";
        }
        out << "  </graph>\n</graphml>\n";
        break;
    case TreeFormat::csv:
        csv::write_row(out, {"node_a", "node_b", "similarity"});
        for (const auto& e : tree.edges) {
            csv::write_row(out, {labels[e.a], labels[e.b], csv::format_double(e.weight)});
        }
        break;
    }
}

} // namespace ecx
