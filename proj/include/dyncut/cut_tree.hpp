#pragma once

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dyncut/market_graph.hpp"

namespace dyncut {

struct CutTreeNode {
    std::vector<int> vertices; // sorted global indices
    int depth = 0;             // number of cuts from the root
    std::unique_ptr<CutTreeNode> left;
    std::unique_ptr<CutTreeNode> right;

    bool leaf() const { return !left; }
};

/// Binary tree of recursive bisections. Leaves partition {0..N-1}; the
/// depth-halving allocation relies on the Kraft equality sum 2^-depth = 1,
/// which holds for any full binary tree.
struct CutTree {
    std::unique_ptr<CutTreeNode> root;
    int n_vertices = 0;
    int cuts = 0;              // cuts actually performed (leaves = cuts + 1)
    int median_fallbacks = 0;  // diagnostic: bisections that needed the median split

    std::vector<const CutTreeNode*> leaves() const {
        std::vector<const CutTreeNode*> out;
        collect(root.get(), out);
        return out;
    }

private:
    static void collect(const CutTreeNode* node, std::vector<const CutTreeNode*>& out) {
        if (!node) return;
        if (node->leaf()) {
            out.push_back(node);
            return;
        }
        collect(node->left.get(), out);
        collect(node->right.get(), out);
    }
};

/// Performs up to `k` normalized-cut bisections. Each round picks the leaf
/// with the most vertices (ties: smallest minimum vertex index), asks the
/// provider for the market graph restricted to that cluster, and splits it by
/// fiedler_bisect. Stops early once every leaf is a singleton; `cuts` records
/// what actually happened.
///
/// `provider` maps a sorted vertex subset to the MarketGraph on that subset.
template <typename GraphProvider>
CutTree recursive_cuts(GraphProvider&& provider, int n_vertices, int k) {
    if (k < 1) throw std::invalid_argument("recursive_cuts: need at least one cut");
    if (n_vertices < 2) throw std::invalid_argument("recursive_cuts: need at least 2 vertices");

    CutTree tree;
    tree.n_vertices = n_vertices;
    tree.root = std::make_unique<CutTreeNode>();
    tree.root->vertices.resize(n_vertices);
    for (int v = 0; v < n_vertices; ++v) tree.root->vertices[v] = v;

    std::vector<CutTreeNode*> open{tree.root.get()};
    for (int cut = 0; cut < k; ++cut) {
        auto best = std::max_element(open.begin(), open.end(), [](const CutTreeNode* a, const CutTreeNode* b) {
            if (a->vertices.size() != b->vertices.size()) return a->vertices.size() < b->vertices.size();
            return a->vertices.front() > b->vertices.front(); // prefer the smaller min index
        });
        CutTreeNode* node = *best;
        if (node->vertices.size() < 2) break; // all leaves are singletons

        const MarketGraph sub = provider(node->vertices);
        if (sub.size() != static_cast<int>(node->vertices.size()))
            throw std::runtime_error("recursive_cuts: provider returned a graph of the wrong size");
        const FiedlerCut split = fiedler_bisect(sub);
        if (split.median_fallback) ++tree.median_fallbacks;

        auto to_global = [&](const std::vector<int>& local) {
            std::vector<int> out;
            out.reserve(local.size());
            for (int i : local) out.push_back(node->vertices[i]);
            std::sort(out.begin(), out.end());
            return out;
        };
        node->left = std::make_unique<CutTreeNode>();
        node->right = std::make_unique<CutTreeNode>();
        node->left->vertices = to_global(split.partition.e);
        node->right->vertices = to_global(split.partition.h);
        node->left->depth = node->right->depth = node->depth + 1;

        open.erase(best);
        open.push_back(node->left.get());
        open.push_back(node->right.get());
        ++tree.cuts;
    }
    return tree;
}

inline CutTree recursive_cuts(const MarketGraph& g, int k) {
    return recursive_cuts([&](const std::vector<int>& vertices) { return restrict_graph(g, vertices); },
                          g.size(), k);
}

namespace detail {

inline nlohmann::json node_to_json(const CutTreeNode& node) {
    nlohmann::json j;
    j["vertices"] = node.vertices;
    j["depth"] = node.depth;
    if (!node.leaf()) j["children"] = {node_to_json(*node.left), node_to_json(*node.right)};
    return j;
}

} // namespace detail

/// Nested {vertices, depth, children} representation rooted at the full set.
inline nlohmann::json cut_tree_to_json(const CutTree& tree) {
    if (!tree.root) throw std::invalid_argument("cut_tree_to_json: empty tree");
    nlohmann::json j = detail::node_to_json(*tree.root);
    j["cuts"] = tree.cuts;
    return j;
}

} // namespace dyncut
