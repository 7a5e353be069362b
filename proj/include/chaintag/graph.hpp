#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "chaintag/error.hpp"
#include "chaintag/query.hpp"
#include "chaintag/simd/kernels.hpp"

namespace chaintag {

struct Edge {
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    Satoshi weight = 0;
    std::uint64_t tx_count = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
};

// Weighted digraph with string-labelled nodes. Parallel transfers fold into one edge.
class TxGraph {
public:
    std::uint32_t node(std::string_view label);
    std::optional<std::uint32_t> find(std::string_view label) const;
    void add_edge(std::uint32_t from, std::uint32_t to, Satoshi weight, std::uint64_t tx_count = 1);

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::string& label(std::uint32_t id) const { return labels_.at(id); }
    std::size_t order() const noexcept { return labels_.size(); }
    std::size_t size() const noexcept { return edges_.size(); }
    // Sorted by (from, to).
    std::vector<Edge> edges() const;
    Satoshi total_weight() const;

    // "from,to,weight,tx_count" header, one line per edge, node labels as endpoints.
    std::string to_csv() const;

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::uint32_t> ids_;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<Satoshi, std::uint64_t>> edges_;
};

enum class NodeMode { address, tag };

struct GraphOptions {
    NodeMode nodes = NodeMode::address;
    std::optional<ClusteringConfig> clustering;
};

// Edges run from every bound input to every bound output of each matching transaction. An
// input's value is split evenly over the bound outputs, the remainder going to the first one.
TxGraph build_graph(QueryEngine& engine, const Predicate& filter, const GraphOptions& options = {});
// `where` uses the transaction-level query grammar.
TxGraph build_graph(const Chain& chain, const TagStore& store, const Json& where, const GraphOptions& options = {});

struct PageRankOptions {
    double damping = 0.85;
    double tol = 1e-9;
    int max_iter = 1000;
    const simd::Kernels* kernels = nullptr;  // default: simd::kernels()
};

struct PageRankResult {
    std::vector<double> scores;  // by node id
    int iterations = 0;
    double residual = 0;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(int iterations, double residual);
    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

// Weighted PageRank; dangling mass is spread uniformly. Throws ValidationError on an empty graph
// and ConvergenceError when the L1 change stays above tol after max_iter iterations.
PageRankResult pagerank(const TxGraph& graph, const PageRankOptions& options = {});

struct GraphMetrics {
    std::size_t order = 0;
    std::size_t size = 0;
    std::size_t wcc_nodes = 0;
    std::size_t wcc_edges = 0;
    std::size_t scc_nodes = 0;
    std::size_t scc_edges = 0;
    double avg_clustering = 0;
    std::uint64_t triangles = 0;
    double pct_closed = 0;
    std::uint32_t diameter = 0;
    std::uint32_t radius = 0;

    Json to_json() const;
};

// Component sizes on the digraph; triangles and clustering on its simple undirected projection;
// diameter and radius as hop eccentricities inside the largest strongly connected component.
GraphMetrics metrics(const TxGraph& graph);

// Components as node-id lists: each sorted ascending, lists ordered by smallest member.
std::vector<std::vector<std::uint32_t>> weak_components(const TxGraph& graph);
std::vector<std::vector<std::uint32_t>> strong_components(const TxGraph& graph);

}  // namespace chaintag
