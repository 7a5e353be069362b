#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "chaintag/chain.hpp"
#include "chaintag/graph.hpp"
#include "chaintag/tags.hpp"

// Straightforward reference implementations the library is checked against. They favour
// obviousness over speed and share no code with the library beyond its data types.
namespace testsupport {

using Partition = std::set<std::set<std::string>>;

// Connected components of the "appears on the same transaction side" relation, found by BFS.
Partition oracle_original(const chaintag::Chain& chain, chaintag::Side side);
// Label propagation to a fixpoint: every side list takes the smallest label among its members
// until nothing changes.
Partition oracle_fixpoint(const chaintag::Chain& chain, chaintag::Side side);
// Distinct multi-address side sets that intersect no other such set.
Partition oracle_minimal(const chaintag::Chain& chain, chaintag::Side side);

struct OracleTags {
    std::map<std::string, std::vector<chaintag::Tag>> addresses;
    std::map<std::uint32_t, std::vector<chaintag::Tag>> blocks;
};

// Evaluates a query spec by enumerating the full row product and grouping with plain maps.
// Returns the result rows as JSON objects; compare with canonical_rows().
chaintag::Json oracle_query(const chaintag::Chain& chain, const OracleTags& tags, const chaintag::Json& spec);

// Sorted dumps of the row objects, so results compare as multisets.
std::vector<std::string> canonical_rows(const chaintag::Json& rows);

struct OracleMetrics {
    std::size_t wcc_nodes = 0, wcc_edges = 0, scc_nodes = 0, scc_edges = 0;
    std::uint64_t triangles = 0;
    double avg_clustering = 0, pct_closed = 0;
    std::uint32_t diameter = 0, radius = 0;
};

// O(n^3) reachability/distance matrices and triple loops.
OracleMetrics oracle_metrics(const chaintag::TxGraph& g);

// Dense power iteration on the full transition matrix.
std::vector<double> oracle_pagerank(const chaintag::TxGraph& g, double damping, int iterations);

}  // namespace testsupport
