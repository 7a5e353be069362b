#include <algorithm>
#include <numeric>
#include <queue>

#include "chaintag/graph.hpp"

namespace chaintag {

namespace {

struct Adjacency {
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<std::vector<std::uint32_t>> und;  // simple undirected projection
};

Adjacency adjacency(const TxGraph& g) {
    Adjacency a;
    a.out.resize(g.order());
    a.und.resize(g.order());
    for (const auto& e : g.edges()) {
        a.out[e.from].push_back(e.to);
        if (e.from == e.to) continue;
        a.und[e.from].push_back(e.to);
        a.und[e.to].push_back(e.from);
    }
    for (auto& l : a.und) {
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
    }
    return a;
}

std::uint32_t find(std::vector<std::uint32_t>& parent, std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
}

std::vector<std::vector<std::uint32_t>> group(const std::vector<std::uint32_t>& comp_of) {
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<std::int64_t> slot(comp_of.size(), -1);
    for (std::uint32_t v = 0; v < comp_of.size(); ++v) {
        auto c = comp_of[v];
        if (slot[c] < 0) {
            slot[c] = static_cast<std::int64_t>(out.size());
            out.emplace_back();
        }
        out[slot[c]].push_back(v);
    }
    return out;
}

std::size_t edges_within(const TxGraph& g, const std::vector<std::uint32_t>& nodes) {
    std::vector<char> in(g.order(), 0);
    for (auto v : nodes) in[v] = 1;
    std::size_t m = 0;
    for (const auto& e : g.edges()) m += in[e.from] && in[e.to];
    return m;
}

// Largest by nodes, then edges, then smallest member id.
std::pair<const std::vector<std::uint32_t>*, std::size_t> largest(const TxGraph& g,
                                                                  const std::vector<std::vector<std::uint32_t>>& comps) {
    const std::vector<std::uint32_t>* best = nullptr;
    std::size_t best_edges = 0;
    for (const auto& c : comps) {
        std::size_t m = edges_within(g, c);
        if (!best || c.size() > best->size() || (c.size() == best->size() && m > best_edges)) {
            best = &c;
            best_edges = m;
        }
    }
    return {best, best_edges};
}

}  // namespace

std::vector<std::vector<std::uint32_t>> weak_components(const TxGraph& g) {
    std::vector<std::uint32_t> parent(g.order());
    std::iota(parent.begin(), parent.end(), 0u);
    for (const auto& e : g.edges()) {
        auto a = find(parent, e.from), b = find(parent, e.to);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::vector<std::uint32_t> comp(g.order());
    for (std::uint32_t v = 0; v < g.order(); ++v) comp[v] = find(parent, v);
    return group(comp);
}

std::vector<std::vector<std::uint32_t>> strong_components(const TxGraph& g) {
    // Iterative Tarjan.
    const std::uint32_t n = static_cast<std::uint32_t>(g.order());
    Adjacency a = adjacency(g);
    constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> index(n, kUnset), low(n, 0), comp(n, kUnset), stack;
    std::vector<char> on_stack(n, 0);
    std::uint32_t counter = 0, ncomp = 0;
    std::vector<std::pair<std::uint32_t, std::size_t>> call;
    for (std::uint32_t s = 0; s < n; ++s) {
        if (index[s] != kUnset) continue;
        call.push_back({s, 0});
        index[s] = low[s] = counter++;
        stack.push_back(s);
        on_stack[s] = 1;
        while (!call.empty()) {
            auto& [v, i] = call.back();
            if (i < a.out[v].size()) {
                std::uint32_t w = a.out[v][i++];
                if (index[w] == kUnset) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            std::uint32_t done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
            if (low[done] == index[done]) {
                std::uint32_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = ncomp;
                } while (w != done);
                ++ncomp;
            }
        }
    }
    // Relabel by smallest member so the output order is stable.
    std::vector<std::uint32_t> first(ncomp, kUnset);
    for (std::uint32_t v = 0; v < n; ++v) first[comp[v]] = std::min(first[comp[v]], v);
    std::vector<std::uint32_t> by_first(n);
    for (std::uint32_t v = 0; v < n; ++v) by_first[v] = first[comp[v]];
    return group(by_first);
}

GraphMetrics metrics(const TxGraph& g) {
    GraphMetrics m;
    m.order = g.order();
    m.size = g.size();
    if (m.order == 0) return m;

    auto wcc = weak_components(g);
    auto [lw, lw_edges] = largest(g, wcc);
    m.wcc_nodes = lw->size();
    m.wcc_edges = lw_edges;

    auto scc = strong_components(g);
    auto [ls, ls_edges] = largest(g, scc);
    m.scc_nodes = ls->size();
    m.scc_edges = ls_edges;

    Adjacency a = adjacency(g);
    const std::uint32_t n = static_cast<std::uint32_t>(g.order());
    std::vector<std::uint64_t> tri(n, 0);
    std::vector<char> mark(n, 0);
    for (std::uint32_t u = 0; u < n; ++u) {
        for (auto v : a.und[u]) mark[v] = 1;
        for (auto v : a.und[u]) {
            if (v <= u) continue;
            for (auto w : a.und[v]) {
                if (w <= v || !mark[w]) continue;
                ++m.triangles;
                ++tri[u];
                ++tri[v];
                ++tri[w];
            }
        }
        for (auto v : a.und[u]) mark[v] = 0;
    }
    double triplets = 0, coeff = 0;
    for (std::uint32_t v = 0; v < n; ++v) {
        double k = static_cast<double>(a.und[v].size());
        if (k < 2) continue;
        double pairs = k * (k - 1) / 2;
        triplets += pairs;
        coeff += static_cast<double>(tri[v]) / pairs;
    }
    m.avg_clustering = coeff / n;
    m.pct_closed = triplets > 0 ? 100.0 * 3.0 * static_cast<double>(m.triangles) / triplets : 0.0;

    if (ls->size() > 1) {
        std::vector<char> in(n, 0);
        for (auto v : *ls) in[v] = 1;
        std::vector<std::uint32_t> dist(n);
        std::uint32_t diameter = 0, radius = std::numeric_limits<std::uint32_t>::max();
        for (auto s : *ls) {
            std::fill(dist.begin(), dist.end(), std::numeric_limits<std::uint32_t>::max());
            std::queue<std::uint32_t> q;
            dist[s] = 0;
            q.push(s);
            std::uint32_t ecc = 0;
            while (!q.empty()) {
                auto v = q.front();
                q.pop();
                ecc = std::max(ecc, dist[v]);
                for (auto w : a.out[v]) {
                    if (!in[w] || dist[w] != std::numeric_limits<std::uint32_t>::max()) continue;
                    dist[w] = dist[v] + 1;
                    q.push(w);
                }
            }
            diameter = std::max(diameter, ecc);
            radius = std::min(radius, ecc);
        }
        m.diameter = diameter;
        m.radius = radius;
    }
    return m;
}

Json GraphMetrics::to_json() const {
    return Json{{"order", order},
                {"size", size},
                {"wcc_nodes", wcc_nodes},
                {"wcc_edges", wcc_edges},
                {"scc_nodes", scc_nodes},
                {"scc_edges", scc_edges},
                {"avg_clustering", avg_clustering},
                {"triangles", triangles},
                {"pct_closed", pct_closed},
                {"diameter", diameter},
                {"radius", radius}};
}

}  // namespace chaintag
