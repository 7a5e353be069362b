#include <cmath>

#include "chaintag/graph.hpp"

namespace chaintag {

ConvergenceError::ConvergenceError(int iterations, double residual)
    : Error("pagerank did not converge after " + std::to_string(iterations) + " iterations (L1 residual " +
            std::to_string(residual) + ")"),
      iterations_(iterations),
      residual_(residual) {}

PageRankResult pagerank(const TxGraph& graph, const PageRankOptions& opt) {
    const std::size_t n = graph.order();
    if (n == 0) throw ValidationError("graph", "pagerank needs at least one node");
    if (!(opt.damping >= 0 && opt.damping < 1)) throw ValidationError("damping", "must be in [0, 1)");
    if (!(opt.tol > 0)) throw ValidationError("tol", "must be positive");
    const simd::Kernels& k = opt.kernels ? *opt.kernels : simd::kernels();

    auto edges = graph.edges();
    std::vector<double> out_weight(n, 0.0);
    for (const auto& e : edges) out_weight[e.from] += static_cast<double>(e.weight);

    // CSR over destinations: row v lists the sources u of u->v with P(u->v) = w / W(u).
    std::vector<std::uint32_t> ptr(n + 1, 0), col(edges.size());
    std::vector<double> val(edges.size());
    for (const auto& e : edges) ++ptr[e.to + 1];
    for (std::size_t v = 0; v < n; ++v) ptr[v + 1] += ptr[v];
    std::vector<std::uint32_t> fill(ptr.begin(), ptr.end() - 1);
    for (const auto& e : edges) {
        std::uint32_t at = fill[e.to]++;
        col[at] = e.from;
        val[at] = static_cast<double>(e.weight) / out_weight[e.from];
    }
    std::vector<double> dangling(n);
    for (std::size_t u = 0; u < n; ++u) dangling[u] = out_weight[u] > 0 ? 0.0 : 1.0;

    const double d = opt.damping, inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> x(n, inv_n), y(n);
    PageRankResult res;
    for (int it = 1; it <= opt.max_iter; ++it) {
        double lost = k.masked_sum(x.data(), dangling.data(), n);
        k.spmv_csr(ptr.data(), col.data(), val.data(), x.data(), y.data(), n);
        k.affine(y.data(), d, ((1.0 - d) + d * lost) * inv_n, n);
        k.scale(y.data(), 1.0 / k.sum(y.data(), n), n);
        res.residual = k.l1_distance(x.data(), y.data(), n);
        x.swap(y);
        res.iterations = it;
        if (res.residual < opt.tol) {
            res.scores = std::move(x);
            return res;
        }
    }
    throw ConvergenceError(res.iterations, res.residual);
}

}  // namespace chaintag
