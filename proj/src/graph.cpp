#include <set>

#include "chaintag/graph.hpp"

namespace chaintag {

std::uint32_t TxGraph::node(std::string_view label) {
    std::string key(label);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(labels_.size());
    labels_.push_back(key);
    ids_.emplace(std::move(key), id);
    return id;
}

std::optional<std::uint32_t> TxGraph::find(std::string_view label) const {
    auto it = ids_.find(std::string(label));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

void TxGraph::add_edge(std::uint32_t from, std::uint32_t to, Satoshi weight, std::uint64_t tx_count) {
    if (from >= labels_.size() || to >= labels_.size()) throw std::out_of_range("edge endpoint is not a node");
    auto& e = edges_[{from, to}];
    e.first += weight;
    e.second += tx_count;
}

std::vector<Edge> TxGraph::edges() const {
    std::vector<Edge> out;
    out.reserve(edges_.size());
    for (const auto& [k, v] : edges_) out.push_back({k.first, k.second, v.first, v.second});
    return out;
}

Satoshi TxGraph::total_weight() const {
    Satoshi s = 0;
    for (const auto& [_, v] : edges_) s += v.first;
    return s;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace

std::string TxGraph::to_csv() const {
    std::string out = "from,to,weight,tx_count\n";
    for (const auto& [k, v] : edges_) {
        out += csv_field(labels_[k.first]) + ',' + csv_field(labels_[k.second]) + ',' + std::to_string(v.first) + ',' +
               std::to_string(v.second) + '\n';
    }
    return out;
}

TxGraph build_graph(QueryEngine& engine, const Predicate& filter, const GraphOptions& options) {
    const Chain& chain = engine.chain();
    bool tag_nodes = options.nodes == NodeMode::tag;
    TxGraph g;
    for (const TxMatch& m : engine.match_transactions(filter, options.clustering, tag_nodes)) {
        const Transaction& tx = chain.tx(m.tx);
        if (m.inputs.empty() || m.outputs.empty()) continue;
        auto label = [&](const TxIo& io, const std::vector<Tag>& tags) {
            if (tag_nodes && !tags.empty()) return g.node(tags.front().id());
            return g.node(chain.address(io.address));
        };
        std::vector<std::uint32_t> to;
        for (std::size_t j = 0; j < m.outputs.size(); ++j) to.push_back(label(tx.outputs[m.outputs[j]], m.output_tags[j]));
        std::set<std::pair<std::uint32_t, std::uint32_t>> touched;
        auto k = static_cast<Satoshi>(to.size());
        for (std::size_t i = 0; i < m.inputs.size(); ++i) {
            const TxIo& in = tx.inputs[m.inputs[i]];
            std::uint32_t from = label(in, m.input_tags[i]);
            Satoshi share = in.value / k, rem = in.value % k;
            for (std::size_t j = 0; j < to.size(); ++j) {
                Satoshi w = share + (j == 0 ? rem : 0);
                if (w <= 0) continue;
                bool first = touched.insert({from, to[j]}).second;
                g.add_edge(from, to[j], w, first ? 1 : 0);
            }
        }
    }
    return g;
}

TxGraph build_graph(const Chain& chain, const TagStore& store, const Json& where, const GraphOptions& options) {
    Json spec = {{"level", "transaction"}, {"where", where}};
    Query q = parse_query(spec);
    QueryEngine engine(chain, store);
    return build_graph(engine, q.where, options);
}

}  // namespace chaintag
