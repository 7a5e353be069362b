#include "chaintag/clustering.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "chaintag/error.hpp"

namespace chaintag {

std::string_view to_string(ClusterMethod method) {
    return method == ClusterMethod::original ? "original" : "minimal";
}

ClusterMethod cluster_method_from_string(std::string_view text) {
    if (text == "original") return ClusterMethod::original;
    if (text == "minimal") return ClusterMethod::minimal;
    throw ValidationError("method", "expected original|minimal, got '" + std::string(text) + "'");
}

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0u); }

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint8_t> rank_;
};

template <typename Fn>
void for_each_side(const Chain& chain, Side source, Fn&& fn) {
    for (const auto& tx : chain.transactions()) {
        if (source != Side::outputs) fn(tx.inputs);
        if (source != Side::inputs) fn(tx.outputs);
    }
}

std::vector<AddressId> distinct_addresses(const std::vector<TxIo>& ios) {
    std::vector<AddressId> out;
    out.reserve(ios.size());
    for (const auto& io : ios) out.push_back(io.address);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

Clustering::Clustering(ClusteringConfig config, std::vector<std::vector<AddressId>> clusters, std::size_t address_count)
    : config_(config), clusters_(std::move(clusters)), membership_(address_count, kNoCluster) {
    for (ClusterId c = 0; c < clusters_.size(); ++c)
        for (AddressId a : clusters_[c]) membership_.at(a) = c;
}

std::optional<ClusterId> Clustering::cluster_id(AddressId address) const {
    if (address >= membership_.size() || membership_[address] == kNoCluster) return std::nullopt;
    return membership_[address];
}

std::span<const AddressId> Clustering::cluster_of(AddressId address) const {
    auto id = cluster_id(address);
    if (!id) return {};
    return clusters_[*id];
}

std::optional<std::vector<std::string>> Clustering::cluster_of(const Chain& chain, std::string_view address) const {
    auto id = chain.find_address(address);
    if (!id) return std::nullopt;
    auto members = cluster_of(*id);
    if (members.empty()) return std::nullopt;
    std::vector<std::string> out;
    for (AddressId a : members) out.push_back(chain.address(a));
    return out;
}

Json Clustering::to_json(const Chain& chain) const {
    Json j = Json::object();
    j["method"] = std::string(to_string(config_.method));
    j["source"] = std::string(to_string(config_.source));
    Json list = Json::array();
    for (const auto& c : clusters_) {
        Json members = Json::array();
        for (AddressId a : c) members.push_back(chain.address(a));
        list.push_back(std::move(members));
    }
    j["clusters"] = std::move(list);
    return j;
}

Clustering cluster_original(const Chain& chain, Side source) {
    const std::size_t n = chain.address_count();
    DisjointSets sets(n);
    std::vector<bool> covered(n, false);
    std::vector<AddressId> order;  // first appearance on a covered side
    for_each_side(chain, source, [&](const std::vector<TxIo>& ios) {
        for (const auto& io : ios) {
            if (!covered[io.address]) {
                covered[io.address] = true;
                order.push_back(io.address);
            }
            sets.unite(ios.front().address, io.address);
        }
    });

    std::unordered_map<std::uint32_t, ClusterId> root_to_cluster;
    std::vector<std::vector<AddressId>> clusters;
    for (AddressId a : order) {
        auto [it, inserted] = root_to_cluster.try_emplace(sets.find(a), static_cast<ClusterId>(clusters.size()));
        if (inserted) clusters.emplace_back();
        clusters[it->second].push_back(a);
    }
    return Clustering({source, ClusterMethod::original}, std::move(clusters), n);
}

Clustering cluster_minimal(const Chain& chain, Side source) {
    // Stage 1: distinct sets of co-spent (or co-paid) addresses, in first-appearance order,
    // members in side order.
    std::vector<std::vector<AddressId>> sets;
    std::map<std::vector<AddressId>, std::size_t> seen;
    for_each_side(chain, source, [&](const std::vector<TxIo>& ios) {
        std::vector<AddressId> key = distinct_addresses(ios);
        if (key.size() < 2) return;
        if (!seen.try_emplace(std::move(key), sets.size()).second) return;
        std::vector<AddressId> members;
        for (const auto& io : ios)
            if (std::find(members.begin(), members.end(), io.address) == members.end()) members.push_back(io.address);
        sets.push_back(std::move(members));
    });

    // Stage 2: sets that share an address are merged into one component; every component of two
    // or more sets is removed.
    DisjointSets components(sets.size());
    std::unordered_map<AddressId, std::uint32_t> owner;
    for (std::uint32_t s = 0; s < sets.size(); ++s) {
        for (AddressId a : sets[s]) {
            auto [it, inserted] = owner.try_emplace(a, s);
            if (!inserted) components.unite(it->second, s);
        }
    }
    std::vector<std::uint32_t> component_size(sets.size(), 0);
    for (std::uint32_t s = 0; s < sets.size(); ++s) ++component_size[components.find(s)];

    std::vector<std::vector<AddressId>> clusters;
    for (std::uint32_t s = 0; s < sets.size(); ++s)
        if (component_size[components.find(s)] == 1) clusters.push_back(std::move(sets[s]));
    return Clustering({source, ClusterMethod::minimal}, std::move(clusters), chain.address_count());
}

Clustering compute_clustering(const Chain& chain, const ClusteringConfig& config) {
    return config.method == ClusterMethod::original ? cluster_original(chain, config.source)
                                                    : cluster_minimal(chain, config.source);
}

std::shared_ptr<const Clustering> ClusteringCache::get(const ClusteringConfig& config) {
    std::lock_guard lock(mutex_);
    auto& slot = cache_[config];
    if (!slot) slot = std::make_shared<const Clustering>(compute_clustering(chain_, config));
    return slot;
}

}  // namespace chaintag
