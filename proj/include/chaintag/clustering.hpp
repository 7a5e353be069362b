#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chaintag/chain.hpp"
#include "chaintag/tags.hpp"

namespace chaintag {

enum class ClusterMethod { original, minimal };

std::string_view to_string(ClusterMethod method);
ClusterMethod cluster_method_from_string(std::string_view text);

struct ClusteringConfig {
    Side source = Side::inputs;
    ClusterMethod method = ClusterMethod::original;

    bool covers(Side side) const noexcept { return source == Side::both || source == side; }
    friend auto operator<=>(const ClusteringConfig&, const ClusteringConfig&) = default;
};

using ClusterId = std::uint32_t;
inline constexpr ClusterId kNoCluster = std::numeric_limits<ClusterId>::max();

class Clustering {
public:
    Clustering() = default;
    Clustering(ClusteringConfig config, std::vector<std::vector<AddressId>> clusters, std::size_t address_count);

    const ClusteringConfig& config() const noexcept { return config_; }
    std::span<const std::vector<AddressId>> clusters() const noexcept { return clusters_; }
    std::size_t size() const noexcept { return clusters_.size(); }

    std::optional<ClusterId> cluster_id(AddressId address) const;
    // Members in first-appearance order, empty span when untracked or discarded.
    std::span<const AddressId> cluster_of(AddressId address) const;
    std::optional<std::vector<std::string>> cluster_of(const Chain& chain, std::string_view address) const;

    // {"method":..., "source":..., "clusters":[[addr,...],...]}
    Json to_json(const Chain& chain) const;

private:
    ClusteringConfig config_;
    std::vector<std::vector<AddressId>> clusters_;
    std::vector<ClusterId> membership_;
};

// Multi-input closure: union-find fixpoint over addresses sharing a transaction side. Every
// address on a configured side ends up in exactly one cluster.
Clustering cluster_original(const Chain& chain, Side source);

// Stops before transitive merging (one set per distinct multi-address side), then drops every
// group of sets connected by shared addresses. The result is pairwise disjoint.
Clustering cluster_minimal(const Chain& chain, Side source);

Clustering compute_clustering(const Chain& chain, const ClusteringConfig& config);

// Memoizes clusterings of one chain by configuration. Thread-safe.
class ClusteringCache {
public:
    explicit ClusteringCache(const Chain& chain) : chain_(chain) {}
    std::shared_ptr<const Clustering> get(const ClusteringConfig& config);

private:
    const Chain& chain_;
    std::mutex mutex_;
    std::map<ClusteringConfig, std::shared_ptr<const Clustering>> cache_;
};

}  // namespace chaintag
