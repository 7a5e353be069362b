#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "chaintag/address.hpp"
#include "json.hpp"

namespace chaintag {

class Chain;

// Insertion-ordered so that tag info round-trips byte for byte.
using Json = nlohmann::ordered_json;

enum class TagType { user, service, text, custom };
enum class Level { block, transaction, address };

std::string_view to_string(TagType type);
std::string_view to_string(Level level);
std::optional<TagType> tag_type_from_string(std::string_view text);
std::optional<Level> level_from_string(std::string_view text);

struct Tag {
    TagType type = TagType::custom;
    std::string source;
    Json info = Json::object();

    // "<type>:<source>:<primary>" where primary is info.id, else account, provider or label.
    std::string id() const;

    Json to_json() const;
    // Throws ValidationError on a missing/invalid type, non-string source or non-object info.
    static Tag from_json(const Json& j, const std::string& path = "tag");

    friend bool operator==(const Tag& a, const Tag& b) {
        return a.type == b.type && a.source == b.source && a.info == b.info;
    }
};

struct TagKey {
    Level level = Level::address;
    std::string id;

    // Validates identifier syntax for the level and normalizes transaction hashes to lowercase.
    static TagKey make(Level level, std::string_view id, const CurrencyProfile& profile = CurrencyProfile::bitcoin());

    friend auto operator<=>(const TagKey&, const TagKey&) = default;
};

struct TaggedEntry {
    TagKey key;
    std::size_t index = 0;  // position of the tag within the key's list
    Tag tag;

    friend bool operator==(const TaggedEntry&, const TaggedEntry&) = default;
};

// Persistent tag store: an append-only JSON-lines log replayed into an in-memory cache on open.
// Every mutation is flushed to the log before it returns; close() compacts the log.
class TagStore {
public:
    explicit TagStore(std::filesystem::path log_path, const CurrencyProfile& profile = CurrencyProfile::bitcoin());
    ~TagStore();

    TagStore(const TagStore&) = delete;
    TagStore& operator=(const TagStore&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    const CurrencyProfile& profile() const noexcept { return *profile_; }

    std::size_t put_tags(const TagKey& key, const std::vector<Tag>& tags, bool append);
    std::size_t remove_tags(const TagKey& key);

    // Tags stored at exactly this key.
    std::vector<Tag> tags_at(const TagKey& key) const;

    // With include_lower, transactions add their input/output addresses' tags and blocks add their
    // transactions' (and those transactions' addresses') tags. Each (key, index) appears once.
    // Throws std::invalid_argument when lower levels are requested without a chain.
    std::vector<TaggedEntry> get_tags(const TagKey& key, bool include_lower = true, const Chain* chain = nullptr) const;

    std::vector<TaggedEntry> scan_tags(const std::optional<std::set<TagType>>& types,
                                       const std::optional<std::string>& substring) const;

    // Visits every key of one level in key order under a shared lock.
    void for_each(Level level, const std::function<void(const TagKey&, const std::vector<Tag>&)>& fn) const;

    std::size_t key_count() const;

    // Compacts the log to one record per live key and closes it. Further writes reopen the log.
    void close();

private:
    void replay();
    void append_record(const Json& record);
    void ensure_open();

    std::filesystem::path path_;
    const CurrencyProfile* profile_;
    std::map<TagKey, std::vector<Tag>> cache_;
    std::ofstream log_;
    mutable std::shared_mutex mutex_;
};

// Case-insensitive plain substring test over every string leaf of a JSON value.
bool json_contains_text(const Json& value, std::string_view needle_lower);
std::string ascii_lower(std::string_view s);

}  // namespace chaintag
