#include "chaintag/tags.hpp"

#include <algorithm>
#include <charconv>
#include <mutex>
#include <stdexcept>

#include "chaintag/chain.hpp"
#include "chaintag/error.hpp"

namespace chaintag {

std::string_view to_string(TagType type) {
    switch (type) {
        case TagType::user: return "user";
        case TagType::service: return "service";
        case TagType::text: return "text";
        case TagType::custom: return "custom";
    }
    return "custom";
}

std::string_view to_string(Level level) {
    switch (level) {
        case Level::block: return "block";
        case Level::transaction: return "transaction";
        case Level::address: return "address";
    }
    return "address";
}

std::optional<TagType> tag_type_from_string(std::string_view text) {
    if (text == "user") return TagType::user;
    if (text == "service") return TagType::service;
    if (text == "text") return TagType::text;
    if (text == "custom") return TagType::custom;
    return std::nullopt;
}

std::optional<Level> level_from_string(std::string_view text) {
    if (text == "block") return Level::block;
    if (text == "transaction") return Level::transaction;
    if (text == "address") return Level::address;
    return std::nullopt;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

bool json_contains_text(const Json& value, std::string_view needle_lower) {
    switch (value.type()) {
        case Json::value_t::string:
            return ascii_lower(value.get_ref<const std::string&>()).find(needle_lower) != std::string::npos;
        case Json::value_t::object:
        case Json::value_t::array:
            for (const auto& child : value)
                if (json_contains_text(child, needle_lower)) return true;
            return false;
        default:
            return false;
    }
}

std::string Tag::id() const {
    std::string out;
    out.append(to_string(type)).append(":").append(source).append(":");
    for (const char* field : {"id", "account", "provider", "label"}) {
        auto it = info.find(field);
        if (it == info.end() || it->is_null()) continue;
        out += it->is_string() ? it->get<std::string>() : it->dump();
        break;
    }
    return out;
}

Json Tag::to_json() const {
    Json j = Json::object();
    j["type"] = std::string(to_string(type));
    j["source"] = source;
    j["info"] = info;
    return j;
}

Tag Tag::from_json(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ValidationError(path, "tag must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (k != "type" && k != "source" && k != "info") throw ValidationError(path + "." + k, "unknown tag field");
    Tag t;
    auto type = j.find("type");
    if (type == j.end() || !type->is_string()) throw ValidationError(path + ".type", "missing tag type");
    auto parsed = tag_type_from_string(type->get<std::string>());
    if (!parsed)
        throw ValidationError(path + ".type", "invalid tag type '" + type->get<std::string>() +
                                                  "', expected user|service|text|custom");
    t.type = *parsed;
    auto source = j.find("source");
    if (source != j.end()) {
        if (!source->is_string()) throw ValidationError(path + ".source", "source must be a string");
        t.source = source->get<std::string>();
    }
    auto info = j.find("info");
    if (info != j.end()) {
        if (!info->is_object()) throw ValidationError(path + ".info", "info must be a JSON object");
        t.info = *info;
    }
    return t;
}

TagKey TagKey::make(Level level, std::string_view id, const CurrencyProfile& profile) {
    if (id.empty()) throw ValidationError("id", "identifier must not be empty");
    TagKey key{level, std::string(id)};
    switch (level) {
        case Level::block: {
            std::uint64_t h = 0;
            auto [p, ec] = std::from_chars(id.data(), id.data() + id.size(), h);
            if (ec != std::errc{} || p != id.data() + id.size() || h > UINT32_MAX)
                throw ValidationError("id", "block identifier must be a height, got '" + std::string(id) + "'");
            key.id = std::to_string(h);
            break;
        }
        case Level::transaction: {
            bool hex = std::all_of(id.begin(), id.end(), [](char c) {
                return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
            });
            if (!hex) throw ValidationError("id", "transaction identifier must be hex, got '" + std::string(id) + "'");
            key.id = normalize_hash(id);
            break;
        }
        case Level::address:
            if (!profile.is_valid(id))
                throw ValidationError("id", "invalid " + profile.name + " address '" + std::string(id) + "'");
            break;
    }
    return key;
}

namespace {

Json record_for(const char* op, const TagKey& key, bool append, const std::vector<Tag>& tags) {
    Json r = Json::object();
    r["op"] = op;
    r["level"] = std::string(to_string(key.level));
    r["id"] = key.id;
    r["append"] = append;
    Json list = Json::array();
    for (const auto& t : tags) list.push_back(t.to_json());
    r["tags"] = std::move(list);
    return r;
}

}  // namespace

TagStore::TagStore(std::filesystem::path log_path, const CurrencyProfile& profile)
    : path_(std::move(log_path)), profile_(&profile) {
    replay();
}

TagStore::~TagStore() {
    try {
        close();
    } catch (...) {
        // The uncompacted log is still complete; nothing is lost.
    }
}

void TagStore::replay() {
    std::ifstream in(path_, std::ios::binary);
    if (!in) {
        if (std::filesystem::exists(path_)) throw IoError("cannot read tag log " + path_.string());
        return;
    }
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        bool torn_tail = in.eof();
        Json r;
        try {
            r = Json::parse(text);
        } catch (const Json::parse_error& e) {
            if (torn_tail) break;  // interrupted final write
            throw ParseError(line, std::string("tag log: ") + e.what());
        }
        try {
            std::string op = r.at("op").get<std::string>();
            auto level = level_from_string(r.at("level").get<std::string>());
            if (!level) throw ParseError(line, "tag log: bad level");
            TagKey key{*level, r.at("id").get<std::string>()};
            if (op == "remove") {
                cache_.erase(key);
            } else if (op == "put") {
                std::vector<Tag> tags;
                for (const auto& t : r.at("tags")) tags.push_back(Tag::from_json(t));
                auto& slot = cache_[key];
                if (!r.value("append", false)) slot.clear();
                slot.insert(slot.end(), tags.begin(), tags.end());
                if (slot.empty()) cache_.erase(key);
            } else {
                throw ParseError(line, "tag log: unknown op '" + op + "'");
            }
        } catch (const Json::exception& e) {
            throw ParseError(line, std::string("tag log: ") + e.what());
        } catch (const ValidationError& e) {
            throw ParseError(line, std::string("tag log: ") + e.what());
        }
    }
}

void TagStore::ensure_open() {
    if (log_.is_open()) return;
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    log_.open(path_, std::ios::binary | std::ios::app);
    if (!log_) throw IoError("cannot open tag log " + path_.string() + " for writing");
}

void TagStore::append_record(const Json& record) {
    ensure_open();
    log_ << record.dump() << '\n';
    log_.flush();
    if (!log_) throw IoError("write to tag log " + path_.string() + " failed");
}

std::size_t TagStore::put_tags(const TagKey& key, const std::vector<Tag>& tags, bool append) {
    if (tags.empty()) throw ValidationError("tags", "tag list must not be empty");
    std::unique_lock lock(mutex_);
    append_record(record_for("put", key, append, tags));
    auto& slot = cache_[key];
    if (!append) slot.clear();
    slot.insert(slot.end(), tags.begin(), tags.end());
    return slot.size();
}

std::size_t TagStore::remove_tags(const TagKey& key) {
    std::unique_lock lock(mutex_);
    auto it = cache_.find(key);
    std::size_t removed = it == cache_.end() ? 0 : it->second.size();
    append_record(record_for("remove", key, false, {}));
    if (it != cache_.end()) cache_.erase(it);
    return removed;
}

std::vector<Tag> TagStore::tags_at(const TagKey& key) const {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(key);
    return it == cache_.end() ? std::vector<Tag>{} : it->second;
}

std::vector<TaggedEntry> TagStore::get_tags(const TagKey& key, bool include_lower, const Chain* chain) const {
    if (include_lower && key.level != Level::address && chain == nullptr)
        throw std::invalid_argument("get_tags: lower levels of a " + std::string(to_string(key.level)) +
                                    " need a chain");
    std::shared_lock lock(mutex_);
    std::vector<TaggedEntry> out;
    std::set<TagKey> seen;
    auto emit = [&](const TagKey& k) {
        if (!seen.insert(k).second) return;
        auto it = cache_.find(k);
        if (it == cache_.end()) return;
        for (std::size_t i = 0; i < it->second.size(); ++i) out.push_back({k, i, it->second[i]});
    };
    auto emit_tx = [&](const Transaction& tx) {
        emit(TagKey{Level::transaction, tx.hash});
        for (const auto& in : tx.inputs) emit(TagKey{Level::address, chain->address(in.address)});
        for (const auto& o : tx.outputs) emit(TagKey{Level::address, chain->address(o.address)});
    };

    emit(key);
    if (!include_lower) return out;
    if (key.level == Level::transaction) {
        if (auto id = chain->find_tx(key.id)) {
            const auto& tx = chain->tx(*id);
            for (const auto& in : tx.inputs) emit(TagKey{Level::address, chain->address(in.address)});
            for (const auto& o : tx.outputs) emit(TagKey{Level::address, chain->address(o.address)});
        }
    } else if (key.level == Level::block) {
        std::uint64_t h = 0;
        auto [p, ec] = std::from_chars(key.id.data(), key.id.data() + key.id.size(), h);
        if (ec == std::errc{} && h <= UINT32_MAX) {
            if (const Block* b = chain->find_block(static_cast<std::uint32_t>(h)))
                for (const auto& tx : chain->block_transactions(*b)) emit_tx(tx);
        }
    }
    return out;
}

std::vector<TaggedEntry> TagStore::scan_tags(const std::optional<std::set<TagType>>& types,
                                             const std::optional<std::string>& substring) const {
    std::optional<std::string> needle;
    if (substring) needle = ascii_lower(*substring);
    std::shared_lock lock(mutex_);
    std::vector<TaggedEntry> out;
    for (const auto& [key, tags] : cache_) {
        for (std::size_t i = 0; i < tags.size(); ++i) {
            const Tag& t = tags[i];
            if (types && !types->contains(t.type)) continue;
            if (needle && !json_contains_text(t.info, *needle)) continue;
            out.push_back({key, i, t});
        }
    }
    return out;
}

void TagStore::for_each(Level level, const std::function<void(const TagKey&, const std::vector<Tag>&)>& fn) const {
    std::shared_lock lock(mutex_);
    for (const auto& [key, tags] : cache_)
        if (key.level == level) fn(key, tags);
}

std::size_t TagStore::key_count() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
}

void TagStore::close() {
    std::unique_lock lock(mutex_);
    if (log_.is_open()) log_.close();
    if (cache_.empty() && !std::filesystem::exists(path_)) return;
    auto tmp = path_;
    tmp += ".compact";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        for (const auto& [key, tags] : cache_) out << record_for("put", key, false, tags).dump() << '\n';
        out.flush();
        if (!out) throw IoError("compaction of " + path_.string() + " failed");
    }
    std::filesystem::rename(tmp, path_);
}

}  // namespace chaintag
