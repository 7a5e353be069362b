#include "chaintag/chain.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <limits>

#include "chaintag/error.hpp"
#include "json.hpp"

namespace chaintag {

using nlohmann::json;

std::string_view to_string(Side side) {
    switch (side) {
        case Side::inputs: return "inputs";
        case Side::outputs: return "outputs";
        case Side::both: return "both";
    }
    return "both";
}

Side side_from_string(std::string_view text) {
    if (text == "inputs") return Side::inputs;
    if (text == "outputs") return Side::outputs;
    if (text == "both") return Side::both;
    throw ValidationError("source", "expected inputs|outputs|both, got '" + std::string(text) + "'");
}

Satoshi Transaction::input_total() const noexcept {
    Satoshi s = 0;
    for (const auto& in : inputs) s += in.value;
    return s;
}

Satoshi Transaction::output_total() const noexcept {
    Satoshi s = 0;
    for (const auto& out : outputs) s += out.value;
    return s;
}

std::string normalize_hash(std::string_view hash) {
    std::string out(hash);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

namespace {

bool is_hex(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
    });
}

const json& require(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(line, std::string("missing key '") + key + "'");
    return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
    const json& v = require(obj, key, line);
    if (!v.is_string()) throw ParseError(line, std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

std::int64_t require_int(const json& obj, const char* key, std::size_t line) {
    const json& v = require(obj, key, line);
    if (!v.is_number_integer()) throw ParseError(line, std::string("'") + key + "' must be an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
        throw ParseError(line, std::string("'") + key + "' out of range");
    return v.get<std::int64_t>();
}

bool add_checked(Satoshi& acc, Satoshi v) { return !__builtin_add_overflow(acc, v, &acc); }

}  // namespace

class Chain::Builder {
public:
    Builder(Chain& chain, const IngestOptions& options) : chain_(chain), options_(options) {}

    void add_line(std::string_view text, std::size_t line) {
        json record;
        try {
            record = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ParseError(line, std::string("malformed JSON: ") + e.what());
        }
        if (!record.is_object()) throw ParseError(line, "block record must be a JSON object");

        std::int64_t height = require_int(record, "height", line);
        if (height != static_cast<std::int64_t>(chain_.blocks_.size()))
            throw ParseError(line, "non-contiguous height " + std::to_string(height) + ", expected " +
                                       std::to_string(chain_.blocks_.size()));
        Block block;
        block.height = static_cast<std::uint32_t>(height);
        block.hash = require_string(record, "hash", line);
        if (!is_hex(block.hash)) throw ParseError(line, "block hash must be hex");
        block.hash = normalize_hash(block.hash);
        std::string time_text = require_string(record, "time", line);
        auto time = parse_iso_utc(time_text);
        if (!time) throw ParseError(line, "bad time '" + time_text + "', expected YYYY-MM-DDTHH:MM:SSZ");
        block.time = *time;
        if (!chain_.blocks_.empty() && block.time < chain_.blocks_.back().time)
            chain_.warnings_.push_back("line " + std::to_string(line) + ": block " + std::to_string(height) +
                                       " time precedes block " + std::to_string(height - 1));

        const json& txes = require(record, "txes", line);
        if (!txes.is_array()) throw ParseError(line, "'txes' must be an array");
        block.first_tx = static_cast<TxId>(chain_.txs_.size());
        block.tx_count = static_cast<std::uint32_t>(txes.size());

        std::uint32_t position = 0;
        for (const json& t : txes) {
            if (!t.is_object()) throw ParseError(line, "transaction must be a JSON object");
            add_tx(t, block, position++, line);
        }
        chain_.blocks_.push_back(std::move(block));
    }

private:
    void add_tx(const json& t, const Block& block, std::uint32_t position, std::size_t line) {
        Transaction tx;
        tx.hash = require_string(t, "hash", line);
        if (!is_hex(tx.hash)) throw ParseError(line, "transaction hash must be hex");
        tx.hash = normalize_hash(tx.hash);
        tx.time = block.time;
        tx.height = block.height;
        tx.position = position;
        if (chain_.tx_index_.contains(tx.hash)) throw ParseError(line, "duplicate transaction hash " + tx.hash);

        read_side(t, "inputs", tx.inputs, line, true);
        read_side(t, "outputs", tx.outputs, line, false);
        if (tx.outputs.empty()) throw ParseError(line, "transaction " + tx.hash + " has no outputs");

        Satoshi in_total = 0, out_total = 0;
        for (const auto& io : tx.inputs)
            if (!add_checked(in_total, io.value)) throw ParseError(line, "input total overflows");
        for (const auto& io : tx.outputs)
            if (!add_checked(out_total, io.value)) throw ParseError(line, "output total overflows");
        if (!tx.inputs.empty() && out_total > in_total)
            throw ParseError(line, "transaction " + tx.hash + " spends more than its inputs");

        TxId id = static_cast<TxId>(chain_.txs_.size());
        index_side(tx.inputs, chain_.addr_inputs_, id);
        index_side(tx.outputs, chain_.addr_outputs_, id);
        chain_.tx_index_.emplace(tx.hash, id);
        chain_.txs_.push_back(std::move(tx));
    }

    void read_side(const json& t, const char* key, std::vector<TxIo>& out, std::size_t line, bool is_input) {
        const json& list = require(t, key, line);
        if (!list.is_array()) throw ParseError(line, std::string("'") + key + "' must be an array");
        out.reserve(list.size());
        for (const json& io : list) {
            if (!io.is_object()) throw ParseError(line, std::string(key) + " entry must be an object");
            std::string addr = require_string(io, "address", line);
            if (!options_.profile->is_valid(addr))
                throw ParseError(line, "invalid " + options_.profile->name + " address '" + addr + "'");
            Satoshi value = require_int(io, "value", line);
            if (value < 0) throw ParseError(line, "negative value " + std::to_string(value));
            if (is_input && value == 0) throw ParseError(line, "input value must be positive");
            out.push_back({intern(addr), value});
        }
    }

    AddressId intern(const std::string& addr) {
        auto [it, inserted] = chain_.address_index_.try_emplace(addr, static_cast<AddressId>(chain_.addresses_.size()));
        if (inserted) {
            chain_.addresses_.push_back(addr);
            chain_.addr_inputs_.emplace_back();
            chain_.addr_outputs_.emplace_back();
        }
        return it->second;
    }

    static void index_side(const std::vector<TxIo>& ios, std::vector<std::vector<TxId>>& index, TxId id) {
        for (const auto& io : ios) {
            auto& list = index[io.address];
            if (list.empty() || list.back() != id) list.push_back(id);
        }
    }

    Chain& chain_;
    const IngestOptions& options_;
};

Chain Chain::ingest(std::istream& in, const IngestOptions& options) {
    Chain chain;
    Builder builder(chain, options);
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.find_first_not_of(" \t") == std::string::npos) continue;
        builder.add_line(text, line);
    }
    if (in.bad()) throw IoError("read failure after line " + std::to_string(line));
    return chain;
}

Chain Chain::ingest(const std::filesystem::path& path, const IngestOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open chain file " + path.string());
    return ingest(in, options);
}

std::optional<AddressId> Chain::find_address(std::string_view text) const {
    auto it = address_index_.find(text);
    if (it == address_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<TxId> Chain::find_tx(std::string_view hash) const {
    auto it = tx_index_.find(normalize_hash(hash));
    if (it == tx_index_.end()) return std::nullopt;
    return it->second;
}

const Block* Chain::find_block(std::uint32_t height) const {
    return height < blocks_.size() ? &blocks_[height] : nullptr;
}

std::span<const Transaction> Chain::block_transactions(const Block& block) const {
    return std::span<const Transaction>(txs_).subspan(block.first_tx, block.tx_count);
}

const Transaction& Chain::get_transaction(std::string_view hash) const {
    auto id = find_tx(hash);
    if (!id) throw NotFound("unknown transaction " + std::string(hash));
    return txs_[*id];
}

std::vector<TxId> Chain::transactions_of(std::string_view address, Side side) const {
    auto id = find_address(address);
    if (!id) return {};
    return transactions_of(*id, side);
}

std::vector<TxId> Chain::transactions_of(AddressId address, Side side) const {
    const auto& ins = addr_inputs_.at(address);
    const auto& outs = addr_outputs_.at(address);
    switch (side) {
        case Side::inputs: return ins;
        case Side::outputs: return outs;
        case Side::both: break;
    }
    std::vector<TxId> merged;
    merged.reserve(ins.size() + outs.size());
    std::set_union(ins.begin(), ins.end(), outs.begin(), outs.end(), std::back_inserter(merged));
    return merged;
}

}  // namespace chaintag
