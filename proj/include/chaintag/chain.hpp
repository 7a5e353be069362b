#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "chaintag/address.hpp"
#include "chaintag/time_util.hpp"

namespace chaintag {

using Satoshi = std::int64_t;
inline constexpr Satoshi kSatoshiPerBtc = 100'000'000;

using AddressId = std::uint32_t;
using TxId = std::uint32_t;

enum class Side { inputs, outputs, both };

std::string_view to_string(Side side);
Side side_from_string(std::string_view text);

struct TxIo {
    AddressId address;
    Satoshi value;
};

struct Transaction {
    std::string hash;  // lowercase hex
    UnixTime time = 0;
    std::uint32_t height = 0;
    std::uint32_t position = 0;  // index within the block
    std::vector<TxIo> inputs;
    std::vector<TxIo> outputs;

    bool is_coinbase() const noexcept { return inputs.empty(); }
    Satoshi input_total() const noexcept;
    Satoshi output_total() const noexcept;
    Satoshi fee() const noexcept { return is_coinbase() ? 0 : input_total() - output_total(); }
};

struct Block {
    std::uint32_t height = 0;
    std::string hash;
    UnixTime time = 0;
    TxId first_tx = 0;  // transactions [first_tx, first_tx + tx_count)
    std::uint32_t tx_count = 0;
};

struct IngestOptions {
    const CurrencyProfile* profile = &CurrencyProfile::bitcoin();
};

// Immutable, indexed chain. Transactions are stored in chain order, so TxId order equals
// (block height, position in block) order.
class Chain {
public:
    static Chain ingest(const std::filesystem::path& path, const IngestOptions& options = {});
    static Chain ingest(std::istream& in, const IngestOptions& options = {});

    std::span<const Block> blocks() const noexcept { return blocks_; }
    std::span<const Transaction> transactions() const noexcept { return txs_; }
    std::size_t address_count() const noexcept { return addresses_.size(); }

    const Transaction& tx(TxId id) const { return txs_.at(id); }
    const std::string& address(AddressId id) const { return addresses_.at(id); }
    std::optional<AddressId> find_address(std::string_view text) const;
    std::optional<TxId> find_tx(std::string_view hash) const;
    const Block* find_block(std::uint32_t height) const;
    std::span<const Transaction> block_transactions(const Block& block) const;

    // Case-insensitive on the hash. Throws NotFound.
    const Transaction& get_transaction(std::string_view hash) const;

    // Chain-ordered, each transaction at most once.
    std::vector<TxId> transactions_of(std::string_view address, Side side) const;
    std::vector<TxId> transactions_of(AddressId address, Side side) const;
    std::span<const TxId> input_txs(AddressId address) const { return addr_inputs_.at(address); }
    std::span<const TxId> output_txs(AddressId address) const { return addr_outputs_.at(address); }

    // Non-fatal findings from ingestion, e.g. block time going backwards.
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    struct StringHash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
    };
    using StringIndex = std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>>;

    class Builder;

    std::vector<Block> blocks_;
    std::vector<Transaction> txs_;
    std::vector<std::string> addresses_;
    StringIndex address_index_;
    StringIndex tx_index_;
    std::vector<std::vector<TxId>> addr_inputs_;
    std::vector<std::vector<TxId>> addr_outputs_;
    std::vector<std::string> warnings_;
};

std::string normalize_hash(std::string_view hash);

}  // namespace chaintag
