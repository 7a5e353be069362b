#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chaintag/chain.hpp"
#include "chaintag/clustering.hpp"
#include "chaintag/tags.hpp"
#include "chaintag/value.hpp"

namespace chaintag {

// ---------------------------------------------------------------------------------------------
// Query model

// Which part of a result row a field reads. At transaction level side 0 is the inputs and side 1
// the outputs; at address and block level side 0 is the row's own tag list.
enum class Scope { base, entity, tag };

enum class Attr {
    tx_hash,       // self.hash
    tx_list,       // self.txes
    time,          // time
    address_self,  // self.address (address level)
    block_height,  // self.height
    block_hash,    // self.hash (block level)
    io_address,    // input.address / output.address
    io_value,      // input.value / output.value
    tag_whole,     // ...tag
    tag_type,
    tag_source,
    tag_id,
    tag_info,      // ...tag.info[.k...]
};

struct FieldRef {
    Scope scope = Scope::base;
    int side = 0;
    Attr attr = Attr::tx_hash;
    std::vector<std::string> info_path;
    std::string text;  // as written

    bool is_time() const noexcept { return attr == Attr::time; }
    friend bool operator==(const FieldRef& a, const FieldRef& b) {
        return a.scope == b.scope && a.side == b.side && a.attr == b.attr && a.info_path == b.info_path;
    }
};

enum class TestOp { eq, like, in, gt, gte, lt, lte };

struct Predicate {
    enum class Kind { all, any, test };
    Kind kind = Kind::all;  // an empty 'all' matches everything
    std::vector<Predicate> children;
    FieldRef field;
    TestOp op = TestOp::eq;
    Json operand;                           // eq/in/ordering operand(s) as written
    std::vector<TimeRange> time_operands;   // pre-parsed for time fields
    std::string like_lower;                 // pre-lowered $like needle
};

enum class AggFn { count, sum, min, max, date_diff };

struct Aggregate {
    AggFn fn = AggFn::count;
    FieldRef arg;
    // date_diff(later, earlier): both are min/max aggregates of a time field.
    std::shared_ptr<Aggregate> later;
    std::shared_ptr<Aggregate> earlier;
};

struct SelectItem {
    std::string expr;  // text as written, without the alias
    std::string name;  // output column name
    bool exported = false;  // "as @name"
    std::optional<FieldRef> field;
    std::optional<Aggregate> aggregate;
};

enum class CompareOp { ge, gt, le, lt, eq, ne };

struct Having {
    Aggregate aggregate;
    CompareOp op = CompareOp::ge;
    Value threshold;
    std::string text;
};

struct Query {
    Level level = Level::transaction;
    std::vector<SelectItem> select;
    Predicate where;
    std::vector<FieldRef> group_by;
    std::optional<Having> having;
    std::optional<ClusteringConfig> clustering;
};

// Throws ValidationError naming the offending key path.
Query parse_query(const Json& spec);
FieldRef parse_field_path(Level level, std::string_view path, const std::string& where = "select");
Aggregate parse_aggregate(Level level, std::string_view text, const std::string& where = "select");

// JSON text, or the equivalent Python dict literal (single quotes, True/False/None).
Json parse_query_text(std::string_view text);

// Evaluates "10.0 * 10**7"-style constants: numbers, + - * ** and parentheses. Integer
// arithmetic stays exact; any float operand makes the result a double.
Value evaluate_constant(std::string_view expr);

// ---------------------------------------------------------------------------------------------
// Results

class ResultSet {
public:
    struct Column {
        std::string name;
        bool exported = false;
    };

    ResultSet() = default;
    explicit ResultSet(std::vector<Column> columns) : columns_(std::move(columns)) {}

    const std::vector<Column>& columns() const noexcept { return columns_; }
    const std::vector<std::vector<Value>>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }

    void add_row(std::vector<Value> row);
    // Accepts "name" or "@name".
    std::optional<std::size_t> column_index(std::string_view name) const;
    const Value& at(std::size_t row, std::string_view column) const;

    // Keeps the named columns in the given order.
    ResultSet project(const std::vector<std::string>& names) const;

    Json to_json() const;         // array of row objects
    std::string to_csv() const;   // RFC 4180, header row, CRLF line ends
    std::string to_table() const; // aligned text

private:
    std::vector<Column> columns_;
    std::vector<std::vector<Value>> rows_;
};

// Left join on equality of the `on` column. Unmatched right columns are null. Throws
// ValidationError when `on` is missing on either side, right keys repeat, or non-key column
// names collide.
ResultSet join(const ResultSet& left, const ResultSet& right, std::string_view on);

// ---------------------------------------------------------------------------------------------
// Execution

// The entities of one matched transaction that some satisfying row bound, per side.
struct TxMatch {
    TxId tx;
    std::vector<std::uint32_t> inputs;   // indices into tx.inputs, ascending
    std::vector<std::uint32_t> outputs;  // indices into tx.outputs, ascending
    std::vector<std::vector<Tag>> input_tags;   // bound tags per entry of `inputs`
    std::vector<std::vector<Tag>> output_tags;  // bound tags per entry of `outputs`
};

class QueryEngine {
public:
    QueryEngine(const Chain& chain, const TagStore& store);
    ~QueryEngine();

    ResultSet execute(const Query& query);
    ResultSet execute(const Json& spec) { return execute(parse_query(spec)); }

    // Transaction-level matching without grouping. Each side is bound per entity; `bind_tags`
    // also enumerates tags so input_tags/output_tags are filled.
    std::vector<TxMatch> match_transactions(const Predicate& where, const std::optional<ClusteringConfig>& clustering,
                                            bool bind_tags);

    ClusteringCache& clusterings() noexcept { return clusterings_; }
    const Chain& chain() const noexcept { return chain_; }
    const TagStore& store() const noexcept { return store_; }

private:
    const Chain& chain_;
    const TagStore& store_;
    ClusteringCache clusterings_;
};

ResultSet execute(const Chain& chain, const TagStore& store, const Query& query);

// Per-service summary: name, volume, incoming, outgoing, first_tx, last_tx, num_days.
// incoming sums the values paid to the tagged addresses; outgoing sums the tagged inputs.
ResultSet balance_sheet(const Chain& chain, const TagStore& store, std::string_view service_source);
ResultSet balance_sheet(QueryEngine& engine, std::string_view service_source);

Json balance_sheet_incoming_query(std::string_view service_source);
Json balance_sheet_outgoing_query(std::string_view service_source);

}  // namespace chaintag
