#include <algorithm>
#include <array>
#include <charconv>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "chaintag/error.hpp"
#include "chaintag/query.hpp"

namespace chaintag {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

struct TagRef {
    std::uint32_t owner = kNone;  // address id (or 0 for block tags)
    std::uint32_t index = 0;
    const Tag* tag = nullptr;
};

// One entity on one side of a row, with at most one of its (effective) tags.
struct Item {
    std::uint32_t entity = kNone;
    TagRef tag;
};

struct Row {
    std::uint32_t base = 0;  // tx id, universe address index or block index
    const Transaction* tx = nullptr;
    std::array<Item, 2> items;
};

const Json* resolve(const Json& info, const std::vector<std::string>& path) {
    const Json* j = &info;
    for (const auto& k : path) {
        if (!j->is_object()) return nullptr;
        auto it = j->find(k);
        if (it == j->end()) return nullptr;
        j = &*it;
    }
    return j;
}

int cmp_json_number(const Json& a, const Json& b) {
    if (a.is_number_integer() && b.is_number_integer()) {
        if (a.is_number_unsigned() || b.is_number_unsigned()) {
            long double x = a.get<long double>(), y = b.get<long double>();
            return x < y ? -1 : x > y ? 1 : 0;
        }
        auto x = a.get<std::int64_t>(), y = b.get<std::int64_t>();
        return x < y ? -1 : x > y ? 1 : 0;
    }
    long double x = a.get<long double>(), y = b.get<long double>();
    return x < y ? -1 : x > y ? 1 : 0;
}

bool ordered(TestOp op, int c) {
    switch (op) {
        case TestOp::gt: return c > 0;
        case TestOp::gte: return c >= 0;
        case TestOp::lt: return c < 0;
        case TestOp::lte: return c <= 0;
        default: return false;
    }
}

int cmp_int_json(std::int64_t v, const Json& operand) {
    if (operand.is_number_integer() && !operand.is_number_unsigned()) {
        auto o = operand.get<std::int64_t>();
        return v < o ? -1 : v > o ? 1 : 0;
    }
    long double x = static_cast<long double>(v), y = operand.get<long double>();
    return x < y ? -1 : x > y ? 1 : 0;
}

bool json_test(const Predicate& p, const Json& j) {
    switch (p.op) {
        case TestOp::eq: return j == p.operand;
        case TestOp::like: return json_contains_text(j, p.like_lower);
        case TestOp::in:
            return std::any_of(p.operand.begin(), p.operand.end(), [&](const Json& o) { return j == o; });
        default:
            if (j.is_number() && p.operand.is_number()) return ordered(p.op, cmp_json_number(j, p.operand));
            if (j.is_string() && p.operand.is_string())
                return ordered(p.op, j.get_ref<const std::string&>().compare(p.operand.get_ref<const std::string&>()));
            return false;
    }
}

bool time_test(const Predicate& p, UnixTime t) {
    switch (p.op) {
        case TestOp::eq:
        case TestOp::in:
            return std::any_of(p.time_operands.begin(), p.time_operands.end(),
                               [&](const TimeRange& r) { return t >= r.begin && t < r.end; });
        case TestOp::gt: return t >= p.time_operands.front().end;
        case TestOp::gte: return t >= p.time_operands.front().begin;
        case TestOp::lt: return t < p.time_operands.front().begin;
        case TestOp::lte: return t < p.time_operands.front().end;
        default: return false;
    }
}

bool int_test(const Predicate& p, std::int64_t v) {
    switch (p.op) {
        case TestOp::eq: return cmp_int_json(v, p.operand) == 0;
        case TestOp::in:
            return std::any_of(p.operand.begin(), p.operand.end(),
                               [&](const Json& o) { return cmp_int_json(v, o) == 0; });
        case TestOp::like: return false;
        default: return ordered(p.op, cmp_int_json(v, p.operand));
    }
}

bool text_test(const Predicate& p, std::string_view s) {
    switch (p.op) {
        case TestOp::eq: return p.operand.is_string() && s == p.operand.get_ref<const std::string&>();
        case TestOp::in:
            return std::any_of(p.operand.begin(), p.operand.end(), [&](const Json& o) {
                return o.is_string() && s == o.get_ref<const std::string&>();
            });
        case TestOp::like: return ascii_lower(s).find(p.like_lower) != std::string::npos;
        default:
            if (!p.operand.is_string()) return false;
            return ordered(p.op, s.compare(p.operand.get_ref<const std::string&>()));
    }
}

void flatten_all(const Predicate& p, std::vector<const Predicate*>& out) {
    if (p.kind == Predicate::Kind::all) {
        for (const auto& c : p.children) flatten_all(c, out);
    } else {
        out.push_back(&p);
    }
}

// Bit 0/1: the predicate reads side 0/1; bits 2/3: it reads tags of side 0/1.
unsigned touches(const FieldRef& f) {
    if (f.scope == Scope::base) return 0;
    unsigned m = 1u << f.side;
    if (f.scope == Scope::tag) m |= 4u << f.side;
    return m;
}

unsigned touches(const Predicate& p) {
    if (p.kind == Predicate::Kind::test) return touches(p.field);
    unsigned m = 0;
    for (const auto& c : p.children) m |= touches(c);
    return m;
}

unsigned touches(const Aggregate& a) {
    unsigned m = touches(a.arg);
    if (a.later) m |= touches(*a.later);
    if (a.earlier) m |= touches(*a.earlier);
    return m;
}

using ScopeKey = std::array<std::uint32_t, 5>;

struct ScopeHash {
    std::size_t operator()(const ScopeKey& k) const noexcept {
        std::size_t h = 0xcbf29ce484222325ull;
        for (auto v : k) h = (h ^ v) * 0x100000001b3ull;
        return h;
    }
};

struct AggState {
    std::unordered_set<ScopeKey, ScopeHash> seen;
    std::int64_t count = 0;
    __int128 isum = 0;
    double dsum = 0;
    bool any_double = false;
    Value min, max;

    void add(AggFn fn, const Value& v) {
        if (v.is_null()) return;
        ++count;
        if (fn == AggFn::sum) {
            if (auto i = v.get_if<std::int64_t>()) {
                isum += *i;
            } else if (auto d = v.get_if<double>()) {
                dsum += *d;
                any_double = true;
            }
        } else if (fn == AggFn::min) {
            if (min.is_null() || v < min) min = v;
        } else if (fn == AggFn::max) {
            if (max.is_null() || v > max) max = v;
        }
    }

    Value result(AggFn fn) const {
        switch (fn) {
            case AggFn::count: return Value{count};
            case AggFn::sum:
                if (any_double) return Value{static_cast<double>(isum) + dsum};
                if (isum > std::numeric_limits<std::int64_t>::max() || isum < std::numeric_limits<std::int64_t>::min())
                    return Value{static_cast<double>(isum)};
                return Value{static_cast<std::int64_t>(isum)};
            case AggFn::min: return min;
            case AggFn::max: return max;
            default: return {};
        }
    }
};

bool compare_having(CompareOp op, const Value& lhs, const Value& rhs) {
    if (lhs.is_null() || rhs.is_null()) return false;
    auto c = compare(lhs, rhs);
    switch (op) {
        case CompareOp::ge: return c >= 0;
        case CompareOp::gt: return c > 0;
        case CompareOp::le: return c <= 0;
        case CompareOp::lt: return c < 0;
        case CompareOp::eq: return c == 0;
        case CompareOp::ne: return c != 0;
    }
    return false;
}

// Read snapshot of the tag store joined to the chain, plus the clustering in effect.
struct Snapshot {
    const Chain& chain;
    Level level = Level::transaction;
    std::shared_ptr<const Clustering> clustering;

    std::vector<std::vector<Tag>> tags;                     // by address id (chain or extra)
    std::vector<std::string> extra_addresses;               // tagged but absent from the chain
    std::unordered_map<std::uint32_t, std::vector<TagRef>> own_refs;  // tagged addresses only
    mutable std::vector<std::optional<std::vector<TagRef>>> cluster_refs;
    std::map<std::uint32_t, std::vector<Tag>> block_tags;
    std::map<std::uint32_t, std::vector<TagRef>> block_refs;

    Snapshot(const Chain& c, const TagStore& store, Level lvl, std::shared_ptr<const Clustering> cl)
        : chain(c), level(lvl), clustering(std::move(cl)) {
        tags.resize(chain.address_count());
        store.for_each(Level::address, [&](const TagKey& key, const std::vector<Tag>& list) {
            if (list.empty()) return;
            if (auto id = chain.find_address(key.id)) {
                tags[*id] = list;
            } else {
                extra_addresses.push_back(key.id);
                tags.push_back(list);
            }
        });
        for (std::uint32_t a = 0; a < tags.size(); ++a) {
            if (tags[a].empty()) continue;
            auto& refs = own_refs[a];
            for (std::uint32_t i = 0; i < tags[a].size(); ++i) refs.push_back({a, i, &tags[a][i]});
        }
        if (level == Level::block) {
            store.for_each(Level::block, [&](const TagKey& key, const std::vector<Tag>& list) {
                std::uint32_t h = 0;
                auto [p, ec] = std::from_chars(key.id.data(), key.id.data() + key.id.size(), h);
                if (ec == std::errc{} && p == key.id.data() + key.id.size() && !list.empty()) block_tags[h] = list;
            });
            for (auto& [h, list] : block_tags)
                for (std::uint32_t i = 0; i < list.size(); ++i) block_refs[h].push_back({0, i, &list[i]});
        }
        if (clustering) cluster_refs.resize(clustering->size());
    }

    std::size_t universe_size() const { return chain.address_count() + extra_addresses.size(); }

    const std::string& address_text(std::uint32_t id) const {
        return id < chain.address_count() ? chain.address(id) : extra_addresses[id - chain.address_count()];
    }

    std::span<const TagRef> own(std::uint32_t address) const {
        auto it = own_refs.find(address);
        return it == own_refs.end() ? std::span<const TagRef>{} : std::span<const TagRef>(it->second);
    }

    // Tags of the address, or of its whole cluster when expansion applies.
    std::span<const TagRef> effective(std::uint32_t address, bool expand) const {
        if (!expand || !clustering || address >= chain.address_count()) return own(address);
        auto cid = clustering->cluster_id(address);
        if (!cid) return own(address);
        auto& slot = cluster_refs[*cid];
        if (!slot) {
            std::vector<TagRef> refs;
            for (AddressId member : clustering->cluster_of(address)) {
                auto o = own(member);
                refs.insert(refs.end(), o.begin(), o.end());
            }
            slot = std::move(refs);
        }
        return *slot;
    }
};

class Executor {
public:
    Executor(const Snapshot& snap, Level level) : snap_(snap), chain_(snap.chain), level_(level) {}

    Value value(const FieldRef& f, const Row& r) const {
        switch (f.attr) {
            case Attr::tx_hash: return r.tx->hash;
            case Attr::tx_list: return TxList{{r.tx->hash}};
            case Attr::time:
                if (level_ == Level::block) return Timestamp{chain_.blocks()[r.base].time};
                return Timestamp{r.tx->time};
            case Attr::address_self: return snap_.address_text(r.base);
            case Attr::block_height: return static_cast<std::int64_t>(chain_.blocks()[r.base].height);
            case Attr::block_hash: return chain_.blocks()[r.base].hash;
            case Attr::io_address: {
                const TxIo* io = io_of(f.side, r);
                return io ? Value{chain_.address(io->address)} : Value{};
            }
            case Attr::io_value: {
                const TxIo* io = io_of(f.side, r);
                return io ? Value{io->value} : Value{};
            }
            default: break;
        }
        const Tag* tag = r.items[f.side].tag.tag;
        if (!tag) return {};
        switch (f.attr) {
            case Attr::tag_type: return std::string(to_string(tag->type));
            case Attr::tag_source: return tag->source;
            case Attr::tag_id: return tag->id();
            case Attr::tag_whole: return Value::from_json(tag->to_json());
            case Attr::tag_info: {
                const Json* j = resolve(tag->info, f.info_path);
                return j ? Value::from_json(*j) : Value{};
            }
            default: return {};
        }
    }

    bool eval(const Predicate& p, const Row& r) const {
        switch (p.kind) {
            case Predicate::Kind::all:
                return std::all_of(p.children.begin(), p.children.end(), [&](const Predicate& c) { return eval(c, r); });
            case Predicate::Kind::any:
                return std::any_of(p.children.begin(), p.children.end(), [&](const Predicate& c) { return eval(c, r); });
            case Predicate::Kind::test: return test(p, r);
        }
        return false;
    }

    ScopeKey scope_key(const FieldRef& f, const Row& r) const {
        if (f.scope == Scope::base) return {r.base, kNone, kNone, kNone, kNone};
        const Item& it = r.items[f.side];
        if (f.scope == Scope::entity) return {r.base, static_cast<std::uint32_t>(f.side), it.entity, kNone, kNone};
        return {r.base, static_cast<std::uint32_t>(f.side), it.entity, it.tag.owner, it.tag.index};
    }

private:
    const TxIo* io_of(int side, const Row& r) const {
        std::uint32_t e = r.items[side].entity;
        if (e == kNone || !r.tx) return nullptr;
        return side == 0 ? &r.tx->inputs[e] : &r.tx->outputs[e];
    }

    bool test(const Predicate& p, const Row& r) const {
        const FieldRef& f = p.field;
        switch (f.attr) {
            case Attr::time:
                return time_test(p, level_ == Level::block ? chain_.blocks()[r.base].time : r.tx->time);
            case Attr::io_value: {
                const TxIo* io = io_of(f.side, r);
                return io && int_test(p, io->value);
            }
            case Attr::block_height: return int_test(p, chain_.blocks()[r.base].height);
            case Attr::tx_hash: return text_test(p, r.tx->hash);
            case Attr::block_hash: return text_test(p, chain_.blocks()[r.base].hash);
            case Attr::address_self: return text_test(p, snap_.address_text(r.base));
            case Attr::io_address: {
                const TxIo* io = io_of(f.side, r);
                return io && text_test(p, chain_.address(io->address));
            }
            default: break;
        }
        const Tag* tag = r.items[f.side].tag.tag;
        if (!tag) return false;
        switch (f.attr) {
            case Attr::tag_type: return text_test(p, to_string(tag->type));
            case Attr::tag_source: return text_test(p, tag->source);
            case Attr::tag_id: return text_test(p, tag->id());
            case Attr::tag_info: {
                const Json* j = resolve(tag->info, f.info_path);
                return j && json_test(p, *j);
            }
            case Attr::tag_whole: return json_test(p, tag->to_json());
            default: return false;
        }
    }

    const Snapshot& snap_;
    const Chain& chain_;
    Level level_;
};

// Splits a where tree into conjuncts by the sides they read and enumerates satisfying rows.
class RowEnumerator {
public:
    RowEnumerator(const Executor& ex, const Snapshot& snap, const Predicate& where, unsigned used,
                  Level level, const std::optional<ClusteringConfig>& clustering)
        : ex_(ex), snap_(snap), level_(level), used_(used | touches(where)) {
        std::vector<const Predicate*> conj;
        flatten_all(where, conj);
        for (const Predicate* p : conj) {
            unsigned sides = touches(*p) & 3u;
            if (sides == 0) base_.push_back(p);
            else if (sides == 1) side_[0].push_back(p);
            else if (sides == 2) side_[1].push_back(p);
            else cross_.push_back(p);
        }
        if (clustering) {
            expand_[0] = level == Level::address || clustering->covers(Side::inputs);
            expand_[1] = clustering->covers(Side::outputs);
        }
    }

    template <typename Emit>
    void run(Emit&& emit) {
        const Chain& chain = snap_.chain;
        switch (level_) {
            case Level::transaction:
                for (TxId t = 0; t < chain.transactions().size(); ++t) {
                    Row r;
                    r.base = t;
                    r.tx = &chain.transactions()[t];
                    one(r, emit);
                }
                break;
            case Level::address:
                for (std::uint32_t a = 0; a < snap_.universe_size(); ++a) {
                    Row r;
                    r.base = a;
                    one(r, emit);
                }
                break;
            case Level::block:
                for (std::uint32_t b = 0; b < chain.blocks().size(); ++b) {
                    Row r;
                    r.base = b;
                    one(r, emit);
                }
                break;
        }
    }

private:
    bool pass(const std::vector<const Predicate*>& ps, const Row& r) const {
        for (const Predicate* p : ps)
            if (!ex_.eval(*p, r)) return false;
        return true;
    }

    void side_items(int side, const Row& r, std::vector<Item>& out) const {
        out.clear();
        if (!(used_ & (1u << side))) {
            out.push_back({});
            return;
        }
        bool want_tags = used_ & (4u << side);
        auto with_tags = [&](std::uint32_t entity, std::span<const TagRef> refs) {
            if (!want_tags || refs.empty()) {
                out.push_back({entity, {}});
                return;
            }
            for (const TagRef& t : refs) out.push_back({entity, t});
        };
        switch (level_) {
            case Level::transaction: {
                const auto& ios = side == 0 ? r.tx->inputs : r.tx->outputs;
                if (ios.empty()) out.push_back({});
                for (std::uint32_t e = 0; e < ios.size(); ++e) with_tags(e, snap_.effective(ios[e].address, expand_[side]));
                break;
            }
            case Level::address: with_tags(r.base, snap_.effective(r.base, expand_[0])); break;
            case Level::block: {
                auto it = snap_.block_refs.find(snap_.chain.blocks()[r.base].height);
                with_tags(r.base, it == snap_.block_refs.end() ? std::span<const TagRef>{}
                                                               : std::span<const TagRef>(it->second));
                break;
            }
        }
        if (side_[side].empty()) return;
        Row probe = r;
        std::erase_if(out, [&](const Item& it) {
            probe.items[side] = it;
            return !pass(side_[side], probe);
        });
    }

    template <typename Emit>
    void one(Row& r, Emit& emit) {
        if (!pass(base_, r)) return;
        side_items(0, r, items_[0]);
        if (items_[0].empty()) return;
        side_items(1, r, items_[1]);
        if (items_[1].empty()) return;
        for (const Item& a : items_[0]) {
            r.items[0] = a;
            for (const Item& b : items_[1]) {
                r.items[1] = b;
                if (pass(cross_, r)) emit(static_cast<const Row&>(r));
            }
        }
    }

    const Executor& ex_;
    const Snapshot& snap_;
    Level level_;
    unsigned used_;
    std::array<bool, 2> expand_{false, false};
    std::vector<const Predicate*> base_, cross_;
    std::array<std::vector<const Predicate*>, 2> side_;
    std::array<std::vector<Item>, 2> items_;
};

// A flattened aggregate: date_diff contributes its two operands.
struct LeafAgg {
    AggFn fn;
    FieldRef arg;
};

struct AggSlot {
    AggFn fn = AggFn::count;
    std::size_t leaf = 0, leaf2 = 0;
};

struct Group {
    std::set<TxId> txs;
    std::vector<AggState> states;
};

}  // namespace

QueryEngine::QueryEngine(const Chain& chain, const TagStore& store)
    : chain_(chain), store_(store), clusterings_(chain) {}

QueryEngine::~QueryEngine() = default;

ResultSet QueryEngine::execute(const Query& q) {
    std::shared_ptr<const Clustering> cl;
    if (q.clustering) cl = clusterings_.get(*q.clustering);
    Snapshot snap(chain_, store_, q.level, cl);
    Executor ex(snap, q.level);

    // Group key: group_by fields, then plain select fields not already among them.
    std::vector<FieldRef> key_fields = q.group_by;
    std::vector<int> select_key(q.select.size(), -1);
    bool wants_txes = false;
    for (std::size_t i = 0; i < q.select.size(); ++i) {
        const auto& s = q.select[i];
        if (!s.field) continue;
        if (s.field->attr == Attr::tx_list) {
            wants_txes = true;
            continue;
        }
        auto it = std::find(key_fields.begin(), key_fields.end(), *s.field);
        if (it == key_fields.end()) {
            key_fields.push_back(*s.field);
            it = key_fields.end() - 1;
        }
        select_key[i] = static_cast<int>(it - key_fields.begin());
    }

    std::vector<LeafAgg> leaves;
    auto add_leaf = [&](const Aggregate& a) {
        leaves.push_back({a.fn, a.arg});
        return leaves.size() - 1;
    };
    auto add_slot = [&](const Aggregate& a) {
        AggSlot slot{a.fn};
        if (a.fn == AggFn::date_diff) {
            slot.leaf = add_leaf(*a.later);
            slot.leaf2 = add_leaf(*a.earlier);
        } else {
            slot.leaf = add_leaf(a);
        }
        return slot;
    };
    std::vector<std::optional<AggSlot>> select_slot(q.select.size());
    for (std::size_t i = 0; i < q.select.size(); ++i)
        if (q.select[i].aggregate) select_slot[i] = add_slot(*q.select[i].aggregate);
    std::optional<AggSlot> having_slot;
    if (q.having) having_slot = add_slot(q.having->aggregate);

    unsigned used = 0;
    for (const auto& f : key_fields) used |= touches(f);
    for (const auto& l : leaves) used |= touches(l.arg);

    std::map<std::vector<Value>, Group> groups;
    RowEnumerator rows(ex, snap, q.where, used, q.level, q.clustering);
    std::vector<Value> key;
    rows.run([&](const Row& r) {
        key.clear();
        for (const auto& f : key_fields) key.push_back(ex.value(f, r));
        auto it = groups.find(key);
        if (it == groups.end()) {
            it = groups.emplace(key, Group{}).first;
            it->second.states.resize(leaves.size());
        }
        Group& g = it->second;
        if (wants_txes) g.txs.insert(r.base);
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            AggState& st = g.states[i];
            if (!st.seen.insert(ex.scope_key(leaves[i].arg, r)).second) continue;
            st.add(leaves[i].fn, ex.value(leaves[i].arg, r));
        }
    });

    auto slot_value = [&](const AggSlot& s, const Group& g) -> Value {
        if (s.fn != AggFn::date_diff) return g.states[s.leaf].result(s.fn);
        Value a = g.states[s.leaf].result(leaves[s.leaf].fn);
        Value b = g.states[s.leaf2].result(leaves[s.leaf2].fn);
        auto ta = a.get_if<Timestamp>(), tb = b.get_if<Timestamp>();
        if (!ta || !tb) return {};
        return Value{date_diff_days(ta->seconds, tb->seconds)};
    };

    std::vector<ResultSet::Column> cols;
    for (const auto& s : q.select) cols.push_back({s.name, s.exported});
    ResultSet out(std::move(cols));
    for (const auto& [k, g] : groups) {
        if (having_slot && !compare_having(q.having->op, slot_value(*having_slot, g), q.having->threshold)) continue;
        std::vector<Value> row;
        row.reserve(q.select.size());
        for (std::size_t i = 0; i < q.select.size(); ++i) {
            if (select_slot[i]) {
                row.push_back(slot_value(*select_slot[i], g));
            } else if (select_key[i] >= 0) {
                row.push_back(k[select_key[i]]);
            } else {
                TxList list;
                for (TxId t : g.txs) list.hashes.push_back(chain_.tx(t).hash);
                row.emplace_back(std::move(list));
            }
        }
        out.add_row(std::move(row));
    }
    return out;
}

std::vector<TxMatch> QueryEngine::match_transactions(const Predicate& where,
                                                     const std::optional<ClusteringConfig>& clustering,
                                                     bool bind_tags) {
    std::shared_ptr<const Clustering> cl;
    if (clustering) cl = clusterings_.get(*clustering);
    Snapshot snap(chain_, store_, Level::transaction, cl);
    Executor ex(snap, Level::transaction);
    unsigned used = 3u | (bind_tags ? 12u : 0u);
    RowEnumerator rows(ex, snap, where, used, Level::transaction, clustering);

    std::vector<TxMatch> out;
    // Per side: entity -> bound tag refs (owner, index) in first-seen order.
    std::array<std::map<std::uint32_t, std::vector<TagRef>>, 2> bound;
    std::optional<TxId> current;
    auto flush = [&]() {
        if (!current) return;
        TxMatch m;
        m.tx = *current;
        for (int s = 0; s < 2; ++s) {
            auto& ents = s == 0 ? m.inputs : m.outputs;
            auto& tags = s == 0 ? m.input_tags : m.output_tags;
            for (auto& [e, refs] : bound[s]) {
                ents.push_back(e);
                std::vector<Tag> t;
                for (const auto& r : refs) t.push_back(*r.tag);
                tags.push_back(std::move(t));
            }
            bound[s].clear();
        }
        out.push_back(std::move(m));
    };
    rows.run([&](const Row& r) {
        if (current != r.base) {
            flush();
            current = r.base;
        }
        for (int s = 0; s < 2; ++s) {
            const Item& it = r.items[s];
            if (it.entity == kNone) continue;
            auto& refs = bound[s][it.entity];
            if (!it.tag.tag) continue;
            bool seen = std::any_of(refs.begin(), refs.end(), [&](const TagRef& x) {
                return x.owner == it.tag.owner && x.index == it.tag.index;
            });
            if (!seen) refs.push_back(it.tag);
        }
    });
    flush();
    return out;
}

ResultSet execute(const Chain& chain, const TagStore& store, const Query& query) {
    QueryEngine engine(chain, store);
    return engine.execute(query);
}

Json balance_sheet_incoming_query(std::string_view src) {
    return Json{{"level", "transaction"},
                {"select", Json::array({"output.address.tag.info.provider as @name", "count(self.txes) as volume",
                                        "sum(output.value) as incoming", "min(time) as first_tx",
                                        "max(time) as last_tx", "date_diff(max(time), min(time)) as num_days"})},
                {"where", {{"output", {{"address", {{"tag", {{"type", "service"}, {"source", std::string(src)}}}}}}}}},
                {"group_by", "output.address.tag.info.id"}};
}

Json balance_sheet_outgoing_query(std::string_view src) {
    return Json{{"level", "transaction"},
                {"select", Json::array({"input.address.tag.info.provider as @name", "sum(input.value) as outgoing"})},
                {"where", {{"input", {{"address", {{"tag", {{"type", "service"}, {"source", std::string(src)}}}}}}}}},
                {"group_by", "input.address.tag.info.id"}};
}

ResultSet balance_sheet(QueryEngine& engine, std::string_view src) {
    ResultSet in = engine.execute(balance_sheet_incoming_query(src));
    ResultSet outg = engine.execute(balance_sheet_outgoing_query(src));
    ResultSet joined = join(in, outg, "@name");
    ResultSet sheet = joined.project({"name", "volume", "incoming", "outgoing", "first_tx", "last_tx", "num_days"});
    std::size_t col = *sheet.column_index("outgoing");
    ResultSet fixed(sheet.columns());
    for (auto row : sheet.rows()) {
        if (row[col].is_null()) row[col] = Value{std::int64_t{0}};
        fixed.add_row(std::move(row));
    }
    return fixed;
}

ResultSet balance_sheet(const Chain& chain, const TagStore& store, std::string_view src) {
    QueryEngine engine(chain, store);
    return balance_sheet(engine, src);
}

}  // namespace chaintag
