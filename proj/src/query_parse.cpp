#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "chaintag/error.hpp"
#include "chaintag/query.hpp"

namespace chaintag {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_dots(std::string_view path) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = path.find('.', start);
        parts.emplace_back(path.substr(start, dot == std::string_view::npos ? path.npos : dot - start));
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return parts;
}

[[noreturn]] void unknown_path(const std::string& where, std::string_view path) {
    throw ValidationError(where, "unknown field path '" + std::string(path) + "'");
}

FieldRef tag_field(int side, const std::vector<std::string>& parts, std::size_t at, const std::string& where,
                   std::string_view path) {
    FieldRef f;
    f.scope = Scope::tag;
    f.side = side;
    if (at == parts.size()) {
        f.attr = Attr::tag_whole;
        return f;
    }
    const std::string& p = parts[at];
    if (p == "type" || p == "source" || p == "id") {
        if (at + 1 != parts.size()) unknown_path(where, path);
        f.attr = p == "type" ? Attr::tag_type : p == "source" ? Attr::tag_source : Attr::tag_id;
        return f;
    }
    if (p != "info") unknown_path(where, path);
    f.attr = Attr::tag_info;
    for (std::size_t i = at + 1; i < parts.size(); ++i) {
        if (parts[i].empty()) unknown_path(where, path);
        f.info_path.push_back(parts[i]);
    }
    return f;
}

// ---- constants ---------------------------------------------------------------------------

class ConstantParser {
public:
    explicit ConstantParser(std::string_view text) : s_(text) {}

    Value parse() {
        Value v = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(s_.substr(pos_)) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError("having", "bad constant '" + std::string(s_) + "': " + msg);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(std::string_view tok) {
        skip();
        if (s_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    static bool is_int(const Value& v) { return v.get_if<std::int64_t>() != nullptr; }

    static Value arith(char op, const Value& a, const Value& b) {
        if (is_int(a) && is_int(b)) {
            std::int64_t x = *a.get_if<std::int64_t>(), y = *b.get_if<std::int64_t>(), r = 0;
            bool overflow = op == '+'   ? __builtin_add_overflow(x, y, &r)
                            : op == '-' ? __builtin_sub_overflow(x, y, &r)
                                        : __builtin_mul_overflow(x, y, &r);
            if (!overflow) return Value{r};
        }
        double x = a.as_double(), y = b.as_double();
        return Value{op == '+' ? x + y : op == '-' ? x - y : x * y};
    }

    static Value power(const Value& a, const Value& b) {
        if (is_int(a) && is_int(b) && *b.get_if<std::int64_t>() >= 0) {
            std::int64_t base = *a.get_if<std::int64_t>(), exp = *b.get_if<std::int64_t>(), r = 1;
            bool overflow = false;
            for (std::int64_t i = 0; i < exp && !overflow; ++i) overflow = __builtin_mul_overflow(r, base, &r);
            if (!overflow) return Value{r};
        }
        return Value{std::pow(a.as_double(), b.as_double())};
    }

    Value expr() {
        Value v = term();
        while (true) {
            if (eat("+")) v = arith('+', v, term());
            else if (eat("-")) v = arith('-', v, term());
            else return v;
        }
    }
    Value term() {
        Value v = unary();
        while (true) {
            skip();
            if (s_.substr(pos_, 2) == "**") return v;  // handled in power()
            if (eat("*")) v = arith('*', v, unary());
            else return v;
        }
    }
    Value unary() {
        if (eat("-")) return arith('-', Value{std::int64_t{0}}, unary());
        if (eat("+")) return unary();
        return pow_expr();
    }
    Value pow_expr() {
        Value base = atom();
        if (eat("**")) return power(base, unary());
        return base;
    }
    Value atom() {
        if (eat("(")) {
            Value v = expr();
            if (!eat(")")) fail("missing ')'");
            return v;
        }
        skip();
        std::size_t start = pos_;
        bool is_float = false;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                    s_[pos_] == '_')) {
            if (s_[pos_] == '.') is_float = true;
            ++pos_;
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            is_float = true;
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        }
        std::string num;
        for (char c : s_.substr(start, pos_ - start))
            if (c != '_') num += c;
        if (num.empty()) fail("expected a number");
        if (!is_float) {
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
            if (ec == std::errc{} && p == num.data() + num.size()) return Value{v};
        }
        double d = 0;
        auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), d);
        if (ec != std::errc{} || p != num.data() + num.size()) fail("bad number '" + num + "'");
        return Value{d};
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

// ---- where ---------------------------------------------------------------------------------

enum class Kind { numeric, time, text, tag_type, json };

Kind kind_of(const FieldRef& f) {
    switch (f.attr) {
        case Attr::io_value:
        case Attr::block_height: return Kind::numeric;
        case Attr::time: return Kind::time;
        case Attr::tag_type: return Kind::tag_type;
        case Attr::tag_info:
        case Attr::tag_whole: return Kind::json;
        default: return Kind::text;
    }
}

bool is_operator(std::string_view k) { return !k.empty() && k[0] == '$'; }

std::optional<TestOp> op_from(std::string_view k) {
    if (k == "$eq") return TestOp::eq;
    if (k == "$like") return TestOp::like;
    if (k == "$in") return TestOp::in;
    if (k == "$gt") return TestOp::gt;
    if (k == "$gte") return TestOp::gte;
    if (k == "$lt") return TestOp::lt;
    if (k == "$lte") return TestOp::lte;
    return std::nullopt;
}

TimeRange time_operand(const Json& v, const std::string& path) {
    if (v.is_number_integer()) {
        auto t = v.get<std::int64_t>();
        return {t, t + 1};
    }
    if (v.is_string()) {
        if (auto r = parse_time_range(v.get<std::string>())) return *r;
    }
    throw ValidationError(path, "expected a time literal (YYYY, YYYY-MM, YYYY-MM-DD, YYYY-MM-DDTHH:MM:SSZ or epoch seconds), got " +
                                    v.dump());
}

void check_scalar_operand(const FieldRef& f, const Json& v, const std::string& path, Predicate& p) {
    switch (kind_of(f)) {
        case Kind::numeric:
            if (!v.is_number()) throw ValidationError(path, "expected a number, got " + v.dump());
            break;
        case Kind::time: p.time_operands.push_back(time_operand(v, path)); break;
        case Kind::tag_type:
            if (!v.is_string() || !tag_type_from_string(v.get<std::string>()))
                throw ValidationError(path, "expected user|service|text|custom, got " + v.dump());
            break;
        case Kind::text:
            if (!v.is_string()) throw ValidationError(path, "expected a string, got " + v.dump());
            break;
        case Kind::json: break;
    }
}

Predicate make_test(const FieldRef& f, TestOp op, const Json& operand, const std::string& path) {
    Predicate p;
    p.kind = Predicate::Kind::test;
    p.field = f;
    p.op = op;
    p.operand = operand;
    Kind kind = kind_of(f);
    switch (op) {
        case TestOp::like:
            if (!operand.is_string()) throw ValidationError(path, "$like needs a string");
            if (kind == Kind::time || kind == Kind::numeric)
                throw ValidationError(path, "$like does not apply to " + f.text);
            p.like_lower = ascii_lower(operand.get<std::string>());
            break;
        case TestOp::in:
            if (!operand.is_array()) throw ValidationError(path, "$in needs a list");
            for (const auto& v : operand) check_scalar_operand(f, v, path, p);
            break;
        case TestOp::eq: check_scalar_operand(f, operand, path, p); break;
        default:
            if (kind == Kind::tag_type) throw ValidationError(path, "ordering does not apply to tag types");
            if (operand.is_array() || operand.is_object() || operand.is_null() || operand.is_boolean())
                throw ValidationError(path, "ordering needs a number, string or time");
            check_scalar_operand(f, operand, path, p);
            break;
    }
    if ((f.attr == Attr::tx_hash || f.attr == Attr::block_hash) && op != TestOp::like) {
        if (p.operand.is_string()) p.operand = ascii_lower(p.operand.get<std::string>());
        if (p.operand.is_array())
            for (auto& v : p.operand)
                if (v.is_string()) v = ascii_lower(v.get<std::string>());
    }
    return p;
}

Predicate all_of(std::vector<Predicate> children) {
    if (children.size() == 1) return std::move(children.front());
    Predicate p;
    p.kind = Predicate::Kind::all;
    p.children = std::move(children);
    return p;
}

struct WhereParser {
    Level level;

    using NodeFn = Predicate (WhereParser::*)(const Json&, const std::string&, int);

    Predicate or_of(const Json& alts, const std::string& path, int side, NodeFn node) {
        if (!alts.is_array() || alts.empty()) throw ValidationError(path, "$or needs a non-empty list");
        Predicate p;
        p.kind = Predicate::Kind::any;
        for (std::size_t i = 0; i < alts.size(); ++i)
            p.children.push_back((this->*node)(alts[i], path + "[" + std::to_string(i) + "]", side));
        return p;
    }

    // A scalar field: constant (equality) or operator object.
    Predicate scalar(const FieldRef& f, const Json& j, const std::string& path) {
        if (!j.is_object()) return make_test(f, TestOp::eq, j, path);
        std::vector<Predicate> parts;
        for (const auto& [k, v] : j.items()) {
            std::string sub = path + "." + k;
            if (k == "$or") {
                if (!v.is_array() || v.empty()) throw ValidationError(sub, "$or needs a non-empty list");
                Predicate any;
                any.kind = Predicate::Kind::any;
                for (std::size_t i = 0; i < v.size(); ++i)
                    any.children.push_back(scalar(f, v[i], sub + "[" + std::to_string(i) + "]"));
                parts.push_back(std::move(any));
                continue;
            }
            auto op = op_from(k);
            if (!op) throw ValidationError(sub, is_operator(k) ? "unknown operator '" + k + "'" : "unknown field '" + k + "'");
            parts.push_back(make_test(f, *op, v, sub));
        }
        if (parts.empty()) throw ValidationError(path, "empty condition");
        return all_of(std::move(parts));
    }

    Predicate json_node(const FieldRef& f, const Json& j, const std::string& path) {
        if (!j.is_object()) return make_test(f, TestOp::eq, j, path);
        std::vector<Predicate> parts;
        for (const auto& [k, v] : j.items()) {
            std::string sub = path + "." + k;
            if (k == "$or") {
                if (!v.is_array() || v.empty()) throw ValidationError(sub, "$or needs a non-empty list");
                Predicate any;
                any.kind = Predicate::Kind::any;
                for (std::size_t i = 0; i < v.size(); ++i)
                    any.children.push_back(json_node(f, v[i], sub + "[" + std::to_string(i) + "]"));
                parts.push_back(std::move(any));
            } else if (is_operator(k)) {
                auto op = op_from(k);
                if (!op) throw ValidationError(sub, "unknown operator '" + k + "'");
                parts.push_back(make_test(f, *op, v, sub));
            } else {
                FieldRef child = f;
                child.info_path.push_back(k);
                child.text += "." + k;
                parts.push_back(json_node(child, v, sub));
            }
        }
        if (parts.empty()) return Predicate{};
        return all_of(std::move(parts));
    }

    FieldRef make(Scope scope, int side, Attr attr, std::string text) {
        FieldRef f;
        f.scope = scope;
        f.side = side;
        f.attr = attr;
        f.text = std::move(text);
        return f;
    }

    std::string side_name(int side) const {
        if (level != Level::transaction) return "";
        return side == 0 ? "input.address." : "output.address.";
    }

    Predicate tag_node(const Json& j, const std::string& path, int side) {
        if (!j.is_object()) throw ValidationError(path, "tag condition must be an object");
        std::vector<Predicate> parts;
        std::string prefix = side_name(side) + "tag.";
        for (const auto& [k, v] : j.items()) {
            std::string sub = path + "." + k;
            if (k == "$or") parts.push_back(or_of(v, sub, side, &WhereParser::tag_node));
            else if (k == "type") parts.push_back(scalar(make(Scope::tag, side, Attr::tag_type, prefix + k), v, sub));
            else if (k == "source") parts.push_back(scalar(make(Scope::tag, side, Attr::tag_source, prefix + k), v, sub));
            else if (k == "id") parts.push_back(scalar(make(Scope::tag, side, Attr::tag_id, prefix + k), v, sub));
            else if (k == "info") parts.push_back(json_node(make(Scope::tag, side, Attr::tag_info, prefix + k), v, sub));
            else throw ValidationError(sub, "unknown field '" + k + "'");
        }
        return all_of(std::move(parts));
    }

    Predicate address_node(const Json& j, const std::string& path, int side) {
        FieldRef text = make(Scope::entity, side, Attr::io_address, side_name(side).substr(0, side_name(side).size() - 1));
        if (!j.is_object()) return make_test(text, TestOp::eq, j, path);
        std::vector<Predicate> parts;
        for (const auto& [k, v] : j.items()) {
            std::string sub = path + "." + k;
            if (k == "$or") parts.push_back(or_of(v, sub, side, &WhereParser::address_node));
            else if (k == "tag") parts.push_back(tag_node(v, sub, side));
            else if (auto op = op_from(k)) parts.push_back(make_test(text, *op, v, sub));
            else throw ValidationError(sub, is_operator(k) ? "unknown operator '" + k + "'" : "unknown field '" + k + "'");
        }
        return all_of(std::move(parts));
    }

    Predicate side_node(const Json& j, const std::string& path, int side) {
        if (!j.is_object()) throw ValidationError(path, "expected an object");
        std::vector<Predicate> parts;
        const char* name = side == 0 ? "input" : "output";
        for (const auto& [k, v] : j.items()) {
            std::string sub = path + "." + k;
            if (k == "$or") parts.push_back(or_of(v, sub, side, &WhereParser::side_node));
            else if (k == "address") parts.push_back(address_node(v, sub, side));
            else if (k == "value")
                parts.push_back(scalar(make(Scope::entity, side, Attr::io_value, std::string(name) + ".value"), v, sub));
            else throw ValidationError(sub, "unknown field '" + k + "'");
        }
        return all_of(std::move(parts));
    }

    Predicate root(const Json& j, const std::string& path, int) {
        if (!j.is_object()) throw ValidationError(path, "where must be an object");
        std::vector<Predicate> parts;
        for (const auto& [k, v] : j.items()) {
            std::string sub = path + "." + k;
            if (k == "$or") {
                parts.push_back(or_of(v, sub, 0, &WhereParser::root));
                continue;
            }
            switch (level) {
                case Level::transaction:
                    if (k == "input") parts.push_back(side_node(v, sub, 0));
                    else if (k == "output") parts.push_back(side_node(v, sub, 1));
                    else if (k == "time") parts.push_back(scalar(make(Scope::base, 0, Attr::time, "time"), v, sub));
                    else if (k == "hash") parts.push_back(scalar(make(Scope::base, 0, Attr::tx_hash, "self.hash"), v, sub));
                    else throw ValidationError(sub, "unknown field '" + k + "'");
                    break;
                case Level::address:
                    if (k == "address") parts.push_back(scalar(make(Scope::base, 0, Attr::address_self, "self.address"), v, sub));
                    else if (k == "tag") parts.push_back(tag_node(v, sub, 0));
                    else throw ValidationError(sub, "unknown field '" + k + "'");
                    break;
                case Level::block:
                    if (k == "height") parts.push_back(scalar(make(Scope::base, 0, Attr::block_height, "self.height"), v, sub));
                    else if (k == "hash") parts.push_back(scalar(make(Scope::base, 0, Attr::block_hash, "self.hash"), v, sub));
                    else if (k == "time") parts.push_back(scalar(make(Scope::base, 0, Attr::time, "time"), v, sub));
                    else if (k == "tag") parts.push_back(tag_node(v, sub, 0));
                    else throw ValidationError(sub, "unknown field '" + k + "'");
                    break;
            }
        }
        if (parts.empty()) return Predicate{};
        return all_of(std::move(parts));
    }
};

// ---- select / having -------------------------------------------------------------------------

std::vector<std::string> string_list(const Json& j, const std::string& path) {
    std::vector<std::string> out;
    if (j.is_string()) {
        out.push_back(j.get<std::string>());
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_string()) throw ValidationError(path + "[" + std::to_string(i) + "]", "expected a string");
            out.push_back(j[i].get<std::string>());
        }
    } else {
        throw ValidationError(path, "expected a string or a list of strings");
    }
    return out;
}

bool summable(const FieldRef& f) {
    return f.attr == Attr::io_value || f.attr == Attr::tag_info || f.attr == Attr::block_height;
}

std::string default_select(Level level) {
    switch (level) {
        case Level::transaction: return "self.hash";
        case Level::address: return "self.address";
        case Level::block: return "self.height";
    }
    return "self.hash";
}

std::optional<std::pair<std::size_t, CompareOp>> find_comparison(std::string_view s) {
    int depth = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '(') ++depth;
        else if (c == ')') --depth;
        if (depth != 0) continue;
        std::string_view two = s.substr(i, 2);
        if (two == ">=") return std::pair{i, CompareOp::ge};
        if (two == "<=") return std::pair{i, CompareOp::le};
        if (two == "==") return std::pair{i, CompareOp::eq};
        if (two == "!=") return std::pair{i, CompareOp::ne};
        if (c == '>') return std::pair{i, CompareOp::gt};
        if (c == '<') return std::pair{i, CompareOp::lt};
    }
    return std::nullopt;
}

}  // namespace

FieldRef parse_field_path(Level level, std::string_view path, const std::string& where) {
    auto parts = split_dots(path);
    FieldRef f;
    f.text = std::string(path);
    auto base = [&](Attr a) {
        f.scope = Scope::base;
        f.attr = a;
        return f;
    };
    if (path.empty()) unknown_path(where, path);
    switch (level) {
        case Level::transaction:
            if (path == "self.txes") return base(Attr::tx_list);
            if (path == "self.hash") return base(Attr::tx_hash);
            if (path == "time") return base(Attr::time);
            if ((parts[0] == "input" || parts[0] == "output") && parts.size() >= 2) {
                int side = parts[0] == "input" ? 0 : 1;
                if (parts[1] == "value" && parts.size() == 2) {
                    f.scope = Scope::entity;
                    f.side = side;
                    f.attr = Attr::io_value;
                    return f;
                }
                if (parts[1] == "address") {
                    if (parts.size() == 2) {
                        f.scope = Scope::entity;
                        f.side = side;
                        f.attr = Attr::io_address;
                        return f;
                    }
                    if (parts[2] == "tag") {
                        FieldRef t = tag_field(side, parts, 3, where, path);
                        t.text = f.text;
                        return t;
                    }
                }
            }
            break;
        case Level::address:
            if (path == "self.address") return base(Attr::address_self);
            if (parts[0] == "tag") {
                FieldRef t = tag_field(0, parts, 1, where, path);
                t.text = f.text;
                return t;
            }
            break;
        case Level::block:
            if (path == "self.height") return base(Attr::block_height);
            if (path == "self.hash") return base(Attr::block_hash);
            if (path == "time") return base(Attr::time);
            if (parts[0] == "tag") {
                FieldRef t = tag_field(0, parts, 1, where, path);
                t.text = f.text;
                return t;
            }
            break;
    }
    unknown_path(where, path);
}

Aggregate parse_aggregate(Level level, std::string_view text_in, const std::string& where) {
    std::string text = trim(text_in);
    auto open = text.find('(');
    if (open == std::string::npos || text.back() != ')')
        throw ValidationError(where, "malformed aggregate '" + text + "'");
    std::string fn = trim(std::string_view(text).substr(0, open));
    std::string inner = trim(std::string_view(text).substr(open + 1, text.size() - open - 2));
    Aggregate agg;
    if (fn == "date_diff") {
        int depth = 0;
        std::size_t comma = std::string::npos;
        for (std::size_t i = 0; i < inner.size(); ++i) {
            if (inner[i] == '(') ++depth;
            else if (inner[i] == ')') --depth;
            else if (inner[i] == ',' && depth == 0) {
                comma = i;
                break;
            }
        }
        if (comma == std::string::npos) throw ValidationError(where, "date_diff needs two arguments in '" + text + "'");
        agg.fn = AggFn::date_diff;
        agg.later = std::make_shared<Aggregate>(parse_aggregate(level, inner.substr(0, comma), where));
        agg.earlier = std::make_shared<Aggregate>(parse_aggregate(level, inner.substr(comma + 1), where));
        for (const auto& a : {agg.later, agg.earlier})
            if ((a->fn != AggFn::min && a->fn != AggFn::max) || !a->arg.is_time())
                throw ValidationError(where, "date_diff arguments must be min/max of a time field in '" + text + "'");
        agg.arg = agg.later->arg;
        return agg;
    }
    if (fn == "count") agg.fn = AggFn::count;
    else if (fn == "sum") agg.fn = AggFn::sum;
    else if (fn == "min") agg.fn = AggFn::min;
    else if (fn == "max") agg.fn = AggFn::max;
    else throw ValidationError(where, "unknown aggregate '" + fn + "' in '" + text + "'");
    if (inner.find('(') != std::string::npos) throw ValidationError(where, "malformed aggregate '" + text + "'");
    agg.arg = parse_field_path(level, inner, where);
    if (agg.fn == AggFn::sum && !summable(agg.arg))
        throw ValidationError(where, "sum() needs a numeric field, got '" + inner + "'");
    if ((agg.fn == AggFn::min || agg.fn == AggFn::max) && agg.arg.attr == Attr::tx_list)
        throw ValidationError(where, std::string(fn) + "() does not apply to self.txes");
    return agg;
}

Value evaluate_constant(std::string_view expr) { return ConstantParser(expr).parse(); }

Json parse_query_text(std::string_view text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error&) {
    }
    // Python literal -> JSON.
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
            out += '\n';
            continue;
        }
        if (c == '\'' || c == '"') {
            char quote = c;
            out += '"';
            for (++i; i < text.size() && text[i] != quote; ++i) {
                if (text[i] == '\\' && i + 1 < text.size()) {
                    char n = text[++i];
                    if (n == '\'') out += '\'';
                    else {
                        out += '\\';
                        out += n;
                    }
                } else if (text[i] == '"') {
                    out += "\\\"";
                } else {
                    out += text[i];
                }
            }
            out += '"';
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
            std::string_view word = text.substr(i, j - i);
            if (word == "True") out += "true";
            else if (word == "False") out += "false";
            else if (word == "None") out += "null";
            else out += word;
            i = j - 1;
            continue;
        }
        if (c == ',') {
            std::size_t j = i + 1;
            while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
            if (j < text.size() && (text[j] == '}' || text[j] == ']')) continue;  // trailing comma
        }
        out += c;
    }
    try {
        return Json::parse(out);
    } catch (const Json::parse_error& e) {
        throw ValidationError("", std::string("query is neither JSON nor a Python dict literal: ") + e.what());
    }
}

Query parse_query(const Json& spec) {
    if (!spec.is_object()) throw ValidationError("", "query must be a JSON object");
    for (const auto& [k, _] : spec.items())
        if (k != "level" && k != "select" && k != "where" && k != "group_by" && k != "having" && k != "clustering")
            throw ValidationError(k, "unknown query key");

    Query q;
    if (auto lv = spec.find("level"); lv != spec.end()) {
        if (!lv->is_string()) throw ValidationError("level", "expected a string");
        auto l = level_from_string(lv->get<std::string>());
        if (!l) throw ValidationError("level", "expected block|transaction|address, got '" + lv->get<std::string>() + "'");
        q.level = *l;
    }

    if (auto w = spec.find("where"); w != spec.end() && !w->is_null()) {
        WhereParser wp{q.level};
        q.where = wp.root(*w, "where", 0);
    }

    if (auto g = spec.find("group_by"); g != spec.end() && !g->is_null()) {
        auto paths = string_list(*g, "group_by");
        for (std::size_t i = 0; i < paths.size(); ++i) {
            std::string at = "group_by[" + std::to_string(i) + "]";
            FieldRef f = parse_field_path(q.level, trim(paths[i]), at);
            if (f.attr == Attr::tx_list) throw ValidationError(at, "cannot group by self.txes");
            q.group_by.push_back(std::move(f));
        }
    }

    std::vector<std::string> select_text;
    if (auto s = spec.find("select"); s != spec.end() && !s->is_null()) {
        select_text = string_list(*s, "select");
    } else if (!q.group_by.empty()) {
        for (const auto& f : q.group_by) select_text.push_back(f.text);
    } else {
        select_text.push_back(default_select(q.level));
    }
    for (std::size_t i = 0; i < select_text.size(); ++i) {
        std::string at = "select[" + std::to_string(i) + "]";
        std::string item = trim(select_text[i]);
        SelectItem sel;
        std::string expr = item;
        if (auto as = item.rfind(" as "); as != std::string::npos) {
            expr = trim(std::string_view(item).substr(0, as));
            std::string alias = trim(std::string_view(item).substr(as + 4));
            if (!alias.empty() && alias[0] == '@') {
                sel.exported = true;
                alias.erase(0, 1);
            }
            if (alias.empty()) throw ValidationError(at, "empty alias in '" + item + "'");
            sel.name = alias;
        }
        sel.expr = expr;
        if (sel.name.empty()) sel.name = expr;
        if (expr.find('(') != std::string::npos) sel.aggregate = parse_aggregate(q.level, expr, at);
        else sel.field = parse_field_path(q.level, expr, at);
        for (const auto& prev : q.select)
            if (prev.name == sel.name) throw ValidationError(at, "duplicate column name '" + sel.name + "'");
        q.select.push_back(std::move(sel));
    }

    if (auto h = spec.find("having"); h != spec.end() && !h->is_null()) {
        if (!h->is_string()) throw ValidationError("having", "expected a string");
        if (q.group_by.empty()) throw ValidationError("having", "having requires group_by");
        std::string text = trim(h->get<std::string>());
        auto cmp = find_comparison(text);
        if (!cmp) throw ValidationError("having", "expected '<aggregate> <op> <constant>' in '" + text + "'");
        std::size_t op_len = (cmp->second == CompareOp::gt || cmp->second == CompareOp::lt) ? 1 : 2;
        Having hv;
        hv.text = text;
        hv.op = cmp->second;
        hv.aggregate = parse_aggregate(q.level, text.substr(0, cmp->first), "having");
        std::string rhs = trim(std::string_view(text).substr(cmp->first + op_len));
        if (rhs.size() >= 2 && (rhs.front() == '\'' || rhs.front() == '"') && rhs.back() == rhs.front()) {
            std::string lit = rhs.substr(1, rhs.size() - 2);
            const Aggregate& a = hv.aggregate;
            bool time_valued = (a.fn == AggFn::min || a.fn == AggFn::max) && a.arg.is_time();
            if (time_valued) {
                auto r = parse_time_range(lit);
                if (!r) throw ValidationError("having", "bad time literal '" + lit + "'");
                hv.threshold = Timestamp{r->begin};
            } else {
                hv.threshold = lit;
            }
        } else {
            hv.threshold = evaluate_constant(rhs);
        }
        q.having = std::move(hv);
    }

    if (auto c = spec.find("clustering"); c != spec.end() && !c->is_null()) {
        if (!c->is_object()) throw ValidationError("clustering", "expected an object");
        ClusteringConfig cfg;
        for (const auto& [k, v] : c->items()) {
            if (k == "source") {
                try {
                    cfg.source = side_from_string(v.is_string() ? v.get<std::string>() : v.dump());
                } catch (const ValidationError& e) {
                    throw ValidationError("clustering.source", e.what());
                }
            } else if (k == "method") {
                try {
                    cfg.method = cluster_method_from_string(v.is_string() ? v.get<std::string>() : v.dump());
                } catch (const ValidationError& e) {
                    throw ValidationError("clustering.method", e.what());
                }
            } else {
                throw ValidationError("clustering." + k, "unknown key");
            }
        }
        if (!c->contains("source") || !c->contains("method"))
            throw ValidationError("clustering", "both source and method are required");
        q.clustering = cfg;
    }
    return q;
}

}  // namespace chaintag
