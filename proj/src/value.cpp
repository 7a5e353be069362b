#include "chaintag/value.hpp"

#include <charconv>
#include <cmath>

namespace chaintag {

namespace {

int rank(const Value::Storage& s) {
    switch (s.index()) {
        case 0: return 0;
        case 1: return 1;
        case 2:
        case 3: return 2;
        case 4: return 3;
        case 5: return 4;
        case 6: return 5;
        default: return 6;
    }
}

std::strong_ordering compare_numbers(const Value::Storage& a, const Value::Storage& b) {
    if (a.index() == 2 && b.index() == 2) return std::get<2>(a) <=> std::get<2>(b);
    long double x = a.index() == 2 ? static_cast<long double>(std::get<2>(a)) : std::get<3>(a);
    long double y = b.index() == 2 ? static_cast<long double>(std::get<2>(b)) : std::get<3>(b);
    if (x < y) return std::strong_ordering::less;
    if (x > y) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

}  // namespace

std::string format_double(double d) {
    if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 1e15) {
        char buf[32];
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::fixed, 1);
        return std::string(buf, p);
    }
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, p);
}

Value Value::from_json(const Json& j) {
    switch (j.type()) {
        case Json::value_t::null: return Value{};
        case Json::value_t::boolean: return Value{j.get<bool>()};
        case Json::value_t::number_integer: return Value{j.get<std::int64_t>()};
        case Json::value_t::number_unsigned: {
            auto u = j.get<std::uint64_t>();
            if (u <= static_cast<std::uint64_t>(INT64_MAX)) return Value{static_cast<std::int64_t>(u)};
            return Value{static_cast<double>(u)};
        }
        case Json::value_t::number_float: return Value{j.get<double>()};
        case Json::value_t::string: return Value{j.get<std::string>()};
        default: {
            Value v;
            v.v_ = j;
            return v;
        }
    }
}

double Value::as_double() const {
    if (auto i = std::get_if<std::int64_t>(&v_)) return static_cast<double>(*i);
    if (auto d = std::get_if<double>(&v_)) return *d;
    if (auto t = std::get_if<Timestamp>(&v_)) return static_cast<double>(t->seconds);
    return 0.0;
}

Json Value::to_json() const {
    return std::visit(
        [](const auto& x) -> Json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
            else if constexpr (std::is_same_v<T, Timestamp>) return format_iso_utc(x.seconds);
            else if constexpr (std::is_same_v<T, TxList>) return x.hashes;
            else return Json(x);
        },
        v_);
}

std::string Value::to_csv_field() const {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::monostate>) return "";
            else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
            else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(x);
            else if constexpr (std::is_same_v<T, double>) return format_double(x);
            else if constexpr (std::is_same_v<T, std::string>) return x;
            else if constexpr (std::is_same_v<T, Timestamp>) return format_iso_utc(x.seconds);
            else if constexpr (std::is_same_v<T, TxList>) {
                std::string out;
                for (std::size_t i = 0; i < x.hashes.size(); ++i) {
                    if (i) out += ';';
                    out += x.hashes[i];
                }
                return out;
            } else return x.dump();
        },
        v_);
}

std::string Value::to_display() const {
    if (is_null()) return "null";
    if (auto l = std::get_if<TxList>(&v_)) return "[" + std::to_string(l->hashes.size()) + " txs]";
    return to_csv_field();
}

std::strong_ordering compare(const Value& a, const Value& b) {
    const auto& x = a.storage();
    const auto& y = b.storage();
    int rx = rank(x), ry = rank(y);
    if (rx != ry) return rx <=> ry;
    switch (rx) {
        case 0: return std::strong_ordering::equal;
        case 1: return std::get<bool>(x) <=> std::get<bool>(y);
        case 2: return compare_numbers(x, y);
        case 3: return std::get<std::string>(x).compare(std::get<std::string>(y)) <=> 0;
        case 4: return std::get<Timestamp>(x) <=> std::get<Timestamp>(y);
        case 5: return std::get<TxList>(x).hashes <=> std::get<TxList>(y).hashes;
        default: return std::get<Json>(x).dump().compare(std::get<Json>(y).dump()) <=> 0;
    }
}

}  // namespace chaintag
