#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "chaintag/tags.hpp"
#include "chaintag/time_util.hpp"

namespace chaintag {

struct Timestamp {
    UnixTime seconds = 0;
    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

struct TxList {
    std::vector<std::string> hashes;
    friend bool operator==(const TxList&, const TxList&) = default;
};

// A result cell. Total order: null < bool < number < string < timestamp < tx list < json,
// numbers compared by value across int/double.
class Value {
public:
    using Storage = std::variant<std::monostate, bool, std::int64_t, double, std::string, Timestamp, TxList, Json>;

    Value() = default;
    Value(std::nullptr_t) {}
    Value(bool b) : v_(b) {}
    Value(std::int64_t i) : v_(i) {}
    Value(int i) : v_(static_cast<std::int64_t>(i)) {}
    Value(double d) : v_(d) {}
    Value(std::string s) : v_(std::move(s)) {}
    Value(const char* s) : v_(std::string(s)) {}
    Value(Timestamp t) : v_(t) {}
    Value(TxList l) : v_(std::move(l)) {}

    // Scalars become native alternatives; objects and arrays stay JSON.
    static Value from_json(const Json& j);

    const Storage& storage() const noexcept { return v_; }
    bool is_null() const noexcept { return std::holds_alternative<std::monostate>(v_); }
    bool is_number() const noexcept {
        return std::holds_alternative<std::int64_t>(v_) || std::holds_alternative<double>(v_);
    }
    template <typename T>
    const T* get_if() const noexcept {
        return std::get_if<T>(&v_);
    }
    double as_double() const;

    Json to_json() const;
    std::string to_csv_field() const;  // unquoted text
    std::string to_display() const;

    friend std::strong_ordering compare(const Value& a, const Value& b);
    friend bool operator==(const Value& a, const Value& b) { return compare(a, b) == 0; }
    friend std::strong_ordering operator<=>(const Value& a, const Value& b) { return compare(a, b); }

private:
    Storage v_;
};

std::strong_ordering compare(const Value& a, const Value& b);

std::string format_double(double d);

}  // namespace chaintag
