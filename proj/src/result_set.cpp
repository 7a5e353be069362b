#include <algorithm>
#include <map>
#include <sstream>

#include "chaintag/error.hpp"
#include "chaintag/query.hpp"

namespace chaintag {

namespace {

std::string_view bare(std::string_view name) {
    if (!name.empty() && name.front() == '@') name.remove_prefix(1);
    return name;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// Display width in code points, close enough for aligned terminal output.
std::size_t width(const std::string& s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

}  // namespace

void ResultSet::add_row(std::vector<Value> row) {
    if (row.size() != columns_.size())
        throw std::invalid_argument("row has " + std::to_string(row.size()) + " cells, expected " +
                                    std::to_string(columns_.size()));
    rows_.push_back(std::move(row));
}

std::optional<std::size_t> ResultSet::column_index(std::string_view name) const {
    name = bare(name);
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i].name == name) return i;
    return std::nullopt;
}

const Value& ResultSet::at(std::size_t row, std::string_view column) const {
    auto c = column_index(column);
    if (!c) throw NotFound("no column '" + std::string(column) + "'");
    return rows_.at(row).at(*c);
}

ResultSet ResultSet::project(const std::vector<std::string>& names) const {
    std::vector<std::size_t> idx;
    std::vector<Column> cols;
    for (const auto& n : names) {
        auto c = column_index(n);
        if (!c) throw ValidationError(n, "no such column");
        idx.push_back(*c);
        cols.push_back(columns_[*c]);
    }
    ResultSet out(std::move(cols));
    for (const auto& row : rows_) {
        std::vector<Value> r;
        for (auto i : idx) r.push_back(row[i]);
        out.add_row(std::move(r));
    }
    return out;
}

Json ResultSet::to_json() const {
    Json arr = Json::array();
    for (const auto& row : rows_) {
        Json obj = Json::object();
        for (std::size_t i = 0; i < columns_.size(); ++i) obj[columns_[i].name] = row[i].to_json();
        arr.push_back(std::move(obj));
    }
    return arr;
}

std::string ResultSet::to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i) out += ',';
        out += csv_quote(columns_[i].name);
    }
    out += "\r\n";
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += csv_quote(row[i].to_csv_field());
        }
        out += "\r\n";
    }
    return out;
}

std::string ResultSet::to_table() const {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> w(columns_.size());
    for (std::size_t i = 0; i < columns_.size(); ++i) w[i] = width(columns_[i].name);
    for (const auto& row : rows_) {
        auto& line = cells.emplace_back();
        for (std::size_t i = 0; i < row.size(); ++i) {
            line.push_back(row[i].to_display());
            w[i] = std::max(w[i], width(line.back()));
        }
    }
    std::ostringstream os;
    auto emit = [&](const std::vector<std::string>& line) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (i) os << "  ";
            os << line[i];
            if (i + 1 < line.size()) os << std::string(w[i] - width(line[i]), ' ');
        }
        os << '\n';
    };
    std::vector<std::string> header;
    for (const auto& c : columns_) header.push_back(c.name);
    emit(header);
    std::vector<std::string> rule;
    for (auto x : w) rule.push_back(std::string(x, '-'));
    emit(rule);
    for (const auto& line : cells) emit(line);
    os << "(" << rows_.size() << (rows_.size() == 1 ? " row)\n" : " rows)\n");
    return os.str();
}

ResultSet join(const ResultSet& left, const ResultSet& right, std::string_view on) {
    auto lk = left.column_index(on);
    auto rk = right.column_index(on);
    if (!lk) throw ValidationError(std::string(on), "join column missing on the left");
    if (!rk) throw ValidationError(std::string(on), "join column missing on the right");

    std::vector<ResultSet::Column> cols = left.columns();
    std::vector<std::size_t> extra;
    for (std::size_t i = 0; i < right.columns().size(); ++i) {
        if (i == *rk) continue;
        if (left.column_index(right.columns()[i].name))
            throw ValidationError(right.columns()[i].name, "column appears on both sides of the join");
        extra.push_back(i);
        cols.push_back(right.columns()[i]);
    }

    std::map<Value, std::size_t> index;
    for (std::size_t r = 0; r < right.size(); ++r) {
        if (!index.emplace(right.rows()[r][*rk], r).second)
            throw ValidationError(std::string(on), "duplicate join key " + right.rows()[r][*rk].to_display() +
                                                       " on the right");
    }

    ResultSet out(std::move(cols));
    for (const auto& row : left.rows()) {
        std::vector<Value> r = row;
        auto it = index.find(row[*lk]);
        for (auto i : extra) r.push_back(it == index.end() ? Value{} : right.rows()[it->second][i]);
        out.add_row(std::move(r));
    }
    return out;
}

}  // namespace chaintag
