#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <regex>

#include "chaintag/crawler.hpp"
#include "chaintag/error.hpp"

namespace chaintag {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string collapse_spaces(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            space = true;
            continue;
        }
        if (space && !out.empty()) out += ' ';
        space = false;
        out += c;
    }
    return out;
}

void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x110000) {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

std::string decode_entities(std::string_view s) {
    static const std::array<std::pair<std::string_view, std::string_view>, 6> named{{
        {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", " "}}};
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out += s[i];
            continue;
        }
        std::size_t semi = s.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out += '&';
            continue;
        }
        std::string_view ent = s.substr(i + 1, semi - i - 1);
        bool done = false;
        if (!ent.empty() && ent[0] == '#') {
            unsigned long cp = 0;
            bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
            std::string_view digits = ent.substr(hex ? 2 : 1);
            auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
            if (ec == std::errc{} && p == digits.data() + digits.size() && !digits.empty()) {
                append_utf8(out, cp);
                done = true;
            }
        } else {
            for (const auto& [name, rep] : named) {
                if (ent == name) {
                    out += rep;
                    done = true;
                    break;
                }
            }
        }
        if (done) {
            i = semi;
        } else {
            out += '&';
        }
    }
    return out;
}

std::optional<long long> parse_int(std::string_view s) {
    std::string digits;
    for (char c : s)
        if (c != ',') digits += c;
    digits = trim(digits);
    long long v = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (digits.empty() || ec != std::errc{} || p != digits.data() + digits.size()) return std::nullopt;
    return v;
}

// "November 19, 2009, 07:12:39 PM" -> "2009-11-19 19:12:39". Other text is returned unchanged.
std::string normalize_forum_date(const std::string& text) {
    static const std::regex re(R"(^([A-Za-z]+) (\d{1,2}), (\d{4}), (\d{1,2}):(\d{2}):(\d{2}) ?([AP]M)$)");
    static const std::array<const char*, 12> months{"January", "February", "March",     "April",   "May",      "June",
                                                    "July",    "August",   "September", "October", "November", "December"};
    std::smatch m;
    if (!std::regex_match(text, m, re)) return text;
    auto it = std::find(months.begin(), months.end(), m[1].str());
    if (it == months.end()) return text;
    int month = static_cast<int>(it - months.begin()) + 1;
    int hour = std::stoi(m[4].str()) % 12;
    if (m[7] == "PM") hour += 12;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%02d-%02d %02d:%s:%s", m[3].str().c_str(), month, std::stoi(m[2].str()), hour,
                  m[5].str().c_str(), m[6].str().c_str());
    return buf;
}

std::string first_href(const std::string& html) {
    static const std::regex re(R"re(href\s*=\s*["']([^"']+)["'])re", std::regex::icase);
    std::smatch m;
    return std::regex_search(html, m, re) ? decode_entities(m[1].str()) : std::string{};
}

std::string cell_text(const std::string& html) { return collapse_spaces(parsers::html_to_text(html)); }

std::vector<ExtractedTag> tag_addresses(const std::vector<std::string>& addresses, const Tag& tag) {
    std::vector<ExtractedTag> out;
    out.reserve(addresses.size());
    for (const auto& a : addresses) out.push_back({a, tag});
    return out;
}

}  // namespace

namespace parsers {

std::string html_to_text(std::string_view html) {
    static const std::regex drop(R"(<(script|style)\b[^>]*>[\s\S]*?</\1\s*>)", std::regex::icase);
    std::string cleaned = std::regex_replace(std::string(html), drop, " ");
    std::string out;
    out.reserve(cleaned.size());
    for (std::size_t i = 0; i < cleaned.size(); ++i) {
        if (cleaned[i] != '<') {
            out += cleaned[i];
            continue;
        }
        std::size_t close = cleaned.find('>', i);
        if (close == std::string::npos) break;
        std::string_view tag = std::string_view(cleaned).substr(i + 1, close - i - 1);
        bool block = tag.starts_with("br") || tag.starts_with("/p") || tag.starts_with("/div") ||
                     tag.starts_with("/tr") || tag.starts_with("li") || tag.starts_with("/h");
        out += block ? '\n' : ' ';
        i = close;
    }
    return decode_entities(out);
}

ParseResult bitcointalk(const SourceDocument& doc, const CurrencyProfile& profile) {
    static const std::regex row(
        R"re(<td[^>]*>\s*<b>\s*([^<:]+?)\s*:\s*</b>\s*</td>\s*<td[^>]*>([\s\S]*?)</td>)re", std::regex::icase);
    static const std::regex uid(R"re([?;&]u=(\d+))re");

    ParseResult result;
    std::map<std::string, std::string> fields;
    std::map<std::string, std::string> raw;
    for (std::sregex_iterator it(doc.body.begin(), doc.body.end(), row), end; it != end; ++it) {
        std::string label = ascii_lower(trim((*it)[1].str()));
        if (!fields.contains(label)) {
            fields[label] = cell_text((*it)[2].str());
            raw[label] = (*it)[2].str();
        }
    }
    if (!fields.contains("name")) {
        result.diagnostics.push_back({doc.uri, "bitcointalk: no profile Name field"});
        return result;
    }

    Json info = Json::object();
    std::smatch m;
    if (std::regex_search(doc.uri, m, uid) || std::regex_search(doc.body, m, uid)) {
        info["id"] = std::stoll(m[1].str());
    }
    info["account"] = fields["name"];
    auto put_int = [&](const char* label, const char* key) {
        auto f = fields.find(label);
        if (f == fields.end()) return;
        if (auto v = parse_int(f->second)) info[key] = *v;
        else result.diagnostics.push_back({doc.uri, std::string("bitcointalk: non-numeric ") + label});
    };
    put_int("posts", "num_posts");
    put_int("activity", "num_activities");
    if (fields.contains("position")) info["position"] = fields["position"];
    if (fields.contains("date registered")) info["date_registered"] = normalize_forum_date(fields["date registered"]);
    if (fields.contains("last active")) info["last_seen"] = normalize_forum_date(fields["last active"]);
    if (fields.contains("website")) {
        std::string href = first_href(raw["website"]);
        std::string value = href.empty() ? fields["website"] : href;
        if (!value.empty()) info["website"] = value;
    }
    for (const char* optional : {"gender", "age", "location"}) {
        auto f = fields.find(optional);
        if (f != fields.end() && !f->second.empty() && f->second != "N/A") info[optional] = f->second;
    }

    Tag tag{TagType::user, "bitcointalk", std::move(info)};
    result.tags = tag_addresses(extract_addresses(html_to_text(doc.body) + "\n" + doc.body, profile), tag);
    return result;
}

namespace {

void twitter_record(const Json& rec, const SourceDocument& doc, const CurrencyProfile& profile, ParseResult& out) {
    if (!rec.is_object()) {
        out.diagnostics.push_back({doc.uri, "twitter: record is not an object"});
        return;
    }
    std::string text;
    if (auto f = rec.find("full_text"); f != rec.end() && f->is_string()) text = f->get<std::string>();
    else if (auto t = rec.find("text"); t != rec.end() && t->is_string()) text = t->get<std::string>();
    auto user = rec.find("user");
    if (user == rec.end() || !user->is_object()) {
        out.diagnostics.push_back({doc.uri, "twitter: record without user"});
        return;
    }
    Json info = Json::object();
    if (auto id = user->find("id"); id != user->end() && id->is_number_integer()) info["id"] = *id;
    else if (auto ids = user->find("id_str"); ids != user->end() && ids->is_string())
        info["id"] = std::stoll(ids->get<std::string>());
    if (auto sn = user->find("screen_name"); sn != user->end() && sn->is_string()) info["account"] = *sn;
    Tag tag{TagType::user, "twitter", std::move(info)};
    for (auto& e : tag_addresses(extract_addresses(text, profile), tag)) out.tags.push_back(std::move(e));
}

}  // namespace

ParseResult twitter(const SourceDocument& doc, const CurrencyProfile& profile) {
    ParseResult result;
    std::vector<Json> records;
    try {
        Json j = Json::parse(doc.body);
        if (j.is_array()) {
            for (auto& r : j) records.push_back(r);
        } else if (j.is_object() && j.contains("statuses") && j["statuses"].is_array()) {
            for (auto& r : j["statuses"]) records.push_back(r);
        } else {
            records.push_back(j);
        }
    } catch (const Json::parse_error&) {
        // JSON lines
        std::size_t start = 0, lineno = 0;
        while (start < doc.body.size()) {
            std::size_t nl = doc.body.find('\n', start);
            std::string line = trim(std::string_view(doc.body).substr(start, nl == std::string::npos ? nl : nl - start));
            ++lineno;
            if (!line.empty()) {
                try {
                    records.push_back(Json::parse(line));
                } catch (const Json::parse_error& e) {
                    result.diagnostics.push_back({doc.uri, "twitter: line " + std::to_string(lineno) + ": " + e.what()});
                }
            }
            if (nl == std::string::npos) break;
            start = nl + 1;
        }
    }
    for (const auto& r : records) twitter_record(r, doc, profile, result);
    return result;
}

ParseResult tor_ahmia(const SourceDocument& doc, const CurrencyProfile& profile) {
    static const std::regex title(R"(<title[^>]*>([\s\S]*?)</title>)", std::regex::icase);
    static const std::regex onion(R"(([a-z2-7]{56}|[a-z2-7]{16})\.onion)");
    ParseResult result;
    std::smatch m;
    std::string provider;
    if (std::regex_search(doc.body, m, title)) provider = collapse_spaces(decode_entities(m[1].str()));
    if (provider.empty()) {
        result.diagnostics.push_back({doc.uri, "tor-ahmia: landing page without a title"});
        return result;
    }
    std::string host;
    if (std::regex_search(doc.uri, m, onion) || std::regex_search(doc.body, m, onion)) host = m[0].str();
    Json info = Json::object();
    info["provider"] = provider;
    info["onion"] = host;
    Tag tag{TagType::service, "tor", std::move(info)};
    result.tags = tag_addresses(extract_addresses(html_to_text(doc.body) + "\n" + doc.body, profile), tag);
    return result;
}

ParseResult blockchain_info(const SourceDocument& doc, const CurrencyProfile& profile) {
    ParseResult result;
    auto add = [&](const std::string& address, const std::string& label, bool is_signed) {
        if (!profile.is_valid(address)) return;
        Json info = Json::object();
        info["label"] = label;
        info["signed"] = is_signed;
        result.tags.push_back({address, Tag{TagType::text, "blockchain.info", std::move(info)}});
    };

    if (doc.media == Media::json) {
        try {
            Json j = Json::parse(doc.body);
            const Json& list = j.is_object() && j.contains("tags") ? j["tags"] : j;
            if (!list.is_array()) throw std::runtime_error("expected an array of labels");
            for (const auto& e : list) {
                if (!e.is_object() || !e.contains("address") || !e.contains("label")) continue;
                add(e["address"].get<std::string>(), e["label"].get<std::string>(), e.value("signed", false));
            }
        } catch (const std::exception& e) {
            result.diagnostics.push_back({doc.uri, std::string("blockchain.info: ") + e.what()});
        }
        return result;
    }

    static const std::regex row(R"(<tr\b[^>]*>([\s\S]*?)</tr>)", std::regex::icase);
    static const std::regex label(R"re(<span[^>]*class\s*=\s*["'][^"']*\btag\b[^"']*["'][^>]*>([\s\S]*?)</span>)re",
                                  std::regex::icase);
    static const std::regex tick(R"(green_tick|class\s*=\s*["'][^"']*\bsigned\b)", std::regex::icase);
    bool any_row = false;
    for (std::sregex_iterator it(doc.body.begin(), doc.body.end(), row), end; it != end; ++it) {
        std::string cells = (*it)[1].str();
        std::smatch lm;
        if (!std::regex_search(cells, lm, label)) continue;
        any_row = true;
        std::string text = collapse_spaces(html_to_text(lm[1].str()));
        bool is_signed = std::regex_search(cells, tick);
        for (const auto& a : extract_addresses(cells, profile)) add(a, text, is_signed);
    }
    if (!any_row) result.diagnostics.push_back({doc.uri, "blockchain.info: no label rows"});
    return result;
}

}  // namespace parsers

ParserRegistry::ParserRegistry() = default;

void ParserRegistry::register_parser(std::string source, TagType type, SourceParser parser) {
    parsers_[std::move(source)] = Entry{type, std::move(parser)};
}

bool ParserRegistry::contains(std::string_view source) const { return parsers_.find(source) != parsers_.end(); }

TagType ParserRegistry::type_of(std::string_view source) const {
    auto it = parsers_.find(source);
    if (it == parsers_.end()) throw ValidationError("source", "no parser registered for '" + std::string(source) + "'");
    return it->second.type;
}

std::vector<std::string> ParserRegistry::sources() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : parsers_) out.push_back(name);
    return out;
}

ParseResult ParserRegistry::parse(const SourceDocument& doc, std::string_view source,
                                  const CurrencyProfile& profile) const {
    auto it = parsers_.find(source);
    if (it == parsers_.end()) return {{}, {{doc.uri, "no parser registered for '" + std::string(source) + "'"}}};
    try {
        return it->second.parser(doc, profile);
    } catch (const std::exception& e) {
        return {{}, {{doc.uri, std::string(source) + ": " + e.what()}}};
    }
}

const ParserRegistry& ParserRegistry::builtin() {
    static const ParserRegistry registry = [] {
        ParserRegistry r;
        r.register_parser("bitcointalk", TagType::user, parsers::bitcointalk);
        r.register_parser("twitter", TagType::user, parsers::twitter);
        r.register_parser("tor-ahmia", TagType::service, parsers::tor_ahmia);
        r.register_parser("blockchain.info", TagType::text, parsers::blockchain_info);
        return r;
    }();
    return registry;
}

ParseResult parse_source(const SourceDocument& doc, std::string_view source, const CurrencyProfile& profile) {
    return ParserRegistry::builtin().parse(doc, source, profile);
}

}  // namespace chaintag
