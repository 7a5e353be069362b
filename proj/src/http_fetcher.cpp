#include <map>
#include <regex>
#include <thread>

#include "chaintag/crawler.hpp"
#include "httplib.h"

namespace chaintag {

struct HttpFetcher::Impl {
    std::map<std::string, RobotsRules> robots;  // by scheme://host:port
    std::optional<std::chrono::steady_clock::time_point> last_request;
};

namespace {

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;    // starts with '/'
};

std::optional<Url> split_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/?#]+)([^#]*)$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(url, m, re)) return std::nullopt;
    Url u{m[1].str(), m[2].str()};
    if (u.path.empty()) u.path = "/";
    return u;
}

}  // namespace

HttpFetcher::HttpFetcher(std::vector<std::string> urls, Options options)
    : impl_(std::make_unique<Impl>()), urls_(std::move(urls)), options_(std::move(options)) {}

HttpFetcher::~HttpFetcher() = default;

std::optional<Fetcher::Item> HttpFetcher::next() {
    if (pos_ >= urls_.size()) return std::nullopt;
    const std::string url = urls_[pos_++];
    auto parts = split_url(url);
    if (!parts) return Item{std::nullopt, "unsupported URL " + url};

    httplib::Client client(parts->origin);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_follow_location(true);
    httplib::Headers headers{{"User-Agent", options_.user_agent}};

    auto polite_get = [&](const std::string& path) {
        if (impl_->last_request) {
            auto ready = *impl_->last_request + options_.min_delay;
            std::this_thread::sleep_until(ready);
        }
        auto res = client.Get(path, headers);
        impl_->last_request = std::chrono::steady_clock::now();
        ++requests_;
        return res;
    };

    auto robots = impl_->robots.find(parts->origin);
    if (robots == impl_->robots.end()) {
        RobotsRules rules;
        if (auto res = polite_get("/robots.txt"); res && res->status == 200)
            rules = RobotsRules::parse(res->body, options_.user_agent);
        robots = impl_->robots.emplace(parts->origin, std::move(rules)).first;
    }
    if (!robots->second.allowed(parts->path)) return Item{std::nullopt, "robots.txt disallows " + url};

    auto res = polite_get(parts->path);
    if (!res) return Item{std::nullopt, "GET " + url + " failed: " + httplib::to_string(res.error())};
    if (res->status != 200) return Item{std::nullopt, "GET " + url + " returned HTTP " + std::to_string(res->status)};

    SourceDocument doc;
    doc.uri = url;
    doc.body = res->body;
    std::string type = res->get_header_value("Content-Type");
    doc.media = (type.find("json") != std::string::npos || parts->path.ends_with(".json")) ? Media::json : Media::html;
    doc.fetched_at = SystemClock{}.now();
    return Item{std::move(doc), {}};
}

}  // namespace chaintag
