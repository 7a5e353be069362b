#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "chaintag/address.hpp"
#include "chaintag/cron.hpp"
#include "chaintag/error.hpp"
#include "chaintag/tags.hpp"
#include "chaintag/time_util.hpp"

namespace chaintag {

// Every maximal run of alphabet characters that starts with one of the profile's prefixes and
// whose length is in range, in document order, first occurrence only.
std::vector<std::string> extract_addresses(std::string_view text,
                                           const CurrencyProfile& profile = CurrencyProfile::bitcoin());

enum class Media { html, json };

struct SourceDocument {
    std::string uri;
    std::string body;
    Media media = Media::html;
    UnixTime fetched_at = 0;
};

struct ExtractedTag {
    std::string address;
    Tag tag;
};

struct Diagnostic {
    std::string uri;
    std::string message;
};

struct ParseResult {
    std::vector<ExtractedTag> tags;
    std::vector<Diagnostic> diagnostics;
};

using SourceParser = std::function<ParseResult(const SourceDocument&, const CurrencyProfile&)>;

// Source name -> parser. Built-ins: bitcointalk, twitter, tor-ahmia, blockchain.info.
class ParserRegistry {
public:
    ParserRegistry();

    void register_parser(std::string source, TagType type, SourceParser parser);
    bool contains(std::string_view source) const;
    // Tag type a source produces; throws ValidationError for unknown sources.
    TagType type_of(std::string_view source) const;
    std::vector<std::string> sources() const;

    // Never throws on bad documents: failures come back as diagnostics.
    ParseResult parse(const SourceDocument& doc, std::string_view source,
                      const CurrencyProfile& profile = CurrencyProfile::bitcoin()) const;

    static const ParserRegistry& builtin();

private:
    struct Entry {
        TagType type;
        SourceParser parser;
    };
    std::map<std::string, Entry, std::less<>> parsers_;
};

ParseResult parse_source(const SourceDocument& doc, std::string_view source,
                         const CurrencyProfile& profile = CurrencyProfile::bitcoin());

namespace parsers {
ParseResult bitcointalk(const SourceDocument& doc, const CurrencyProfile& profile);
ParseResult twitter(const SourceDocument& doc, const CurrencyProfile& profile);
ParseResult tor_ahmia(const SourceDocument& doc, const CurrencyProfile& profile);
ParseResult blockchain_info(const SourceDocument& doc, const CurrencyProfile& profile);

// Strips markup and decodes the common entities; block-level tags become newlines.
std::string html_to_text(std::string_view html);
}  // namespace parsers

struct CrawlerConfig {
    Level level = Level::address;
    TagType type = TagType::user;
    std::string source;
    std::string schedule = "0 0 * * *";
    std::optional<std::filesystem::path> data;
    std::string currency = "bitcoin";

    // Config objects: {"type","source","schedule","data","currency"}.
    static CrawlerConfig from_json(const Json& j, Level level = Level::address);
    // Throws ValidationError if the schedule does not parse or type/source is not registered.
    void validate(const ParserRegistry& registry = ParserRegistry::builtin()) const;
};

// Supplies documents for one crawl batch. next() returns nullopt when exhausted; a fetch failure
// is reported through the error string and the batch continues.
class Fetcher {
public:
    virtual ~Fetcher() = default;

    struct Item {
        std::optional<SourceDocument> doc;
        std::string error;
    };
    virtual std::optional<Item> next() = 0;
};

// Reads <data>/<source>/<doc-id>.(html|json), or <data>/<doc-id>.(html|json) when the source
// subdirectory does not exist, in file name order.
class DirectoryFetcher : public Fetcher {
public:
    DirectoryFetcher(std::filesystem::path data, std::string_view source, UnixTime fetched_at = 0);
    std::optional<Item> next() override;

private:
    std::vector<std::filesystem::path> files_;
    std::size_t pos_ = 0;
    UnixTime fetched_at_;
};

// Fixed in-memory document list.
class StaticFetcher : public Fetcher {
public:
    explicit StaticFetcher(std::vector<Item> items) : items_(std::move(items)) {}
    std::optional<Item> next() override;

private:
    std::vector<Item> items_;
    std::size_t pos_ = 0;
};

// Plain HTTP(S) GET over a URL list with a minimum delay between requests and robots.txt
// Disallow rules honored per host.
class HttpFetcher : public Fetcher {
public:
    struct Options {
        std::chrono::milliseconds min_delay{1000};
        std::string user_agent = "chaintag-crawler";
        std::chrono::seconds timeout{20};
    };

    HttpFetcher(std::vector<std::string> urls, Options options);
    HttpFetcher(std::vector<std::string> urls) : HttpFetcher(std::move(urls), Options{}) {}
    ~HttpFetcher() override;
    std::optional<Item> next() override;

    std::size_t requests_made() const noexcept { return requests_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::vector<std::string> urls_;
    Options options_;
    std::size_t pos_ = 0;
    std::size_t requests_ = 0;
};

// robots.txt subset: groups keyed by User-agent, Allow/Disallow path prefixes, longest match wins.
class RobotsRules {
public:
    static RobotsRules parse(std::string_view text, std::string_view user_agent);
    bool allowed(std::string_view path) const;

private:
    std::vector<std::pair<std::string, bool>> rules_;  // prefix, allow
};

struct CrawlSummary {
    std::size_t documents = 0;
    std::size_t tags_created = 0;
    std::size_t tags_updated = 0;
    std::vector<Diagnostic> diagnostics;
};

// Thrown when the tag store fails mid-batch; carries the counts up to the failure.
class CrawlAborted : public Error {
public:
    CrawlAborted(const std::string& what, CrawlSummary partial) : Error(what), partial_(std::move(partial)) {}
    const CrawlSummary& partial() const noexcept { return partial_; }

private:
    CrawlSummary partial_;
};

// Appends each extracted tag unless an identical (type, source, info) tag is already at the
// address. A tag whose Tag::id matches an existing tag with different info counts as updated.
CrawlSummary run_crawl(TagStore& store, const CrawlerConfig& config, Fetcher& fetcher,
                       const ParserRegistry& registry = ParserRegistry::builtin());

// Bootstraps from config.data (if set) and then drains the live fetcher, if any.
CrawlSummary run_crawl(TagStore& store, const CrawlerConfig& config, Fetcher* live, bool bootstrap,
                       const ParserRegistry& registry = ParserRegistry::builtin());

class Clock {
public:
    virtual ~Clock() = default;
    virtual UnixTime now() = 0;
    virtual void sleep_until(UnixTime t) = 0;
};

class SystemClock : public Clock {
public:
    UnixTime now() override;
    void sleep_until(UnixTime t) override;
};

// Virtual time for tests: sleep_until jumps forward.
class ManualClock : public Clock {
public:
    explicit ManualClock(UnixTime start) : now_(start) {}
    UnixTime now() override { return now_; }
    void sleep_until(UnixTime t) override {
        if (t > now_) now_ = t;
    }
    void advance(std::int64_t seconds) { now_ += seconds; }

private:
    UnixTime now_;
};

// Single-loop scheduler. Each job bootstraps on its first run only; at most one crawl per
// (source, level) is in flight.
class CrawlScheduler {
public:
    using FetcherFactory = std::function<std::unique_ptr<Fetcher>()>;
    using Listener = std::function<void(const std::string& source, UnixTime fired_at, const CrawlSummary&)>;

    CrawlScheduler(TagStore& store, Clock& clock, const ParserRegistry& registry = ParserRegistry::builtin());

    // Throws ValidationError for an invalid config or a second job on the same (source, level).
    void add(CrawlerConfig config, FetcherFactory live = nullptr);

    // Runs every job whose fire time is <= now; returns the number of crawls run.
    std::size_t run_pending();
    // Sleeps until the next fire time and runs due jobs, `iterations` times.
    void run(std::size_t iterations);

    std::optional<UnixTime> next_fire() const;
    void on_run(Listener listener) { listener_ = std::move(listener); }

private:
    struct Job {
        CrawlerConfig config;
        Schedule schedule;
        FetcherFactory live;
        std::optional<UnixTime> next;
        bool bootstrapped = false;
        bool in_flight = false;
    };

    TagStore& store_;
    Clock& clock_;
    const ParserRegistry& registry_;
    std::vector<Job> jobs_;
    Listener listener_;
};

}  // namespace chaintag
