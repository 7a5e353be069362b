#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "chaintag/crawler.hpp"
#include "chaintag/error.hpp"

namespace chaintag {

CrawlerConfig CrawlerConfig::from_json(const Json& j, Level level) {
    if (!j.is_object()) throw ValidationError("config", "crawler config must be an object");
    CrawlerConfig c;
    c.level = level;
    if (auto it = j.find("level"); it != j.end()) {
        auto l = level_from_string(it->get<std::string>());
        if (!l) throw ValidationError("config.level", "unknown level");
        c.level = *l;
    }
    auto type = j.find("type");
    if (type == j.end() || !type->is_string()) throw ValidationError("config.type", "missing tag type");
    auto t = tag_type_from_string(type->get<std::string>());
    if (!t) throw ValidationError("config.type", "invalid tag type '" + type->get<std::string>() + "'");
    c.type = *t;
    auto source = j.find("source");
    if (source == j.end() || !source->is_string()) throw ValidationError("config.source", "missing source");
    c.source = source->get<std::string>();
    if (auto s = j.find("schedule"); s != j.end()) c.schedule = s->get<std::string>();
    if (auto d = j.find("data"); d != j.end() && d->is_string()) c.data = d->get<std::string>();
    if (auto cur = j.find("currency"); cur != j.end()) c.currency = cur->get<std::string>();
    return c;
}

void CrawlerConfig::validate(const ParserRegistry& registry) const {
    Schedule::parse(schedule);
    CurrencyProfile::by_name(currency);
    TagType registered = registry.type_of(source);
    if (registered != type)
        throw ValidationError("config.type", "source '" + source + "' produces " + std::string(to_string(registered)) +
                                                 " tags, not " + std::string(to_string(type)));
    if (level != Level::address)
        throw ValidationError("config.level", "crawlers extract address tags; level must be 'address'");
}

DirectoryFetcher::DirectoryFetcher(std::filesystem::path data, std::string_view source, UnixTime fetched_at)
    : fetched_at_(fetched_at) {
    namespace fs = std::filesystem;
    fs::path dir = data / std::string(source);
    if (!fs::is_directory(dir)) dir = data;
    if (!fs::is_directory(dir)) return;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension();
        if (ext == ".html" || ext == ".htm" || ext == ".json") files_.push_back(entry.path());
    }
    std::sort(files_.begin(), files_.end());
}

std::optional<Fetcher::Item> DirectoryFetcher::next() {
    if (pos_ >= files_.size()) return std::nullopt;
    const auto& path = files_[pos_++];
    std::ifstream in(path, std::ios::binary);
    if (!in) return Item{std::nullopt, "cannot read " + path.string()};
    std::ostringstream body;
    body << in.rdbuf();
    SourceDocument doc;
    doc.uri = "file://" + path.string();
    doc.body = body.str();
    doc.media = path.extension() == ".json" ? Media::json : Media::html;
    doc.fetched_at = fetched_at_;
    return Item{std::move(doc), {}};
}

std::optional<Fetcher::Item> StaticFetcher::next() {
    if (pos_ >= items_.size()) return std::nullopt;
    return items_[pos_++];
}

RobotsRules RobotsRules::parse(std::string_view text, std::string_view user_agent) {
    // Groups: consecutive User-agent lines followed by rules. A group naming our agent beats '*'.
    struct Group {
        std::vector<std::string> agents;
        std::vector<std::pair<std::string, bool>> rules;
    };
    std::vector<Group> groups;
    bool in_agents = false;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string field = ascii_lower(line.substr(0, colon));
        field.erase(std::remove_if(field.begin(), field.end(), ::isspace), field.end());
        std::string value = line.substr(colon + 1);
        auto b = value.find_first_not_of(" \t\r");
        auto e = value.find_last_not_of(" \t\r");
        value = b == std::string::npos ? "" : value.substr(b, e - b + 1);
        if (field == "user-agent") {
            if (!in_agents) groups.emplace_back();
            groups.back().agents.push_back(ascii_lower(value));
            in_agents = true;
        } else if (field == "allow" || field == "disallow") {
            in_agents = false;
            if (groups.empty()) continue;
            if (field == "disallow" && value.empty()) continue;  // "Disallow:" allows everything
            groups.back().rules.emplace_back(value, field == "allow");
        }
    }
    std::string agent = ascii_lower(user_agent);
    const Group* chosen = nullptr;
    for (const auto& g : groups) {
        for (const auto& a : g.agents) {
            if (a != "*" && agent.find(a) != std::string::npos) chosen = &g;
        }
        if (chosen) break;
    }
    if (!chosen) {
        for (const auto& g : groups)
            if (std::find(g.agents.begin(), g.agents.end(), "*") != g.agents.end()) {
                chosen = &g;
                break;
            }
    }
    RobotsRules r;
    if (chosen) r.rules_ = chosen->rules;
    return r;
}

bool RobotsRules::allowed(std::string_view path) const {
    std::size_t best = 0;
    bool allow = true;
    for (const auto& [prefix, is_allow] : rules_) {
        if (!path.starts_with(prefix)) continue;
        if (prefix.size() > best || (prefix.size() == best && is_allow)) {
            best = prefix.size();
            allow = is_allow;
        }
    }
    return allow;
}

namespace {

void merge(CrawlSummary& into, CrawlSummary&& from) {
    into.documents += from.documents;
    into.tags_created += from.tags_created;
    into.tags_updated += from.tags_updated;
    for (auto& d : from.diagnostics) into.diagnostics.push_back(std::move(d));
}

}  // namespace

CrawlSummary run_crawl(TagStore& store, const CrawlerConfig& config, Fetcher& fetcher, const ParserRegistry& registry) {
    config.validate(registry);
    const CurrencyProfile& profile = CurrencyProfile::by_name(config.currency);
    CrawlSummary summary;
    while (auto item = fetcher.next()) {
        if (!item->doc) {
            summary.diagnostics.push_back({"", item->error});
            continue;
        }
        ++summary.documents;
        ParseResult parsed = registry.parse(*item->doc, config.source, profile);
        for (auto& d : parsed.diagnostics) summary.diagnostics.push_back(std::move(d));
        for (const auto& extracted : parsed.tags) {
            if (!profile.is_valid(extracted.address)) {
                summary.diagnostics.push_back({item->doc->uri, "parser emitted invalid address " + extracted.address});
                continue;
            }
            TagKey key{Level::address, extracted.address};
            std::vector<Tag> existing = store.tags_at(key);
            if (std::find(existing.begin(), existing.end(), extracted.tag) != existing.end()) continue;
            const std::string id = extracted.tag.id();
            bool supersedes = std::any_of(existing.begin(), existing.end(), [&](const Tag& t) {
                return t.type == extracted.tag.type && t.source == extracted.tag.source && t.id() == id;
            });
            try {
                store.put_tags(key, {extracted.tag}, true);
            } catch (const Error& e) {
                throw CrawlAborted(std::string("tag store failure: ") + e.what(), std::move(summary));
            }
            ++(supersedes ? summary.tags_updated : summary.tags_created);
        }
    }
    return summary;
}

CrawlSummary run_crawl(TagStore& store, const CrawlerConfig& config, Fetcher* live, bool bootstrap,
                       const ParserRegistry& registry) {
    config.validate(registry);
    CrawlSummary total;
    if (bootstrap && config.data) {
        DirectoryFetcher dir(*config.data, config.source);
        merge(total, run_crawl(store, config, dir, registry));
    }
    if (live) {
        try {
            merge(total, run_crawl(store, config, *live, registry));
        } catch (const CrawlAborted& e) {
            CrawlSummary partial = e.partial();
            merge(total, std::move(partial));
            throw CrawlAborted(e.what(), std::move(total));
        }
    }
    return total;
}

UnixTime SystemClock::now() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

void SystemClock::sleep_until(UnixTime t) {
    std::this_thread::sleep_until(std::chrono::system_clock::time_point{std::chrono::seconds{t}});
}

CrawlScheduler::CrawlScheduler(TagStore& store, Clock& clock, const ParserRegistry& registry)
    : store_(store), clock_(clock), registry_(registry) {}

void CrawlScheduler::add(CrawlerConfig config, FetcherFactory live) {
    config.validate(registry_);
    for (const auto& j : jobs_)
        if (j.config.source == config.source && j.config.level == config.level)
            throw ValidationError("config.source", "a crawler for '" + config.source + "' at this level is already scheduled");
    Schedule schedule = Schedule::parse(config.schedule);
    auto next = schedule.next_fire_after(clock_.now() - 1);
    jobs_.push_back(Job{std::move(config), std::move(schedule), std::move(live), next});
}

std::size_t CrawlScheduler::run_pending() {
    UnixTime now = clock_.now();
    std::size_t ran = 0;
    for (auto& job : jobs_) {
        if (!job.next || *job.next > now || job.in_flight) continue;
        job.in_flight = true;
        UnixTime fired = *job.next;
        CrawlSummary summary;
        try {
            std::unique_ptr<Fetcher> live = job.live ? job.live() : nullptr;
            summary = run_crawl(store_, job.config, live.get(), !job.bootstrapped, registry_);
        } catch (const CrawlAborted& e) {
            summary = e.partial();
            summary.diagnostics.push_back({"", e.what()});
        }
        job.bootstrapped = true;
        job.in_flight = false;
        job.next = job.schedule.next_fire_after(now);
        ++ran;
        if (listener_) listener_(job.config.source, fired, summary);
    }
    return ran;
}

std::optional<UnixTime> CrawlScheduler::next_fire() const {
    std::optional<UnixTime> best;
    for (const auto& j : jobs_)
        if (j.next && (!best || *j.next < *best)) best = j.next;
    return best;
}

void CrawlScheduler::run(std::size_t iterations) {
    for (std::size_t i = 0; i < iterations; ++i) {
        auto next = next_fire();
        if (!next) return;
        clock_.sleep_until(*next);
        run_pending();
    }
}

}  // namespace chaintag
