#include <atomic>
#include <chrono>
#include <thread>

#include "chaintag/crawler.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "httplib.h"

using namespace chaintag;
using testsupport::fixture;
using testsupport::slurp;
using testsupport::TempDir;

namespace {

const std::string kGenesis = "1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa";

SourceDocument doc_from(const std::string& rel, Media media) {
    return SourceDocument{fixture(rel).string(), slurp(fixture(rel)), media, 0};
}

CrawlerConfig forum_config() {
    CrawlerConfig c;
    c.type = TagType::user;
    c.source = "bitcointalk";
    c.data = fixture("bt");
    return c;
}

}  // namespace

TEST_SUITE("crawler") {

TEST_CASE("address extraction") {
    CHECK(extract_addresses("Donate: 1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa !") == std::vector<std::string>{kGenesis});
    CHECK(extract_addresses("0OIl0OIl0OIl0OIl0OIl0OIl0OIl").empty());
    CHECK(extract_addresses("1abc").empty());
    // too long runs are not truncated into a match
    CHECK(extract_addresses(kGenesis + "abcdefgh").empty());
    // document order, first occurrence only
    const std::string p2sh = "3J98t1WpEZ73CNmQviecrnyiWrnqRhWNLy";
    CHECK(extract_addresses(p2sh + " " + kGenesis + " " + p2sh) == std::vector<std::string>{p2sh, kGenesis});
    CHECK(extract_addresses("L" + std::string(33, 'a'), CurrencyProfile::litecoin()).size() == 1);
    CHECK(extract_addresses("L" + std::string(33, 'a')).empty());
}

TEST_CASE("forum profile yields the satoshi tag") {
    auto r = parsers::bitcointalk(doc_from("bt/bitcointalk/3.html", Media::html), CurrencyProfile::bitcoin());
    REQUIRE(r.tags.size() == 1);
    CHECK(r.tags[0].address == kGenesis);
    CHECK(r.tags[0].tag.info["account"] == "satoshi");
    CHECK(r.tags[0].tag.info["num_posts"] == 575);
    auto expected = Tag::from_json(Json::parse(slurp(fixture("satoshi.json")))[0]);
    CHECK(r.tags[0].tag == expected);

    auto none = parsers::bitcointalk(doc_from("bt/bitcointalk/1002.html", Media::html), CurrencyProfile::bitcoin());
    CHECK(none.tags.empty());
}

TEST_CASE("twitter statuses") {
    auto r = parse_source(doc_from("crawl/twitter/statuses.json", Media::json), "twitter");
    REQUIRE(r.tags.size() == 1);
    CHECK(r.tags[0].address == "1TwitterTipzzzzzzzzzzzzzzzzzzzzzzz");
    CHECK(r.tags[0].tag.info == Json{{"id", 101}, {"account", "alice_tw"}});
    CHECK(parse_source(doc_from("crawl/twitter/no_address.json", Media::json), "twitter").tags.empty());

    SourceDocument lines{"mem", "{\"text\":\"pay " + kGenesis + "\",\"user\":{\"id_str\":\"9\",\"screen_name\":\"x\"}}\nnot json\n",
                         Media::json, 0};
    auto jl = parse_source(lines, "twitter");
    CHECK(jl.tags.size() == 1);
    CHECK(jl.diagnostics.size() == 1);
}

TEST_CASE("onion landing page") {
    auto r = parse_source(doc_from("crawl/tor-ahmia/silkroad.html", Media::html), "tor-ahmia");
    REQUIRE(r.tags.size() == 2);
    CHECK(r.tags[0].tag.info["provider"] == "Silk Road");
    CHECK(r.tags[1].tag.info["provider"] == "Silk Road");
    CHECK(r.tags[0].tag.info["onion"] == "silkroad7rn2puhj.onion");
    CHECK(r.tags[0].address != r.tags[1].address);
    CHECK(r.tags[0].tag.type == TagType::service);
}

TEST_CASE("label table") {
    auto r = parse_source(doc_from("crawl/blockchain.info/tags.html", Media::html), "blockchain.info");
    REQUIRE(r.tags.size() == 2);
    CHECK(r.tags[0].tag.info == Json{{"label", "mmm global"}, {"signed", true}});
    CHECK(r.tags[1].tag.info == Json{{"label", "MMM India"}, {"signed", false}});
}

TEST_CASE("parsers report bad documents instead of throwing") {
    SourceDocument junk{"junk", "<html>nothing here</html>", Media::html, 0};
    for (const auto& src : ParserRegistry::builtin().sources()) {
        ParseResult r;
        CHECK_NOTHROW(r = parse_source(junk, src));
        CHECK(r.tags.empty());
    }
    auto unknown = parse_source(junk, "nosuchsource");
    CHECK(unknown.tags.empty());
    REQUIRE(unknown.diagnostics.size() == 1);
    CHECK(unknown.diagnostics[0].message.find("nosuchsource") != std::string::npos);
}

TEST_CASE("html to text") {
    CHECK(parsers::html_to_text("<p>a&amp;b</p><div>c&lt;d</div>").find("a&b") != std::string::npos);
    CHECK(parsers::html_to_text("x<br>y").find('\n') != std::string::npos);
}

TEST_CASE("bootstrap crawl counts and idempotence") {
    TempDir dir;
    TagStore store(dir / "tags.jsonl");
    auto first = run_crawl(store, forum_config(), nullptr, true);
    CHECK(first.documents == 3);
    CHECK(first.tags_created == 2);
    CHECK(first.tags_updated == 0);
    auto second = run_crawl(store, forum_config(), nullptr, true);
    CHECK(second.documents == 3);
    CHECK(second.tags_created == 0);
    CHECK(second.tags_updated == 0);
    CHECK(store.tags_at(TagKey::make(Level::address, kGenesis)).size() == 1);
}

TEST_CASE("empty bootstrap directory") {
    TempDir dir;
    std::filesystem::create_directories(dir / "empty");
    TagStore store(dir / "tags.jsonl");
    auto c = forum_config();
    c.data = dir / "empty";
    auto s = run_crawl(store, c, nullptr, true);
    CHECK(s.documents == 0);
    CHECK(s.tags_created == 0);
}

TEST_CASE("changed info for the same identity counts as an update") {
    TempDir dir;
    TagStore store(dir / "tags.jsonl");
    auto c = forum_config();
    auto doc = [](int posts) {
        return Fetcher::Item{SourceDocument{"mem", "<table><tr><td><b>Name:</b></td><td>satoshi</td></tr><tr><td><b>Posts:</b></td><td>" +
                                                       std::to_string(posts) + "</td></tr></table>" + kGenesis,
                                            Media::html, 0},
                             ""};
    };
    StaticFetcher a({doc(10)});
    auto s1 = run_crawl(store, c, a);
    CHECK(s1.tags_created == 1);
    StaticFetcher b({doc(11), Fetcher::Item{std::nullopt, "timeout"}});
    auto s2 = run_crawl(store, c, b);
    CHECK(s2.tags_created == 0);
    CHECK(s2.tags_updated == 1);
    CHECK(s2.documents == 1);
    REQUIRE(s2.diagnostics.size() == 1);
    CHECK(s2.diagnostics[0].message == "timeout");
}

TEST_CASE("config validation") {
    auto j = Json::parse(R"({"type":"user","source":"bitcointalk","schedule":"0 0 * * *","data":"x"})");
    auto c = CrawlerConfig::from_json(j);
    CHECK(c.source == "bitcointalk");
    CHECK_NOTHROW(c.validate());
    c.schedule = "61 0 * * *";
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.schedule = "0 0 * * *";
    c.type = TagType::service;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.type = TagType::user;
    c.currency = "dogecoin";
    CHECK_THROWS_AS(c.validate(), ValidationError);
    CHECK_THROWS_AS(CrawlerConfig::from_json(Json::parse(R"({"source":"twitter"})")), ValidationError);
}

TEST_CASE("robots rules") {
    auto r = RobotsRules::parse("User-agent: other\nDisallow: /\n\nUser-agent: *\nDisallow: /private\nAllow: /private/ok\n",
                                "chaintag-crawler");
    CHECK(r.allowed("/public"));
    CHECK_FALSE(r.allowed("/private/x"));
    CHECK(r.allowed("/private/ok/y"));
    auto mine = RobotsRules::parse("User-agent: chaintag-crawler\nDisallow: /a\n\nUser-agent: *\nDisallow: /\n", "chaintag-crawler");
    CHECK(mine.allowed("/b"));
    CHECK_FALSE(mine.allowed("/a"));
}

TEST_CASE("scheduler fires on the cron boundary and bootstraps once") {
    TempDir dir;
    TagStore store(dir / "tags.jsonl");
    ManualClock clock(*parse_iso_utc("2018-03-19T10:07:00Z"));
    CrawlScheduler sched(store, clock);
    std::vector<std::pair<UnixTime, CrawlSummary>> runs;
    sched.on_run([&](const std::string&, UnixTime at, const CrawlSummary& s) { runs.emplace_back(at, s); });
    sched.add(forum_config());
    CHECK(sched.run_pending() == 0);
    CHECK(sched.next_fire() == *parse_iso_utc("2018-03-20T00:00:00Z"));
    sched.run(2);
    REQUIRE(runs.size() == 2);
    CHECK(runs[0].first == *parse_iso_utc("2018-03-20T00:00:00Z"));
    CHECK(runs[0].second.documents == 3);
    CHECK(runs[0].second.tags_created == 2);
    CHECK(runs[1].first == *parse_iso_utc("2018-03-21T00:00:00Z"));
    CHECK(runs[1].second.documents == 0);
    CHECK_THROWS_AS(sched.add(forum_config()), ValidationError);
}

TEST_CASE("http fetcher honours robots.txt and the request delay") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Get("/robots.txt", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content("User-agent: *\nDisallow: /private\n", "text/plain");
    });
    server.Get(R"(/page/(\d+))", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        res.set_content("<p>" + kGenesis + " page " + req.matches[1].str() + "</p>", "text/html");
    });
    server.Get("/private/x", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.set_content("secret", "text/plain");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    std::string base = "http://127.0.0.1:" + std::to_string(port);

    HttpFetcher::Options opt;
    opt.min_delay = std::chrono::milliseconds(150);
    HttpFetcher f({base + "/page/1", base + "/private/x", base + "/page/2", base + "/missing"}, opt);
    auto start = std::chrono::steady_clock::now();
    std::vector<Fetcher::Item> items;
    while (auto it = f.next()) items.push_back(*it);
    auto elapsed = std::chrono::steady_clock::now() - start;
    server.stop();
    t.join();

    REQUIRE(items.size() == 4);
    CHECK(items[0].doc);
    CHECK_FALSE(items[1].doc);
    CHECK(items[1].error.find("robots") != std::string::npos);
    CHECK(items[2].doc);
    CHECK_FALSE(items[3].doc);
    CHECK(hits == 2);
    // robots.txt, two pages and the 404: four requests, three gaps
    CHECK(f.requests_made() == 4);
    CHECK(elapsed >= std::chrono::milliseconds(3 * 150));

    TempDir dir;
    TagStore store(dir / "tags.jsonl");
    CrawlerConfig c;
    c.type = TagType::service;
    c.source = "tor-ahmia";
    StaticFetcher replay({items[0], items[1]});
    auto s = run_crawl(store, c, replay);
    CHECK(s.documents == 1);
    CHECK(s.diagnostics.size() >= 1);
}

}  // TEST_SUITE
