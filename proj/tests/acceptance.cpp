// Acceptance report: one PASS/FAIL line per criterion.
//   acceptance            run everything, exit 1 if anything fails
//   acceptance --only N   run criterion N (repeatable)
//   acceptance --report   run everything, always exit 0
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "chaintag/clustering.hpp"
#include "chaintag/crawler.hpp"
#include "chaintag/graph.hpp"
#include "chaintag/query.hpp"
#include "helpers.hpp"
#include "oracles.hpp"
#include "synth.hpp"

using namespace chaintag;
using namespace testsupport;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double v, int prec = 3) {
    std::ostringstream os;
    os.precision(prec);
    os << std::fixed << v;
    return os.str();
}

Partition partition_of(const Chain& chain, const Clustering& c) {
    Partition p;
    for (const auto& cl : c.clusters()) {
        std::set<std::string> s;
        for (auto a : cl) s.insert(chain.address(a));
        p.insert(s);
    }
    return p;
}

// The clustering corpus shared by the first two criteria.
std::vector<Chain> clustering_corpus() {
    std::vector<Chain> out;
    Rng rng(1001);
    for (int i = 0; i < 100; ++i) {
        SynthOptions opt;
        opt.txs = 1 + rng() % 1000;
        opt.addresses = 2 + rng() % 299;
        opt.max_inputs = 4;
        opt.repeat_input_ratio = 0.1;
        auto addrs = synth_addresses(rng, opt.addresses);
        out.push_back(chain_from_text(synth_chain(rng, opt, addrs)));
    }
    return out;
}

Chain inputs_chain(const std::vector<std::vector<std::string>>& inputs) {
    const std::string sink = "1Sinkzzzzzzzzzzzzzzzzzzzzzzzzzzzzz";
    Json block = {{"height", 0}, {"hash", "00"}, {"time", "2015-01-01T00:00:00Z"}, {"txes", Json::array()}};
    int n = 0;
    for (const auto& ins : inputs) {
        Json tx = {{"hash", std::to_string(10 + n++)}, {"inputs", Json::array()}, {"outputs", Json::array()}};
        for (const auto& a : ins) tx["inputs"].push_back({{"address", a}, {"value", 1}});
        tx["outputs"].push_back({{"address", sink}, {"value", 1}});
        block["txes"].push_back(tx);
    }
    return chain_from_text(block.dump() + "\n");
}

Outcome ac1() {
    Outcome o;
    auto corpus = clustering_corpus();
    auto start = Clock::now();
    for (std::size_t i = 0; i < corpus.size() && o.pass; ++i) {
        auto got = partition_of(corpus[i], cluster_original(corpus[i], Side::inputs));
        o.require(got == oracle_fixpoint(corpus[i], Side::inputs), "partition differs on chain " + std::to_string(i));
    }
    double t = seconds_since(start);
    o.require(t < 10.0, "took " + fmt(t) + " s");
    if (o.pass) o.detail = "100 chains, " + fmt(t) + " s";
    return o;
}

Outcome ac2() {
    Outcome o;
    auto corpus = clustering_corpus();
    std::size_t clusters = 0;
    for (std::size_t i = 0; i < corpus.size() && o.pass; ++i) {
        const Chain& c = corpus[i];
        auto mini = cluster_minimal(c, Side::inputs);
        auto orig = cluster_original(c, Side::inputs);
        std::set<std::set<AddressId>> input_sets;
        for (const auto& tx : c.transactions()) {
            std::set<AddressId> s;
            for (const auto& io : tx.inputs) s.insert(io.address);
            if (!s.empty()) input_sets.insert(s);
        }
        std::set<AddressId> seen;
        for (const auto& cl : mini.clusters()) {
            ++clusters;
            for (auto a : cl) o.require(seen.insert(a).second, "clusters overlap on chain " + std::to_string(i));
            auto home = orig.cluster_id(cl.front());
            for (auto a : cl) o.require(home && orig.cluster_id(a) == home, "not inside an original cluster");
            o.require(input_sets.count(std::set<AddressId>(cl.begin(), cl.end())) == 1, "not a transaction input set");
        }
        o.require(partition_of(c, mini) == oracle_minimal(c, Side::inputs), "differs from the two-stage oracle");
    }
    const std::string A = "1ShareAzzzzzzzzzzzzzzzzzzzzzzzzzzz", B = "1ShareBzzzzzzzzzzzzzzzzzzzzzzzzzzz",
                      C = "1ShareCzzzzzzzzzzzzzzzzzzzzzzzzzzz", D = "1ShareDzzzzzzzzzzzzzzzzzzzzzzzzzzz";
    auto disjoint = inputs_chain({{A, B}, {C, D}});
    o.require(partition_of(disjoint, cluster_minimal(disjoint, Side::inputs)) == Partition{{A, B}, {C, D}},
              "{A,B},{C,D} example");
    auto overlap = inputs_chain({{A, B}, {B, C}});
    o.require(cluster_minimal(overlap, Side::inputs).size() == 0, "{A,B},{B,C} example");
    auto same = inputs_chain({{A, B}, {A, B}});
    o.require(partition_of(same, cluster_minimal(same, Side::inputs)) == Partition{{A, B}}, "{A,B},{A,B} example");
    if (o.pass) o.detail = std::to_string(clusters) + " minimal clusters checked, 3 examples";
    return o;
}

Outcome ac3() {
    Outcome o;
    Rng rng(3003);
    auto start = Clock::now();
    int queries = 0;
    std::size_t rows = 0;
    double engine_time = 0;
    for (int round = 0; round < 25 && o.pass; ++round) {
        TempDir dir;
        SynthOptions opt;
        opt.txs = 50 + rng() % 451;
        opt.addresses = 20 + rng() % 100;
        auto addrs = synth_addresses(rng, opt.addresses);
        auto chain = chain_from_text(synth_chain(rng, opt, addrs));
        TagStore store(dir / "tags.jsonl");
        OracleTags tags;
        for (auto& [a, list] : synth_tags(rng, addrs, 0.4)) {
            store.put_tags(TagKey::make(Level::address, a), list, false);
            tags.addresses[a] = list;
        }
        // a few tagged addresses that never appear on chain
        for (const auto& a : synth_addresses(rng, 3)) {
            std::vector<Tag> list{synth_tag(rng)};
            store.put_tags(TagKey::make(Level::address, a), list, false);
            tags.addresses[a] = list;
        }
        for (std::uint32_t h = 0; h < chain.blocks().size(); h += 1 + rng() % 4) {
            std::vector<Tag> list{synth_tag(rng)};
            store.put_tags(TagKey::make(Level::block, std::to_string(h)), list, false);
            tags.blocks[h] = list;
        }
        QueryEngine engine(chain, store);
        for (int i = 0; i < 20 && o.pass; ++i, ++queries) {
            Level level = i % 5 == 3 ? Level::address : i % 5 == 4 ? Level::block : Level::transaction;
            Json spec = synth_query(rng, level, addrs);
            auto q0 = Clock::now();
            auto got = canonical_rows(engine.execute(spec).to_json());
            engine_time += seconds_since(q0);
            auto want = canonical_rows(oracle_query(chain, tags, spec));
            rows += want.size();
            o.require(got == want, "mismatch on " + spec.dump());
        }
    }
    double t = seconds_since(start);
    o.require(t < 60.0, "took " + fmt(t) + " s");
    if (o.pass)
        o.detail = std::to_string(queries) + " queries, " + std::to_string(rows) + " rows, " + fmt(t) + " s (engine " +
                   fmt(engine_time) + " s)";
    return o;
}

Outcome ac4() {
    Outcome o;
    TempDir dir;
    auto chain = Chain::ingest(fixture("chain_linking.jsonl"));
    TagStore store(dir.copy("tags_linking.jsonl"));
    auto txs = [&](std::initializer_list<TxId> ids) {
        Json j = Json::array();
        for (auto id : ids) j.push_back(chain.tx(id).hash);
        return j;
    };
    auto row = [&](const char* account, const char* provider, Json list) {
        return Json{{"input.address.tag.info.account", account}, {"output.address.tag.info.provider", provider}, {"self.txes", list}};
    };
    Json plain_expected = Json::array({row("alice_tw", "Silk Road", txs({4, 5})), row("bob", "WikiLeaks", txs({6}))});
    Json expanded_expected = Json::array({row("alice_tw", "Silk Road", txs({4, 5})), row("bob", "WikiLeaks", txs({6})),
                                          row("carol", "WikiLeaks", txs({8}))});
    auto spec = parse_query_text(slurp(fixture("queries/link_users_services.json")));
    auto plain = execute(chain, store, parse_query(spec)).to_json();
    spec["clustering"] = {{"source", "inputs"}, {"method", "minimal"}};
    auto expanded = execute(chain, store, parse_query(spec)).to_json();
    o.require(canonical_rows(plain) == canonical_rows(plain_expected), "plain rows: " + plain.dump());
    o.require(canonical_rows(expanded) == canonical_rows(expanded_expected), "expanded rows: " + expanded.dump());
    if (o.pass) o.detail = "2 rows plain, 3 with minimal expansion";
    return o;
}

// Lifetime reported by the balance sheet for one service paid at `first` and paying out at `last`.
std::int64_t lifetime(const std::string& first, const std::string& last) {
    const std::string u = "1Payerzzzzzzzzzzzzzzzzzzzzzzzzzzzz", s = "1Servicezzzzzzzzzzzzzzzzzzzzzzzzzz";
    auto io = [](const std::string& a, int v) { return Json::array({Json{{"address", a}, {"value", v}}}); };
    std::string text;
    Json b0 = {{"height", 0}, {"hash", "00"}, {"time", "2009-01-03T18:15:05Z"},
               {"txes", Json::array({Json{{"hash", "c0"}, {"inputs", Json::array()}, {"outputs", io(u, 100)}}})}};
    Json b1 = {{"height", 1}, {"hash", "01"}, {"time", first},
               {"txes", Json::array({Json{{"hash", "a1"}, {"inputs", io(u, 10)}, {"outputs", io(s, 10)}}})}};
    Json b2 = {{"height", 2}, {"hash", "02"}, {"time", last},
               {"txes", Json::array({Json{{"hash", "a2"}, {"inputs", io(u, 10)}, {"outputs", io(s, 10)}}})}};
    auto chain = chain_from_text(b0.dump() + "\n" + b1.dump() + "\n" + b2.dump() + "\n");
    TempDir dir;
    TagStore store(dir / "tags.jsonl");
    store.put_tags(TagKey::make(Level::address, s), {Tag{TagType::service, "tor", Json{{"provider", "S"}}}}, false);
    auto rs = balance_sheet(chain, store, "tor");
    return *rs.at(0, "num_days").get_if<std::int64_t>();
}

Outcome ac5() {
    Outcome o;
    auto a = lifetime("2013-10-02T12:00:00Z", "2018-03-19T12:00:00Z");
    auto b = lifetime("2011-06-15T12:00:00Z", "2018-03-21T12:00:00Z");
    o.require(a == 1628 && b == 2470, "noon-to-noon gives " + std::to_string(a) + " and " + std::to_string(b) +
                                          " (expected 1628 and 2470)");
    // informational: a last payment just before noon gives the printed values
    auto a2 = lifetime("2013-10-02T12:00:00Z", "2018-03-19T11:59:59Z");
    auto b2 = lifetime("2011-06-15T12:00:00Z", "2018-03-21T11:59:59Z");
    std::string note = "; last payment at 11:59:59Z gives " + std::to_string(a2) + " and " + std::to_string(b2);
    if (o.pass) o.detail = "1628 and 2470";
    o.detail += note;
    return o;
}

TxGraph scaled(const TxGraph& g, double c) {
    TxGraph out;
    for (const auto& l : g.labels()) out.node(l);
    for (const auto& e : g.edges()) out.add_edge(e.from, e.to, static_cast<Satoshi>(std::llround(static_cast<double>(e.weight) * c)));
    return out;
}

Outcome ac6() {
    Outcome o;
    Rng rng(6006);
    std::vector<TxGraph> graphs;
    {
        TxGraph one;
        one.node("x");
        graphs.push_back(one);
        TxGraph two;
        two.node("a");
        two.node("b");
        two.add_edge(0, 1, 2);
        two.add_edge(1, 0, 2);
        graphs.push_back(two);
        TxGraph tri;
        for (auto l : {"a", "b", "c"}) tri.node(l);
        tri.add_edge(0, 1, 2);
        tri.add_edge(1, 2, 4);
        tri.add_edge(2, 0, 6);
        tri.add_edge(0, 2, 2);
        graphs.push_back(tri);
    }
    for (int i = 0; i < 30; ++i) {
        auto g = synth_graph(rng, 1 + rng() % 200, 0.005 + 0.05 * (i % 5) / 5.0, 500);
        graphs.push_back(scaled(g, 2.0));  // even weights, so halving stays exact
    }
    double worst_sum = 0, worst_oracle = 0, worst_scale = 0;
    for (std::size_t gi = 0; gi < graphs.size() && o.pass; ++gi) {
        const auto& g = graphs[gi];
        auto r = pagerank(g, {0.85, 1e-12, 10000});
        double sum = std::accumulate(r.scores.begin(), r.scores.end(), 0.0);
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        auto ref = oracle_pagerank(g, 0.85, 400);
        for (std::size_t v = 0; v < ref.size(); ++v) worst_oracle = std::max(worst_oracle, std::abs(ref[v] - r.scores[v]));
        std::vector<std::size_t> order(r.scores.size());
        std::iota(order.begin(), order.end(), 0);
        for (double c : {0.5, 3.0, 100.0}) {
            auto rc = pagerank(scaled(g, c), {0.85, 1e-12, 10000});
            for (std::size_t v = 0; v < r.scores.size(); ++v) worst_scale = std::max(worst_scale, std::abs(rc.scores[v] - r.scores[v]));
            // ranking: every pair ordered the same unless tied within tolerance
            for (std::size_t u = 0; u < order.size() && o.pass; ++u)
                for (std::size_t v = u + 1; v < order.size(); ++v) {
                    double d0 = r.scores[u] - r.scores[v], d1 = rc.scores[u] - rc.scores[v];
                    if (std::abs(d0) > 1e-9) o.require((d0 > 0) == (d1 > 0), "ranking changed under scaling");
                }
        }
        o.require(worst_sum < 1e-9, "sum off by " + std::to_string(worst_sum) + " on graph " + std::to_string(gi));
        o.require(worst_oracle < 1e-8, "oracle gap " + std::to_string(worst_oracle) + " on graph " + std::to_string(gi));
        o.require(worst_scale < 1e-9, "scaling gap " + std::to_string(worst_scale) + " on graph " + std::to_string(gi));
    }
    if (o.pass) {
        std::ostringstream os;
        os << graphs.size() << " graphs; max |sum-1| " << worst_sum << ", max oracle gap " << worst_oracle
           << ", max scaling gap " << worst_scale;
        o.detail = os.str();
    }
    return o;
}

Outcome ac7() {
    Outcome o;
    Rng rng(7007);
    for (int i = 0; i < 50 && o.pass; ++i) {
        std::size_t n = 1 + rng() % 200;
        double p = (1.0 + static_cast<double>(rng() % 30)) / (10.0 * static_cast<double>(n));
        auto g = synth_graph(rng, n, p);
        auto m = metrics(g);
        auto r = oracle_metrics(g);
        std::string at = " on graph " + std::to_string(i);
        o.require(m.wcc_nodes == r.wcc_nodes && m.wcc_edges == r.wcc_edges, "WCC" + at);
        o.require(m.scc_nodes == r.scc_nodes && m.scc_edges == r.scc_edges, "SCC" + at);
        o.require(m.triangles == r.triangles, "triangles" + at);
        o.require(m.pct_closed == r.pct_closed, "%closed" + at);
        o.require(m.avg_clustering == r.avg_clustering, "average clustering" + at);
        o.require(m.diameter == r.diameter && m.radius == r.radius, "diameter/radius" + at);
    }
    if (o.pass) o.detail = "50 digraphs, exact";
    return o;
}

Outcome ac8() {
    Outcome o;
    TempDir dir;
    Rng rng(8008);
    auto addrs = synth_addresses(rng, 120);
    std::vector<TagKey> keys;
    for (const auto& a : addrs) keys.push_back(TagKey::make(Level::address, a));
    for (int i = 0; i < 40; ++i) keys.push_back(TagKey::make(Level::transaction, random_hex(rng)));
    for (int i = 0; i < 40; ++i) keys.push_back(TagKey::make(Level::block, std::to_string(i * 7)));
    std::map<TagKey, std::vector<Tag>> model;
    std::set<TagKey> touched;
    std::map<TagKey, std::string> before;
    {
        TagStore store(dir / "tags.jsonl");
        for (int op = 0; op < 10000; ++op) {
            const TagKey& k = keys[rng() % keys.size()];
            touched.insert(k);
            auto r = rng() % 10;
            if (r < 3) {
                store.remove_tags(k);
                model.erase(k);
            } else {
                std::vector<Tag> tags;
                for (auto n = 1 + rng() % 3; n > 0; --n) tags.push_back(synth_tag(rng));
                bool append = r < 7;
                store.put_tags(k, tags, append);
                auto& m = model[k];
                if (!append) m.clear();
                m.insert(m.end(), tags.begin(), tags.end());
                if (m.empty()) model.erase(k);
            }
        }
        for (const auto& k : touched) {
            Json j = Json::array();
            for (const auto& e : store.get_tags(k, false)) j.push_back(e.tag.to_json());
            before[k] = j.dump();
        }
        store.close();
    }
    TagStore reopened(dir / "tags.jsonl");
    for (const auto& k : touched) {
        Json j = Json::array(), m = Json::array();
        for (const auto& e : reopened.get_tags(k, false)) j.push_back(e.tag.to_json());
        if (model.count(k))
            for (const auto& t : model[k]) m.push_back(t.to_json());
        o.require(j.dump() == before[k], "key " + k.id + " changed across reopen");
        o.require(j.dump() == m.dump(), "key " + k.id + " differs from the model");
    }
    if (o.pass) o.detail = "10000 operations, " + std::to_string(touched.size()) + " keys";
    return o;
}

Outcome ac9() {
    Outcome o;
    TempDir dir;
    TagStore store(dir / "tags.jsonl");
    CrawlerConfig cfg;
    cfg.type = TagType::user;
    cfg.source = "bitcointalk";
    cfg.data = fixture("bt");
    auto first = run_crawl(store, cfg, nullptr, true);
    auto second = run_crawl(store, cfg, nullptr, true);
    o.require(first.documents == 3 && first.tags_created == 2, "first crawl created " + std::to_string(first.tags_created));
    o.require(second.tags_created == 0 && second.tags_updated == 0, "rerun created " + std::to_string(second.tags_created));
    o.require(extract_addresses("Donate: 1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa !") ==
                  std::vector<std::string>{"1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa"},
              "genesis extraction");
    o.require(extract_addresses("0OIl0OIl0OIl0OIl0OIl0OIl0OIl").empty(), "excluded alphabet");
    o.require(extract_addresses("1abc").empty(), "short run");
    if (o.pass) o.detail = "rerun created 0; 3 extraction examples";
    return o;
}

Outcome ac10() {
    Outcome o;
    TempDir dir;
    Rng rng(1010);
    SynthOptions opt;
    opt.txs = 100000;
    opt.txs_per_block = 200;
    opt.addresses = 20000;
    auto addrs = synth_addresses(rng, opt.addresses);
    {
        std::ofstream out(dir / "chain.jsonl");
        out << synth_chain(rng, opt, addrs);
    }
    auto t0 = Clock::now();
    auto chain = Chain::ingest(dir / "chain.jsonl");
    double ingest = seconds_since(t0);
    o.require(chain.transactions().size() == 100000, "ingested " + std::to_string(chain.transactions().size()) + " txs");
    o.require(ingest < 30.0, "ingest took " + fmt(ingest) + " s");

    TagStore store(dir / "tags.jsonl");
    for (std::size_t i = 0; i < addrs.size(); ++i) {
        auto k = TagKey::make(Level::address, addrs[i]);
        if (i % 50 == 0)
            store.put_tags(k, {Tag{TagType::user, "twitter", Json{{"id", static_cast<int>(i)}, {"account", "u" + std::to_string(i)}}}}, false);
        else if (i % 199 == 0)
            store.put_tags(k, {Tag{TagType::service, "tor", Json{{"provider", "p" + std::to_string(i)}}}}, false);
    }
    auto spec = parse_query_text(slurp(fixture("queries/link_users_services.json")));
    auto t1 = Clock::now();
    auto rs = execute(chain, store, parse_query(spec));
    double query = seconds_since(t1);
    o.require(query < 5.0, "query took " + fmt(query) + " s");
    o.detail = (o.pass ? "" : o.detail + "; ") + "ingest " + fmt(ingest) + " s, query " + fmt(query) + " s, " +
               std::to_string(rs.size()) + " rows";
    return o;
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> all = {
        {1, "clustering oracle equivalence", ac1},
        {2, "minimal clustering invariants", ac2},
        {3, "query oracle equivalence", ac3},
        {4, "user-service linking on fixture", ac4},
        {5, "date_diff noon anchors", ac5},
        {6, "pagerank properties", ac6},
        {7, "graph metrics brute force", ac7},
        {8, "tag store durability", ac8},
        {9, "crawler idempotence and extraction", ac9},
        {10, "performance sanity", ac10},
    };
    std::set<int> only;
    bool report = false;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only.insert(std::atoi(argv[++i]));
        else if (!std::strcmp(argv[i], "--report")) report = true;
        else {
            std::cerr << "usage: acceptance [--only N]... [--report]\n";
            return 2;
        }
    }
    int failures = 0;
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.id)) continue;
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        failures += !out.pass;
        std::cout << "AC" << c.id << " " << (out.pass ? "PASS" : "FAIL") << "  " << c.name << " (" << out.detail << ")"
                  << std::endl;
    }
    return report || failures == 0 ? 0 : 1;
}
