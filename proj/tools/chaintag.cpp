#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "chaintag/chain.hpp"
#include "chaintag/clustering.hpp"
#include "chaintag/crawler.hpp"
#include "chaintag/error.hpp"
#include "chaintag/graph.hpp"
#include "chaintag/query.hpp"
#include "chaintag/tags.hpp"

using namespace chaintag;

namespace {

struct Settings {
    std::string chain;
    std::string store;
    std::string format;
    int verbosity = 0;
    std::string config;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Precedence: flag, then environment, then --config file.
void resolve(Settings& s) {
    Json cfg = Json::object();
    if (!s.config.empty()) {
        cfg = parse_query_text(read_file(s.config));
        if (!cfg.is_object()) throw ValidationError(s.config, "config must be a JSON object");
    }
    auto pick = [&](std::string& field, const char* env, const char* key) {
        if (!field.empty()) return;
        if (const char* e = std::getenv(env); e && *e) {
            field = e;
        } else if (auto it = cfg.find(key); it != cfg.end() && it->is_string()) {
            field = it->get<std::string>();
        }
    };
    pick(s.chain, "CHAINTAG_CHAIN", "chain");
    pick(s.store, "CHAINTAG_STORE", "store");
    if (s.format.empty()) {
        if (auto it = cfg.find("format"); it != cfg.end() && it->is_string()) s.format = it->get<std::string>();
    }
    if (s.verbosity == 0) {
        if (auto it = cfg.find("verbosity"); it != cfg.end() && it->is_number_integer()) s.verbosity = it->get<int>();
    }
    if (s.format.empty()) s.format = isatty(STDOUT_FILENO) ? "table" : "json";
    if (s.format != "json" && s.format != "csv" && s.format != "table")
        throw ValidationError("format", "expected json, csv or table");
    if (s.store.empty()) s.store = "tags.jsonl";
}

Chain load_chain(const Settings& s) {
    if (s.chain.empty()) throw ValidationError("chain", "no chain file given (--chain or CHAINTAG_CHAIN)");
    Chain c = Chain::ingest(s.chain);
    if (s.verbosity > 0)
        for (const auto& w : c.warnings()) std::cerr << "warning: " << w << '\n';
    return c;
}

void render(const ResultSet& rs, const Settings& s) {
    if (s.format == "csv") std::cout << rs.to_csv();
    else if (s.format == "table") std::cout << rs.to_table();
    else std::cout << rs.to_json().dump(2) << '\n';
}

void render_object(const Json& obj, const Settings& s) {
    if (s.format == "json") {
        std::cout << obj.dump(2) << '\n';
        return;
    }
    std::vector<ResultSet::Column> cols;
    std::vector<Value> row;
    for (const auto& [k, v] : obj.items()) {
        cols.push_back({k, false});
        row.push_back(Value::from_json(v));
    }
    ResultSet rs(cols);
    rs.add_row(std::move(row));
    render(rs, s);
}

Json load_spec(const std::string& file, const std::string& inline_text) {
    if (!file.empty() && !inline_text.empty()) throw ValidationError("query", "give --file or --inline, not both");
    if (file.empty() && inline_text.empty()) throw ValidationError("query", "--file or --inline is required");
    return parse_query_text(file.empty() ? inline_text : read_file(file));
}

std::vector<Tag> parse_payload(const Json& j) {
    std::vector<Tag> tags;
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) tags.push_back(Tag::from_json(j[i], "tags[" + std::to_string(i) + "]"));
    } else {
        tags.push_back(Tag::from_json(j));
    }
    return tags;
}

Level parse_level(const std::string& text) {
    auto l = level_from_string(text);
    if (!l) throw ValidationError("level", "expected block, transaction or address, got '" + text + "'");
    return *l;
}

std::optional<ClusteringConfig> clustering_from(const std::string& method, const std::string& source) {
    if (method.empty() && source.empty()) return std::nullopt;
    ClusteringConfig c;
    c.method = cluster_method_from_string(method.empty() ? "original" : method);
    c.source = side_from_string(source.empty() ? "inputs" : source);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chaintag: tag, query and analyse a blockchain"};
    app.require_subcommand(1);
    Settings s;
    app.add_option("--chain", s.chain, "Chain file (JSON lines)");
    app.add_option("--store", s.store, "Tag store log file");
    app.add_option("--format", s.format, "Output format: json, csv or table");
    app.add_option("--config", s.config, "JSON config with chain, store, format, verbosity");
    app.add_flag("-v,--verbose", s.verbosity, "More diagnostics on stderr");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse a chain file and print its size");
    std::string ingest_file;
    ingest->add_option("file", ingest_file, "Chain file; defaults to --chain");

    // tag
    auto* tag = app.add_subcommand("tag", "Create, read or remove tags");
    tag->require_subcommand(1);
    std::string tag_level, tag_id, tag_file, tag_json;
    bool tag_append = false, tag_lower = false;
    auto* tag_add = tag->add_subcommand("add", "Put tags at a key");
    tag_add->add_option("level", tag_level)->required();
    tag_add->add_option("id", tag_id)->required();
    tag_add->add_option("--file", tag_file, "Tag or list of tags (JSON)");
    tag_add->add_option("--json", tag_json, "Inline tag JSON");
    tag_add->add_flag("--append", tag_append, "Append instead of replacing");
    auto* tag_get = tag->add_subcommand("get", "Print the tags at a key");
    tag_get->add_option("level", tag_level)->required();
    tag_get->add_option("id", tag_id)->required();
    tag_get->add_flag("--include-lower", tag_lower, "Add tags of lower levels (needs --chain)");
    auto* tag_rm = tag->add_subcommand("remove", "Remove all tags at a key");
    tag_rm->add_option("level", tag_level)->required();
    tag_rm->add_option("id", tag_id)->required();

    // query
    auto* query = app.add_subcommand("query", "Run a query");
    std::string q_file, q_inline, q_join, q_on = "@name";
    query->add_option("--file", q_file, "Query file (JSON or Python dict syntax)");
    query->add_option("--inline", q_inline, "Query text");
    query->add_option("--join", q_join, "Second query file to left-join");
    query->add_option("--on", q_on, "Join column");

    // crawl
    auto* crawl = app.add_subcommand("crawl", "Run a vertical crawler");
    std::string c_source, c_type, c_data, c_schedule = "0 0 * * *", c_currency = "bitcoin";
    std::vector<std::string> c_urls;
    bool c_once = false;
    long c_delay = 1000;
    std::size_t c_iterations = 0;
    crawl->add_option("--source", c_source)->required();
    crawl->add_option("--type", c_type, "Tag type; defaults to the source's");
    crawl->add_option("--data", c_data, "Bootstrap directory");
    crawl->add_option("--url", c_urls, "Live URL to fetch (repeatable)");
    crawl->add_option("--schedule", c_schedule, "Crontab expression");
    crawl->add_option("--currency", c_currency);
    crawl->add_option("--min-delay", c_delay, "Milliseconds between live requests");
    crawl->add_option("--iterations", c_iterations, "Scheduled runs before exiting (0 = forever)");
    crawl->add_flag("--once", c_once, "Run one batch now, ignoring the schedule");

    // cluster
    auto* cluster = app.add_subcommand("cluster", "Cluster addresses");
    std::string cl_method = "original", cl_source = "inputs", cl_address;
    cluster->add_option("--method", cl_method, "original or minimal");
    cluster->add_option("--source", cl_source, "inputs, outputs or both");
    cluster->add_option("--address", cl_address, "Print only this address's cluster");

    // graph
    auto* graph = app.add_subcommand("graph", "Transaction graph analytics");
    graph->require_subcommand(1);
    std::string g_filter, g_filter_inline, g_method, g_csource, g_nodes = "address";
    double g_damping = 0.85, g_tol = 1e-9;
    int g_max_iter = 1000;
    std::vector<CLI::App*> graph_cmds{graph->add_subcommand("metrics", "Topological metrics"),
                                      graph->add_subcommand("pagerank", "Weighted PageRank"),
                                      graph->add_subcommand("edges", "Edge list")};
    for (auto* g : graph_cmds) {
        g->add_option("--filter", g_filter, "File with a transaction-level where clause");
        g->add_option("--filter-inline", g_filter_inline, "Inline where clause");
        g->add_option("--cluster-method", g_method);
        g->add_option("--cluster-source", g_csource);
        g->add_option("--nodes", g_nodes, "address or tag");
    }
    graph_cmds[1]->add_option("--damping", g_damping);
    graph_cmds[1]->add_option("--tol", g_tol);
    graph_cmds[1]->add_option("--max-iter", g_max_iter);

    // balance sheet
    auto* bs = app.add_subcommand("balance-sheet", "Per-service volume and money flow");
    std::string bs_source = "tor";
    bs->add_option("--source", bs_source, "Service tag source");

    CLI11_PARSE(app, argc, argv);

    try {
        resolve(s);

        if (*ingest) {
            if (!ingest_file.empty()) s.chain = ingest_file;
            Chain c = load_chain(s);
            std::cout << c.blocks().size() << " blocks, " << c.transactions().size() << " txs, "
                      << c.address_count() << " addresses\n";
            return 0;
        }

        if (*tag) {
            TagStore store(s.store);
            Level level = parse_level(tag_level);
            TagKey key = TagKey::make(level, tag_id, store.profile());
            if (*tag_add) {
                if (tag_file.empty() == tag_json.empty()) throw ValidationError("tag", "give exactly one of --file or --json");
                auto tags = parse_payload(parse_query_text(tag_file.empty() ? tag_json : read_file(tag_file)));
                std::size_t n = store.put_tags(key, tags, tag_append);
                std::cout << n << (n == 1 ? " tag at " : " tags at ") << to_string(level) << ' ' << key.id << '\n';
            } else if (*tag_get) {
                Json out = Json::array();
                if (tag_lower) {
                    std::optional<Chain> chain;
                    if (level != Level::address) chain = load_chain(s);
                    for (const auto& e : store.get_tags(key, true, chain ? &*chain : nullptr))
                        out.push_back({{"level", std::string(to_string(e.key.level))},
                                       {"id", e.key.id},
                                       {"index", e.index},
                                       {"tag", e.tag.to_json()}});
                } else {
                    for (const auto& t : store.tags_at(key)) out.push_back(t.to_json());
                }
                std::cout << out.dump(2) << '\n';
            } else {
                std::size_t n = store.remove_tags(key);
                std::cout << n << " removed\n";
            }
            return 0;
        }

        if (*query) {
            Chain c = load_chain(s);
            TagStore store(s.store);
            QueryEngine engine(c, store);
            ResultSet rs = engine.execute(load_spec(q_file, q_inline));
            if (!q_join.empty()) rs = join(rs, engine.execute(load_spec(q_join, "")), q_on);
            render(rs, s);
            return 0;
        }

        if (*crawl) {
            TagStore store(s.store);
            CrawlerConfig cfg;
            cfg.source = c_source;
            cfg.type = c_type.empty() ? ParserRegistry::builtin().type_of(c_source) : [&] {
                auto t = tag_type_from_string(c_type);
                if (!t) throw ValidationError("type", "unknown tag type '" + c_type + "'");
                return *t;
            }();
            cfg.schedule = c_schedule;
            cfg.currency = c_currency;
            if (!c_data.empty()) cfg.data = c_data;
            cfg.validate();
            HttpFetcher::Options hopt;
            hopt.min_delay = std::chrono::milliseconds(c_delay);
            auto report = [&](const CrawlSummary& sum) {
                for (const auto& d : sum.diagnostics) std::cerr << "diagnostic: " << d.uri << ": " << d.message << '\n';
                std::cout << sum.documents << " documents, " << sum.tags_created << " tags created, "
                          << sum.tags_updated << " tags updated\n";
            };
            if (c_once) {
                std::unique_ptr<Fetcher> live;
                if (!c_urls.empty()) live = std::make_unique<HttpFetcher>(c_urls, hopt);
                report(run_crawl(store, cfg, live.get(), true));
                return 0;
            }
            SystemClock clock;
            CrawlScheduler sched(store, clock);
            CrawlScheduler::FetcherFactory factory;
            if (!c_urls.empty()) factory = [&] { return std::make_unique<HttpFetcher>(c_urls, hopt); };
            sched.add(cfg, factory);
            sched.on_run([&](const std::string&, UnixTime, const CrawlSummary& sum) { report(sum); });
            if (auto next = sched.next_fire(); next && s.verbosity > 0)
                std::cerr << "next run at " << format_iso_utc(*next) << '\n';
            if (c_iterations == 0) {
                while (true) sched.run(1);
            }
            sched.run(c_iterations);
            return 0;
        }

        if (*cluster) {
            Chain c = load_chain(s);
            ClusteringConfig cfg{side_from_string(cl_source), cluster_method_from_string(cl_method)};
            Clustering cl = compute_clustering(c, cfg);
            if (!cl_address.empty()) {
                auto members = cl.cluster_of(c, cl_address);
                std::cout << (members ? Json(*members) : Json(nullptr)).dump(2) << '\n';
            } else {
                std::cout << cl.to_json(c).dump(2) << '\n';
            }
            return 0;
        }

        if (*graph) {
            Chain c = load_chain(s);
            TagStore store(s.store);
            Json where = Json::object();
            if (!g_filter.empty() || !g_filter_inline.empty()) where = load_spec(g_filter, g_filter_inline);
            GraphOptions opt;
            if (g_nodes == "tag") opt.nodes = NodeMode::tag;
            else if (g_nodes != "address") throw ValidationError("nodes", "expected address or tag");
            opt.clustering = clustering_from(g_method, g_csource);
            TxGraph g = build_graph(c, store, where, opt);
            if (*graph_cmds[0]) {
                render_object(metrics(g).to_json(), s);
            } else if (*graph_cmds[1]) {
                PageRankOptions popt{g_damping, g_tol, g_max_iter};
                auto pr = pagerank(g, popt);
                std::vector<std::uint32_t> order(g.order());
                for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
                std::stable_sort(order.begin(), order.end(),
                                 [&](auto a, auto b) { return pr.scores[a] > pr.scores[b]; });
                ResultSet rs({{"node", false}, {"score", false}});
                for (auto v : order) rs.add_row({Value{g.label(v)}, Value{pr.scores[v]}});
                if (s.verbosity > 0)
                    std::cerr << "converged in " << pr.iterations << " iterations, residual " << pr.residual << '\n';
                render(rs, s);
            } else {
                if (s.format == "csv") {
                    std::cout << g.to_csv();
                } else {
                    ResultSet rs({{"from", false}, {"to", false}, {"weight", false}, {"tx_count", false}});
                    for (const auto& e : g.edges())
                        rs.add_row({Value{g.label(e.from)}, Value{g.label(e.to)}, Value{e.weight},
                                    Value{static_cast<std::int64_t>(e.tx_count)}});
                    render(rs, s);
                }
            }
            return 0;
        }

        if (*bs) {
            Chain c = load_chain(s);
            TagStore store(s.store);
            render(balance_sheet(c, store, bs_source), s);
            return 0;
        }
    } catch (const CrawlAborted& e) {
        std::cerr << "error: " << e.what() << " (" << e.partial().documents << " documents, "
                  << e.partial().tags_created << " tags created before the failure)\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
