#include "chaintag/error.hpp"
#include "chaintag/query.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "synth.hpp"

using namespace chaintag;
using testsupport::fixture;
using testsupport::slurp;

namespace {

std::string error_path(const Json& spec) {
    try {
        parse_query(spec);
    } catch (const ValidationError& e) {
        return e.path();
    }
    return "<no error>";
}

}  // namespace

TEST_SUITE("query-parse") {

TEST_CASE("having query in python syntax") {
    Json spec = parse_query_text(slurp(fixture("queries/twitter_silkroad_2014.py")));
    Query q = parse_query(spec);
    CHECK(q.level == Level::transaction);
    REQUIRE(q.having);
    CHECK(q.having->aggregate.fn == AggFn::sum);
    CHECK(q.having->op == CompareOp::ge);
    REQUIRE(q.having->threshold.get_if<double>());
    CHECK(*q.having->threshold.get_if<double>() == 1e8);
    REQUIRE(q.clustering);
    CHECK(q.clustering->method == ClusterMethod::original);
    CHECK(q.clustering->source == Side::inputs);
    REQUIRE(q.group_by.size() == 1);
    CHECK(q.group_by[0].attr == Attr::tag_info);
    REQUIRE(q.select.size() == 1);
    CHECK(q.select[0].name == "input.address.tag.info.account");
}

TEST_CASE("python dicts and json parse to the same query") {
    Json py = parse_query_text(slurp(fixture("queries/link_users_services_minimal.py")));
    Json js = parse_query_text(slurp(fixture("queries/link_users_services.json")));
    py.erase("clustering");
    CHECK(py == js);
    CHECK(parse_query_text("{'a': True, 'b': None, 'c': [1, 2,], 'd': \"it's\"}") ==
          Json::parse(R"({"a":true,"b":null,"c":[1,2],"d":"it's"})"));
    CHECK_THROWS_AS(parse_query_text("{'a': "), ValidationError);
}

TEST_CASE("defaults") {
    Query q = parse_query(Json::parse(R"({"level":"address","select":["self.address"]})"));
    CHECK(q.where.kind == Predicate::Kind::all);
    CHECK(q.where.children.empty());
    Query d = parse_query(Json::object());
    CHECK(d.level == Level::transaction);
    REQUIRE(d.select.size() == 1);
    CHECK(d.select[0].name == "self.hash");
    Query g = parse_query(Json::parse(R"({"group_by":["input.address.tag.id"]})"));
    REQUIRE(g.select.size() == 1);
    CHECK(g.select[0].name == "input.address.tag.id");
    Query b = parse_query(Json::parse(R"({"level":"block"})"));
    CHECK(b.select[0].name == "self.height");
}

TEST_CASE("aliases") {
    Query q = parse_query(Json::parse(R"({"select":["count(self.txes) as n","input.address.tag.info.provider as @name"]})"));
    CHECK(q.select[0].name == "n");
    CHECK_FALSE(q.select[0].exported);
    CHECK(q.select[1].name == "name");
    CHECK(q.select[1].exported);
    CHECK(q.select[1].expr == "input.address.tag.info.provider");
}

TEST_CASE("validation names the offending path") {
    CHECK(error_path(Json::parse(R"({"level":"transaction","having":"count(self.txes) > 1"})")) == "having");
    CHECK(error_path(Json::parse(R"({"selekt":[]})")) == "selekt");
    CHECK(error_path(Json::parse(R"({"level":"galaxy"})")) == "level");
    CHECK(error_path(Json::parse(R"({"where":{"input":{"adress":"x"}}})")) == "where.input.adress");
    CHECK(error_path(Json::parse(R"({"where":{"input":{"address":{"tag":{"flavour":"x"}}}}})")) ==
          "where.input.address.tag.flavour");
    CHECK(error_path(Json::parse(R"({"where":{"input":{"value":{"$like":"1"}}}})")) == "where.input.value.$like");
    CHECK(error_path(Json::parse(R"({"where":{"input":{"value":{"$gt":"a lot"}}}})")) == "where.input.value.$gt");
    CHECK(error_path(Json::parse(R"({"where":{"time":"last tuesday"}})")) == "where.time");
    CHECK(error_path(Json::parse(R"({"where":{"output":{"address":{"tag":{"type":"person"}}}}})")) ==
          "where.output.address.tag.type");
    CHECK(error_path(Json::parse(R"({"where":{"$or":[]}})")) == "where.$or");
    CHECK(error_path(Json::parse(R"({"where":{"input":{"value":{"$between":[1,2]}}}})")) ==
          "where.input.value.$between");
    CHECK(error_path(Json::parse(R"({"select":["input.adress.tag"]})")) == "select[0]");
    CHECK(error_path(Json::parse(R"j({"select":["sum(self.hash)"]})j")) == "select[0]");
    CHECK(error_path(Json::parse(R"j({"select":["max(self.txes)"]})j")) == "select[0]");
    CHECK(error_path(Json::parse(R"j({"select":["median(input.value)"]})j")) == "select[0]");
    CHECK(error_path(Json::parse(R"({"select":["self.hash","self.hash"]})")) == "select[1]");
    CHECK(error_path(Json::parse(R"({"select":["self.hash as "]})")) == "select[0]");
    CHECK(error_path(Json::parse(R"({"group_by":["self.txes"]})")) == "group_by[0]");
    CHECK(error_path(Json::parse(R"({"clustering":{"source":"inputs"}})")) == "clustering");
    CHECK(error_path(Json::parse(R"({"clustering":{"source":"sideways","method":"original"}})")) == "clustering.source");
    CHECK(error_path(Json::parse(R"({"level":"address","select":["input.value"]})")) == "select[0]");
    CHECK(error_path(Json::parse(R"({"level":"block","where":{"input":{}}})")) == "where.input");
    CHECK(error_path(Json::parse(R"({"group_by":["self.hash"],"having":"count(self.txes) >> 2"})")) == "having");
    CHECK(error_path(Json::parse(R"({"group_by":["self.hash"],"having":"count(self.txes) > 1 +"})")) == "having");
}

TEST_CASE("field paths") {
    auto f = parse_field_path(Level::transaction, "output.address.tag.info.a.b");
    CHECK(f.scope == Scope::tag);
    CHECK(f.side == 1);
    CHECK(f.attr == Attr::tag_info);
    CHECK(f.info_path == std::vector<std::string>{"a", "b"});
    CHECK(parse_field_path(Level::transaction, "input.value").scope == Scope::entity);
    CHECK(parse_field_path(Level::transaction, "time").scope == Scope::base);
    CHECK(parse_field_path(Level::address, "tag.id").attr == Attr::tag_id);
    CHECK(parse_field_path(Level::block, "self.hash").attr == Attr::block_hash);
    CHECK_THROWS_AS(parse_field_path(Level::block, "self.address"), ValidationError);
}

TEST_CASE("constants") {
    CHECK(evaluate_constant("10**7") == Value(std::int64_t{10'000'000}));
    CHECK(evaluate_constant("10**7").get_if<std::int64_t>());
    CHECK(evaluate_constant("10.0 * 10**7").get_if<double>());
    CHECK(evaluate_constant("(10.0 * 10**7)") == Value(1e8));
    CHECK(evaluate_constant("2**3**2") == Value(std::int64_t{512}));
    CHECK(evaluate_constant("(1 + 2) * 3 - 4") == Value(std::int64_t{5}));
    CHECK(evaluate_constant("50 * 10**8") == Value(std::int64_t{5'000'000'000}));
    auto big = evaluate_constant("10**30");
    REQUIRE(big.get_if<double>());
    CHECK(*big.get_if<double>() == doctest::Approx(1e30));
    CHECK_THROWS_AS(evaluate_constant("1 +"), ValidationError);
    CHECK_THROWS_AS(evaluate_constant("abc"), ValidationError);
    CHECK_THROWS_AS(evaluate_constant("(1"), ValidationError);
}

TEST_CASE("having rhs on a time aggregate is a timestamp") {
    Query q = parse_query(Json::parse(R"({"group_by":["input.address"],"having":"min(time) >= '2014-02'"})"));
    REQUIRE(q.having);
    REQUIRE(q.having->threshold.get_if<Timestamp>());
    CHECK(q.having->threshold.get_if<Timestamp>()->seconds == *parse_iso_utc("2014-02-01T00:00:00Z"));
}

TEST_CASE("every generated query parses") {
    testsupport::Rng rng(5);
    auto addrs = testsupport::synth_addresses(rng, 10);
    for (int i = 0; i < 300; ++i) {
        for (Level level : {Level::transaction, Level::address, Level::block}) {
            Json spec = testsupport::synth_query(rng, level, addrs);
            INFO(spec.dump());
            REQUIRE_NOTHROW(parse_query(spec));
        }
    }
}

}  // TEST_SUITE
