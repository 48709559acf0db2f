#include <doctest.h>

#include "appvault/stats.hpp"
#include "appvault/synthgen.hpp"
#include "support.hpp"

using namespace appvault;

namespace {

Graph build(std::vector<AppRecord> corpus) {
    BuildConfig c;
    c.build_timestamp = "2020-01-01T00:00:00Z";
    return Graph::build(std::move(corpus), c);
}

std::string bucket_of(const Graph& g, const AppRecord& r, StatsDimension d) {
    switch (d) {
        case StatsDimension::year:
            return r.compile_date ? r.compile_date->substr(0, 4) : "unknown";
        case StatsDimension::api_level:
            return r.min_sdk ? std::to_string(*r.min_sdk) : "unknown";
        case StatsDimension::category:
            return r.crawl && !r.crawl->category.empty() ? r.crawl->category : "unknown";
        case StatsDimension::market:
            return r.market;
        case StatsDimension::family:
            return g.family_of(r.sha256).value_or("");
        default:
            return "";
    }
}

}  // namespace

TEST_CASE("empty graph yields no rows") {
    auto g = build({});
    for (auto d : {StatsDimension::year, StatsDimension::family, StatsDimension::authorship_bucket}) {
        CHECK(distribution(g, d).rows.empty());
    }
}

TEST_CASE("authorship bucket edges") {
    CHECK(authorship_bucket(1) == "1-10");
    CHECK(authorship_bucket(10) == "1-10");
    CHECK(authorship_bucket(11) == "11-100");
    CHECK(authorship_bucket(100) == "11-100");
    CHECK(authorship_bucket(101) == "101-500");
    CHECK(authorship_bucket(501) == "501-1000");
    CHECK(authorship_bucket(1001) == ">1000");
}

TEST_CASE("authorship report tallies malware authors") {
    std::vector<AppRecord> corpus;
    for (int i = 0; i < 11; ++i) {
        auto r = testing::make_app("big" + std::to_string(i), "com.big" + std::to_string(i), 1, "big");
        r.detections = {{"e", "Kuguo"}};
        corpus.push_back(r);
    }
    auto benign = testing::make_app("big-benign", "com.bigb", 1, "big");
    corpus.push_back(benign);
    for (int i = 0; i < 10; ++i) {
        auto r = testing::make_app("small" + std::to_string(i), "com.small" + std::to_string(i), 1, "small");
        r.detections = {{"e", "Kuguo"}};
        corpus.push_back(r);
    }
    corpus.push_back(testing::make_app("clean", "com.clean", 1, "clean"));
    auto report = distribution(build(corpus), StatsDimension::authorship_bucket);
    REQUIRE(report.rows.size() == 5);
    CHECK(report.rows[0] == DistributionRow{"1-10", 10, 10, 1});
    CHECK(report.rows[1] == DistributionRow{"11-100", 12, 11, 1});
    CHECK(report.rows[2] == DistributionRow{"101-500", 0, 0, 0});
    auto j = to_json(report);
    CHECK(j["rows"][0]["author_pct"] == "50.0");
}

TEST_CASE("partition reports match a brute-force recount") {
    auto out = synth::generate(6, {});
    auto g = build(out.corpus);
    for (auto d : {StatsDimension::year, StatsDimension::api_level, StatsDimension::category, StatsDimension::market,
                   StatsDimension::family}) {
        std::map<std::string, std::pair<std::size_t, std::size_t>> tally;
        for (const auto& r : out.corpus) {
            auto b = bucket_of(g, r, d);
            if (b.empty()) continue;
            ++tally[b].first;
            if (!r.detections.empty()) ++tally[b].second;
        }
        auto report = distribution(g, d);
        REQUIRE(report.rows.size() == tally.size());
        std::size_t apps = 0;
        for (const auto& row : report.rows) {
            CHECK(tally.at(row.bucket).first == row.app_count);
            CHECK(tally.at(row.bucket).second == row.malware_count);
            apps += row.app_count;
        }
        if (d != StatsDimension::family) {
            CHECK(apps == out.corpus.size());
        }
    }
}

TEST_CASE("ordering rules") {
    auto g = build(synth::generate(6, {}).corpus);
    auto fam = distribution(g, StatsDimension::family).rows;
    for (std::size_t i = 1; i < fam.size(); ++i) CHECK(fam[i - 1].malware_count >= fam[i].malware_count);
    auto api = distribution(g, StatsDimension::api_level).rows;
    for (std::size_t i = 1; i < api.size(); ++i) {
        if (api[i].bucket == "unknown") continue;
        CHECK(std::stoll(api[i - 1].bucket) < std::stoll(api[i].bucket));
    }
    auto cat = distribution(g, StatsDimension::category).rows;
    REQUIRE_FALSE(cat.empty());
    CHECK(cat.back().bucket == "unknown");
}

TEST_CASE("csv output") {
    auto a = testing::make_app("a");
    a.crawl = CrawlInfo{};
    a.crawl->category = "games, casual";
    auto csv = to_csv(distribution(build({a}), StatsDimension::category));
    CHECK(csv == "bucket,app_count,malware_count\n\"games, casual\",1,0\n");
}

TEST_CASE("dimension names") {
    CHECK(stats_dimension_from_string("authorship_bucket") == StatsDimension::authorship_bucket);
    CHECK(to_string(StatsDimension::api_level) == "api_level");
    CHECK_FALSE(stats_dimension_from_string("nope").has_value());
}
