#include <doctest.h>

#include <sstream>

#include "appvault/error.hpp"
#include "appvault/record.hpp"
#include "appvault/synthgen.hpp"
#include "support.hpp"

using namespace appvault;
using testing::make_app;

namespace {

std::vector<AppRecord> parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_corpus(in);
}

AppRecord rich_record() {
    auto r = make_app("rich", "com.rich.app", 42, "rich-dev", "googleplay");
    r.certificate.issuer = "CN=Issuer";
    r.certificate.subject = "CN=Subject";
    r.certificate.public_key_hash = "abc";
    r.compile_date = "2016-03-01";
    r.min_sdk = 9;
    r.target_sdk = 23;
    r.components.activities = {"com.rich.Main", "com.rich.Settings"};
    r.components.receivers = {"com.rich.Boot"};
    r.requested_permissions = {"android.permission.INTERNET", "android.permission.SEND_SMS"};
    r.libraries = {"com.google.ads"};
    r.invoked_apis = {"android.telephony.SmsManager.sendTextMessage"};
    r.strings = {"hello", "world"};
    r.files = {{"res/a.png", "00ff"}, {"classes.dex", "beef"}};
    MethodCfg m;
    m.id = "Lcom/rich/A;->run";
    m.blocks = {{3, 2}, {1, 4}};
    m.edges = {{1, 3}};
    m.loop_depth = {{1, 0}, {3, 1}};
    r.methods = {m, testing::single_block_method("Lcom/rich/A;->a", 3)};
    r.detections = {{"engineB", "Trojan.Kuguo"}, {"engineA", "Android/Kuguo"}};
    CrawlInfo c;
    c.category = "tools";
    c.score = 4.5;
    c.install_count = 1000;
    c.market = "googleplay";
    r.crawl = c;
    r.markets = {"anzhi"};
    normalize(r);
    return r;
}

}  // namespace

TEST_CASE("empty corpus parses to an empty list") {
    CHECK(parse_text("").empty());
    CHECK(parse_text("\n\n").empty());
}

TEST_CASE("short sha256 is rejected at line 1 naming the field") {
    auto r = make_app("x");
    r.sha256 = r.sha256.substr(0, 63);
    auto line = canonical_dump(to_json(r));
    try {
        parse_text(line + "\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
        CHECK(e.field() == "sha256");
    }
}

TEST_CASE("violations name the offending field and line") {
    auto good = canonical_serialize(make_app("a"));
    auto bad_json = to_json(make_app("b"));
    SUBCASE("negative version code") {
        bad_json["version_code"] = -1;
        try {
            parse_text(good + "\n" + canonical_dump(bad_json) + "\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
            CHECK(e.field() == "version_code");
        }
    }
    SUBCASE("duplicate set element") {
        bad_json["requested_permissions"] = {"p", "p"};
        CHECK_THROWS_AS(parse_text(canonical_dump(bad_json)), ParseError);
    }
    SUBCASE("duplicate method id") {
        auto r = make_app("c");
        r.methods = {testing::single_block_method("m", 1), testing::single_block_method("m", 2)};
        CHECK_THROWS_AS(parse_text(canonical_dump(to_json(r))), ParseError);
    }
    SUBCASE("bad date") {
        bad_json["compile_date"] = "2016-02-30";
        CHECK_THROWS_AS(parse_text(canonical_dump(bad_json)), ParseError);
    }
    SUBCASE("unknown field") {
        bad_json["surprise"] = 1;
        CHECK_THROWS_AS(parse_text(canonical_dump(bad_json)), ParseError);
    }
    SUBCASE("missing market") {
        bad_json.erase("market");
        CHECK_THROWS_AS(parse_text(canonical_dump(bad_json)), ParseError);
    }
    SUBCASE("not json") { CHECK_THROWS_AS(parse_text("{nope"), ParseError); }
}

TEST_CASE("duplicate sha256 in a corpus is rejected") {
    auto line = canonical_serialize(make_app("dup"));
    try {
        parse_text(line + "\n" + line + "\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.field() == "sha256");
    }
}

TEST_CASE("canonical serialization is deterministic and order-insensitive") {
    auto r = rich_record();
    CHECK(canonical_serialize(r) == canonical_serialize(r));

    auto j = to_json(r);
    auto shuffled = j;
    shuffled["requested_permissions"] = {"android.permission.SEND_SMS", "android.permission.INTERNET"};
    std::reverse(shuffled["methods"].begin(), shuffled["methods"].end());
    std::reverse(shuffled["detections"].begin(), shuffled["detections"].end());
    std::reverse(shuffled["files"].begin(), shuffled["files"].end());
    CHECK(canonical_serialize(record_from_json(shuffled)) == canonical_serialize(r));
}

TEST_CASE("parse after serialize is the identity") {
    auto r = rich_record();
    auto back = parse_record(canonical_serialize(r));
    CHECK(back == r);
    CHECK(back.certificate.issuer == r.certificate.issuer);
    CHECK(canonical_serialize(back) == canonical_serialize(r));

    auto bare = make_app("bare");
    auto bare_back = parse_record(canonical_serialize(bare));
    CHECK_FALSE(bare_back.crawl.has_value());
    CHECK_FALSE(bare_back.compile_date.has_value());
    CHECK_FALSE(bare_back.min_sdk.has_value());
}

TEST_CASE("certificate identity is the fingerprint") {
    CertIdentity a{"f1", "issuer one", "s", "k"};
    CertIdentity b{"f1", "issuer two", "t", "l"};
    CertIdentity c{"f2", "issuer one", "s", "k"};
    CHECK(a == b);
    CHECK_FALSE(a == c);
}

TEST_CASE("presence unions market and markets") {
    auto r = make_app("p", "com.p", 1, "d", "qq");
    r.markets = {"anzhi", "qq"};
    CHECK(r.presence() == StringSet{"anzhi", "qq"});
}

TEST_CASE("synthetic corpus round-trips byte for byte with a stable digest") {
    auto out = synth::generate(1, {});
    REQUIRE(out.corpus.size() == 500);
    std::ostringstream first;
    write_corpus(first, out.corpus);
    auto parsed = parse_text(first.str());
    REQUIRE(parsed.size() == 500);
    std::ostringstream second;
    write_corpus(second, parsed);
    CHECK(first.str() == second.str());
    CHECK(corpus_digest(parsed) == corpus_digest(out.corpus));
    CHECK(corpus_digest(parsed).size() == 64);
}

TEST_CASE("sha256 helper matches known vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
