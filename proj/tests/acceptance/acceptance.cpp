// Acceptance gate: one PASS/FAIL line per headline criterion. Exit status is
// non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "appvault/facts.hpp"
#include "appvault/graph.hpp"
#include "appvault/query.hpp"
#include "appvault/service.hpp"
#include "appvault/stats.hpp"
#include "appvault/synthgen.hpp"
#include "query_oracle.hpp"
#include "support.hpp"

using namespace appvault;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) detail << "first failure: " << what << "; ";
        ok = ok && cond;
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

BuildConfig fixed_config() {
    BuildConfig c;
    c.build_timestamp = "2020-01-01T00:00:00Z";
    return c;
}

std::set<std::string> random_string_set(std::mt19937_64& rng, std::size_t max_size) {
    std::set<std::string> s;
    const std::size_t n = rng() % (max_size + 1);
    while (s.size() < n) s.insert("perm." + std::to_string(rng() % 320));
    return s;
}

void jaccard_oracle(Outcome& out) {
    std::mt19937_64 rng(1001);
    std::vector<std::pair<std::set<std::string>, std::set<std::string>>> pairs;
    for (int i = 0; i < 1000; ++i) pairs.emplace_back(random_string_set(rng, 200), random_string_set(rng, 200));
    auto t0 = Clock::now();
    std::size_t exact = 0;
    for (const auto& [a, b] : pairs) {
        double got = jaccard(a, b);
        auto [common, uni] = testing::brute_counts(std::vector<std::string>(a.begin(), a.end()),
                                                   std::vector<std::string>(b.begin(), b.end()));
        double expected = uni == 0 ? 1.0 : static_cast<double>(common) / static_cast<double>(uni);
        exact += got == expected;
    }
    double elapsed = seconds_since(t0);
    out.require(exact == pairs.size(), "jaccard differs from the nested-loop count");
    out.require(elapsed < 1.0, "took longer than 1 s");
    out.detail << exact << "/1000 exact, " << elapsed << " s including oracle";
}

void centroid_oracle(Outcome& out) {
    std::mt19937_64 rng(2002);
    auto t0 = Clock::now();
    std::size_t exact = 0, invariant = 0;
    for (int i = 0; i < 200; ++i) {
        auto m = testing::random_cfg(rng, "m" + std::to_string(i), 50);
        auto c = compute_centroid(m);
        exact += c == testing::oracle_centroid(m);
        auto shuffled = m;
        std::shuffle(shuffled.blocks.begin(), shuffled.blocks.end(), rng);
        std::shuffle(shuffled.edges.begin(), shuffled.edges.end(), rng);
        invariant += compute_centroid(shuffled) == c;
    }
    double elapsed = seconds_since(t0);
    out.require(exact == 200, "centroid differs from the recomputation");
    out.require(invariant == 200, "centroid depends on list order");
    out.require(elapsed < 5.0, "took longer than 5 s");
    out.detail << exact << "/200 exact, " << invariant << "/200 permutation-invariant, " << elapsed << " s";
}

void cdg_properties(Outcome& out) {
    std::mt19937_64 rng(3003);
    std::size_t ok = 0;
    for (int i = 0; i < 1000; ++i) {
        auto a = compute_centroid(testing::random_cfg(rng, "a", 12));
        auto b = compute_centroid(testing::random_cfg(rng, "b", 12));
        ok += cdg(a, a) == 0.0 && cdg(b, b) == 0.0 && cdg(a, b) == cdg(b, a) && cdg(a, b) == testing::oracle_cdg(a, b);
    }
    out.require(ok == 1000, "identity or symmetry violated");
    out.detail << ok << "/1000 pairs";
}

void threshold_retention(Outcome& out) {
    synth::Profile p;
    p.clone_similarities = {0.85, 0.90, 0.95};
    auto data = synth::generate(4004, p);
    auto g = Graph::build(data.corpus, fixed_config());
    std::set<std::string> clone_apps;
    std::set<std::pair<std::string, std::string>> expected;
    std::map<std::pair<std::string, std::string>, double> expected_value;
    for (const auto& c : data.truth.clone_pairs) {
        clone_apps.insert({c.a, c.b});
        auto key = std::minmax(c.a, c.b);
        if (c.code_sim >= 0.9) {
            expected.insert(key);
            expected_value[key] = c.code_sim;
        }
    }
    std::set<std::pair<std::string, std::string>> found;
    bool values_exact = true, all_above = true;
    for (const auto& e : g.edges()) {
        if (e.rel != RelationKind::code_sim) continue;
        all_above = all_above && e.prob && *e.prob >= 0.9;
        if (!clone_apps.count(e.src.id) && !clone_apps.count(e.dst.id)) continue;
        std::pair<std::string, std::string> key{e.src.id, e.dst.id};
        found.insert(key);
        auto it = expected_value.find(key);
        values_exact = values_exact && it != expected_value.end() && *e.prob == it->second;
    }
    out.require(found == expected, "code_sim edges among planted clones differ from the >= 0.9 set");
    out.require(values_exact, "stored probability differs from the engineered value");
    out.require(all_above, "a code_sim edge below theta was stored");
    out.detail << found.size() << " of 3 planted pairs kept (expected " << expected.size() << "), values exact";
}

void fact_recovery(Outcome& out) {
    auto t0 = Clock::now();
    synth::Profile p;  // 500 apps, 4 markets, 25 piggyback pairs, 15 chains, 5 families
    auto data = synth::generate(1, p);
    auto g = Graph::build(data.corpus, fixed_config());

    std::set<std::pair<std::string, std::string>> pig_found, pig_truth;
    for (const auto& f : find_piggybacked(g)) pig_found.insert({f.original, f.variant});
    for (const auto& t : data.truth.piggyback_pairs) pig_truth.insert({t.original, t.variant});
    out.require(pig_found == pig_truth, "piggyback facts differ from the planted pairs");

    std::set<std::tuple<std::string, std::string, std::vector<std::string>, std::int64_t>> ua_found, ua_truth;
    for (const auto& f : find_update_attacks(g)) {
        std::vector<std::string> shas;
        for (const auto& e : f.chain) shas.push_back(e.sha256);
        ua_found.insert({f.package_name, f.fingerprint, shas, f.first_malicious_version});
    }
    for (const auto& c : data.truth.update_attack_chains) {
        ua_truth.insert({c.package_name, c.fingerprint, c.versions, c.first_malicious_version});
    }
    out.require(ua_found == ua_truth, "update-attack facts differ from the planted chains");

    auto benign = default_benign_sample(g);
    std::size_t payload_found = 0, payload_total = 0, noise = 0;
    for (const auto& fam : data.truth.families) {
        LocalizeOptions lo;  // sigma 0.5, beta 0.01
        auto sig = localize_malicious_code(g, fam.name, benign, lo);
        std::set<std::string> payload(fam.payload_method_ids.begin(), fam.payload_method_ids.end());
        payload_total += payload.size();
        std::set<std::string> reps;
        for (const auto& c : sig.clusters) {
            bool is_payload = payload.count(c.representative.method_id) > 0;
            if (!is_payload) ++noise;
            for (const auto& m : c.members) is_payload = is_payload && payload.count(m.method_id);
            if (is_payload && c.support_in_family == 1.0 && c.members.size() == fam.samples.size()) {
                reps.insert(c.representative.method_id);
            }
        }
        payload_found += reps.size();
    }
    out.require(payload_found == payload_total, "a planted payload cluster was not emitted");
    out.require(noise == 0, "a noise cluster was emitted");

    std::size_t ratios_exact = 0;
    auto replication = market_replication(g);
    for (const auto& f : replication) {
        const auto& hosted = data.truth.market_presence.at(f.market);
        std::size_t shared = 0;
        for (const auto& sha : hosted) {
            bool elsewhere = false;
            for (const auto& [other, shas] : data.truth.market_presence) {
                if (other != f.market && std::find(shas.begin(), shas.end(), sha) != shas.end()) elsewhere = true;
            }
            shared += elsewhere;
        }
        double expected = hosted.empty() ? 0.0 : static_cast<double>(shared) / static_cast<double>(hosted.size());
        ratios_exact += f.replication_ratio == expected && f.app_count == hosted.size();
    }
    out.require(replication.size() == 4 && ratios_exact == 4, "replication ratios differ from generator overlap");

    double elapsed = seconds_since(t0);
    out.require(elapsed < 60.0, "pipeline took longer than 60 s");
    out.detail << "piggyback " << pig_found.size() << "/" << pig_truth.size() << ", update-attack " << ua_found.size()
               << "/" << ua_truth.size() << ", payload clusters " << payload_found << "/" << payload_total
               << ", noise clusters " << noise << ", market ratios " << ratios_exact << "/4 exact, " << elapsed
               << " s";
}

void graph_invariants(Outcome& out) {
    std::size_t graphs = 0, violations = 0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        for (bool exhaustive : {false, true}) {
            auto c = fixed_config();
            c.exhaustive = exhaustive;
            synth::Profile p;
            if (exhaustive) p.apps = 300, p.replicated_apps = 30, p.filler_malware = 15;
            auto v = check_invariants(Graph::build(synth::generate(seed, p).corpus, c));
            violations += v.size();
            if (!v.empty()) out.detail << v.front() << "; ";
            ++graphs;
        }
    }
    out.require(violations == 0, "invariant violations found");
    out.detail << graphs << " generated graphs, " << violations << " violations";
}

void persistence(Outcome& out) {
    testing::TempDir dir;
    auto g = Graph::build(synth::generate(7, {}).corpus, fixed_config());
    save(g, dir / "first");
    auto back = load(dir / "first");
    out.require(back.entities() == g.entities(), "entities differ after load");
    out.require(back.edges() == g.edges(), "edges differ after load");
    out.require(back.manifest() == g.manifest(), "manifest differs after load");
    std::ostringstream a, b;
    write_corpus(a, g.corpus());
    write_corpus(b, back.corpus());
    out.require(a.str() == b.str(), "corpus differs after load");
    save(back, dir / "second");
    save(g, dir / "first");
    auto first = testing::snapshot_dir(dir / "first");
    out.require(first == testing::snapshot_dir(dir / "second"), "re-saved store is not byte-identical");
    out.detail << g.entities().size() << " entities, " << g.edges().size() << " edges, " << first.size()
               << " files byte-identical";
}

void query_oracle(Outcome& out) {
    auto g = Graph::build(synth::generate(1, {}).corpus, fixed_config());
    std::mt19937_64 rng(8008);
    std::size_t equal = 0, non_empty = 0;
    for (int i = 0; i < 100; ++i) {
        auto q = testing::random_query(rng, g);
        auto expected = testing::oracle_scan(g, q);
        auto got = evaluate(g, q);
        std::vector<std::string> page;
        for (std::size_t k = q.offset; k < expected.size() && page.size() < q.limit; ++k) page.push_back(expected[k]);
        bool same = got.total == expected.size() && got.ids == page;
        if (!same && out.ok) out.detail << "mismatch on '" << format_filter(q.conjuncts) << "'; ";
        equal += same;
        non_empty += !expected.empty();
    }
    out.require(equal == 100, "evaluate differs from the linear scan");
    out.detail << equal << "/100 equal (" << non_empty << " with matches)";
}

void service_purity(Outcome& out) {
    testing::TempDir dir;
    synth::Profile p;
    p.apps = 200;
    p.piggyback_pairs = 8;
    p.update_attack_chains = 5;
    p.benign_upgrade_chains = 4;
    p.families = 3;
    p.family_samples = 6;
    p.replicated_apps = 20;
    p.filler_malware = 10;
    auto data = synth::generate(9009, p);
    save(Graph::build(data.corpus, fixed_config()), dir / "store");
    Service service(dir / "store");
    const int port = service.bind("127.0.0.1", 0);
    std::thread server([&] { service.listen(); });
    for (int i = 0; i < 400 && !service.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));

    auto g = service.snapshot();
    httplib::Client cli("127.0.0.1", port);
    std::mt19937_64 rng(9009);
    auto any_app = [&] { return data.corpus[rng() % data.corpus.size()].sha256; };
    auto enc = [](const std::string& s) { return httplib::detail::encode_query_param(s); };

    std::size_t pure = 0, repeatable = 0;
    const int kRequests = 20;
    for (int i = 0; i < kRequests; ++i) {
        std::string path;
        nlohmann::json expected;
        switch (rng() % 9) {
            case 0:
                path = "/health";
                expected = {{"status", "ok"}, {"manifest", to_json(g->manifest())}};
                break;
            case 1: {
                auto sha = any_app();
                path = "/apps/" + sha;
                expected = to_json(*g->app(sha));
                break;
            }
            case 2: {
                auto q = testing::random_query(rng, *g);
                path = "/apps?filter=" + enc(format_filter(q.conjuncts)) + "&limit=" + std::to_string(q.limit) +
                       "&offset=" + std::to_string(q.offset) + "&kind=" + std::string(to_string(q.target));
                expected = to_json(evaluate(*g, q), q);
                break;
            }
            case 3: {
                auto sha = any_app();
                NeighborQuery q;
                q.depth = static_cast<int>(1 + rng() % 2);
                path = "/graph/neighbors?id=" + sha + "&depth=" + std::to_string(q.depth);
                if (rng() % 2) {
                    q.relations = std::set<RelationKind>{RelationKind::author, RelationKind::upgrade,
                                                         RelationKind::code_sim};
                    path += "&rel=author,upgrade,code_sim";
                }
                if (rng() % 2) {
                    q.min_prob = 0.95;
                    path += "&min_prob=0.95";
                }
                expected = to_json(neighbors(*g, {EntityKind::APP, sha}, q), *g);
                break;
            }
            case 4:
                path = "/facts/piggybacked";
                expected = facts_to_json(find_piggybacked(*g));
                break;
            case 5: {
                bool loose = rng() % 2;
                path = std::string("/facts/update-attacks") + (loose ? "?ignore_cert=true" : "");
                expected = facts_to_json(find_update_attacks(*g, loose));
                break;
            }
            case 6:
                path = "/facts/markets";
                expected = facts_to_json(market_replication(*g));
                break;
            case 7: {
                const auto& fam = data.truth.families[rng() % data.truth.families.size()].name;
                LocalizeOptions lo;
                lo.sigma = 0.25 * static_cast<double>(1 + rng() % 4);
                lo.tau_m = g->manifest().tau_m;
                path = "/facts/families/" + fam + "/signatures?sigma=" + nlohmann::json(lo.sigma).dump();
                expected = to_json(localize_malicious_code(*g, fam, default_benign_sample(*g), lo));
                break;
            }
            default: {
                static constexpr StatsDimension dims[] = {StatsDimension::year, StatsDimension::api_level,
                                                          StatsDimension::category, StatsDimension::family,
                                                          StatsDimension::authorship_bucket, StatsDimension::market};
                auto d = dims[rng() % 6];
                path = "/stats/" + std::string(to_string(d));
                expected = to_json(distribution(*g, d));
                break;
            }
        }
        auto first = cli.Get(path);
        auto second = cli.Get(path);
        bool ok = first && first->status == 200 && first->body == canonical_dump(expected);
        bool same = first && second && first->body == second->body;
        if (!ok && out.ok) out.detail << "impure body for " << path << "; ";
        pure += ok;
        repeatable += same;
    }
    service.stop();
    server.join();
    out.require(pure == kRequests, "an HTTP body differs from the library result");
    out.require(repeatable == kRequests, "repeated GET returned different bytes");
    out.detail << pure << "/" << kRequests << " pure, " << repeatable << "/" << kRequests << " byte-identical on repeat";
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"jaccard-oracle", jaccard_oracle},
        {"centroid-oracle", centroid_oracle},
        {"cdg-properties", cdg_properties},
        {"threshold-retention", threshold_retention},
        {"fact-recovery", fact_recovery},
        {"graph-invariants", graph_invariants},
        {"persistence", persistence},
        {"query-oracle", query_oracle},
        {"service-purity", service_purity},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome out;
        try {
            run(out);
        } catch (const std::exception& e) {
            out.ok = false;
            out.detail << "exception: " << e.what();
        }
        std::cout << (out.ok ? "PASS " : "FAIL ") << name << " -- " << out.detail.str() << std::endl;
        failed += !out.ok;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " acceptance criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
