// appvault command-line front end: corpus ingestion, graph builds, fact
// extraction, statistics, queries, the HTTP service and synthetic corpora.

#include <csignal>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "appvault/error.hpp"
#include "appvault/facts.hpp"
#include "appvault/graph.hpp"
#include "appvault/query.hpp"
#include "appvault/service.hpp"
#include "appvault/stats.hpp"
#include "appvault/synthgen.hpp"

using namespace appvault;

namespace {

Service* g_service = nullptr;

void on_signal(int) {
    if (g_service) g_service->stop();
}

void print_lines(const nlohmann::json& array) {
    for (const auto& item : array) std::cout << canonical_dump(item) << '\n';
}

struct StoreOption {
    std::optional<std::string> path;

    void attach(CLI::App* cmd, const char* name = "--store") {
        cmd->add_option(name, path, "Store directory (default: $APPVAULT_STORE, then ./appvault-store)");
    }
    std::filesystem::path resolve() const { return resolve_store(path); }
};

std::set<RelationKind> parse_relations(const std::string& list) {
    std::set<RelationKind> out;
    std::stringstream ss(list);
    for (std::string name; std::getline(ss, name, ',');) {
        auto rel = relation_kind_from_string(name);
        if (!rel) throw InvalidArgument("unknown relation '" + name + "'");
        out.insert(*rel);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"appvault: app-metadata knowledge graph"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse a corpus file and build a store from it");
    std::string ingest_file;
    StoreOption ingest_store;
    BuildConfig ingest_config;
    ingest->add_option("file", ingest_file, "Corpus file (one JSON record per line)")->required();
    ingest_store.attach(ingest, "--out");

    // build
    auto* build = app.add_subcommand("build", "Rebuild the store's graph");
    StoreOption build_store;
    build_store.attach(build);
    BuildConfig build_config;
    std::optional<double> theta, tau_m;
    std::string stoplist;
    build->add_option("--theta", theta, "Retention threshold for probabilistic edges")->check(CLI::Range(0.0, 1.0));
    build->add_option("--tau-m", tau_m, "Method-matching cdg threshold");
    build->add_flag("--exhaustive", build_config.exhaustive, "Score every app pair (no candidate blocking)");
    build->add_option("--family-stoplist", stoplist, "File of generic label tokens, one per line")->check(CLI::ExistingFile);
    build->add_option("--threads", build_config.threads, "Worker threads (0 = all cores)");

    // facts
    auto* facts = app.add_subcommand("facts", "Extract facts as newline-delimited records");
    StoreOption facts_store;
    facts_store.attach(facts);
    std::string fact_kind, family;
    bool ignore_cert = false;
    LocalizeOptions localize;
    facts->add_option("kind", fact_kind, "piggyback | update-attacks | markets | localize")
        ->required()
        ->check(CLI::IsMember({"piggyback", "update-attacks", "markets", "localize"}));
    facts->add_option("--family", family, "Family for localize");
    facts->add_option("--sigma", localize.sigma, "Minimum in-family support");
    facts->add_option("--beta", localize.beta, "Maximum benign support");
    facts->add_flag("--ignore-cert", ignore_cert, "Group update lineages by package name only");

    // stats
    auto* stats = app.add_subcommand("stats", "Distribution report");
    StoreOption stats_store;
    stats_store.attach(stats);
    std::string dimension;
    bool csv = false;
    stats->add_option("dimension", dimension, "year | api_level | category | family | authorship_bucket | market")
        ->required();
    stats->add_flag("--csv", csv, "CSV instead of JSON");

    // query
    auto* query = app.add_subcommand("query", "Evaluate a filter query");
    StoreOption query_store;
    query_store.attach(query);
    std::string filter, kind = "APP";
    FilterQuery fq;
    query->add_option("--filter", filter, "e.g. 'package_name = com.x AND version_code > 3'");
    query->add_option("--kind", kind, "Target entity kind");
    query->add_option("--limit", fq.limit, "Page size")->check(CLI::PositiveNumber);
    query->add_option("--offset", fq.offset, "Page offset");

    // show
    auto* show = app.add_subcommand("show", "Print one app record");
    StoreOption show_store;
    show_store.attach(show);
    std::string sha;
    show->add_option("sha256", sha)->required();

    // neighbors
    auto* nb = app.add_subcommand("neighbors", "Node-link neighbourhood of an entity");
    StoreOption nb_store;
    nb_store.attach(nb);
    std::string nb_id, nb_kind = "APP", nb_rel;
    NeighborQuery nq;
    nb->add_option("--id", nb_id)->required();
    nb->add_option("--kind", nb_kind);
    nb->add_option("--rel", nb_rel, "Comma-separated relation names");
    nb->add_option("--min-prob", nq.min_prob);
    nb->add_option("--depth", nq.depth)->check(CLI::Range(1, 3));

    // check
    auto* check = app.add_subcommand("check", "Verify the stored graph's structural invariants");
    StoreOption check_store;
    check_store.attach(check);

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    StoreOption serve_store;
    serve_store.attach(serve);
    std::string bind_address = "127.0.0.1:8080";
    serve->add_option("--bind", bind_address, "host:port");

    // synthgen
    auto* synth = app.add_subcommand("synthgen", "Generate a synthetic corpus with ground truth");
    std::uint64_t seed = 1;
    std::string profile_path, out_dir;
    synth->add_option("--seed", seed);
    synth->add_option("--profile", profile_path, "JSON profile (defaults otherwise)")->check(CLI::ExistingFile);
    synth->add_option("--out", out_dir)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) {
            auto store = ingest_store.resolve();
            auto graph = Graph::build(parse_corpus(std::filesystem::path(ingest_file)), ingest_config);
            save(graph, store);
            std::cout << canonical_dump(to_json(graph.manifest())) << '\n';
        } else if (*build) {
            auto store = build_store.resolve();
            auto current = load(store);
            build_config.theta = theta.value_or(current.manifest().theta);
            build_config.tau_m = tau_m.value_or(current.manifest().tau_m);
            if (!stoplist.empty()) build_config.normalizer = FamilyNormalizer::from_file(stoplist);
            auto graph = Graph::build(current.corpus(), build_config);
            save(graph, store);
            std::cout << canonical_dump(to_json(graph.manifest())) << '\n';
        } else if (*facts) {
            auto g = load(facts_store.resolve());
            if (fact_kind == "piggyback") {
                print_lines(facts_to_json(find_piggybacked(g)));
            } else if (fact_kind == "update-attacks") {
                print_lines(facts_to_json(find_update_attacks(g, ignore_cert)));
            } else if (fact_kind == "markets") {
                print_lines(facts_to_json(market_replication(g)));
            } else {
                if (family.empty()) throw InvalidArgument("localize needs --family");
                localize.tau_m = g.manifest().tau_m;
                auto sig = localize_malicious_code(g, family, default_benign_sample(g), localize);
                std::cout << canonical_dump(to_json(sig)) << '\n';
            }
        } else if (*stats) {
            auto dim = stats_dimension_from_string(dimension);
            if (!dim) throw InvalidArgument("unknown dimension '" + dimension + "'");
            auto report = distribution(load(stats_store.resolve()), *dim);
            if (csv) {
                std::cout << to_csv(report);
            } else {
                std::cout << canonical_dump(to_json(report)) << '\n';
            }
        } else if (*query) {
            auto target = entity_kind_from_string(kind);
            if (!target) throw InvalidArgument("unknown entity kind '" + kind + "'");
            fq.target = *target;
            fq.conjuncts = parse_filter(filter);
            std::cout << canonical_dump(to_json(evaluate(load(query_store.resolve()), fq), fq)) << '\n';
        } else if (*show) {
            auto g = load(show_store.resolve());
            const auto* r = g.app(sha);
            if (!r) throw NotFound("no app with sha256 " + sha);
            std::cout << canonical_serialize(*r) << '\n';
        } else if (*nb) {
            auto target = entity_kind_from_string(nb_kind);
            if (!target) throw InvalidArgument("unknown entity kind '" + nb_kind + "'");
            if (!nb_rel.empty()) nq.relations = parse_relations(nb_rel);
            auto g = load(nb_store.resolve());
            std::cout << canonical_dump(to_json(neighbors(g, {*target, nb_id}, nq), g)) << '\n';
        } else if (*check) {
            auto violations = check_invariants(load(check_store.resolve()));
            for (const auto& v : violations) std::cout << v << '\n';
            if (!violations.empty()) return 1;
            std::cout << "ok\n";
        } else if (*serve) {
            auto [host, port] = parse_bind_address(bind_address);
            Service service(serve_store.resolve());
            int bound = service.bind(host, port);
            g_service = &service;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "appvault: serving " << serve_store.resolve().string() << " on " << host << ":" << bound
                      << '\n';
            service.listen();
            g_service = nullptr;
        } else if (*synth) {
            auto profile = profile_path.empty() ? synth::Profile{} : synth::load_profile(profile_path);
            auto output = synth::generate(seed, profile);
            synth::write(output, out_dir);
            std::cout << "wrote " << output.corpus.size() << " apps to " << out_dir << '\n';
        }
    } catch (const NotFound& e) {
        std::cerr << "appvault: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "appvault: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
