#include "appvault/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "appvault/attributes.hpp"
#include "appvault/error.hpp"
#include "appvault/similarity.hpp"

namespace appvault::synth {

using nlohmann::json;

namespace {

constexpr std::int64_t kCloneTotalWeight = 200;
// Distinct generated methods are kept this far apart (in cdg) so that only
// deliberate copies can match under any tau_m below it.
constexpr double kSeparation = 0.03;

constexpr std::array<std::string_view, 10> kFamilyNames{
    "kuguo", "airpush", "dowgin", "smsreg", "secapk", "gappusin", "revmob", "leadbolt", "youmi", "domob"};

constexpr std::array<std::string_view, 12> kMarketNames{
    "googleplay", "qq", "anzhi", "getjar", "mumayi", "xiaomi", "apk20", "hiapk", "eoemarket", "appchina",
    "baidu", "coolapk"};

constexpr std::array<std::string_view, 8> kCategories{
    "social", "tools", "games", "communication", "finance", "education", "entertainment", "shopping"};

constexpr std::array<std::string_view, 5> kLabelTemplates{"Trojan.{}", "Android/{}", "Adware.{}",
                                                          "Riskware.Android.{}", "Generic.{}"};

std::string capitalize(std::string_view s) {
    std::string out(s);
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

std::string label_for(std::string_view family, std::size_t template_index) {
    std::string t(kLabelTemplates[template_index % kLabelTemplates.size()]);
    auto pos = t.find("{}");
    return t.replace(pos, 2, capitalize(family));
}

class Generator {
public:
    Generator(std::uint64_t seed, const Profile& profile) : seed_(seed), profile_(profile), rng_(seed) {}

    Output run();

private:
    // ---- randomness (portable: no std distributions) ----
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : rng_() % n; }
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }
    bool chance(unsigned percent) { return below(100) < percent; }
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    std::string next_sha() { return sha256_hex("appvault-synth:" + std::to_string(seed_) + ":app:" + std::to_string(sha_counter_++)); }
    std::string new_cert() {
        return sha256_hex("appvault-synth:" + std::to_string(seed_) + ":cert:" + std::to_string(cert_counter_++)).substr(0, 40);
    }
    std::string date(int year) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, static_cast<int>(between(1, 12)),
                      static_cast<int>(between(1, 28)));
        return buf;
    }

    MethodCfg random_cfg(const std::string& id, std::int64_t weight);
    MethodCfg unique_method(const std::string& prefix, std::int64_t weight);
    std::vector<MethodCfg> unique_methods(const std::string& prefix, std::int64_t total);
    std::vector<std::int64_t> split_weight(std::int64_t total);

    AppRecord base_app(const std::string& package, std::int64_t version, const std::string& cert,
                       const std::string& market, int year);
    void add_filler_methods(AppRecord& app, std::size_t min_count, std::size_t max_count);
    void make_malware(AppRecord& app, std::string_view family);
    std::string other_family(std::size_t k) const;
    std::string market_name(std::size_t i) const { return markets_[i % markets_.size()]; }
    std::string random_market() { return market_name(below(markets_.size())); }
    std::string pool_cert() { return author_pool_[below(author_pool_.size())]; }

    std::uint64_t seed_;
    Profile profile_;
    std::mt19937_64 rng_;
    std::uint64_t sha_counter_ = 0;
    std::uint64_t cert_counter_ = 0;
    std::uint64_t method_counter_ = 0;
    std::vector<MethodCentroid> registry_;
    std::vector<std::string> markets_;
    std::vector<std::string> author_pool_;
    std::vector<std::string> filler_packages_;
};

MethodCfg Generator::random_cfg(const std::string& id, std::int64_t weight) {
    MethodCfg m;
    m.id = id;
    const auto blocks = between(1, std::min<std::int64_t>(weight, 8));
    std::vector<std::int64_t> counts(static_cast<std::size_t>(blocks), 1);
    for (std::int64_t left = weight - blocks; left > 0; --left) ++counts[below(counts.size())];
    for (std::int64_t b = 0; b < blocks; ++b) {
        m.blocks.push_back({b, counts[static_cast<std::size_t>(b)]});
        m.loop_depth[b] = chance(60) ? 0 : between(1, 3);
    }
    std::set<CfgEdge> edges;
    for (std::int64_t b = 0; b + 1 < blocks; ++b) {
        if (chance(85)) edges.insert({b, b + 1});
    }
    for (auto extra = between(0, blocks); extra > 0; --extra) {
        edges.insert({between(0, blocks - 1), between(0, blocks - 1)});
    }
    m.edges.assign(edges.begin(), edges.end());
    shuffle(m.blocks);
    shuffle(m.edges);
    return m;
}

MethodCfg Generator::unique_method(const std::string& prefix, std::int64_t weight) {
    for (int attempt = 0; attempt < 5000; ++attempt) {
        MethodCfg m = random_cfg(prefix + "->m" + std::to_string(method_counter_), weight);
        MethodCentroid c = compute_centroid(m);
        bool distinct = std::all_of(registry_.begin(), registry_.end(),
                                    [&](const MethodCentroid& other) { return cdg(c, other) > kSeparation; });
        if (!distinct) continue;
        ++method_counter_;
        registry_.push_back(c);
        return m;
    }
    throw InvalidArgument("could not generate a distinct method of weight " + std::to_string(weight));
}

std::vector<std::int64_t> Generator::split_weight(std::int64_t total) {
    std::vector<std::int64_t> parts;
    while (total > 0) {
        std::int64_t w = std::min(total, between(10, 34));
        if (total - w > 0 && total - w < 8) w = total;
        parts.push_back(w);
        total -= w;
    }
    return parts;
}

std::vector<MethodCfg> Generator::unique_methods(const std::string& prefix, std::int64_t total) {
    std::vector<MethodCfg> out;
    for (auto w : split_weight(total)) out.push_back(unique_method(prefix, w));
    return out;
}

AppRecord Generator::base_app(const std::string& package, std::int64_t version, const std::string& cert,
                              const std::string& market, int year) {
    AppRecord r;
    r.sha256 = next_sha();
    r.package_name = package;
    r.app_name = "App " + package.substr(package.rfind('.') + 1);
    r.version_code = version;
    r.version_name = std::to_string(version / 10) + "." + std::to_string(version % 10);
    r.certificate = {cert, "CN=Issuer " + cert.substr(0, 6), "CN=Developer " + cert.substr(0, 6),
                     sha256_hex("pk:" + cert)};
    r.compile_date = date(year);
    r.min_sdk = between(1, 24);
    r.target_sdk = *r.min_sdk + between(0, 4);
    if (chance(20)) r.max_sdk = *r.target_sdk + between(0, 3);
    r.components.activities = {package + ".MainActivity"};
    for (auto i = between(0, 3); i > 0; --i) r.components.activities.insert(package + ".Activity" + std::to_string(i));
    if (chance(50)) r.components.services.insert(package + ".SyncService");
    if (chance(40)) r.components.receivers.insert(package + ".BootReceiver");
    if (chance(20)) r.components.providers.insert(package + ".DataProvider");
    for (auto i = between(3, 10); i > 0; --i) r.requested_permissions.insert("android.permission.P" + std::to_string(below(60)));
    if (chance(15)) r.declared_permissions.insert(package + ".permission.C2D");
    for (auto i = between(1, 4); i > 0; --i) r.libraries.insert("lib.vendor" + std::to_string(below(80)) + ".sdk");
    for (auto i = between(5, 15); i > 0; --i) {
        r.invoked_apis.insert("android.api.C" + std::to_string(below(50)) + ".m" + std::to_string(below(10)));
    }
    for (auto i = between(1, 5); i > 0; --i) r.strings.insert("str_" + std::to_string(rng_() % 100000));
    for (auto i = between(2, 6); i > 0; --i) {
        r.files.insert({"res/raw/f" + std::to_string(below(40)) + ".bin", sha256_hex(std::to_string(rng_())).substr(0, 32)});
    }
    if (!filler_packages_.empty() && chance(25)) {
        r.invoked_packages.insert(filler_packages_[below(filler_packages_.size())]);
    }
    r.market = market;
    if (market == kMarketNames[0]) {
        CrawlInfo c;
        c.category = std::string(kCategories[below(kCategories.size())]);
        c.description = "Synthetic description for " + package;
        c.screenshots = {"https://img.example/" + r.sha256.substr(0, 8) + "/1.png"};
        c.reviews = {"works", "ok"};
        c.score = static_cast<double>(between(0, 50)) / 10.0;
        c.whats_new = "bug fixes";
        c.updated_date = date(year + 1 > 2019 ? 2019 : year + 1);
        c.file_size = static_cast<std::uint64_t>(between(100000, 90000000));
        c.install_count = static_cast<std::uint64_t>(between(0, 5000000));
        c.version = r.version_name;
        c.required_android_version = std::to_string(*r.min_sdk);
        c.price = chance(90) ? 0.0 : static_cast<double>(between(99, 999)) / 100.0;
        c.content_rating = chance(80) ? "Everyone" : "Teen";
        c.developer = "Developer " + cert.substr(0, 6);
        c.market = market;
        r.crawl = std::move(c);
    }
    return r;
}

void Generator::add_filler_methods(AppRecord& app, std::size_t min_count, std::size_t max_count) {
    const auto count = between(static_cast<std::int64_t>(min_count), static_cast<std::int64_t>(max_count));
    for (std::int64_t i = 0; i < count; ++i) {
        app.methods.push_back(unique_method("L" + app.package_name + ";", between(8, 40)));
    }
}

void Generator::make_malware(AppRecord& app, std::string_view family) {
    const auto engines = between(1, 5);
    std::set<std::int64_t> chosen;
    while (static_cast<std::int64_t>(chosen.size()) < engines) chosen.insert(between(0, 56));
    std::size_t t = below(kLabelTemplates.size());
    for (auto e : chosen) {
        char engine[32];
        std::snprintf(engine, sizeof engine, "engine%02d", static_cast<int>(e));
        app.detections.push_back({engine, label_for(family, t++)});
    }
}

std::string Generator::other_family(std::size_t k) const {
    const std::size_t available = kFamilyNames.size() - std::min(kFamilyNames.size(), profile_.families);
    if (available > 0) return std::string(kFamilyNames[profile_.families + k % available]);
    return "variant" + std::to_string(k % 7);
}

Output Generator::run() {
    const auto& p = profile_;
    if (p.markets == 0 || p.markets > kMarketNames.size()) {
        throw InvalidArgument("markets must be between 1 and " + std::to_string(kMarketNames.size()));
    }
    if (p.families > kFamilyNames.size()) {
        throw InvalidArgument("at most " + std::to_string(kFamilyNames.size()) + " planted families");
    }
    if (p.families > 0 && (p.family_samples == 0 || p.payload_methods == 0)) {
        throw InvalidArgument("planted families need samples and payload methods");
    }
    std::vector<std::int64_t> shared_weights;
    for (double r : p.clone_similarities) {
        const double scaled = r * static_cast<double>(kCloneTotalWeight);
        const auto shared = static_cast<std::int64_t>(std::llround(scaled));
        if (!(r > 0.0 && r <= 1.0) || std::fabs(scaled - static_cast<double>(shared)) > 1e-9 || shared == 0) {
            throw InvalidArgument("clone similarity " + std::to_string(r) + " is not a multiple of 1/" +
                                  std::to_string(kCloneTotalWeight) + " in (0,1]");
        }
        shared_weights.push_back(shared);
    }

    std::vector<std::int64_t> attack_lengths, benign_lengths;
    for (std::size_t i = 0; i < p.update_attack_chains; ++i) attack_lengths.push_back(between(2, 4));
    for (std::size_t i = 0; i < p.benign_upgrade_chains; ++i) benign_lengths.push_back(between(2, 3));
    std::size_t planted = p.families * p.family_samples + 2 * p.piggyback_pairs + 2 * p.clone_similarities.size();
    for (auto l : attack_lengths) planted += static_cast<std::size_t>(l);
    for (auto l : benign_lengths) planted += static_cast<std::size_t>(l);
    if (planted > p.apps) {
        throw InvalidArgument("profile plants " + std::to_string(planted) + " apps but apps = " + std::to_string(p.apps));
    }
    const std::size_t fillers = p.apps - planted;
    if (p.replicated_apps > fillers || p.filler_malware > fillers) {
        throw InvalidArgument("replicated_apps and filler_malware must not exceed the " + std::to_string(fillers) +
                              " filler apps");
    }
    if (p.replicated_apps > 0 && p.markets < 2) throw InvalidArgument("replication needs at least two markets");

    for (std::size_t i = 0; i < p.markets; ++i) markets_.emplace_back(kMarketNames[i]);
    for (std::size_t i = 0; i < std::max<std::size_t>(1, p.author_pool); ++i) author_pool_.push_back(new_cert());
    for (std::size_t i = 0; i < fillers; ++i) filler_packages_.push_back("com.synth.app" + std::to_string(i));

    Output out;
    out.truth.seed = seed_;
    auto& corpus = out.corpus;
    auto& truth = out.truth;

    // planted families: every sample carries the payload verbatim plus noise
    for (std::size_t f = 0; f < p.families; ++f) {
        FamilyTruth fam;
        fam.name = std::string(kFamilyNames[f]);
        std::vector<MethodCfg> payload;
        for (std::size_t k = 0; k < p.payload_methods; ++k) {
            auto m = unique_method("Lcom/" + fam.name + "/Payload;", between(15, 40));
            fam.payload_method_ids.push_back(m.id);
            payload.push_back(std::move(m));
        }
        for (std::size_t s = 0; s < p.family_samples; ++s) {
            auto app = base_app("com.fam." + fam.name + ".s" + std::to_string(s), between(1, 30), pool_cert(),
                                random_market(), static_cast<int>(between(2012, 2018)));
            app.methods = payload;
            add_filler_methods(app, 3, 8);
            make_malware(app, fam.name);
            fam.samples.push_back(app.sha256);
            truth.family_labels[app.sha256] = fam.name;
            corpus.push_back(std::move(app));
        }
        truth.families.push_back(std::move(fam));
    }

    // update-attack chains: same signer, benign versions then malicious ones
    for (std::size_t c = 0; c < attack_lengths.size(); ++c) {
        const auto length = attack_lengths[c];
        const auto first_bad = between(1, length - 1);
        const std::string package = "com.ua.pkg" + std::to_string(c);
        const std::string cert = new_cert();
        const std::string market = random_market();
        const std::string family = other_family(c);
        ChainTruth chain{package, cert, {}, 0};
        std::vector<MethodCfg> methods;
        std::int64_t version = between(1, 5);
        int year = static_cast<int>(between(2012, 2015));
        for (std::int64_t v = 0; v < length; ++v) {
            auto app = base_app(package, version, cert, market, year + static_cast<int>(v));
            methods.push_back(unique_method("L" + package + ";", between(8, 40)));
            if (v == 0) {
                for (int k = 0; k < 3; ++k) methods.push_back(unique_method("L" + package + ";", between(8, 40)));
            }
            app.methods = methods;
            if (v >= first_bad) {
                app.methods.push_back(unique_method("L" + package + "/Inject;", between(10, 30)));
                make_malware(app, family);
                truth.family_labels[app.sha256] = family;
                if (v == first_bad) chain.first_malicious_version = version;
            }
            chain.versions.push_back(app.sha256);
            corpus.push_back(std::move(app));
            version += between(1, 10);
        }
        truth.update_attack_chains.push_back(std::move(chain));
    }

    for (std::size_t c = 0; c < benign_lengths.size(); ++c) {
        const std::string package = "com.up.pkg" + std::to_string(c);
        const std::string cert = new_cert();
        const std::string market = random_market();
        ChainTruth chain{package, cert, {}, 0};
        std::vector<MethodCfg> methods;
        std::int64_t version = between(1, 5);
        int year = static_cast<int>(between(2012, 2015));
        for (std::int64_t v = 0; v < benign_lengths[c]; ++v) {
            auto app = base_app(package, version, cert, market, year + static_cast<int>(v));
            for (int k = v == 0 ? 4 : 1; k > 0; --k) methods.push_back(unique_method("L" + package + ";", between(8, 40)));
            app.methods = methods;
            chain.versions.push_back(app.sha256);
            corpus.push_back(std::move(app));
            version += between(1, 10);
        }
        truth.benign_upgrade_chains.push_back(std::move(chain));
    }

    // piggybacked pairs: a repackager re-signs the original and injects code
    for (std::size_t k = 0; k < p.piggyback_pairs; ++k) {
        const std::string package = "com.pb.pkg" + std::to_string(k);
        const auto version = between(1, 40);
        const int year = static_cast<int>(between(2012, 2016));
        auto original = base_app(package, version, pool_cert(), random_market(), year);
        add_filler_methods(original, 4, 9);
        auto variant = base_app(package, version, new_cert(), random_market(), year + static_cast<int>(between(1, 2)));
        variant.app_name = original.app_name;
        variant.components = original.components;
        variant.requested_permissions = original.requested_permissions;
        variant.invoked_apis = original.invoked_apis;
        variant.methods = original.methods;
        for (auto i = between(1, 2); i > 0; --i) {
            variant.methods.push_back(unique_method("L" + package + "/Ad;", between(8, 25)));
        }
        if (chance(60)) {
            const std::string family = other_family(k + 3);
            make_malware(variant, family);
            truth.family_labels[variant.sha256] = family;
        }
        truth.piggyback_pairs.push_back({package, version, original.sha256, variant.sha256});
        corpus.push_back(std::move(original));
        corpus.push_back(std::move(variant));
    }

    // clone pairs with an exact shared-weight ratio
    for (std::size_t k = 0; k < shared_weights.size(); ++k) {
        const auto shared = shared_weights[k];
        const auto unshared = kCloneTotalWeight - shared;
        const std::string market = random_market();
        auto a = base_app("com.clone.a" + std::to_string(k), between(1, 20), new_cert(), market,
                          static_cast<int>(between(2012, 2018)));
        auto b = base_app("com.clone.b" + std::to_string(k), between(1, 20), new_cert(), market,
                          static_cast<int>(between(2012, 2018)));
        auto common = unique_methods("Lcom/clone/Shared" + std::to_string(k) + ";", shared);
        a.methods = common;
        b.methods = common;
        for (auto& m : unique_methods("L" + a.package_name + ";", unshared)) a.methods.push_back(std::move(m));
        for (auto& m : unique_methods("L" + b.package_name + ";", unshared)) b.methods.push_back(std::move(m));
        truth.clone_pairs.push_back({a.sha256, b.sha256,
                                     static_cast<double>(shared) / static_cast<double>(kCloneTotalWeight), shared,
                                     kCloneTotalWeight});
        corpus.push_back(std::move(a));
        corpus.push_back(std::move(b));
    }

    // fillers: unique packages, random authors, some replicated, some malware
    std::vector<std::size_t> order(fillers);
    for (std::size_t i = 0; i < fillers; ++i) order[i] = i;
    shuffle(order);
    std::set<std::size_t> replicated(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(p.replicated_apps));
    shuffle(order);
    std::set<std::size_t> malicious(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(p.filler_malware));
    for (std::size_t i = 0; i < fillers; ++i) {
        auto app = base_app(filler_packages_[i], between(1, 50), pool_cert(), random_market(),
                            static_cast<int>(between(2012, 2018)));
        app.invoked_packages.erase(app.package_name);
        add_filler_methods(app, 3, 10);
        if (replicated.count(i)) {
            for (auto extra = between(1, static_cast<std::int64_t>(p.markets) - 1); extra > 0; --extra) {
                auto m = random_market();
                if (m != app.market) app.markets.insert(m);
            }
            if (app.markets.empty()) {
                for (const auto& m : markets_) {
                    if (m != app.market) {
                        app.markets.insert(m);
                        break;
                    }
                }
            }
        }
        if (malicious.count(i)) {
            const std::string family = other_family(i);
            make_malware(app, family);
            truth.family_labels[app.sha256] = family;
        }
        corpus.push_back(std::move(app));
    }

    for (auto& r : corpus) normalize(r);
    std::sort(corpus.begin(), corpus.end(),
              [](const AppRecord& a, const AppRecord& b) { return a.sha256 < b.sha256; });
    for (const auto& m : markets_) truth.market_presence[m];
    for (const auto& r : corpus) {
        for (const auto& m : r.presence()) truth.market_presence[m].push_back(r.sha256);
    }
    return out;
}

}  // namespace

Profile profile_from_json(const json& j) {
    if (!j.is_object()) throw InvalidArgument("profile must be a JSON object");
    Profile p;
    auto count = [&](const char* key, std::size_t& field) {
        if (!j.contains(key)) return;
        const auto& v = j.at(key);
        if (!v.is_number_unsigned()) throw InvalidArgument(std::string("profile.") + key + " must be a non-negative integer");
        field = v.get<std::size_t>();
    };
    for (const auto& [key, value] : j.items()) {
        static const std::set<std::string> known{"apps", "markets", "families", "family_samples", "payload_methods",
                                                 "piggyback_pairs", "update_attack_chains", "benign_upgrade_chains",
                                                 "clone_similarities", "replicated_apps", "filler_malware", "author_pool"};
        if (!known.count(key)) throw InvalidArgument("unknown profile key '" + key + "'");
    }
    count("apps", p.apps);
    count("markets", p.markets);
    count("families", p.families);
    count("family_samples", p.family_samples);
    count("payload_methods", p.payload_methods);
    count("piggyback_pairs", p.piggyback_pairs);
    count("update_attack_chains", p.update_attack_chains);
    count("benign_upgrade_chains", p.benign_upgrade_chains);
    count("replicated_apps", p.replicated_apps);
    count("filler_malware", p.filler_malware);
    count("author_pool", p.author_pool);
    if (j.contains("clone_similarities")) {
        const auto& v = j.at("clone_similarities");
        if (!v.is_array()) throw InvalidArgument("profile.clone_similarities must be an array");
        p.clone_similarities.clear();
        for (const auto& x : v) {
            if (!x.is_number()) throw InvalidArgument("profile.clone_similarities must hold numbers");
            p.clone_similarities.push_back(x.get<double>());
        }
    }
    return p;
}

Profile load_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open profile " + path.string());
    try {
        return profile_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ParseError(0, "profile", e.what());
    }
}

json to_json(const Profile& p) {
    return {{"apps", p.apps},
            {"markets", p.markets},
            {"families", p.families},
            {"family_samples", p.family_samples},
            {"payload_methods", p.payload_methods},
            {"piggyback_pairs", p.piggyback_pairs},
            {"update_attack_chains", p.update_attack_chains},
            {"benign_upgrade_chains", p.benign_upgrade_chains},
            {"clone_similarities", p.clone_similarities},
            {"replicated_apps", p.replicated_apps},
            {"filler_malware", p.filler_malware},
            {"author_pool", p.author_pool}};
}

namespace {

json chain_json(const ChainTruth& c) {
    return {{"package_name", c.package_name},
            {"fingerprint", c.fingerprint},
            {"versions", c.versions},
            {"first_malicious_version", c.first_malicious_version}};
}

ChainTruth chain_from(const json& j) {
    return {j.at("package_name").get<std::string>(), j.at("fingerprint").get<std::string>(),
            j.at("versions").get<std::vector<std::string>>(), j.at("first_malicious_version").get<std::int64_t>()};
}

}  // namespace

json to_json(const GroundTruth& t) {
    json pig = json::array();
    for (const auto& p : t.piggyback_pairs) {
        pig.push_back({{"package_name", p.package_name},
                       {"version_code", p.version_code},
                       {"original", p.original},
                       {"variant", p.variant}});
    }
    json attacks = json::array();
    for (const auto& c : t.update_attack_chains) attacks.push_back(chain_json(c));
    json benign = json::array();
    for (const auto& c : t.benign_upgrade_chains) benign.push_back(chain_json(c));
    json clones = json::array();
    for (const auto& c : t.clone_pairs) {
        clones.push_back({{"a", c.a},
                          {"b", c.b},
                          {"code_sim", c.code_sim},
                          {"shared_weight", c.shared_weight},
                          {"total_weight", c.total_weight}});
    }
    json families = json::array();
    for (const auto& f : t.families) {
        families.push_back({{"name", f.name}, {"samples", f.samples}, {"payload_method_ids", f.payload_method_ids}});
    }
    return {{"seed", t.seed},
            {"piggyback_pairs", pig},
            {"update_attack_chains", attacks},
            {"benign_upgrade_chains", benign},
            {"clone_pairs", clones},
            {"families", families},
            {"family_labels", t.family_labels},
            {"market_presence", t.market_presence}};
}

GroundTruth ground_truth_from_json(const json& j) {
    GroundTruth t;
    t.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& p : j.at("piggyback_pairs")) {
        t.piggyback_pairs.push_back({p.at("package_name").get<std::string>(), p.at("version_code").get<std::int64_t>(),
                                     p.at("original").get<std::string>(), p.at("variant").get<std::string>()});
    }
    for (const auto& c : j.at("update_attack_chains")) t.update_attack_chains.push_back(chain_from(c));
    for (const auto& c : j.at("benign_upgrade_chains")) t.benign_upgrade_chains.push_back(chain_from(c));
    for (const auto& c : j.at("clone_pairs")) {
        t.clone_pairs.push_back({c.at("a").get<std::string>(), c.at("b").get<std::string>(), c.at("code_sim").get<double>(),
                                 c.at("shared_weight").get<std::int64_t>(), c.at("total_weight").get<std::int64_t>()});
    }
    for (const auto& f : j.at("families")) {
        t.families.push_back({f.at("name").get<std::string>(), f.at("samples").get<std::vector<std::string>>(),
                              f.at("payload_method_ids").get<std::vector<std::string>>()});
    }
    t.family_labels = j.at("family_labels").get<std::map<std::string, std::string>>();
    t.market_presence = j.at("market_presence").get<std::map<std::string, std::vector<std::string>>>();
    return t;
}

Output generate(std::uint64_t seed, const Profile& profile) { return Generator(seed, profile).run(); }

void write(const Output& output, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    write_corpus(dir / kCorpusFile, output.corpus);
    std::ofstream truth(dir / kTruthFile, std::ios::binary | std::ios::trunc);
    if (!truth) throw IoError("cannot write ground truth in " + dir.string());
    truth << canonical_dump(to_json(output.truth)) << '\n';
}

}  // namespace appvault::synth
