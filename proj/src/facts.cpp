#include "appvault/facts.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "appvault/error.hpp"

namespace appvault {

using nlohmann::json;

namespace {

// Absent compile dates order after every known date.
bool compiled_before(const AppRecord& a, const AppRecord& b) {
    if (a.compile_date != b.compile_date) {
        if (!a.compile_date) return false;
        if (!b.compile_date) return true;
        return *a.compile_date < *b.compile_date;
    }
    return a.sha256 < b.sha256;
}

std::optional<double> edge_prob(const Graph& g, const std::string& a, const std::string& b,
                                RelationKind rel) {
    for (auto idx : g.incident({EntityKind::APP, a})) {
        const auto& e = g.edges()[idx];
        if (e.rel != rel) continue;
        if ((e.src.id == a && e.dst.id == b) || (e.src.id == b && e.dst.id == a)) return e.prob;
    }
    return std::nullopt;
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<PiggybackFact> find_piggybacked(const Graph& g) {
    std::map<std::pair<std::string, std::int64_t>, std::vector<const AppRecord*>> groups;
    for (const auto& r : g.corpus()) groups[{r.package_name, r.version_code}].push_back(&r);

    std::vector<PiggybackFact> out;
    for (const auto& [key, apps] : groups) {
        for (std::size_t i = 0; i < apps.size(); ++i) {
            for (std::size_t j = i + 1; j < apps.size(); ++j) {
                const AppRecord* a = apps[i];
                const AppRecord* b = apps[j];
                if (a->certificate == b->certificate) continue;
                if (compiled_before(*b, *a)) std::swap(a, b);
                out.push_back({key.first, key.second, a->sha256, b->sha256,
                               a->certificate.fingerprint, b->certificate.fingerprint,
                               edge_prob(g, a->sha256, b->sha256, RelationKind::code_sim)});
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const PiggybackFact& x, const PiggybackFact& y) {
        return std::tie(x.package_name, x.version_code, x.original, x.variant) <
               std::tie(y.package_name, y.version_code, y.original, y.variant);
    });
    return out;
}

std::vector<UpdateAttackFact> find_update_attacks(const Graph& g, bool ignore_cert) {
    std::map<std::pair<std::string, std::string>, std::vector<ChainEntry>> groups;
    for (const auto& r : g.corpus()) {
        std::string signer = ignore_cert ? std::string() : r.certificate.fingerprint;
        groups[{r.package_name, signer}].push_back({r.sha256, r.version_code, is_malware(r.detections)});
    }
    std::vector<UpdateAttackFact> out;
    for (auto& [key, chain] : groups) {
        std::sort(chain.begin(), chain.end(), [](const ChainEntry& a, const ChainEntry& b) {
            return std::tie(a.version_code, a.sha256) < std::tie(b.version_code, b.sha256);
        });
        std::optional<std::int64_t> earliest_benign;
        std::optional<std::int64_t> first_malicious;
        for (const auto& entry : chain) {
            if (!entry.is_malware) {
                if (!earliest_benign) earliest_benign = entry.version_code;
            } else if (earliest_benign && *earliest_benign < entry.version_code) {
                first_malicious = entry.version_code;
                break;
            }
        }
        if (first_malicious) out.push_back({key.first, key.second, chain, *first_malicious});
    }
    return out;
}

std::vector<MarketReplicationFact> market_replication(const Graph& g) {
    std::map<std::string, std::vector<const AppRecord*>> hosted;
    for (const auto& e : g.entities()) {
        if (e.ref.kind == EntityKind::MARKET) hosted[e.ref.id];
    }
    for (const auto& r : g.corpus()) {
        for (const auto& m : r.presence()) hosted[m].push_back(&r);
    }
    std::vector<MarketReplicationFact> out;
    for (const auto& [market, apps] : hosted) {
        MarketReplicationFact f;
        f.market = market;
        f.app_count = apps.size();
        for (const AppRecord* r : apps) {
            auto presence = r->presence();
            if (presence.size() > 1) ++f.replicated_count;
            for (const auto& peer : presence) {
                if (peer != market) ++f.shared_with[peer];
            }
        }
        f.replication_ratio = f.app_count == 0 ? 0.0
                                               : static_cast<double>(f.replicated_count) /
                                                     static_cast<double>(f.app_count);
        out.push_back(std::move(f));
    }
    return out;
}

std::set<std::string> default_benign_sample(const Graph& g) {
    std::set<std::string> out;
    for (const auto& r : g.corpus()) {
        if (!is_malware(r.detections)) out.insert(r.sha256);
    }
    return out;
}

FamilySignature localize_malicious_code(const Graph& g, const std::string& family,
                                        const std::set<std::string>& benign_sample,
                                        const LocalizeOptions& options) {
    if (!(options.sigma > 0.0 && options.sigma <= 1.0)) throw InvalidArgument("sigma must lie in (0,1]");
    if (!(options.beta >= 0.0 && options.beta < 1.0)) throw InvalidArgument("beta must lie in [0,1)");
    if (!(options.tau_m > 0.0)) throw InvalidArgument("tau_m must be positive");
    if (!g.find(EntityKind::FAMILY, family)) throw NotFound("unknown family " + family);

    FamilySignature signature{family, {}};
    const auto members = g.family_members(family);
    if (members.empty()) return signature;

    struct Point {
        const std::string* sha;
        const MethodCentroid* centroid;
    };
    std::vector<Point> points;
    for (const auto& sha : members) {
        const Entity* e = g.find(EntityKind::APP, sha);
        for (const auto& c : g.centroids(*e->record_index)) points.push_back({&sha, &c});
    }

    DisjointSets sets(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if (cdg(*points[i].centroid, *points[j].centroid) <= options.tau_m) sets.unite(i, j);
        }
    }
    std::map<std::size_t, std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < points.size(); ++i) clusters[sets.find(i)].push_back(i);

    std::vector<std::span<const MethodCentroid>> benign;
    for (const auto& sha : benign_sample) {
        const Entity* e = g.find(EntityKind::APP, sha);
        if (!e) throw NotFound("benign sample references unknown app " + sha);
        benign.push_back(g.centroids(*e->record_index));
    }

    const double family_size = static_cast<double>(members.size());
    for (const auto& [root, idx] : clusters) {
        std::set<std::string> apps;
        for (auto i : idx) apps.insert(*points[i].sha);
        const double support = static_cast<double>(apps.size()) / family_size;
        if (support < options.sigma) continue;

        // heaviest member, then smallest method id, then smallest app
        std::size_t rep = idx.front();
        for (auto i : idx) {
            const auto& c = *points[i].centroid;
            const auto& r = *points[rep].centroid;
            if (std::make_tuple(-c.weight, std::cref(c.method_id), std::cref(*points[i].sha)) <
                std::make_tuple(-r.weight, std::cref(r.method_id), std::cref(*points[rep].sha))) {
                rep = i;
            }
        }
        const MethodCentroid& rep_centroid = *points[rep].centroid;
        std::size_t benign_hits = 0;
        for (const auto& methods : benign) {
            bool hit = std::any_of(methods.begin(), methods.end(), [&](const MethodCentroid& m) {
                return cdg(m, rep_centroid) <= options.tau_m;
            });
            if (hit) ++benign_hits;
        }
        const double benign_support =
            benign.empty() ? 0.0 : static_cast<double>(benign_hits) / static_cast<double>(benign.size());
        if (benign_support > options.beta) continue;

        SignatureCluster cluster;
        cluster.representative = {*points[rep].sha, rep_centroid.method_id};
        cluster.centroid = rep_centroid;
        cluster.support_in_family = support;
        cluster.support_in_benign = benign_support;
        for (auto i : idx) cluster.members.push_back({*points[i].sha, points[i].centroid->method_id});
        std::sort(cluster.members.begin(), cluster.members.end());
        signature.clusters.push_back(std::move(cluster));
    }
    std::sort(signature.clusters.begin(), signature.clusters.end(),
              [](const SignatureCluster& a, const SignatureCluster& b) {
                  if (a.support_in_family != b.support_in_family) {
                      return a.support_in_family > b.support_in_family;
                  }
                  return a.representative < b.representative;
              });
    return signature;
}

json to_json(const PiggybackFact& f) {
    json j{{"package_name", f.package_name},   {"version_code", f.version_code},
           {"original", f.original},           {"variant", f.variant},
           {"cert_original", f.cert_original}, {"cert_variant", f.cert_variant}};
    if (f.code_sim) j["code_sim"] = *f.code_sim;
    return j;
}

json to_json(const UpdateAttackFact& f) {
    json chain = json::array();
    for (const auto& c : f.chain) {
        chain.push_back({{"sha256", c.sha256}, {"version_code", c.version_code}, {"is_malware", c.is_malware}});
    }
    return {{"package_name", f.package_name},
            {"fingerprint", f.fingerprint},
            {"chain", chain},
            {"first_malicious_version", f.first_malicious_version}};
}

json to_json(const MarketReplicationFact& f) {
    json shared = json::object();
    for (const auto& [peer, count] : f.shared_with) shared[peer] = count;
    return {{"market", f.market},
            {"app_count", f.app_count},
            {"replicated_count", f.replicated_count},
            {"replication_ratio", f.replication_ratio},
            {"shared_with", shared}};
}

json to_json(const FamilySignature& s) {
    json clusters = json::array();
    for (const auto& c : s.clusters) {
        json members = json::array();
        for (const auto& m : c.members) members.push_back({{"sha256", m.sha256}, {"method_id", m.method_id}});
        clusters.push_back({{"representative",
                             {{"sha256", c.representative.sha256},
                              {"method_id", c.representative.method_id},
                              {"cx", c.centroid.cx},
                              {"cy", c.centroid.cy},
                              {"cz", c.centroid.cz},
                              {"weight", c.centroid.weight}}},
                            {"support_in_family", c.support_in_family},
                            {"support_in_benign", c.support_in_benign},
                            {"members", members}});
    }
    return {{"family", s.family}, {"clusters", clusters}};
}

}  // namespace appvault
