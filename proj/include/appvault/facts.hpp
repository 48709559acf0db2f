#pragma once

// Fact extractors: piggybacked apps, update attacks, market replication and
// malicious-code localization. All extractors are read-only over a Graph.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "appvault/graph.hpp"

namespace appvault {

struct PiggybackFact {
    std::string package_name;
    std::int64_t version_code = 0;
    std::string original;
    std::string variant;
    std::string cert_original;
    std::string cert_variant;
    std::optional<double> code_sim;

    friend bool operator==(const PiggybackFact&, const PiggybackFact&) = default;
};

struct ChainEntry {
    std::string sha256;
    std::int64_t version_code = 0;
    bool is_malware = false;

    friend bool operator==(const ChainEntry&, const ChainEntry&) = default;
};

struct UpdateAttackFact {
    std::string package_name;
    // Empty when grouped by package name only.
    std::string fingerprint;
    std::vector<ChainEntry> chain;
    std::int64_t first_malicious_version = 0;

    friend bool operator==(const UpdateAttackFact&, const UpdateAttackFact&) = default;
};

struct MarketReplicationFact {
    std::string market;
    std::size_t app_count = 0;
    std::size_t replicated_count = 0;
    double replication_ratio = 0.0;
    // Apps shared with each other market (only peers with a non-zero count).
    std::map<std::string, std::size_t> shared_with;

    friend bool operator==(const MarketReplicationFact&, const MarketReplicationFact&) = default;
};

struct MethodRef {
    std::string sha256;
    std::string method_id;

    friend auto operator<=>(const MethodRef&, const MethodRef&) = default;
};

struct SignatureCluster {
    MethodRef representative;
    MethodCentroid centroid;
    double support_in_family = 0.0;
    double support_in_benign = 0.0;
    std::vector<MethodRef> members;
};

struct FamilySignature {
    std::string family;
    std::vector<SignatureCluster> clusters;
};

struct LocalizeOptions {
    double sigma = 0.5;
    double beta = 0.01;
    double tau_m = kDefaultTauM;
};

// Apps sharing (package name, version code) but signed by different
// certificates. The app compiled first is the original.
std::vector<PiggybackFact> find_piggybacked(const Graph& graph);

// Lineages that turn malicious: a benign version followed later by a
// malware-flagged one. Grouped by (package, signer) unless ignore_cert.
std::vector<UpdateAttackFact> find_update_attacks(const Graph& graph, bool ignore_cert = false);

std::vector<MarketReplicationFact> market_replication(const Graph& graph);

// Every non-malware APP, ascending sha256.
std::set<std::string> default_benign_sample(const Graph& graph);

// Single-linkage clusters of the family's method centroids under
// cdg <= tau_m, kept when prevalent in the family and rare in benign apps.
FamilySignature localize_malicious_code(const Graph& graph, const std::string& family,
                                        const std::set<std::string>& benign_sample,
                                        const LocalizeOptions& options = {});

nlohmann::json to_json(const PiggybackFact& fact);
nlohmann::json to_json(const UpdateAttackFact& fact);
nlohmann::json to_json(const MarketReplicationFact& fact);
nlohmann::json to_json(const FamilySignature& signature);

template <typename Fact>
nlohmann::json facts_to_json(const std::vector<Fact>& facts) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& f : facts) out.push_back(to_json(f));
    return out;
}

}  // namespace appvault
