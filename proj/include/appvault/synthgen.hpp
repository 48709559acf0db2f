#pragma once

// Seeded synthetic corpus generator with planted, machine-readable ground
// truth for every fact extractor and for exact code-similarity values.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "appvault/record.hpp"

namespace appvault::synth {

struct Profile {
    std::size_t apps = 500;
    std::size_t markets = 4;
    std::size_t families = 5;
    std::size_t family_samples = 10;
    std::size_t payload_methods = 2;
    std::size_t piggyback_pairs = 25;
    std::size_t update_attack_chains = 15;
    std::size_t benign_upgrade_chains = 10;
    // Exact code_sim value requested for each planted clone pair; each must be
    // a multiple of 1/200 in (0,1].
    std::vector<double> clone_similarities{0.85, 0.90, 0.95};
    // Filler apps also hosted by one or more additional markets.
    std::size_t replicated_apps = 60;
    // Filler apps carrying detections from families that are not planted.
    std::size_t filler_malware = 30;
    std::size_t author_pool = 150;
};

// Unknown keys are rejected; missing keys keep their defaults.
Profile profile_from_json(const nlohmann::json& j);
Profile load_profile(const std::filesystem::path& path);
nlohmann::json to_json(const Profile& profile);

struct PiggybackTruth {
    std::string package_name;
    std::int64_t version_code = 0;
    std::string original;
    std::string variant;
};

struct ChainTruth {
    std::string package_name;
    std::string fingerprint;
    std::vector<std::string> versions;  // ascending version_code
    std::int64_t first_malicious_version = 0;  // 0 for benign chains
};

struct CloneTruth {
    std::string a;
    std::string b;
    double code_sim = 0.0;
    std::int64_t shared_weight = 0;
    std::int64_t total_weight = 0;  // per app
};

struct FamilyTruth {
    std::string name;
    std::vector<std::string> samples;
    std::vector<std::string> payload_method_ids;
};

struct GroundTruth {
    std::uint64_t seed = 0;
    std::vector<PiggybackTruth> piggyback_pairs;
    std::vector<ChainTruth> update_attack_chains;
    std::vector<ChainTruth> benign_upgrade_chains;
    std::vector<CloneTruth> clone_pairs;
    std::vector<FamilyTruth> families;
    // sha256 -> family name the normalizer should produce
    std::map<std::string, std::string> family_labels;
    // market -> every sha256 it hosts
    std::map<std::string, std::vector<std::string>> market_presence;
};

nlohmann::json to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(const nlohmann::json& j);

struct Output {
    std::vector<AppRecord> corpus;
    GroundTruth truth;
};

// Deterministic for a fixed (seed, profile). Throws InvalidArgument when the
// profile's planted structures do not fit in `apps`.
Output generate(std::uint64_t seed, const Profile& profile);

inline constexpr std::string_view kCorpusFile = "corpus.jsonl";
inline constexpr std::string_view kTruthFile = "ground_truth.json";

// Writes corpus.jsonl and ground_truth.json into `dir`.
void write(const Output& output, const std::filesystem::path& dir);

}  // namespace appvault::synth
