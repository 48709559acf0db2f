#pragma once

// Attributes computed from raw records: method centroids, normalized family
// labels, the malware flag and author identity.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "appvault/record.hpp"

namespace appvault {

// Three-dimensional summary of a method CFG. Each coordinate is a
// statement-count-weighted mean over blocks: sequence index, out-degree and
// loop depth.
struct MethodCentroid {
    std::string method_id;
    double cx = 0.0;
    double cy = 0.0;
    double cz = 0.0;
    std::int64_t weight = 0;

    friend bool operator==(const MethodCentroid&, const MethodCentroid&) = default;
};

// Blocks are numbered by a depth-first preorder from the lowest block id,
// visiting successors in ascending id order. Unreachable blocks follow in
// ascending id order.
MethodCentroid compute_centroid(const MethodCfg& method);

std::vector<MethodCentroid> compute_centroids(const AppRecord& record);

struct FamilyLabel {
    std::optional<std::string> name;  // empty = unlabeled
    std::int64_t vote_count = 0;

    bool labeled() const { return name.has_value(); }
    friend bool operator==(const FamilyLabel&, const FamilyLabel&) = default;
};

inline constexpr std::string_view kUnlabeled = "UNLABELED";

// Plurality vote over antivirus labels. Each label is split on
// non-alphanumerics and lowercased; generic tokens are dropped; a token scores
// one vote per engine that mentions it. Ties go to the smallest token.
class FamilyNormalizer {
public:
    FamilyNormalizer();
    explicit FamilyNormalizer(std::set<std::string> stoplist);

    // One token per line; blank lines and lines starting with '#' are skipped.
    static FamilyNormalizer from_file(const std::filesystem::path& path);
    static const std::set<std::string>& default_stoplist();

    FamilyLabel normalize(std::span<const Detection> detections) const;
    const std::set<std::string>& stoplist() const { return stoplist_; }

private:
    std::set<std::string> stoplist_;
};

FamilyLabel normalize_family(std::span<const Detection> detections);

// Malware means confirmed by at least one engine.
inline bool is_malware(std::span<const Detection> detections) { return !detections.empty(); }

inline const std::string& author_of(const AppRecord& record) {
    return record.certificate.fingerprint;
}

}  // namespace appvault
