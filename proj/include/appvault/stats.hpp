#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "appvault/graph.hpp"

namespace appvault {

enum class StatsDimension { year, api_level, category, family, authorship_bucket, market };

std::string_view to_string(StatsDimension dimension);
std::optional<StatsDimension> stats_dimension_from_string(std::string_view name);

struct DistributionRow {
    std::string bucket;
    std::size_t app_count = 0;
    std::size_t malware_count = 0;
    // authorship rows only: malware authors in the bucket
    std::optional<std::size_t> author_count;

    friend bool operator==(const DistributionRow&, const DistributionRow&) = default;
};

struct DistributionReport {
    StatsDimension dimension;
    std::vector<DistributionRow> rows;
};

inline constexpr std::string_view kUnknownBucket = "unknown";

// Per-author malware counts fall into 1-10, 11-100, 101-500, 501-1000, >1000.
std::string authorship_bucket(std::size_t malware_count);

// year (compile_date), api_level (min_sdk), category and market partition the
// apps; family lists labeled malware by descending count; authorship buckets
// malware authors. Apps missing the field land in "unknown".
DistributionReport distribution(const Graph& graph, StatsDimension dimension);

nlohmann::json to_json(const DistributionReport& report);
std::string to_csv(const DistributionReport& report);

}  // namespace appvault
