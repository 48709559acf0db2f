#include "appvault/stats.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>

#include "appvault/error.hpp"

namespace appvault {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<StatsDimension, std::string_view>, 6> kDimensions{{
    {StatsDimension::year, "year"},
    {StatsDimension::api_level, "api_level"},
    {StatsDimension::category, "category"},
    {StatsDimension::family, "family"},
    {StatsDimension::authorship_bucket, "authorship_bucket"},
    {StatsDimension::market, "market"},
}};

constexpr std::array<std::string_view, 5> kAuthorshipBuckets{"1-10", "11-100", "101-500", "501-1000",
                                                             ">1000"};

struct Tally {
    std::size_t apps = 0;
    std::size_t malware = 0;
};

std::string percent(std::size_t part, std::size_t whole) {
    if (whole == 0) return "0.0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * static_cast<double>(part) / static_cast<double>(whole));
    return buf;
}

}  // namespace

std::string_view to_string(StatsDimension dimension) {
    for (const auto& [d, name] : kDimensions) {
        if (d == dimension) return name;
    }
    return "unknown";
}

std::optional<StatsDimension> stats_dimension_from_string(std::string_view name) {
    for (const auto& [d, n] : kDimensions) {
        if (n == name) return d;
    }
    return std::nullopt;
}

std::string authorship_bucket(std::size_t n) {
    if (n <= 10) return std::string(kAuthorshipBuckets[0]);
    if (n <= 100) return std::string(kAuthorshipBuckets[1]);
    if (n <= 500) return std::string(kAuthorshipBuckets[2]);
    if (n <= 1000) return std::string(kAuthorshipBuckets[3]);
    return std::string(kAuthorshipBuckets[4]);
}

DistributionReport distribution(const Graph& g, StatsDimension dimension) {
    DistributionReport report{dimension, {}};
    const auto& corpus = g.corpus();
    if (corpus.empty()) return report;

    if (dimension == StatsDimension::authorship_bucket) {
        std::map<std::string, Tally> per_author;
        for (const auto& r : corpus) {
            auto& t = per_author[author_of(r)];
            ++t.apps;
            if (is_malware(r.detections)) ++t.malware;
        }
        std::map<std::string, std::size_t> authors;
        std::map<std::string, Tally> buckets;
        for (const auto& [author, t] : per_author) {
            if (t.malware == 0) continue;
            auto bucket = authorship_bucket(t.malware);
            ++authors[bucket];
            buckets[bucket].apps += t.apps;
            buckets[bucket].malware += t.malware;
        }
        for (auto label : kAuthorshipBuckets) {
            std::string key(label);
            report.rows.push_back({key, buckets[key].apps, buckets[key].malware, authors[key]});
        }
        return report;
    }

    std::map<std::string, Tally> tallies;
    for (const auto& r : corpus) {
        const bool malware = is_malware(r.detections);
        std::string bucket;
        switch (dimension) {
            case StatsDimension::year:
                bucket = r.compile_date ? r.compile_date->substr(0, 4) : std::string(kUnknownBucket);
                break;
            case StatsDimension::api_level:
                bucket = r.min_sdk ? std::to_string(*r.min_sdk) : std::string(kUnknownBucket);
                break;
            case StatsDimension::category:
                bucket = r.crawl && !r.crawl->category.empty() ? r.crawl->category
                                                                : std::string(kUnknownBucket);
                break;
            case StatsDimension::market:
                bucket = r.market;
                break;
            case StatsDimension::family: {
                auto family = g.family_of(r.sha256);
                if (!family) continue;
                bucket = *family;
                break;
            }
            case StatsDimension::authorship_bucket:
                break;
        }
        auto& t = tallies[bucket];
        ++t.apps;
        if (malware) ++t.malware;
    }
    for (const auto& [bucket, t] : tallies) report.rows.push_back({bucket, t.apps, t.malware, std::nullopt});

    auto unknown_last = [](const DistributionRow& a, const DistributionRow& b) {
        return (a.bucket == kUnknownBucket) < (b.bucket == kUnknownBucket);
    };
    switch (dimension) {
        case StatsDimension::family:
            std::stable_sort(report.rows.begin(), report.rows.end(),
                             [](const DistributionRow& a, const DistributionRow& b) {
                                 return a.malware_count > b.malware_count;
                             });
            break;
        case StatsDimension::api_level:
            std::sort(report.rows.begin(), report.rows.end(),
                      [&](const DistributionRow& a, const DistributionRow& b) {
                          if (a.bucket == kUnknownBucket || b.bucket == kUnknownBucket) {
                              return unknown_last(a, b);
                          }
                          return std::stoll(a.bucket) < std::stoll(b.bucket);
                      });
            break;
        default:
            std::stable_sort(report.rows.begin(), report.rows.end(), unknown_last);
            break;
    }
    return report;
}

json to_json(const DistributionReport& report) {
    std::size_t total_apps = 0, total_malware = 0, total_authors = 0;
    for (const auto& r : report.rows) {
        total_apps += r.app_count;
        total_malware += r.malware_count;
        total_authors += r.author_count.value_or(0);
    }
    json rows = json::array();
    for (const auto& r : report.rows) {
        json row{{"bucket", r.bucket},
                 {"app_count", r.app_count},
                 {"malware_count", r.malware_count},
                 {"app_pct", percent(r.app_count, total_apps)},
                 {"malware_pct", percent(r.malware_count, total_malware)}};
        if (r.author_count) {
            row["author_count"] = *r.author_count;
            row["author_pct"] = percent(*r.author_count, total_authors);
        }
        rows.push_back(row);
    }
    return {{"dimension", std::string(to_string(report.dimension))}, {"rows", rows}};
}

std::string to_csv(const DistributionReport& report) {
    std::string out = "bucket,app_count,malware_count\n";
    for (const auto& r : report.rows) {
        std::string bucket = r.bucket;
        if (bucket.find_first_of(",\"\n") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : bucket) {
                if (c == '"') quoted += '"';
                quoted += c;
            }
            bucket = quoted + "\"";
        }
        out += bucket + "," + std::to_string(r.app_count) + "," + std::to_string(r.malware_count) + "\n";
    }
    return out;
}

}  // namespace appvault
