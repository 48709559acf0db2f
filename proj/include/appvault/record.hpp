#pragma once

// App record model: one ingested app with its manifest, dex, security-report
// and crawl attributes, plus the newline-delimited corpus format.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace appvault {

using StringSet = std::set<std::string>;

struct CertIdentity {
    std::string fingerprint;
    std::string issuer;
    std::string subject;
    std::string public_key_hash;

    // Authors are identified by signing certificate; the fingerprint is the key.
    friend bool operator==(const CertIdentity& a, const CertIdentity& b) {
        return a.fingerprint == b.fingerprint;
    }
};

struct CrawlInfo {
    std::string category;
    std::string description;
    std::vector<std::string> screenshots;
    std::vector<std::string> reviews;
    double score = 0.0;
    std::string whats_new;
    std::string updated_date;
    std::uint64_t file_size = 0;
    std::uint64_t install_count = 0;
    std::string version;
    std::string required_android_version;
    double price = 0.0;
    std::string content_rating;
    std::string developer;
    StringSet similar_apps;
    std::string market;

    friend bool operator==(const CrawlInfo&, const CrawlInfo&) = default;
};

struct CfgBlock {
    std::int64_t block_id = 0;
    std::int64_t statement_count = 1;

    friend auto operator<=>(const CfgBlock&, const CfgBlock&) = default;
};

struct CfgEdge {
    std::int64_t from_block = 0;
    std::int64_t to_block = 0;

    friend auto operator<=>(const CfgEdge&, const CfgEdge&) = default;
};

// Intermediate representation of one method's control-flow graph.
struct MethodCfg {
    std::string id;
    std::vector<CfgBlock> blocks;
    std::vector<CfgEdge> edges;
    std::map<std::int64_t, std::int64_t> loop_depth;

    friend bool operator==(const MethodCfg&, const MethodCfg&) = default;
};

struct FileEntry {
    std::string path;
    std::string content_hash;

    friend auto operator<=>(const FileEntry&, const FileEntry&) = default;
};

struct Detection {
    std::string engine;
    std::string label;

    friend auto operator<=>(const Detection&, const Detection&) = default;
};

struct Components {
    StringSet activities;
    StringSet services;
    StringSet receivers;
    StringSet providers;

    friend bool operator==(const Components&, const Components&) = default;
};

struct AppRecord {
    std::string sha256;
    std::string package_name;
    std::string app_name;
    std::int64_t version_code = 0;
    std::string version_name;
    CertIdentity certificate;
    std::optional<std::string> compile_date;
    std::optional<std::int64_t> min_sdk;
    std::optional<std::int64_t> max_sdk;
    std::optional<std::int64_t> target_sdk;
    Components components;
    StringSet declared_permissions;
    StringSet requested_permissions;
    StringSet libraries;
    StringSet invoked_apis;
    StringSet strings;
    StringSet invoked_packages;
    std::set<FileEntry> files;
    std::vector<MethodCfg> methods;
    std::vector<Detection> detections;
    std::optional<CrawlInfo> crawl;
    std::string market;
    // Additional markets hosting the same binary; the app counts toward each.
    StringSet markets;

    // Every market this binary is present in: `market` plus `markets`.
    StringSet presence() const;

    friend bool operator==(const AppRecord&, const AppRecord&) = default;
};

// Puts list-valued fields whose order carries no meaning (methods, blocks,
// edges, detections) into canonical order.
void normalize(AppRecord& record);

// Throws ParseError (line 0) naming the first violated invariant.
void validate(const AppRecord& record);

bool is_valid_date(std::string_view date);

nlohmann::json to_json(const AppRecord& record);
AppRecord record_from_json(const nlohmann::json& j);

AppRecord parse_record(std::string_view line);
std::string canonical_serialize(const AppRecord& record);

std::vector<AppRecord> parse_corpus(std::istream& in);
std::vector<AppRecord> parse_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const std::vector<AppRecord>& corpus);
void write_corpus(const std::filesystem::path& path, const std::vector<AppRecord>& corpus);

// Hex SHA-256 over the canonical lines of the corpus, each newline-terminated.
std::string corpus_digest(const std::vector<AppRecord>& corpus);

// Compact, key-sorted JSON text used for every wire and on-disk record.
std::string canonical_dump(const nlohmann::json& j);

std::string sha256_hex(std::string_view bytes);

}  // namespace appvault
