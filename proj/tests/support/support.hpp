#pragma once

// Shared helpers for the test binaries: record builders, temporary
// directories and independent reference implementations used as oracles.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "appvault/attributes.hpp"
#include "appvault/record.hpp"

namespace testing {

using namespace appvault;

inline std::string sha_of(const std::string& seed) { return sha256_hex(seed); }

inline std::string fp_of(const std::string& seed) { return sha256_hex("fp:" + seed).substr(0, 40); }

// A minimal valid record; callers fill in what a test cares about.
inline AppRecord make_app(const std::string& seed, const std::string& package = "com.example.app",
                          std::int64_t version = 1, const std::string& signer = "dev",
                          const std::string& market = "googleplay") {
    AppRecord r;
    r.sha256 = sha_of(seed);
    r.package_name = package;
    r.app_name = package;
    r.version_code = version;
    r.version_name = std::to_string(version);
    r.certificate.fingerprint = fp_of(signer);
    r.market = market;
    return r;
}

inline MethodCfg single_block_method(const std::string& id, std::int64_t statements, std::int64_t depth = 0) {
    MethodCfg m;
    m.id = id;
    m.blocks = {{0, statements}};
    m.loop_depth[0] = depth;
    return m;
}

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("appvault-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Every file in `dir` (non-recursive), name -> bytes.
inline std::map<std::string, std::string> snapshot_dir(const std::filesystem::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
    return out;
}

// Nested-loop intersection count over unsorted vectors.
template <typename T>
std::pair<std::size_t, std::size_t> brute_counts(const std::vector<T>& a, const std::vector<T>& b) {
    std::size_t common = 0;
    for (const auto& x : a) {
        for (const auto& y : b) {
            if (x == y) ++common;
        }
    }
    return {common, a.size() + b.size() - common};
}

// Straightforward recursive recomputation of a method centroid: preorder
// numbering from the lowest block, successors ascending, leftovers appended.
struct CentroidSums {
    long double x = 0, y = 0, z = 0;
    std::int64_t w = 0;
};

inline void oracle_visit(std::int64_t b, const std::map<std::int64_t, std::set<std::int64_t>>& succ,
                         std::set<std::int64_t>& seen, std::vector<std::int64_t>& order) {
    if (!seen.insert(b).second) return;
    order.push_back(b);
    auto it = succ.find(b);
    if (it == succ.end()) return;
    for (auto s : it->second) oracle_visit(s, succ, seen, order);
}

inline MethodCentroid oracle_centroid(const MethodCfg& m) {
    std::map<std::int64_t, std::int64_t> statements;
    for (const auto& b : m.blocks) statements[b.block_id] = b.statement_count;
    std::map<std::int64_t, std::set<std::int64_t>> succ;
    for (const auto& e : m.edges) succ[e.from_block].insert(e.to_block);
    std::set<std::int64_t> seen;
    std::vector<std::int64_t> order;
    if (!statements.empty()) oracle_visit(statements.begin()->first, succ, seen, order);
    for (const auto& [id, _] : statements) {
        if (!seen.count(id)) order.push_back(id);
    }
    std::int64_t sx = 0, sy = 0, sz = 0, w = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto b = order[i];
        const auto s = statements[b];
        const auto out = succ.count(b) ? static_cast<std::int64_t>(succ[b].size()) : 0;
        const auto depth = m.loop_depth.count(b) ? m.loop_depth.at(b) : 0;
        sx += s * static_cast<std::int64_t>(i + 1);
        sy += s * out;
        sz += s * depth;
        w += s;
    }
    MethodCentroid c;
    c.method_id = m.id;
    c.weight = w;
    if (w > 0) {
        c.cx = static_cast<double>(sx) / static_cast<double>(w);
        c.cy = static_cast<double>(sy) / static_cast<double>(w);
        c.cz = static_cast<double>(sz) / static_cast<double>(w);
    }
    return c;
}

inline double oracle_cdg(const MethodCentroid& a, const MethodCentroid& b) {
    auto term = [](double p, double q) { return p + q == 0.0 ? 0.0 : std::abs(p - q) / (p + q); };
    return term(a.cx, b.cx) + term(a.cy, b.cy) + term(a.cz, b.cz);
}

// Random CFG with up to `max_blocks` blocks and non-contiguous block ids.
inline MethodCfg random_cfg(std::mt19937_64& rng, const std::string& id, std::size_t max_blocks) {
    MethodCfg m;
    m.id = id;
    const std::size_t n = 1 + rng() % max_blocks;
    std::set<std::int64_t> ids;
    while (ids.size() < n) ids.insert(static_cast<std::int64_t>(rng() % (4 * max_blocks)));
    std::vector<std::int64_t> v(ids.begin(), ids.end());
    for (auto b : v) {
        m.blocks.push_back({b, static_cast<std::int64_t>(1 + rng() % 20)});
        m.loop_depth[b] = rng() % 2 ? static_cast<std::int64_t>(rng() % 4) : 0;
    }
    std::set<CfgEdge> edges;
    const std::size_t ne = rng() % (2 * n + 1);
    for (std::size_t i = 0; i < ne; ++i) edges.insert({v[rng() % n], v[rng() % n]});
    m.edges.assign(edges.begin(), edges.end());
    return m;
}

}  // namespace testing
