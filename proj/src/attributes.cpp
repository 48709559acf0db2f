#include "appvault/attributes.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "appvault/error.hpp"

namespace appvault {

MethodCentroid compute_centroid(const MethodCfg& method) {
    std::vector<std::int64_t> ids;
    ids.reserve(method.blocks.size());
    std::map<std::int64_t, std::int64_t> statements;
    for (const auto& b : method.blocks) {
        ids.push_back(b.block_id);
        statements[b.block_id] = b.statement_count;
    }
    std::sort(ids.begin(), ids.end());

    std::map<std::int64_t, std::vector<std::int64_t>> successors;
    for (const auto& e : method.edges) successors[e.from_block].push_back(e.to_block);
    for (auto& [_, next] : successors) std::sort(next.begin(), next.end());

    // Iterative preorder DFS; successors pushed in reverse so the smallest
    // id is visited first.
    std::map<std::int64_t, std::int64_t> sequence;
    std::int64_t counter = 0;
    if (!ids.empty()) {
        std::vector<std::int64_t> stack{ids.front()};
        while (!stack.empty()) {
            auto block = stack.back();
            stack.pop_back();
            if (sequence.count(block)) continue;
            sequence[block] = ++counter;
            auto it = successors.find(block);
            if (it == successors.end()) continue;
            for (auto s = it->second.rbegin(); s != it->second.rend(); ++s) {
                if (!sequence.count(*s)) stack.push_back(*s);
            }
        }
    }
    for (auto id : ids) {
        if (!sequence.count(id)) sequence[id] = ++counter;
    }

    // Integer numerators keep the result independent of summation order.
    std::int64_t total = 0, sum_x = 0, sum_y = 0, sum_z = 0;
    for (auto id : ids) {
        const std::int64_t w = statements[id];
        auto succ = successors.find(id);
        const std::int64_t out_degree =
            succ == successors.end() ? 0 : static_cast<std::int64_t>(succ->second.size());
        auto depth = method.loop_depth.find(id);
        const std::int64_t z = depth == method.loop_depth.end() ? 0 : depth->second;
        total += w;
        sum_x += w * sequence[id];
        sum_y += w * out_degree;
        sum_z += w * z;
    }

    MethodCentroid c;
    c.method_id = method.id;
    c.weight = total;
    if (total > 0) {
        c.cx = static_cast<double>(sum_x) / static_cast<double>(total);
        c.cy = static_cast<double>(sum_y) / static_cast<double>(total);
        c.cz = static_cast<double>(sum_z) / static_cast<double>(total);
    }
    return c;
}

std::vector<MethodCentroid> compute_centroids(const AppRecord& record) {
    std::vector<MethodCentroid> out;
    out.reserve(record.methods.size());
    for (const auto& m : record.methods) out.push_back(compute_centroid(m));
    return out;
}

const std::set<std::string>& FamilyNormalizer::default_stoplist() {
    static const std::set<std::string> tokens{"trojan",  "virus",    "malware", "android", "andr",
                                              "generic", "riskware", "adware",  "win32"};
    return tokens;
}

FamilyNormalizer::FamilyNormalizer() : stoplist_(default_stoplist()) {}

FamilyNormalizer::FamilyNormalizer(std::set<std::string> stoplist) {
    for (auto token : stoplist) {
        std::transform(token.begin(), token.end(), token.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        stoplist_.insert(std::move(token));
    }
}

FamilyNormalizer FamilyNormalizer::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stoplist " + path.string());
    std::set<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos || line[begin] == '#') continue;
        auto end = line.find_last_not_of(" \t\r");
        tokens.insert(line.substr(begin, end - begin + 1));
    }
    return FamilyNormalizer(std::move(tokens));
}

FamilyLabel FamilyNormalizer::normalize(std::span<const Detection> detections) const {
    std::map<std::string, std::int64_t> votes;
    for (const auto& d : detections) {
        std::set<std::string> tokens;
        std::string current;
        auto flush = [&] {
            if (!current.empty() && !stoplist_.count(current)) tokens.insert(current);
            current.clear();
        };
        for (unsigned char c : d.label) {
            if (std::isalnum(c)) {
                current.push_back(static_cast<char>(std::tolower(c)));
            } else {
                flush();
            }
        }
        flush();
        for (const auto& t : tokens) ++votes[t];
    }
    FamilyLabel best;
    for (const auto& [token, count] : votes) {
        // map iteration is ascending, so strict > keeps the smallest on ties
        if (count > best.vote_count) {
            best.name = token;
            best.vote_count = count;
        }
    }
    return best;
}

FamilyLabel normalize_family(std::span<const Detection> detections) {
    static const FamilyNormalizer normalizer;
    return normalizer.normalize(detections);
}

}  // namespace appvault
