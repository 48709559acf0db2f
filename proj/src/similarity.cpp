#include "appvault/similarity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>
#include <vector>

#include "appvault/error.hpp"

namespace appvault {

namespace {

constexpr std::array<std::pair<SimilarityKind, std::string_view>, 7> kNames{{
    {SimilarityKind::code_sim, "code_sim"},
    {SimilarityKind::api_sim, "api_sim"},
    {SimilarityKind::perm_sim, "perm_sim"},
    {SimilarityKind::comp_sim, "comp_sim"},
    {SimilarityKind::lib_sim, "lib_sim"},
    {SimilarityKind::file_sim, "file_sim"},
    {SimilarityKind::mark_sim, "mark_sim"},
}};

double relative_difference(double x, double y) {
    const double sum = x + y;
    if (sum == 0.0) return 0.0;
    return std::fabs(x - y) / sum;
}

bool centroid_less(const MethodCentroid& a, const MethodCentroid& b) {
    return std::tie(a.method_id, a.cx, a.cy, a.cz, a.weight) <
           std::tie(b.method_id, b.cx, b.cy, b.cz, b.weight);
}

}  // namespace

std::string_view to_string(SimilarityKind kind) {
    for (const auto& [k, name] : kNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

std::optional<SimilarityKind> similarity_kind_from_string(std::string_view name) {
    for (const auto& [k, n] : kNames) {
        if (n == name) return k;
    }
    return std::nullopt;
}

StringSet tagged_components(const AppRecord& r) {
    StringSet out;
    for (const auto& a : r.components.activities) out.insert("activity:" + a);
    for (const auto& s : r.components.services) out.insert("service:" + s);
    for (const auto& s : r.components.receivers) out.insert("receiver:" + s);
    for (const auto& s : r.components.providers) out.insert("provider:" + s);
    return out;
}

SimilarityScore attribute_similarity(const AppRecord& a, const AppRecord& b, SimilarityKind kind) {
    switch (kind) {
        case SimilarityKind::api_sim:
            return {kind, jaccard(a.invoked_apis, b.invoked_apis)};
        case SimilarityKind::perm_sim:
            return {kind, jaccard(a.requested_permissions, b.requested_permissions)};
        case SimilarityKind::comp_sim:
            return {kind, jaccard(tagged_components(a), tagged_components(b))};
        case SimilarityKind::lib_sim:
            return {kind, jaccard(a.libraries, b.libraries)};
        case SimilarityKind::file_sim:
            return {kind, jaccard(a.files, b.files)};
        case SimilarityKind::code_sim:
        case SimilarityKind::mark_sim:
            break;
    }
    throw InvalidArgument("attribute_similarity does not handle " + std::string(to_string(kind)));
}

bool both_empty(const AppRecord& a, const AppRecord& b, SimilarityKind kind) {
    switch (kind) {
        case SimilarityKind::api_sim:
            return a.invoked_apis.empty() && b.invoked_apis.empty();
        case SimilarityKind::perm_sim:
            return a.requested_permissions.empty() && b.requested_permissions.empty();
        case SimilarityKind::comp_sim:
            return tagged_components(a).empty() && tagged_components(b).empty();
        case SimilarityKind::lib_sim:
            return a.libraries.empty() && b.libraries.empty();
        case SimilarityKind::file_sim:
            return a.files.empty() && b.files.empty();
        case SimilarityKind::code_sim:
            return a.methods.empty() && b.methods.empty();
        case SimilarityKind::mark_sim:
            break;
    }
    return false;
}

double cdg(const MethodCentroid& a, const MethodCentroid& b) {
    return relative_difference(a.cx, b.cx) + relative_difference(a.cy, b.cy) +
           relative_difference(a.cz, b.cz);
}

double code_similarity(std::span<const MethodCentroid> a, std::span<const MethodCentroid> b,
                       double tau_m) {
    if (!(tau_m > 0.0)) throw InvalidArgument("tau_m must be positive");
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;

    // Fix argument order so tie-breaking cannot make the score asymmetric.
    if (std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end(), centroid_less)) {
        std::swap(a, b);
    }

    struct Candidate {
        double distance;
        std::size_t i;
        std::size_t j;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            double d = cdg(a[i], b[j]);
            if (d <= tau_m) candidates.push_back({d, i, j});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& x, const Candidate& y) {
        return std::tie(x.distance, a[x.i].method_id, b[x.j].method_id, x.i, x.j) <
               std::tie(y.distance, a[y.i].method_id, b[y.j].method_id, y.i, y.j);
    });

    std::vector<bool> used_a(a.size()), used_b(b.size());
    std::int64_t matched = 0, total = 0;
    for (const auto& c : candidates) {
        if (used_a[c.i] || used_b[c.j]) continue;
        used_a[c.i] = used_b[c.j] = true;
        matched += a[c.i].weight + b[c.j].weight;
    }
    for (const auto& m : a) total += m.weight;
    for (const auto& m : b) total += m.weight;
    return static_cast<double>(matched) / static_cast<double>(total);
}

SimilarityScore code_similarity(const AppRecord& a, const AppRecord& b, double tau_m) {
    auto ca = compute_centroids(a);
    auto cb = compute_centroids(b);
    return {SimilarityKind::code_sim, code_similarity(ca, cb, tau_m)};
}

SimilarityScore market_similarity(const StringSet& apps_a, const StringSet& apps_b) {
    return {SimilarityKind::mark_sim, jaccard(apps_a, apps_b)};
}

}  // namespace appvault
