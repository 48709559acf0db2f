#pragma once

#include <cstddef>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "appvault/attributes.hpp"
#include "appvault/record.hpp"

namespace appvault {

enum class SimilarityKind { code_sim, api_sim, perm_sim, comp_sim, lib_sim, file_sim, mark_sim };

std::string_view to_string(SimilarityKind kind);
std::optional<SimilarityKind> similarity_kind_from_string(std::string_view name);

struct SimilarityScore {
    SimilarityKind kind;
    double value;
};

// |a ∩ b| / |a ∪ b| for two ascending-ordered ranges without duplicates.
// Two empty sets are identical, so the result is 1.
template <typename SetA, typename SetB>
double jaccard(const SetA& a, const SetB& b) {
    std::size_t common = 0;
    auto ia = std::begin(a), ib = std::begin(b);
    while (ia != std::end(a) && ib != std::end(b)) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++common;
            ++ia;
            ++ib;
        }
    }
    const std::size_t uni = static_cast<std::size_t>(std::distance(std::begin(a), std::end(a))) +
                            static_cast<std::size_t>(std::distance(std::begin(b), std::end(b))) -
                            common;
    if (uni == 0) return 1.0;
    return static_cast<double>(common) / static_cast<double>(uni);
}

// Component names tagged with their kind ("activity:", "service:", ...).
StringSet tagged_components(const AppRecord& record);

// Jaccard over the set designated by `kind`. Throws InvalidArgument for
// code_sim and mark_sim, which are not per-attribute comparisons.
SimilarityScore attribute_similarity(const AppRecord& a, const AppRecord& b, SimilarityKind kind);

// True when both records have an empty set for `kind`.
bool both_empty(const AppRecord& a, const AppRecord& b, SimilarityKind kind);

// Centroid difference degree: per-dimension relative difference, summed.
double cdg(const MethodCentroid& a, const MethodCentroid& b);

inline constexpr double kDefaultTauM = 0.01;

// Greedy one-to-one method matching under cdg <= tau_m, cheapest pairs first.
// Result is the matched share of total centroid weight on both sides.
double code_similarity(std::span<const MethodCentroid> a, std::span<const MethodCentroid> b,
                       double tau_m = kDefaultTauM);
SimilarityScore code_similarity(const AppRecord& a, const AppRecord& b, double tau_m = kDefaultTauM);

SimilarityScore market_similarity(const StringSet& apps_a, const StringSet& apps_b);

}  // namespace appvault
