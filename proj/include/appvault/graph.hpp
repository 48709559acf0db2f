#pragma once

// Knowledge graph over apps and the entities they relate to. A Graph is
// immutable once built or loaded; share it freely between readers.

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "appvault/attributes.hpp"
#include "appvault/record.hpp"
#include "appvault/similarity.hpp"

namespace appvault {

enum class EntityKind { APP, MARKET, FAMILY, AUTHOR, LIBRARY, CATEGORY };

std::string_view to_string(EntityKind kind);
std::optional<EntityKind> entity_kind_from_string(std::string_view name);

enum class RelationKind {
    // deterministic
    malware,
    author,
    library,
    market,
    category,
    upgrade,
    invoke,
    // probabilistic
    code_sim,
    api_sim,
    perm_sim,
    comp_sim,
    lib_sim,
    file_sim,
    mark_sim,
};

std::string_view to_string(RelationKind rel);
std::optional<RelationKind> relation_kind_from_string(std::string_view name);
bool is_probabilistic(RelationKind rel);
RelationKind relation_for(SimilarityKind kind);
std::span<const RelationKind> all_relation_kinds();

struct EntityRef {
    EntityKind kind = EntityKind::APP;
    std::string id;

    friend auto operator<=>(const EntityRef&, const EntityRef&) = default;
};

struct Entity {
    EntityRef ref;
    // Index into Graph::corpus() for APP entities.
    std::optional<std::size_t> record_index;

    friend bool operator==(const Entity&, const Entity&) = default;
};

struct Edge {
    EntityRef src;
    EntityRef dst;
    RelationKind rel = RelationKind::author;
    std::optional<double> prob;

    friend bool operator==(const Edge&, const Edge&) = default;
};

// Canonical edge order: relation name, then source, then destination.
bool edge_less(const Edge& a, const Edge& b);

struct BuildConfig {
    double tau_m = kDefaultTauM;
    double theta = 0.9;
    bool exhaustive = false;
    std::set<SimilarityKind> enabled{SimilarityKind::code_sim, SimilarityKind::api_sim,
                                     SimilarityKind::perm_sim, SimilarityKind::comp_sim,
                                     SimilarityKind::lib_sim,  SimilarityKind::file_sim,
                                     SimilarityKind::mark_sim};
    FamilyNormalizer normalizer;
    // ISO-8601 UTC; empty means "now".
    std::string build_timestamp;
    // 0 means hardware concurrency.
    unsigned threads = 0;
};

struct Manifest {
    double theta = 0.9;
    double tau_m = kDefaultTauM;
    bool exhaustive = false;
    std::string corpus_digest;
    std::string build_timestamp;
    std::size_t app_count = 0;
    std::size_t entity_count = 0;
    std::size_t edge_count = 0;

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

nlohmann::json to_json(const Manifest& manifest);
Manifest manifest_from_json(const nlohmann::json& j);

class Graph {
public:
    Graph();

    static Graph build(std::vector<AppRecord> corpus, const BuildConfig& config = {});

    const std::vector<AppRecord>& corpus() const { return *corpus_; }
    const std::vector<Entity>& entities() const { return entities_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Manifest& manifest() const { return manifest_; }

    const Entity* find(EntityKind kind, std::string_view id) const;
    const Entity* find(const EntityRef& ref) const { return find(ref.kind, ref.id); }
    const AppRecord* app(std::string_view sha256) const;
    const AppRecord& record(const Entity& entity) const;

    // Edges touching the entity, in either direction.
    std::span<const std::size_t> incident(const EntityRef& ref) const;

    std::span<const MethodCentroid> centroids(std::size_t record_index) const {
        return centroids_[record_index];
    }

    // FAMILY id of an app, if it carries a malware edge.
    std::optional<std::string> family_of(std::string_view sha256) const;
    // Apps linked to `family` by malware edges, ascending sha256.
    std::vector<std::string> family_members(std::string_view family) const;

    // Assembles a graph from stored parts, checking referential integrity.
    static Graph assemble(std::vector<AppRecord> corpus, std::vector<Entity> entities,
                          std::vector<Edge> edges, Manifest manifest);

private:
    void index();

    std::shared_ptr<const std::vector<AppRecord>> corpus_;
    std::vector<Entity> entities_;
    std::vector<Edge> edges_;
    Manifest manifest_;
    std::map<EntityRef, std::size_t, std::less<>> by_ref_;
    std::vector<std::vector<std::size_t>> incident_;
    std::vector<std::vector<MethodCentroid>> centroids_;
};

struct NeighborQuery {
    std::optional<std::set<RelationKind>> relations;
    std::optional<double> min_prob;
    int depth = 1;
};

struct Subgraph {
    std::vector<Entity> nodes;
    std::vector<Edge> edges;
};

// All entities within `depth` hops over edges passing the filters (edges are
// walked in both directions), together with every passing edge among them.
// `min_prob` constrains probabilistic edges only.
Subgraph neighbors(const Graph& graph, const EntityRef& start, const NeighborQuery& query);

nlohmann::json to_json(const Entity& entity, const Graph& graph);
nlohmann::json to_json(const Edge& edge);
nlohmann::json to_json(const Subgraph& subgraph, const Graph& graph);
Edge edge_from_json(const nlohmann::json& j);

// Store layout: corpus.jsonl, entities.jsonl, edges.jsonl, manifest.json.
void save(const Graph& graph, const std::filesystem::path& dir);
Graph load(const std::filesystem::path& dir);

inline constexpr std::string_view kCorpusFile = "corpus.jsonl";
inline constexpr std::string_view kEntitiesFile = "entities.jsonl";
inline constexpr std::string_view kEdgesFile = "edges.jsonl";
inline constexpr std::string_view kManifestFile = "manifest.json";

// Every structural rule the builder guarantees; returns one message per
// violation (empty when the graph is well formed).
std::vector<std::string> check_invariants(const Graph& graph);

}  // namespace appvault
