#include "appvault/graph.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <ctime>
#include <deque>
#include <fstream>
#include <future>
#include <thread>
#include <tuple>
#include <unordered_set>

#include "appvault/error.hpp"

namespace appvault {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<EntityKind, std::string_view>, 6> kEntityNames{{
    {EntityKind::APP, "APP"},
    {EntityKind::MARKET, "MARKET"},
    {EntityKind::FAMILY, "FAMILY"},
    {EntityKind::AUTHOR, "AUTHOR"},
    {EntityKind::LIBRARY, "LIBRARY"},
    {EntityKind::CATEGORY, "CATEGORY"},
}};

constexpr std::array<RelationKind, 14> kRelations{
    RelationKind::malware,  RelationKind::author,   RelationKind::library,  RelationKind::market,
    RelationKind::category, RelationKind::upgrade,  RelationKind::invoke,   RelationKind::code_sim,
    RelationKind::api_sim,  RelationKind::perm_sim, RelationKind::comp_sim, RelationKind::lib_sim,
    RelationKind::file_sim, RelationKind::mark_sim,
};

constexpr std::array<std::string_view, 14> kRelationNames{
    "malware",  "author",  "library",  "market",   "category", "upgrade",  "invoke",
    "code_sim", "api_sim", "perm_sim", "comp_sim", "lib_sim",  "file_sim", "mark_sim",
};

std::string now_utc() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

EntityRef app_ref(const std::string& sha) { return {EntityKind::APP, sha}; }

struct ScoredPair {
    std::size_t i;
    std::size_t j;
    SimilarityKind kind;
    double value;
};

// Pairs sharing a package name, a library or a hosting market.
std::vector<std::pair<std::size_t, std::size_t>> candidate_pairs(
    const std::vector<AppRecord>& corpus, bool exhaustive) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (exhaustive) {
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            for (std::size_t j = i + 1; j < corpus.size(); ++j) pairs.emplace_back(i, j);
        }
        return pairs;
    }
    std::map<std::string, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& r = corpus[i];
        buckets["pkg\x1f" + r.package_name].push_back(i);
        for (const auto& lib : r.libraries) buckets["lib\x1f" + lib].push_back(i);
        for (const auto& m : r.presence()) buckets["mkt\x1f" + m].push_back(i);
    }
    for (const auto& [_, members] : buckets) {
        for (std::size_t a = 0; a < members.size(); ++a) {
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                pairs.emplace_back(members[a], members[b]);
            }
        }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    return pairs;
}

std::vector<ScoredPair> score_pairs(const std::vector<AppRecord>& corpus,
                                    const std::vector<std::vector<MethodCentroid>>& centroids,
                                    const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                    const BuildConfig& config) {
    std::vector<SimilarityKind> kinds;
    for (auto k : config.enabled) {
        if (k != SimilarityKind::mark_sim) kinds.push_back(k);
    }
    auto score_range = [&](std::size_t begin, std::size_t end) {
        std::vector<ScoredPair> out;
        for (std::size_t p = begin; p < end; ++p) {
            const auto [i, j] = pairs[p];
            for (auto kind : kinds) {
                // No shared evidence: two empty sets say nothing about similarity.
                if (both_empty(corpus[i], corpus[j], kind)) continue;
                double value = kind == SimilarityKind::code_sim
                                   ? code_similarity(centroids[i], centroids[j], config.tau_m)
                                   : attribute_similarity(corpus[i], corpus[j], kind).value;
                if (value >= config.theta) out.push_back({i, j, kind, value});
            }
        }
        return out;
    };

    unsigned workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, pairs.size() / 256)));
    if (workers <= 1) return score_range(0, pairs.size());

    std::vector<std::future<std::vector<ScoredPair>>> jobs;
    const std::size_t chunk = (pairs.size() + workers - 1) / workers;
    for (std::size_t begin = 0; begin < pairs.size(); begin += chunk) {
        jobs.push_back(std::async(std::launch::async, score_range, begin,
                                  std::min(pairs.size(), begin + chunk)));
    }
    std::vector<ScoredPair> merged;
    for (auto& job : jobs) {
        auto part = job.get();
        merged.insert(merged.end(), part.begin(), part.end());
    }
    return merged;
}

Edge probabilistic_edge(EntityRef a, EntityRef b, RelationKind rel, double prob) {
    if (b < a) std::swap(a, b);
    return {std::move(a), std::move(b), rel, prob};
}

json entity_store_json(const Entity& e) {
    return {{"id", e.ref.id}, {"kind", std::string(to_string(e.ref.kind))}};
}

std::vector<json> read_json_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<json> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw ParseError(line_no, path.filename().string(), e.what());
        }
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace

std::string_view to_string(EntityKind kind) {
    for (const auto& [k, name] : kEntityNames) {
        if (k == kind) return name;
    }
    return "UNKNOWN";
}

std::optional<EntityKind> entity_kind_from_string(std::string_view name) {
    for (const auto& [k, n] : kEntityNames) {
        if (n == name) return k;
    }
    return std::nullopt;
}

std::string_view to_string(RelationKind rel) { return kRelationNames[static_cast<std::size_t>(rel)]; }

std::optional<RelationKind> relation_kind_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kRelationNames.size(); ++i) {
        if (kRelationNames[i] == name) return kRelations[i];
    }
    return std::nullopt;
}

bool is_probabilistic(RelationKind rel) { return rel >= RelationKind::code_sim; }

RelationKind relation_for(SimilarityKind kind) {
    return *relation_kind_from_string(to_string(kind));
}

std::span<const RelationKind> all_relation_kinds() { return kRelations; }

bool edge_less(const Edge& a, const Edge& b) {
    return std::make_tuple(to_string(a.rel), std::cref(a.src), std::cref(a.dst)) <
           std::make_tuple(to_string(b.rel), std::cref(b.src), std::cref(b.dst));
}

json to_json(const Manifest& m) {
    return {{"theta", m.theta},
            {"tau_m", m.tau_m},
            {"exhaustive", m.exhaustive},
            {"corpus_digest", m.corpus_digest},
            {"build_timestamp", m.build_timestamp},
            {"app_count", m.app_count},
            {"entity_count", m.entity_count},
            {"edge_count", m.edge_count}};
}

Manifest manifest_from_json(const json& j) {
    Manifest m;
    try {
        m.theta = j.at("theta").get<double>();
        m.tau_m = j.at("tau_m").get<double>();
        m.exhaustive = j.at("exhaustive").get<bool>();
        m.corpus_digest = j.at("corpus_digest").get<std::string>();
        m.build_timestamp = j.at("build_timestamp").get<std::string>();
        m.app_count = j.at("app_count").get<std::size_t>();
        m.entity_count = j.at("entity_count").get<std::size_t>();
        m.edge_count = j.at("edge_count").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ParseError(1, std::string(kManifestFile), e.what());
    }
    return m;
}

Graph::Graph() : corpus_(std::make_shared<const std::vector<AppRecord>>()) {}

Graph Graph::build(std::vector<AppRecord> corpus, const BuildConfig& config) {
    if (!(config.tau_m > 0.0)) throw InvalidArgument("tau_m must be positive");
    if (!(config.theta > 0.0 && config.theta <= 1.0)) throw InvalidArgument("theta must lie in (0,1]");
    std::sort(corpus.begin(), corpus.end(),
              [](const AppRecord& a, const AppRecord& b) { return a.sha256 < b.sha256; });
    for (std::size_t i = 1; i < corpus.size(); ++i) {
        if (corpus[i].sha256 == corpus[i - 1].sha256) {
            throw InvalidArgument("duplicate sha256 " + corpus[i].sha256);
        }
    }

    Graph g;
    std::set<EntityRef> refs;
    std::vector<Edge> edges;
    std::map<std::string, std::vector<std::size_t>> by_package;
    std::map<std::string, StringSet> market_apps;

    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& r = corpus[i];
        const auto self = app_ref(r.sha256);
        refs.insert(self);
        by_package[r.package_name].push_back(i);

        if (auto family = config.normalizer.normalize(r.detections); family.labeled()) {
            EntityRef f{EntityKind::FAMILY, *family.name};
            refs.insert(f);
            edges.push_back({self, f, RelationKind::malware, std::nullopt});
        }
        EntityRef author{EntityKind::AUTHOR, author_of(r)};
        refs.insert(author);
        edges.push_back({self, author, RelationKind::author, std::nullopt});
        for (const auto& lib : r.libraries) {
            EntityRef l{EntityKind::LIBRARY, lib};
            refs.insert(l);
            edges.push_back({self, l, RelationKind::library, std::nullopt});
        }
        EntityRef market{EntityKind::MARKET, r.market};
        edges.push_back({self, market, RelationKind::market, std::nullopt});
        for (const auto& m : r.presence()) {
            refs.insert({EntityKind::MARKET, m});
            market_apps[m].insert(r.sha256);
        }
        if (r.crawl && !r.crawl->category.empty()) {
            EntityRef c{EntityKind::CATEGORY, r.crawl->category};
            refs.insert(c);
            edges.push_back({self, c, RelationKind::category, std::nullopt});
        }
    }

    // upgrade: same package and signer, directed from lower to higher version
    for (const auto& [pkg, members] : by_package) {
        for (auto i : members) {
            for (auto j : members) {
                const auto& a = corpus[i];
                const auto& b = corpus[j];
                if (a.certificate == b.certificate && a.version_code < b.version_code) {
                    edges.push_back({app_ref(a.sha256), app_ref(b.sha256), RelationKind::upgrade,
                                     std::nullopt});
                }
            }
        }
    }
    for (const auto& r : corpus) {
        for (const auto& target : r.invoked_packages) {
            auto it = by_package.find(target);
            if (it == by_package.end()) continue;
            for (auto j : it->second) {
                if (corpus[j].sha256 == r.sha256) continue;
                edges.push_back({app_ref(r.sha256), app_ref(corpus[j].sha256), RelationKind::invoke,
                                 std::nullopt});
            }
        }
    }

    g.centroids_.reserve(corpus.size());
    for (const auto& r : corpus) g.centroids_.push_back(compute_centroids(r));

    const auto pairs = candidate_pairs(corpus, config.exhaustive);
    for (const auto& s : score_pairs(corpus, g.centroids_, pairs, config)) {
        edges.push_back(probabilistic_edge(app_ref(corpus[s.i].sha256), app_ref(corpus[s.j].sha256),
                                           relation_for(s.kind), s.value));
    }

    if (config.enabled.count(SimilarityKind::mark_sim)) {
        for (auto a = market_apps.begin(); a != market_apps.end(); ++a) {
            for (auto b = std::next(a); b != market_apps.end(); ++b) {
                double v = market_similarity(a->second, b->second).value;
                if (v >= config.theta) {
                    edges.push_back(probabilistic_edge({EntityKind::MARKET, a->first},
                                                       {EntityKind::MARKET, b->first},
                                                       RelationKind::mark_sim, v));
                }
            }
        }
    }

    std::sort(edges.begin(), edges.end(), edge_less);
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    g.entities_.reserve(refs.size());
    std::map<std::string, std::size_t> record_of;
    for (std::size_t i = 0; i < corpus.size(); ++i) record_of[corpus[i].sha256] = i;
    for (const auto& ref : refs) {
        Entity e{ref, std::nullopt};
        if (ref.kind == EntityKind::APP) e.record_index = record_of.at(ref.id);
        g.entities_.push_back(std::move(e));
    }
    g.edges_ = std::move(edges);

    g.manifest_.theta = config.theta;
    g.manifest_.tau_m = config.tau_m;
    g.manifest_.exhaustive = config.exhaustive;
    g.manifest_.corpus_digest = corpus_digest(corpus);
    g.manifest_.build_timestamp = config.build_timestamp.empty() ? now_utc() : config.build_timestamp;
    g.manifest_.app_count = corpus.size();
    g.manifest_.entity_count = g.entities_.size();
    g.manifest_.edge_count = g.edges_.size();
    g.corpus_ = std::make_shared<const std::vector<AppRecord>>(std::move(corpus));
    g.index();
    return g;
}

void Graph::index() {
    by_ref_.clear();
    for (std::size_t i = 0; i < entities_.size(); ++i) {
        if (!by_ref_.emplace(entities_[i].ref, i).second) {
            throw InvalidArgument("duplicate entity " + std::string(to_string(entities_[i].ref.kind)) +
                                  ":" + entities_[i].ref.id);
        }
    }
    incident_.assign(entities_.size(), {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        auto src = by_ref_.find(edges_[e].src);
        auto dst = by_ref_.find(edges_[e].dst);
        if (src == by_ref_.end() || dst == by_ref_.end()) {
            throw InvalidArgument("edge " + std::string(to_string(edges_[e].rel)) +
                                  " references a missing entity");
        }
        incident_[src->second].push_back(e);
        if (dst->second != src->second) incident_[dst->second].push_back(e);
    }
    if (centroids_.size() != corpus_->size()) {
        centroids_.clear();
        for (const auto& r : *corpus_) centroids_.push_back(compute_centroids(r));
    }
}

Graph Graph::assemble(std::vector<AppRecord> corpus, std::vector<Entity> entities,
                      std::vector<Edge> edges, Manifest manifest) {
    std::sort(corpus.begin(), corpus.end(),
              [](const AppRecord& a, const AppRecord& b) { return a.sha256 < b.sha256; });
    std::map<std::string, std::size_t> record_of;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (!record_of.emplace(corpus[i].sha256, i).second) {
            throw InvalidArgument("duplicate sha256 " + corpus[i].sha256);
        }
    }
    std::size_t apps = 0;
    for (auto& e : entities) {
        e.record_index.reset();
        if (e.ref.kind != EntityKind::APP) continue;
        auto it = record_of.find(e.ref.id);
        if (it == record_of.end()) throw InvalidArgument("APP entity without record: " + e.ref.id);
        e.record_index = it->second;
        ++apps;
    }
    if (apps != corpus.size()) throw InvalidArgument("corpus records without APP entity");
    std::sort(entities.begin(), entities.end(),
              [](const Entity& a, const Entity& b) { return a.ref < b.ref; });
    std::sort(edges.begin(), edges.end(), edge_less);

    Graph g;
    g.corpus_ = std::make_shared<const std::vector<AppRecord>>(std::move(corpus));
    g.entities_ = std::move(entities);
    g.edges_ = std::move(edges);
    g.manifest_ = std::move(manifest);
    g.index();
    return g;
}

const Entity* Graph::find(EntityKind kind, std::string_view id) const {
    auto it = by_ref_.find(EntityRef{kind, std::string(id)});
    return it == by_ref_.end() ? nullptr : &entities_[it->second];
}

const AppRecord* Graph::app(std::string_view sha256) const {
    const Entity* e = find(EntityKind::APP, sha256);
    return e ? &record(*e) : nullptr;
}

const AppRecord& Graph::record(const Entity& entity) const {
    if (!entity.record_index) throw InvalidArgument("entity " + entity.ref.id + " is not an APP");
    return (*corpus_)[*entity.record_index];
}

std::span<const std::size_t> Graph::incident(const EntityRef& ref) const {
    auto it = by_ref_.find(ref);
    if (it == by_ref_.end()) return {};
    return incident_[it->second];
}

std::optional<std::string> Graph::family_of(std::string_view sha256) const {
    for (auto e : incident({EntityKind::APP, std::string(sha256)})) {
        const auto& edge = edges_[e];
        if (edge.rel == RelationKind::malware && edge.src.id == sha256) return edge.dst.id;
    }
    return std::nullopt;
}

std::vector<std::string> Graph::family_members(std::string_view family) const {
    std::vector<std::string> out;
    for (auto e : incident({EntityKind::FAMILY, std::string(family)})) {
        if (edges_[e].rel == RelationKind::malware) out.push_back(edges_[e].src.id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Subgraph neighbors(const Graph& graph, const EntityRef& start, const NeighborQuery& query) {
    if (query.depth < 1 || query.depth > 3) throw InvalidArgument("depth must be between 1 and 3");
    if (!graph.find(start)) {
        throw NotFound("unknown entity " + std::string(to_string(start.kind)) + ":" + start.id);
    }
    auto passes = [&](const Edge& e) {
        if (query.relations && !query.relations->count(e.rel)) return false;
        if (query.min_prob && e.prob && *e.prob < *query.min_prob) return false;
        return true;
    };

    std::set<EntityRef> reached{start};
    std::vector<EntityRef> frontier{start};
    for (int level = 0; level < query.depth && !frontier.empty(); ++level) {
        std::vector<EntityRef> next;
        for (const auto& ref : frontier) {
            for (auto idx : graph.incident(ref)) {
                const auto& e = graph.edges()[idx];
                if (!passes(e)) continue;
                const EntityRef& other = e.src == ref ? e.dst : e.src;
                if (reached.insert(other).second) next.push_back(other);
            }
        }
        frontier = std::move(next);
    }

    Subgraph out;
    for (const auto& ref : reached) out.nodes.push_back(*graph.find(ref));
    std::set<std::size_t> edge_ids;
    for (const auto& ref : reached) {
        for (auto idx : graph.incident(ref)) {
            const auto& e = graph.edges()[idx];
            if (passes(e) && reached.count(e.src) && reached.count(e.dst)) edge_ids.insert(idx);
        }
    }
    // graph edges are stored in canonical order, so ascending indices keep it
    for (auto idx : edge_ids) out.edges.push_back(graph.edges()[idx]);
    return out;
}

json to_json(const Entity& entity, const Graph& graph) {
    json j = entity_store_json(entity);
    if (entity.record_index) {
        const auto& r = graph.record(entity);
        j["label"] = r.app_name.empty() ? r.package_name : r.app_name;
        j["package_name"] = r.package_name;
        j["version_code"] = r.version_code;
    } else {
        j["label"] = entity.ref.id;
    }
    return j;
}

json to_json(const Edge& e) {
    json j{{"src", e.src.id},
           {"src_kind", std::string(to_string(e.src.kind))},
           {"dst", e.dst.id},
           {"dst_kind", std::string(to_string(e.dst.kind))},
           {"rel", std::string(to_string(e.rel))}};
    if (e.prob) j["prob"] = *e.prob;
    return j;
}

json to_json(const Subgraph& s, const Graph& graph) {
    json nodes = json::array();
    for (const auto& n : s.nodes) nodes.push_back(to_json(n, graph));
    json edges = json::array();
    for (const auto& e : s.edges) edges.push_back(to_json(e));
    return {{"nodes", nodes}, {"edges", edges}};
}

Edge edge_from_json(const json& j) {
    auto kind = [&](const char* key) {
        auto k = entity_kind_from_string(j.at(key).get<std::string>());
        if (!k) throw ParseError(0, key, "unknown entity kind");
        return *k;
    };
    Edge e;
    e.src = {kind("src_kind"), j.at("src").get<std::string>()};
    e.dst = {kind("dst_kind"), j.at("dst").get<std::string>()};
    auto rel = relation_kind_from_string(j.at("rel").get<std::string>());
    if (!rel) throw ParseError(0, "rel", "unknown relation");
    e.rel = *rel;
    if (j.contains("prob")) e.prob = j.at("prob").get<double>();
    return e;
}

void save(const Graph& graph, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create store directory " + dir.string() + ": " + ec.message());
    write_corpus(dir / kCorpusFile, graph.corpus());
    std::string entities;
    for (const auto& e : graph.entities()) entities += canonical_dump(entity_store_json(e)) + '\n';
    write_text(dir / kEntitiesFile, entities);
    std::string edges;
    for (const auto& e : graph.edges()) edges += canonical_dump(to_json(e)) + '\n';
    write_text(dir / kEdgesFile, edges);
    write_text(dir / kManifestFile, canonical_dump(to_json(graph.manifest())) + '\n');
}

Graph load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw IoError("store directory not found: " + dir.string());
    auto corpus = parse_corpus(dir / kCorpusFile);

    std::vector<Entity> entities;
    std::size_t line = 0;
    for (const auto& j : read_json_lines(dir / kEntitiesFile)) {
        ++line;
        try {
            auto kind = entity_kind_from_string(j.at("kind").get<std::string>());
            if (!kind) throw ParseError(line, std::string(kEntitiesFile), "unknown entity kind");
            entities.push_back({{*kind, j.at("id").get<std::string>()}, std::nullopt});
        } catch (const json::exception& e) {
            throw ParseError(line, std::string(kEntitiesFile), e.what());
        }
    }
    std::vector<Edge> edges;
    line = 0;
    for (const auto& j : read_json_lines(dir / kEdgesFile)) {
        ++line;
        try {
            edges.push_back(edge_from_json(j));
        } catch (const json::exception& e) {
            throw ParseError(line, std::string(kEdgesFile), e.what());
        } catch (const ParseError& e) {
            throw ParseError(line, std::string(kEdgesFile), e.what());
        }
    }
    auto manifest_lines = read_json_lines(dir / kManifestFile);
    if (manifest_lines.size() != 1) throw ParseError(0, std::string(kManifestFile), "expected one object");
    return Graph::assemble(std::move(corpus), std::move(entities), std::move(edges),
                           manifest_from_json(manifest_lines.front()));
}

std::vector<std::string> check_invariants(const Graph& g) {
    std::vector<std::string> problems;
    auto report = [&](std::string message) { problems.push_back(std::move(message)); };

    std::set<EntityRef> refs;
    for (const auto& e : g.entities()) {
        if (!refs.insert(e.ref).second) report("duplicate entity " + e.ref.id);
    }

    struct Counts {
        int market = 0, author = 0, category = 0, malware = 0;
    };
    std::map<std::string, Counts> per_app;
    for (const auto& r : g.corpus()) per_app[r.sha256];

    std::set<std::tuple<RelationKind, EntityRef, EntityRef>> seen;
    std::map<std::string, std::vector<std::string>> upgrade_out;
    for (const auto& e : g.edges()) {
        const std::string name = std::string(to_string(e.rel)) + " " + e.src.id + " -> " + e.dst.id;
        if (!refs.count(e.src) || !refs.count(e.dst)) report("dangling edge " + name);
        if (is_probabilistic(e.rel)) {
            if (!e.prob) {
                report("probabilistic edge without probability: " + name);
            } else if (!(*e.prob > 0.0 && *e.prob <= 1.0) || *e.prob < g.manifest().theta) {
                report("probability outside [theta,1]: " + name);
            }
            if (!(e.src < e.dst)) report("symmetric edge not in canonical order: " + name);
            auto key = std::make_tuple(e.rel, std::min(e.src, e.dst), std::max(e.src, e.dst));
            if (!seen.insert(key).second) report("symmetric edge stored twice: " + name);
            EntityKind expected = e.rel == RelationKind::mark_sim ? EntityKind::MARKET : EntityKind::APP;
            if (e.src.kind != expected || e.dst.kind != expected) report("wrong endpoint kinds: " + name);
        } else {
            if (e.prob) report("deterministic edge carries a probability: " + name);
            if (!seen.insert({e.rel, e.src, e.dst}).second) report("duplicate edge " + name);
            if (e.src.kind != EntityKind::APP) report("deterministic edge not from an APP: " + name);
        }
        auto* counts = e.src.kind == EntityKind::APP && per_app.count(e.src.id) ? &per_app[e.src.id] : nullptr;
        switch (e.rel) {
            case RelationKind::market:
                if (counts) ++counts->market;
                if (e.dst.kind != EntityKind::MARKET) report("market edge to non-MARKET: " + name);
                break;
            case RelationKind::author:
                if (counts) ++counts->author;
                if (e.dst.kind != EntityKind::AUTHOR) report("author edge to non-AUTHOR: " + name);
                break;
            case RelationKind::category:
                if (counts) ++counts->category;
                if (e.dst.kind != EntityKind::CATEGORY) report("category edge to non-CATEGORY: " + name);
                break;
            case RelationKind::malware:
                if (counts) ++counts->malware;
                if (e.dst.kind != EntityKind::FAMILY) report("malware edge to non-FAMILY: " + name);
                break;
            case RelationKind::library:
                if (e.dst.kind != EntityKind::LIBRARY) report("library edge to non-LIBRARY: " + name);
                break;
            case RelationKind::upgrade: {
                const AppRecord* a = g.app(e.src.id);
                const AppRecord* b = g.app(e.dst.id);
                if (!a || !b) break;
                if (a->package_name != b->package_name || !(a->certificate == b->certificate)) {
                    report("upgrade edge across package or signer: " + name);
                }
                if (!(a->version_code < b->version_code)) report("upgrade edge not increasing: " + name);
                upgrade_out[e.src.id].push_back(e.dst.id);
                break;
            }
            case RelationKind::invoke:
                if (e.dst.kind != EntityKind::APP) report("invoke edge to non-APP: " + name);
                break;
            default:
                break;
        }
    }
    for (const auto& [sha, c] : per_app) {
        if (c.market != 1) report("app " + sha + " has " + std::to_string(c.market) + " market edges");
        if (c.author != 1) report("app " + sha + " has " + std::to_string(c.author) + " author edges");
        if (c.category > 1) report("app " + sha + " has several category edges");
        if (c.malware > 1) report("app " + sha + " has several malware edges");
    }

    // Kahn's algorithm over upgrade edges.
    std::map<std::string, int> indegree;
    for (const auto& [src, dsts] : upgrade_out) {
        indegree[src];
        for (const auto& d : dsts) ++indegree[d];
    }
    std::deque<std::string> ready;
    for (const auto& [node, deg] : indegree) {
        if (deg == 0) ready.push_back(node);
    }
    std::size_t visited = 0;
    while (!ready.empty()) {
        auto node = ready.front();
        ready.pop_front();
        ++visited;
        auto it = upgrade_out.find(node);
        if (it == upgrade_out.end()) continue;
        for (const auto& d : it->second) {
            if (--indegree[d] == 0) ready.push_back(d);
        }
    }
    if (visited != indegree.size()) report("upgrade edges contain a cycle");
    return problems;
}

}  // namespace appvault
