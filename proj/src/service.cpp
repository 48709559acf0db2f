#include "appvault/service.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

#include <httplib.h>

#include "appvault/error.hpp"
#include "appvault/facts.hpp"
#include "appvault/query.hpp"
#include "appvault/stats.hpp"

namespace appvault {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(canonical_dump(body), kJson);
}

void fail(httplib::Response& res, int status, const std::string& message) {
    send(res, status, json{{"error", message}});
}

// Runs a handler, mapping library exceptions onto HTTP status codes.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const NotFound& e) {
        fail(res, 404, e.what());
    } catch (const ParseError& e) {
        fail(res, 400, e.what());
    } catch (const InvalidArgument& e) {
        fail(res, 400, e.what());
    } catch (const QueryError& e) {
        fail(res, 400, e.what());
    } catch (const std::exception& e) {
        fail(res, 500, e.what());
    }
}

std::optional<std::string> param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
}

std::optional<double> number_param(const httplib::Request& req, const char* name) {
    auto text = param(req, name);
    if (!text) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
    if (ec != std::errc{} || ptr != text->data() + text->size()) {
        throw InvalidArgument("parameter '" + std::string(name) + "' is not a number: " + *text);
    }
    return v;
}

std::optional<std::size_t> count_param(const httplib::Request& req, const char* name) {
    auto text = param(req, name);
    if (!text) return std::nullopt;
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
    if (ec != std::errc{} || ptr != text->data() + text->size()) {
        throw InvalidArgument("parameter '" + std::string(name) + "' is not a non-negative integer: " + *text);
    }
    return v;
}

std::optional<bool> bool_param(const httplib::Request& req, const char* name) {
    auto text = param(req, name);
    if (!text) return std::nullopt;
    if (*text == "true" || *text == "1" || text->empty()) return true;
    if (*text == "false" || *text == "0") return false;
    throw InvalidArgument("parameter '" + std::string(name) + "' is not a boolean: " + *text);
}

EntityKind kind_param(const httplib::Request& req) {
    auto text = param(req, "kind");
    if (!text) return EntityKind::APP;
    auto kind = entity_kind_from_string(*text);
    if (!kind) throw InvalidArgument("unknown entity kind '" + *text + "'");
    return *kind;
}

}  // namespace

std::filesystem::path resolve_store(const std::optional<std::string>& flag) {
    if (flag && !flag->empty()) return *flag;
    if (const char* env = std::getenv(std::string(kStoreEnvVar).c_str()); env && *env) return env;
    return std::string(kDefaultStore);
}

std::pair<std::string, int> parse_bind_address(const std::string& address) {
    std::string host = "127.0.0.1";
    std::string port_text = address;
    if (auto colon = address.rfind(':'); colon != std::string::npos) {
        host = address.substr(0, colon);
        port_text = address.substr(colon + 1);
        if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
    }
    int port = -1;
    auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535 || host.empty()) {
        throw InvalidArgument("bad bind address '" + address + "' (expected host:port)");
    }
    return {host, port};
}

struct Service::Http {
    httplib::Server server;
};

Service::Service(std::filesystem::path store) : store_(std::move(store)), http_(std::make_unique<Http>()) {
    install(std::make_shared<const Graph>(load(store_)));
    routes();
}

Service::~Service() { stop(); }

std::shared_ptr<const Graph> Service::snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return graph_;
}

void Service::install(std::shared_ptr<const Graph> graph) {
    std::lock_guard lock(snapshot_mutex_);
    graph_ = std::move(graph);
}

Manifest Service::build_and_swap(std::vector<AppRecord> corpus, const BuildConfig& config) {
    auto graph = std::make_shared<const Graph>(Graph::build(std::move(corpus), config));
    save(*graph, store_);
    install(graph);
    return graph->manifest();
}

Manifest Service::ingest(std::vector<AppRecord> records) {
    std::lock_guard admin(admin_mutex_);
    auto current = snapshot();
    // Incoming records replace stored ones with the same sha256.
    std::map<std::string, AppRecord> merged;
    for (const auto& r : current->corpus()) merged.emplace(r.sha256, r);
    for (auto& r : records) merged.insert_or_assign(r.sha256, std::move(r));
    std::vector<AppRecord> corpus;
    corpus.reserve(merged.size());
    for (auto& [sha, r] : merged) corpus.push_back(std::move(r));

    BuildConfig config;
    config.theta = current->manifest().theta;
    config.tau_m = current->manifest().tau_m;
    config.exhaustive = current->manifest().exhaustive;
    return build_and_swap(std::move(corpus), config);
}

Manifest Service::rebuild(std::optional<double> theta, std::optional<double> tau_m, std::optional<bool> exhaustive) {
    std::lock_guard admin(admin_mutex_);
    auto current = snapshot();
    BuildConfig config;
    config.theta = theta.value_or(current->manifest().theta);
    config.tau_m = tau_m.value_or(current->manifest().tau_m);
    config.exhaustive = exhaustive.value_or(current->manifest().exhaustive);
    return build_and_swap(current->corpus(), config);
}

void Service::routes() {
    auto& srv = http_->server;

    srv.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { send(res, 200, json{{"status", "ok"}, {"manifest", to_json(snapshot()->manifest())}}); });
    });

    srv.Get(R"(/apps/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto g = snapshot();
            const auto* r = g->app(req.matches[1].str());
            if (!r) throw NotFound("no app with sha256 " + req.matches[1].str());
            send(res, 200, to_json(*r));
        });
    });

    srv.Get("/apps", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            FilterQuery q;
            q.conjuncts = parse_filter(param(req, "filter").value_or(""));
            q.target = kind_param(req);
            q.limit = count_param(req, "limit").value_or(q.limit);
            q.offset = count_param(req, "offset").value_or(q.offset);
            send(res, 200, to_json(evaluate(*snapshot(), q), q));
        });
    });

    srv.Get("/graph/neighbors", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto id = param(req, "id");
            if (!id) throw InvalidArgument("missing parameter 'id'");
            NeighborQuery q;
            if (auto rels = param(req, "rel")) {
                std::set<RelationKind> wanted;
                std::stringstream ss(*rels);
                for (std::string name; std::getline(ss, name, ',');) {
                    auto rel = relation_kind_from_string(name);
                    if (!rel) throw InvalidArgument("unknown relation '" + name + "'");
                    wanted.insert(*rel);
                }
                q.relations = std::move(wanted);
            }
            q.min_prob = number_param(req, "min_prob");
            if (auto depth = count_param(req, "depth")) q.depth = static_cast<int>(std::min<std::size_t>(*depth, 100));
            auto g = snapshot();
            send(res, 200, to_json(neighbors(*g, {kind_param(req), *id}, q), *g));
        });
    });

    srv.Get("/facts/piggybacked", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { send(res, 200, facts_to_json(find_piggybacked(*snapshot()))); });
    });

    srv.Get("/facts/update-attacks", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            send(res, 200, facts_to_json(find_update_attacks(*snapshot(), bool_param(req, "ignore_cert").value_or(false))));
        });
    });

    srv.Get("/facts/markets", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { send(res, 200, facts_to_json(market_replication(*snapshot()))); });
    });

    srv.Get(R"(/facts/families/([^/]+)/signatures)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto g = snapshot();
            LocalizeOptions options;
            options.sigma = number_param(req, "sigma").value_or(options.sigma);
            options.beta = number_param(req, "beta").value_or(options.beta);
            options.tau_m = g->manifest().tau_m;
            send(res, 200, to_json(localize_malicious_code(*g, req.matches[1].str(), default_benign_sample(*g), options)));
        });
    });

    srv.Get(R"(/stats/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto dim = stats_dimension_from_string(req.matches[1].str());
            if (!dim) throw NotFound("unknown stats dimension '" + req.matches[1].str() + "'");
            send(res, 200, to_json(distribution(*snapshot(), *dim)));
        });
    });

    srv.Post("/ingest", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            std::istringstream in(req.body);
            auto records = parse_corpus(in);
            send(res, 200, to_json(ingest(std::move(records))));
        });
    });

    srv.Post("/build", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto theta = number_param(req, "theta");
            auto tau_m = number_param(req, "tau_m");
            auto exhaustive = bool_param(req, "exhaustive");
            send(res, 200, to_json(rebuild(theta, tau_m, exhaustive)));
        });
    });
}

int Service::bind(const std::string& host, int port) {
    auto& srv = http_->server;
    int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void Service::listen() { http_->server.listen_after_bind(); }

void Service::stop() {
    if (http_ && http_->server.is_running()) http_->server.stop();
}

bool Service::running() const { return http_->server.is_running(); }

}  // namespace appvault
