#pragma once

// HTTP front end over a stored graph. Readers work on an immutable snapshot;
// POST /ingest and POST /build run one at a time, persist the new graph to
// the store and then swap it in. Requests already holding the old snapshot
// finish on it.

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "appvault/graph.hpp"

namespace appvault {

inline constexpr std::string_view kStoreEnvVar = "APPVAULT_STORE";
inline constexpr std::string_view kDefaultStore = "appvault-store";

// Explicit flag, then $APPVAULT_STORE, then ./appvault-store.
std::filesystem::path resolve_store(const std::optional<std::string>& flag);

class Service {
public:
    // Loads the graph saved in `store`; throws IoError when there is none.
    explicit Service(std::filesystem::path store);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    std::shared_ptr<const Graph> snapshot() const;

    // Binds `host`; port 0 picks a free port. Returns the bound port and
    // throws IoError on failure.
    int bind(const std::string& host, int port);
    // Blocks serving requests until stop().
    void listen();
    void stop();
    bool running() const;

    // The admin operations behind POST /ingest and POST /build.
    Manifest ingest(std::vector<AppRecord> records);
    Manifest rebuild(std::optional<double> theta, std::optional<double> tau_m, std::optional<bool> exhaustive);

private:
    struct Http;

    void install(std::shared_ptr<const Graph> graph);
    Manifest build_and_swap(std::vector<AppRecord> corpus, const BuildConfig& config);
    void routes();

    std::filesystem::path store_;
    mutable std::mutex snapshot_mutex_;
    std::shared_ptr<const Graph> graph_;
    std::mutex admin_mutex_;
    std::unique_ptr<Http> http_;
};

// Splits "host:port"; a bare port binds 127.0.0.1.
std::pair<std::string, int> parse_bind_address(const std::string& address);

}  // namespace appvault
