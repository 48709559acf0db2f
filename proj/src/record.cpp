#include "appvault/record.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <istream>
#include <regex>
#include <sstream>

#include "appvault/error.hpp"

namespace appvault {

using nlohmann::json;

namespace {

bool is_hex(std::string_view s, bool lowercase_only) {
    return std::all_of(s.begin(), s.end(), [&](char c) {
        if (c >= '0' && c <= '9') return true;
        if (c >= 'a' && c <= 'f') return true;
        return !lowercase_only && c >= 'A' && c <= 'F';
    });
}

bool is_package_name(std::string_view s) {
    static const std::regex pattern(R"([A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z0-9_]+)*)");
    return std::regex_match(s.begin(), s.end(), pattern);
}

[[noreturn]] void fail(const std::string& field, const std::string& message) {
    throw ParseError(0, field, message);
}

// Typed accessors over one JSON object; every failure names the field path.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object()) fail(prefix_.empty() ? "<record>" : prefix_, "expected an object");
    }

    void reject_unknown(std::initializer_list<std::string_view> known) const {
        for (const auto& [key, value] : j_.items()) {
            if (std::find(known.begin(), known.end(), key) == known.end()) {
                fail(path(key), "unknown field");
            }
        }
    }

    std::string path(std::string_view key) const {
        return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key);
    }

    bool has(std::string_view key) const {
        auto it = j_.find(key);
        return it != j_.end() && !it->is_null();
    }

    const json& at(std::string_view key) const {
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) fail(path(key), "missing required field");
        return *it;
    }

    std::string string(std::string_view key, bool required = true) const {
        if (!required && !has(key)) return {};
        const json& v = at(key);
        if (!v.is_string()) fail(path(key), "expected a string");
        return v.get<std::string>();
    }

    std::int64_t integer(std::string_view key) const {
        const json& v = at(key);
        if (!v.is_number_integer()) fail(path(key), "expected an integer");
        if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
            fail(path(key), "integer out of range");
        }
        return v.get<std::int64_t>();
    }

    std::int64_t non_negative(std::string_view key) const {
        auto v = integer(key);
        if (v < 0) fail(path(key), "must be non-negative");
        return v;
    }

    std::optional<std::int64_t> optional_non_negative(std::string_view key) const {
        if (!has(key)) return std::nullopt;
        return non_negative(key);
    }

    double number(std::string_view key) const {
        const json& v = at(key);
        if (!v.is_number()) fail(path(key), "expected a number");
        return v.get<double>();
    }

    const json& array(std::string_view key, bool required = true) const {
        static const json empty = json::array();
        if (!required && !has(key)) return empty;
        const json& v = at(key);
        if (!v.is_array()) fail(path(key), "expected an array");
        return v;
    }

    StringSet string_set(std::string_view key, bool required = false) const {
        StringSet out;
        for (const auto& e : array(key, required)) {
            if (!e.is_string()) fail(path(key), "expected an array of strings");
            if (!out.insert(e.get<std::string>()).second) {
                fail(path(key), "duplicate element '" + e.get<std::string>() + "'");
            }
        }
        return out;
    }

    std::vector<std::string> string_list(std::string_view key) const {
        std::vector<std::string> out;
        for (const auto& e : array(key)) {
            if (!e.is_string()) fail(path(key), "expected an array of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

private:
    const json& j_;
    std::string prefix_;
};

CertIdentity read_certificate(const json& j) {
    ObjectReader r(j, "certificate");
    r.reject_unknown({"fingerprint", "issuer", "subject", "public_key_hash"});
    CertIdentity c;
    c.fingerprint = r.string("fingerprint");
    c.issuer = r.string("issuer", false);
    c.subject = r.string("subject", false);
    c.public_key_hash = r.string("public_key_hash", false);
    return c;
}

CrawlInfo read_crawl(const json& j) {
    ObjectReader r(j, "crawl");
    r.reject_unknown({"category", "description", "screenshots", "reviews", "score", "whats_new",
                      "updated_date", "file_size", "install_count", "version",
                      "required_android_version", "price", "content_rating", "developer",
                      "similar_apps", "market"});
    CrawlInfo c;
    c.category = r.string("category");
    c.description = r.string("description");
    c.screenshots = r.string_list("screenshots");
    c.reviews = r.string_list("reviews");
    c.score = r.number("score");
    c.whats_new = r.string("whats_new");
    c.updated_date = r.string("updated_date");
    c.file_size = static_cast<std::uint64_t>(r.non_negative("file_size"));
    c.install_count = static_cast<std::uint64_t>(r.non_negative("install_count"));
    c.version = r.string("version");
    c.required_android_version = r.string("required_android_version");
    c.price = r.number("price");
    c.content_rating = r.string("content_rating");
    c.developer = r.string("developer");
    c.similar_apps = r.string_set("similar_apps", true);
    c.market = r.string("market");
    return c;
}

MethodCfg read_method(const json& j, const std::string& prefix) {
    ObjectReader r(j, prefix);
    r.reject_unknown({"id", "blocks", "edges", "loop_depth"});
    MethodCfg m;
    m.id = r.string("id");
    for (const auto& b : r.array("blocks")) {
        ObjectReader br(b, r.path("blocks"));
        br.reject_unknown({"block_id", "statement_count"});
        m.blocks.push_back({br.integer("block_id"), br.integer("statement_count")});
    }
    for (const auto& e : r.array("edges", false)) {
        ObjectReader er(e, r.path("edges"));
        er.reject_unknown({"from_block", "to_block"});
        m.edges.push_back({er.integer("from_block"), er.integer("to_block")});
    }
    if (r.has("loop_depth")) {
        const json& depths = r.at("loop_depth");
        if (!depths.is_object()) fail(r.path("loop_depth"), "expected an object");
        for (const auto& [key, value] : depths.items()) {
            std::int64_t block = 0;
            std::istringstream ks(key);
            if (!(ks >> block) || !ks.eof() || std::to_string(block) != key) {
                fail(r.path("loop_depth"), "key '" + key + "' is not a block id");
            }
            if (!value.is_number_integer()) fail(r.path("loop_depth"), "expected integer depths");
            m.loop_depth[block] = value.get<std::int64_t>();
        }
    }
    return m;
}

json write_method(const MethodCfg& m) {
    json blocks = json::array();
    for (const auto& b : m.blocks) {
        blocks.push_back({{"block_id", b.block_id}, {"statement_count", b.statement_count}});
    }
    json edges = json::array();
    for (const auto& e : m.edges) {
        edges.push_back({{"from_block", e.from_block}, {"to_block", e.to_block}});
    }
    json depths = json::object();
    for (const auto& [block, depth] : m.loop_depth) depths[std::to_string(block)] = depth;
    return {{"id", m.id}, {"blocks", blocks}, {"edges", edges}, {"loop_depth", depths}};
}

json write_set(const StringSet& s) { return json(std::vector<std::string>(s.begin(), s.end())); }

void validate_method(const MethodCfg& m, const std::string& field) {
    if (m.id.empty()) fail(field + ".id", "must be non-empty");
    if (m.blocks.empty()) fail(field + ".blocks", "a method needs at least one block");
    std::set<std::int64_t> ids;
    for (const auto& b : m.blocks) {
        if (!ids.insert(b.block_id).second) {
            fail(field + ".blocks", "duplicate block_id " + std::to_string(b.block_id));
        }
        if (b.statement_count < 1) {
            fail(field + ".blocks", "statement_count must be >= 1 (block " +
                                        std::to_string(b.block_id) + ")");
        }
    }
    std::set<CfgEdge> seen;
    for (const auto& e : m.edges) {
        if (!ids.count(e.from_block) || !ids.count(e.to_block)) {
            fail(field + ".edges", "edge " + std::to_string(e.from_block) + "->" +
                                       std::to_string(e.to_block) + " references a missing block");
        }
        if (!seen.insert(e).second) fail(field + ".edges", "duplicate edge");
    }
    for (const auto& [block, depth] : m.loop_depth) {
        if (!ids.count(block)) {
            fail(field + ".loop_depth", "depth given for missing block " + std::to_string(block));
        }
        if (depth < 0) fail(field + ".loop_depth", "depth must be non-negative");
    }
    for (auto id : ids) {
        if (!m.loop_depth.count(id)) {
            fail(field + ".loop_depth", "missing depth for block " + std::to_string(id));
        }
    }
}

}  // namespace

StringSet AppRecord::presence() const {
    StringSet out = markets;
    out.insert(market);
    return out;
}

bool is_valid_date(std::string_view d) {
    if (d.size() != 10 || d[4] != '-' || d[7] != '-') return false;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (!std::isdigit(static_cast<unsigned char>(d[i]))) return false;
    }
    int year = std::stoi(std::string(d.substr(0, 4)));
    int month = std::stoi(std::string(d.substr(5, 2)));
    int day = std::stoi(std::string(d.substr(8, 2)));
    if (month < 1 || month > 12 || day < 1) return false;
    static constexpr std::array<int, 12> days{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    int limit = days[static_cast<std::size_t>(month - 1)] + (month == 2 && leap ? 1 : 0);
    return day <= limit;
}

void normalize(AppRecord& r) {
    for (auto& m : r.methods) {
        std::sort(m.blocks.begin(), m.blocks.end());
        std::sort(m.edges.begin(), m.edges.end());
    }
    std::sort(r.methods.begin(), r.methods.end(),
              [](const MethodCfg& a, const MethodCfg& b) { return a.id < b.id; });
    std::sort(r.detections.begin(), r.detections.end());
}

void validate(const AppRecord& r) {
    if (r.sha256.size() != 64 || !is_hex(r.sha256, true)) {
        fail("sha256", "expected 64 lowercase hex characters, got '" + r.sha256 + "'");
    }
    if (!is_package_name(r.package_name)) {
        fail("package_name", "not a reverse-domain name: '" + r.package_name + "'");
    }
    if (r.version_code < 0) fail("version_code", "must be non-negative");
    if (r.certificate.fingerprint.empty() || !is_hex(r.certificate.fingerprint, false)) {
        fail("certificate.fingerprint", "expected a non-empty hex string");
    }
    if (!is_hex(r.certificate.public_key_hash, false)) {
        fail("certificate.public_key_hash", "expected a hex string");
    }
    if (r.compile_date && !is_valid_date(*r.compile_date)) {
        fail("compile_date", "expected YYYY-MM-DD, got '" + *r.compile_date + "'");
    }
    for (auto [name, value] : {std::pair{"min_sdk", r.min_sdk}, std::pair{"max_sdk", r.max_sdk},
                               std::pair{"target_sdk", r.target_sdk}}) {
        if (value && *value < 0) fail(name, "must be non-negative");
    }
    for (const auto& f : r.files) {
        if (f.content_hash.empty() || !is_hex(f.content_hash, false)) {
            fail("files", "content_hash of '" + f.path + "' is not hex");
        }
    }
    std::set<std::string> method_ids;
    for (std::size_t i = 0; i < r.methods.size(); ++i) {
        const auto field = "methods[" + std::to_string(i) + "]";
        validate_method(r.methods[i], field);
        if (!method_ids.insert(r.methods[i].id).second) {
            fail(field + ".id", "duplicate method id '" + r.methods[i].id + "'");
        }
    }
    std::set<Detection> detections;
    for (const auto& d : r.detections) {
        if (d.engine.empty()) fail("detections", "engine name must be non-empty");
        if (!detections.insert(d).second) {
            fail("detections", "duplicate detection from engine '" + d.engine + "'");
        }
    }
    if (r.crawl) {
        if (!(r.crawl->score >= 0.0 && r.crawl->score <= 5.0)) fail("crawl.score", "must lie in [0,5]");
        if (!(r.crawl->price >= 0.0)) fail("crawl.price", "must be non-negative");
        if (!r.crawl->updated_date.empty() && !is_valid_date(r.crawl->updated_date)) {
            fail("crawl.updated_date", "expected YYYY-MM-DD");
        }
    }
    if (r.market.empty()) fail("market", "must be non-empty");
    for (const auto& m : r.markets) {
        if (m.empty()) fail("markets", "market names must be non-empty");
    }
}

AppRecord record_from_json(const json& j) {
    ObjectReader r(j, "");
    r.reject_unknown({"sha256", "package_name", "app_name", "version_code", "version_name",
                      "certificate", "compile_date", "min_sdk", "max_sdk", "target_sdk",
                      "components", "declared_permissions", "requested_permissions", "libraries",
                      "invoked_apis", "strings", "invoked_packages", "files", "methods",
                      "detections", "crawl", "market", "markets"});
    AppRecord rec;
    rec.sha256 = r.string("sha256");
    rec.package_name = r.string("package_name");
    rec.app_name = r.string("app_name", false);
    rec.version_code = r.non_negative("version_code");
    rec.version_name = r.string("version_name", false);
    rec.certificate = read_certificate(r.at("certificate"));
    if (r.has("compile_date")) rec.compile_date = r.string("compile_date");
    rec.min_sdk = r.optional_non_negative("min_sdk");
    rec.max_sdk = r.optional_non_negative("max_sdk");
    rec.target_sdk = r.optional_non_negative("target_sdk");
    if (r.has("components")) {
        ObjectReader c(r.at("components"), "components");
        c.reject_unknown({"activities", "services", "receivers", "providers"});
        rec.components.activities = c.string_set("activities");
        rec.components.services = c.string_set("services");
        rec.components.receivers = c.string_set("receivers");
        rec.components.providers = c.string_set("providers");
    }
    rec.declared_permissions = r.string_set("declared_permissions");
    rec.requested_permissions = r.string_set("requested_permissions");
    rec.libraries = r.string_set("libraries");
    rec.invoked_apis = r.string_set("invoked_apis");
    rec.strings = r.string_set("strings");
    rec.invoked_packages = r.string_set("invoked_packages");
    for (const auto& f : r.array("files", false)) {
        ObjectReader fr(f, "files");
        fr.reject_unknown({"path", "content_hash"});
        FileEntry entry{fr.string("path"), fr.string("content_hash")};
        if (!rec.files.insert(entry).second) fail("files", "duplicate element '" + entry.path + "'");
    }
    const json& methods = r.array("methods", false);
    for (std::size_t i = 0; i < methods.size(); ++i) {
        rec.methods.push_back(read_method(methods[i], "methods[" + std::to_string(i) + "]"));
    }
    for (const auto& d : r.array("detections", false)) {
        ObjectReader dr(d, "detections");
        dr.reject_unknown({"engine", "label"});
        rec.detections.push_back({dr.string("engine"), dr.string("label")});
    }
    if (r.has("crawl")) rec.crawl = read_crawl(r.at("crawl"));
    rec.market = r.string("market");
    rec.markets = r.string_set("markets");
    validate(rec);
    normalize(rec);
    return rec;
}

json to_json(const AppRecord& input) {
    AppRecord rec = input;
    normalize(rec);
    json j;
    j["sha256"] = rec.sha256;
    j["package_name"] = rec.package_name;
    j["app_name"] = rec.app_name;
    j["version_code"] = rec.version_code;
    j["version_name"] = rec.version_name;
    j["certificate"] = {{"fingerprint", rec.certificate.fingerprint},
                        {"issuer", rec.certificate.issuer},
                        {"subject", rec.certificate.subject},
                        {"public_key_hash", rec.certificate.public_key_hash}};
    if (rec.compile_date) j["compile_date"] = *rec.compile_date;
    if (rec.min_sdk) j["min_sdk"] = *rec.min_sdk;
    if (rec.max_sdk) j["max_sdk"] = *rec.max_sdk;
    if (rec.target_sdk) j["target_sdk"] = *rec.target_sdk;
    j["components"] = {{"activities", write_set(rec.components.activities)},
                       {"services", write_set(rec.components.services)},
                       {"receivers", write_set(rec.components.receivers)},
                       {"providers", write_set(rec.components.providers)}};
    j["declared_permissions"] = write_set(rec.declared_permissions);
    j["requested_permissions"] = write_set(rec.requested_permissions);
    j["libraries"] = write_set(rec.libraries);
    j["invoked_apis"] = write_set(rec.invoked_apis);
    j["strings"] = write_set(rec.strings);
    j["invoked_packages"] = write_set(rec.invoked_packages);
    json files = json::array();
    for (const auto& f : rec.files) files.push_back({{"path", f.path}, {"content_hash", f.content_hash}});
    j["files"] = files;
    json methods = json::array();
    for (const auto& m : rec.methods) methods.push_back(write_method(m));
    j["methods"] = methods;
    json detections = json::array();
    for (const auto& d : rec.detections) detections.push_back({{"engine", d.engine}, {"label", d.label}});
    j["detections"] = detections;
    if (rec.crawl) {
        const auto& c = *rec.crawl;
        j["crawl"] = {{"category", c.category},
                      {"description", c.description},
                      {"screenshots", c.screenshots},
                      {"reviews", c.reviews},
                      {"score", c.score},
                      {"whats_new", c.whats_new},
                      {"updated_date", c.updated_date},
                      {"file_size", c.file_size},
                      {"install_count", c.install_count},
                      {"version", c.version},
                      {"required_android_version", c.required_android_version},
                      {"price", c.price},
                      {"content_rating", c.content_rating},
                      {"developer", c.developer},
                      {"similar_apps", write_set(c.similar_apps)},
                      {"market", c.market}};
    }
    j["market"] = rec.market;
    if (!rec.markets.empty()) j["markets"] = write_set(rec.markets);
    return j;
}

std::string canonical_dump(const json& j) { return j.dump(); }

std::string canonical_serialize(const AppRecord& record) { return canonical_dump(to_json(record)); }

AppRecord parse_record(std::string_view line) {
    json j;
    try {
        j = json::parse(line.begin(), line.end());
    } catch (const json::parse_error& e) {
        throw ParseError(0, "<json>", e.what());
    }
    return record_from_json(j);
}

std::vector<AppRecord> parse_corpus(std::istream& in) {
    std::vector<AppRecord> out;
    std::set<std::string> hashes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        AppRecord rec;
        try {
            rec = parse_record(line);
        } catch (const ParseError& e) {
            throw e.at_line(line_no);
        }
        if (!hashes.insert(rec.sha256).second) {
            throw ParseError(line_no, "sha256", "duplicate sha256 " + rec.sha256);
        }
        out.push_back(std::move(rec));
    }
    if (in.bad()) throw IoError("read failure while parsing corpus");
    return out;
}

std::vector<AppRecord> parse_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file " + path.string());
    return parse_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<AppRecord>& corpus) {
    for (const auto& r : corpus) out << canonical_serialize(r) << '\n';
}

void write_corpus(const std::filesystem::path& path, const std::vector<AppRecord>& corpus) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    write_corpus(out, corpus);
    if (!out) throw IoError("write failure on " + path.string());
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) throw Error("EVP_MD_CTX_new failed");
    bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
              EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
              EVP_DigestFinal_ex(ctx, digest.data(), &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw Error("SHA-256 digest failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0x0f]);
    }
    return out;
}

std::string corpus_digest(const std::vector<AppRecord>& corpus) {
    std::string bytes;
    for (const auto& r : corpus) {
        bytes += canonical_serialize(r);
        bytes += '\n';
    }
    return sha256_hex(bytes);
}

}  // namespace appvault
