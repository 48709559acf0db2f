#pragma once

// Linear-scan reference for filter queries. It reads fields out of each
// record's JSON form instead of the typed record, and walks the raw edge list
// for graph-derived fields, so it shares no lookup code with evaluate().

#include <random>
#include <string>
#include <vector>

#include "appvault/query.hpp"

namespace testing {

using namespace appvault;

inline nlohmann::json oracle_field(const Graph& g, const nlohmann::json& rec, const std::string& path) {
    using nlohmann::json;
    if (path == "markets") {
        std::set<std::string> s{rec.at("market").get<std::string>()};
        if (rec.contains("markets")) {
            for (const auto& m : rec["markets"]) s.insert(m.get<std::string>());
        }
        return json(s);
    }
    if (path == "author") return rec.at("certificate").at("fingerprint");
    if (path == "files.path" || path == "detections.engine" || path == "detections.label") {
        auto dot = path.find('.');
        json out = json::array();
        for (const auto& item : rec.value(path.substr(0, dot), json::array())) out.push_back(item.at(path.substr(dot + 1)));
        return out;
    }
    if (path == "detection_count") return rec.value("detections", json::array()).size();
    if (path == "method_count") return rec.value("methods", json::array()).size();
    if (path == "is_malware") return !rec.value("detections", json::array()).empty();
    if (path == "family") {
        for (const auto& e : g.edges()) {
            if (e.rel == RelationKind::malware && e.src.id == rec.at("sha256").get<std::string>()) return e.dst.id;
        }
        return nullptr;
    }
    const json* cur = &rec;
    std::size_t start = 0;
    while (true) {
        auto dot = path.find('.', start);
        auto key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!cur->is_object() || !cur->contains(key)) return nullptr;
        cur = &(*cur)[key];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return *cur;
}

template <typename T>
bool oracle_compare(const T& a, CompareOp op, const T& b) {
    switch (op) {
        case CompareOp::eq: return a == b;
        case CompareOp::ne: return !(a == b);
        case CompareOp::lt: return a < b;
        case CompareOp::le: return !(b < a);
        case CompareOp::gt: return b < a;
        case CompareOp::ge: return !(a < b);
        default: return false;
    }
}

inline std::vector<std::string> literal_texts(const Literal& l) {
    std::vector<std::string> out;
    if (l.is_list()) {
        for (const auto& s : std::get<std::vector<Scalar>>(l.value)) out.push_back(s.text);
    } else {
        out.push_back(std::get<Scalar>(l.value).text);
    }
    return out;
}

inline bool oracle_match(const nlohmann::json& v, FieldType type, const Conjunct& c) {
    if (v.is_null()) return false;
    auto texts = literal_texts(c.literal);
    switch (type) {
        case FieldType::set:
            for (const auto& item : v) {
                if (item.get<std::string>() == texts[0]) return true;
            }
            return false;
        case FieldType::boolean:
            return (v.get<bool>() == (texts[0] == "true")) == (c.op == CompareOp::eq);
        case FieldType::string: {
            auto s = v.get<std::string>();
            if (c.op == CompareOp::contains) return s.find(texts[0]) != std::string::npos;
            if (c.op == CompareOp::in) return std::find(texts.begin(), texts.end(), s) != texts.end();
            return oracle_compare(s, c.op, texts[0]);
        }
        case FieldType::integer: {
            auto x = v.get<std::int64_t>();
            if (c.op == CompareOp::in) {
                for (const auto& t : texts) {
                    if (std::stoll(t) == x) return true;
                }
                return false;
            }
            return oracle_compare(x, c.op, static_cast<std::int64_t>(std::stoll(texts[0])));
        }
        case FieldType::number: {
            auto x = v.get<double>();
            if (c.op == CompareOp::in) {
                for (const auto& t : texts) {
                    if (std::stod(t) == x) return true;
                }
                return false;
            }
            return oracle_compare(x, c.op, std::stod(texts[0]));
        }
    }
    return false;
}

// All matching ids (unpaginated), ascending.
inline std::vector<std::string> oracle_scan(const Graph& g, const FilterQuery& q) {
    std::map<std::string, FieldType> types;
    for (const auto& [name, type] : field_catalog(q.target)) types[name] = type;
    std::vector<std::string> ids;
    if (q.target == EntityKind::APP) {
        for (const auto& r : g.corpus()) {
            auto rec = to_json(r);
            bool ok = true;
            for (const auto& c : q.conjuncts) ok = ok && oracle_match(oracle_field(g, rec, c.field), types.at(c.field), c);
            if (ok) ids.push_back(r.sha256);
        }
    } else {
        for (const auto& e : g.entities()) {
            if (e.ref.kind != q.target) continue;
            bool ok = true;
            for (const auto& c : q.conjuncts) ok = ok && oracle_match(nlohmann::json(e.ref.id), types.at(c.field), c);
            if (ok) ids.push_back(e.ref.id);
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

// A random well-typed query whose literals are mostly drawn from the data so
// that results are non-trivial.
inline FilterQuery random_query(std::mt19937_64& rng, const Graph& g) {
    FilterQuery q;
    static constexpr EntityKind kinds[] = {EntityKind::MARKET, EntityKind::FAMILY, EntityKind::AUTHOR,
                                           EntityKind::LIBRARY, EntityKind::CATEGORY};
    if (rng() % 6 == 0) q.target = kinds[rng() % 5];
    auto catalog = field_catalog(q.target);
    const auto& corpus = g.corpus();
    const std::size_t n = 1 + rng() % 3;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& [field, type] = catalog[rng() % catalog.size()];
        Conjunct c;
        c.field = field;
        auto sample = [&]() -> nlohmann::json {
            if (q.target != EntityKind::APP) {
                std::vector<std::string> ids;
                for (const auto& e : g.entities()) {
                    if (e.ref.kind == q.target) ids.push_back(e.ref.id);
                }
                return ids.empty() ? nlohmann::json("x") : nlohmann::json(ids[rng() % ids.size()]);
            }
            if (corpus.empty()) return nullptr;
            return oracle_field(g, to_json(corpus[rng() % corpus.size()]), field);
        };
        auto scalar_of = [&](const nlohmann::json& v) -> Scalar {
            switch (type) {
                case FieldType::integer:
                    return {std::to_string(v.is_number() ? v.get<std::int64_t>() : static_cast<std::int64_t>(rng() % 30)), false};
                case FieldType::number: {
                    double d = v.is_number() ? v.get<double>() : static_cast<double>(rng() % 50) / 10.0;
                    return {nlohmann::json(d).dump(), false};
                }
                case FieldType::boolean:
                    return {rng() % 2 ? "true" : "false", false};
                case FieldType::set:
                    if (v.is_array() && !v.empty()) return {v[rng() % v.size()].get<std::string>(), true};
                    return {"absent-member", true};
                case FieldType::string:
                    if (v.is_string()) {
                        auto s = v.get<std::string>();
                        if (rng() % 4 == 0 && s.size() > 3) s = s.substr(rng() % (s.size() / 2), 3);
                        return {s, true};
                    }
                    return {"zzz", true};
            }
            return {"", true};
        };
        switch (type) {
            case FieldType::set:
                c.op = CompareOp::contains;
                break;
            case FieldType::boolean:
                c.op = rng() % 2 ? CompareOp::eq : CompareOp::ne;
                break;
            case FieldType::string: {
                static constexpr CompareOp ops[] = {CompareOp::eq, CompareOp::ne, CompareOp::lt, CompareOp::ge,
                                                    CompareOp::contains, CompareOp::in};
                c.op = ops[rng() % 6];
                break;
            }
            default: {
                static constexpr CompareOp ops[] = {CompareOp::eq, CompareOp::ne, CompareOp::lt, CompareOp::le,
                                                    CompareOp::gt, CompareOp::ge, CompareOp::in};
                c.op = ops[rng() % 7];
                break;
            }
        }
        if (c.op == CompareOp::in) {
            std::vector<Scalar> items;
            for (auto m = 1 + rng() % 3; m > 0; --m) items.push_back(scalar_of(sample()));
            c.literal.value = items;
        } else {
            c.literal.value = scalar_of(sample());
        }
        q.conjuncts.push_back(std::move(c));
    }
    q.limit = 1 + rng() % 200;
    q.offset = rng() % 4 == 0 ? rng() % 50 : 0;
    return q;
}

}  // namespace testing
