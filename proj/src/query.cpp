#include "appvault/query.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <functional>
#include <map>

#include "appvault/error.hpp"

namespace appvault {

using nlohmann::json;

namespace {

using Value = std::variant<std::monostate, std::string, std::int64_t, double, bool, StringSet>;
using Accessor = std::function<Value(const Graph&, const Entity&)>;

struct FieldSpec {
    FieldType type;
    Accessor get;
};

template <typename T>
Value opt(const std::optional<T>& v) {
    if (!v) return std::monostate{};
    return *v;
}

StringSet to_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

const std::map<std::string, FieldSpec>& app_fields() {
    using R = const AppRecord&;
    auto rec = [](auto f) {
        return [f](const Graph& g, const Entity& e) -> Value { return f(g.record(e)); };
    };
    auto crawl = [](auto f) {
        return [f](const Graph& g, const Entity& e) -> Value {
            const auto& r = g.record(e);
            if (!r.crawl) return std::monostate{};
            return f(*r.crawl);
        };
    };
    using C = const CrawlInfo&;
    static const std::map<std::string, FieldSpec> fields{
        {"sha256", {FieldType::string, rec([](R r) { return Value(r.sha256); })}},
        {"package_name", {FieldType::string, rec([](R r) { return Value(r.package_name); })}},
        {"app_name", {FieldType::string, rec([](R r) { return Value(r.app_name); })}},
        {"version_code", {FieldType::integer, rec([](R r) { return Value(r.version_code); })}},
        {"version_name", {FieldType::string, rec([](R r) { return Value(r.version_name); })}},
        {"market", {FieldType::string, rec([](R r) { return Value(r.market); })}},
        {"markets", {FieldType::set, rec([](R r) { return Value(r.presence()); })}},
        {"author", {FieldType::string, rec([](R r) { return Value(r.certificate.fingerprint); })}},
        {"certificate.fingerprint", {FieldType::string, rec([](R r) { return Value(r.certificate.fingerprint); })}},
        {"certificate.issuer", {FieldType::string, rec([](R r) { return Value(r.certificate.issuer); })}},
        {"certificate.subject", {FieldType::string, rec([](R r) { return Value(r.certificate.subject); })}},
        {"certificate.public_key_hash", {FieldType::string, rec([](R r) { return Value(r.certificate.public_key_hash); })}},
        {"compile_date", {FieldType::string, rec([](R r) { return opt(r.compile_date); })}},
        {"min_sdk", {FieldType::integer, rec([](R r) { return opt(r.min_sdk); })}},
        {"max_sdk", {FieldType::integer, rec([](R r) { return opt(r.max_sdk); })}},
        {"target_sdk", {FieldType::integer, rec([](R r) { return opt(r.target_sdk); })}},
        {"components.activities", {FieldType::set, rec([](R r) { return Value(r.components.activities); })}},
        {"components.services", {FieldType::set, rec([](R r) { return Value(r.components.services); })}},
        {"components.receivers", {FieldType::set, rec([](R r) { return Value(r.components.receivers); })}},
        {"components.providers", {FieldType::set, rec([](R r) { return Value(r.components.providers); })}},
        {"declared_permissions", {FieldType::set, rec([](R r) { return Value(r.declared_permissions); })}},
        {"requested_permissions", {FieldType::set, rec([](R r) { return Value(r.requested_permissions); })}},
        {"libraries", {FieldType::set, rec([](R r) { return Value(r.libraries); })}},
        {"invoked_apis", {FieldType::set, rec([](R r) { return Value(r.invoked_apis); })}},
        {"strings", {FieldType::set, rec([](R r) { return Value(r.strings); })}},
        {"invoked_packages", {FieldType::set, rec([](R r) { return Value(r.invoked_packages); })}},
        {"files.path", {FieldType::set, rec([](R r) {
             StringSet s;
             for (const auto& f : r.files) s.insert(f.path);
             return Value(s);
         })}},
        {"detections.engine", {FieldType::set, rec([](R r) {
             StringSet s;
             for (const auto& d : r.detections) s.insert(d.engine);
             return Value(s);
         })}},
        {"detections.label", {FieldType::set, rec([](R r) {
             StringSet s;
             for (const auto& d : r.detections) s.insert(d.label);
             return Value(s);
         })}},
        {"detection_count", {FieldType::integer, rec([](R r) {
             return Value(static_cast<std::int64_t>(r.detections.size()));
         })}},
        {"method_count", {FieldType::integer, rec([](R r) {
             return Value(static_cast<std::int64_t>(r.methods.size()));
         })}},
        {"is_malware", {FieldType::boolean, rec([](R r) { return Value(is_malware(r.detections)); })}},
        {"family", {FieldType::string, [](const Graph& g, const Entity& e) -> Value {
             return opt(g.family_of(e.ref.id));
         }}},
        {"crawl.category", {FieldType::string, crawl([](C c) { return Value(c.category); })}},
        {"crawl.description", {FieldType::string, crawl([](C c) { return Value(c.description); })}},
        {"crawl.screenshots", {FieldType::set, crawl([](C c) { return Value(to_set(c.screenshots)); })}},
        {"crawl.reviews", {FieldType::set, crawl([](C c) { return Value(to_set(c.reviews)); })}},
        {"crawl.score", {FieldType::number, crawl([](C c) { return Value(c.score); })}},
        {"crawl.whats_new", {FieldType::string, crawl([](C c) { return Value(c.whats_new); })}},
        {"crawl.updated_date", {FieldType::string, crawl([](C c) { return Value(c.updated_date); })}},
        {"crawl.file_size", {FieldType::integer, crawl([](C c) {
             return Value(static_cast<std::int64_t>(c.file_size));
         })}},
        {"crawl.install_count", {FieldType::integer, crawl([](C c) {
             return Value(static_cast<std::int64_t>(c.install_count));
         })}},
        {"crawl.version", {FieldType::string, crawl([](C c) { return Value(c.version); })}},
        {"crawl.required_android_version", {FieldType::string, crawl([](C c) { return Value(c.required_android_version); })}},
        {"crawl.price", {FieldType::number, crawl([](C c) { return Value(c.price); })}},
        {"crawl.content_rating", {FieldType::string, crawl([](C c) { return Value(c.content_rating); })}},
        {"crawl.developer", {FieldType::string, crawl([](C c) { return Value(c.developer); })}},
        {"crawl.similar_apps", {FieldType::set, crawl([](C c) { return Value(c.similar_apps); })}},
        {"crawl.market", {FieldType::string, crawl([](C c) { return Value(c.market); })}},
    };
    return fields;
}

const std::map<std::string, FieldSpec>& entity_fields() {
    static const std::map<std::string, FieldSpec> fields{
        {"id", {FieldType::string, [](const Graph&, const Entity& e) -> Value { return e.ref.id; }}},
        {"name", {FieldType::string, [](const Graph&, const Entity& e) -> Value { return e.ref.id; }}},
    };
    return fields;
}

const std::map<std::string, FieldSpec>& fields_for(EntityKind kind) {
    return kind == EntityKind::APP ? app_fields() : entity_fields();
}

// ---- tokenizer ----

enum class TokenKind { word, quoted, op, lparen, rparen, comma, end };

struct Token {
    TokenKind kind;
    std::string text;
    std::size_t pos;
};

bool is_word_char(char c) {
    return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' && c != ',' &&
           c != '"' && c != '=' && c != '!' && c != '<' && c != '>';
}

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '(') {
            out.push_back({TokenKind::lparen, "(", i++});
        } else if (c == ')') {
            out.push_back({TokenKind::rparen, ")", i++});
        } else if (c == ',') {
            out.push_back({TokenKind::comma, ",", i++});
        } else if (c == '"') {
            std::size_t start = i++;
            std::string text;
            bool closed = false;
            while (i < s.size()) {
                if (s[i] == '\\' && i + 1 < s.size()) {
                    text.push_back(s[i + 1]);
                    i += 2;
                } else if (s[i] == '"') {
                    ++i;
                    closed = true;
                    break;
                } else {
                    text.push_back(s[i++]);
                }
            }
            if (!closed) throw QueryError("unterminated string at offset " + std::to_string(start));
            out.push_back({TokenKind::quoted, text, start});
        } else if (c == '=' || c == '<' || c == '>' || c == '!') {
            std::size_t start = i;
            std::string op(1, c);
            ++i;
            if (i < s.size() && s[i] == '=' && c != '=') {
                op.push_back('=');
                ++i;
            }
            if (op == "!") throw QueryError("expected '!=' at offset " + std::to_string(start));
            out.push_back({TokenKind::op, op, start});
        } else {
            std::size_t start = i;
            while (i < s.size() && is_word_char(s[i])) ++i;
            out.push_back({TokenKind::word, std::string(s.substr(start, i - start)), start});
        }
    }
    out.push_back({TokenKind::end, "", s.size()});
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

class Parser {
public:
    explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

    std::vector<Conjunct> parse() {
        std::vector<Conjunct> out;
        if (peek().kind == TokenKind::end) return out;
        out.push_back(conjunct());
        while (peek().kind != TokenKind::end) {
            const Token& t = next();
            if (t.kind != TokenKind::word || lower(t.text) != "and") {
                throw QueryError("expected AND at offset " + std::to_string(t.pos));
            }
            out.push_back(conjunct());
        }
        return out;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& next() { return tokens_[pos_++]; }

    Conjunct conjunct() {
        const Token& field = next();
        if (field.kind != TokenKind::word) {
            throw QueryError("expected a field path at offset " + std::to_string(field.pos));
        }
        Conjunct c;
        c.field = field.text;
        const Token& op = next();
        if (op.kind == TokenKind::op) {
            static const std::map<std::string, CompareOp> ops{
                {"=", CompareOp::eq}, {"!=", CompareOp::ne}, {"<", CompareOp::lt},
                {"<=", CompareOp::le}, {">", CompareOp::gt}, {">=", CompareOp::ge}};
            c.op = ops.at(op.text);
        } else if (op.kind == TokenKind::word && lower(op.text) == "contains") {
            c.op = CompareOp::contains;
        } else if (op.kind == TokenKind::word && lower(op.text) == "in") {
            c.op = CompareOp::in;
        } else {
            throw QueryError("expected an operator after '" + c.field + "' at offset " +
                             std::to_string(op.pos));
        }
        if (peek().kind == TokenKind::lparen) {
            next();
            std::vector<Scalar> items{scalar()};
            while (peek().kind == TokenKind::comma) {
                next();
                items.push_back(scalar());
            }
            const Token& close = next();
            if (close.kind != TokenKind::rparen) {
                throw QueryError("expected ')' at offset " + std::to_string(close.pos));
            }
            c.literal.value = std::move(items);
        } else {
            c.literal.value = scalar();
        }
        return c;
    }

    Scalar scalar() {
        const Token& t = next();
        if (t.kind == TokenKind::word) return {t.text, false};
        if (t.kind == TokenKind::quoted) return {t.text, true};
        throw QueryError("expected a literal at offset " + std::to_string(t.pos));
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

// ---- typing ----

using Predicate = std::function<bool(const Value&)>;

std::int64_t as_integer(const Scalar& s, const std::string& field) {
    std::int64_t v = 0;
    auto [end, ec] = std::from_chars(s.text.data(), s.text.data() + s.text.size(), v);
    if (s.quoted || ec != std::errc() || end != s.text.data() + s.text.size()) {
        throw QueryError("field '" + field + "' expects an integer literal, got '" + s.text + "'");
    }
    return v;
}

double as_number(const Scalar& s, const std::string& field) {
    char* end = nullptr;
    double v = s.text.empty() ? 0.0 : std::strtod(s.text.c_str(), &end);
    if (s.quoted || s.text.empty() || end != s.text.c_str() + s.text.size()) {
        throw QueryError("field '" + field + "' expects a numeric literal, got '" + s.text + "'");
    }
    return v;
}

bool as_boolean(const Scalar& s, const std::string& field) {
    if (!s.quoted && s.text == "true") return true;
    if (!s.quoted && s.text == "false") return false;
    throw QueryError("field '" + field + "' expects true or false, got '" + s.text + "'");
}

template <typename T>
bool compare(const T& a, CompareOp op, const T& b) {
    switch (op) {
        case CompareOp::eq: return a == b;
        case CompareOp::ne: return a != b;
        case CompareOp::lt: return a < b;
        case CompareOp::le: return a <= b;
        case CompareOp::gt: return a > b;
        case CompareOp::ge: return a >= b;
        default: return false;
    }
}

template <typename T, typename Convert>
Predicate ordered_predicate(const Conjunct& c, Convert convert) {
    if (c.op == CompareOp::in) {
        if (!c.literal.is_list()) throw QueryError("'in' on '" + c.field + "' expects a list literal");
        std::vector<T> options;
        for (const auto& s : std::get<std::vector<Scalar>>(c.literal.value)) options.push_back(convert(s));
        return [options](const Value& v) {
            const T* x = std::get_if<T>(&v);
            return x && std::find(options.begin(), options.end(), *x) != options.end();
        };
    }
    if (c.literal.is_list()) throw QueryError("only 'in' accepts a list literal (field '" + c.field + "')");
    T rhs = convert(std::get<Scalar>(c.literal.value));
    CompareOp op = c.op;
    return [rhs, op](const Value& v) {
        const T* x = std::get_if<T>(&v);
        return x && compare(*x, op, rhs);
    };
}

Predicate compile(const Conjunct& c, FieldType type) {
    const std::string& field = c.field;
    switch (type) {
        case FieldType::string: {
            if (c.op == CompareOp::contains) {
                if (c.literal.is_list()) throw QueryError("'contains' expects a single literal");
                std::string needle = std::get<Scalar>(c.literal.value).text;
                return [needle](const Value& v) {
                    const auto* s = std::get_if<std::string>(&v);
                    return s && s->find(needle) != std::string::npos;
                };
            }
            return ordered_predicate<std::string>(c, [](const Scalar& s) { return s.text; });
        }
        case FieldType::integer:
            if (c.op == CompareOp::contains) throw QueryError("'contains' is not defined on integer field '" + field + "'");
            return ordered_predicate<std::int64_t>(c, [&](const Scalar& s) { return as_integer(s, field); });
        case FieldType::number:
            if (c.op == CompareOp::contains) throw QueryError("'contains' is not defined on numeric field '" + field + "'");
            return ordered_predicate<double>(c, [&](const Scalar& s) { return as_number(s, field); });
        case FieldType::boolean: {
            if (c.op != CompareOp::eq && c.op != CompareOp::ne) {
                throw QueryError("boolean field '" + field + "' supports only = and !=");
            }
            if (c.literal.is_list()) throw QueryError("boolean field '" + field + "' expects true or false");
            bool rhs = as_boolean(std::get<Scalar>(c.literal.value), field);
            bool equal = c.op == CompareOp::eq;
            return [rhs, equal](const Value& v) {
                const bool* b = std::get_if<bool>(&v);
                return b && ((*b == rhs) == equal);
            };
        }
        case FieldType::set: {
            if (c.op != CompareOp::contains) throw QueryError("set field '" + field + "' supports only 'contains'");
            if (c.literal.is_list()) throw QueryError("'contains' expects a single literal");
            std::string member = std::get<Scalar>(c.literal.value).text;
            return [member](const Value& v) {
                const auto* s = std::get_if<StringSet>(&v);
                return s && s->count(member) > 0;
            };
        }
    }
    throw QueryError("unsupported field type");
}

std::string quote_if_needed(const Scalar& s) {
    bool plain = !s.quoted && !s.text.empty() &&
                 std::all_of(s.text.begin(), s.text.end(), is_word_char) && lower(s.text) != "and";
    if (plain) return s.text;
    std::string out = "\"";
    for (char c : s.text) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out + "\"";
}

}  // namespace

std::string_view to_string(CompareOp op) {
    switch (op) {
        case CompareOp::eq: return "=";
        case CompareOp::ne: return "!=";
        case CompareOp::lt: return "<";
        case CompareOp::le: return "<=";
        case CompareOp::gt: return ">";
        case CompareOp::ge: return ">=";
        case CompareOp::contains: return "contains";
        case CompareOp::in: return "in";
    }
    return "?";
}

std::vector<std::pair<std::string, FieldType>> field_catalog(EntityKind kind) {
    std::vector<std::pair<std::string, FieldType>> out;
    for (const auto& [name, spec] : fields_for(kind)) out.emplace_back(name, spec.type);
    return out;
}

std::vector<Conjunct> parse_filter(std::string_view text) { return Parser(text).parse(); }

std::string format_filter(const std::vector<Conjunct>& conjuncts) {
    std::string out;
    for (const auto& c : conjuncts) {
        if (!out.empty()) out += " AND ";
        out += c.field + " " + std::string(to_string(c.op)) + " ";
        if (c.literal.is_list()) {
            out += "(";
            bool first = true;
            for (const auto& s : std::get<std::vector<Scalar>>(c.literal.value)) {
                if (!first) out += ", ";
                first = false;
                out += quote_if_needed(s);
            }
            out += ")";
        } else {
            out += quote_if_needed(std::get<Scalar>(c.literal.value));
        }
    }
    return out;
}

QueryResult evaluate(const Graph& graph, const FilterQuery& query) {
    if (query.limit < 1) throw QueryError("limit must be at least 1");
    const auto& fields = fields_for(query.target);
    std::vector<std::pair<const FieldSpec*, Predicate>> checks;
    for (const auto& c : query.conjuncts) {
        auto it = fields.find(c.field);
        if (it == fields.end()) {
            throw QueryError("unknown field path '" + c.field + "' for " + std::string(to_string(query.target)));
        }
        checks.emplace_back(&it->second, compile(c, it->second.type));
    }

    QueryResult result;
    // entities are stored in (kind, id) order, so matches come out ascending
    for (const auto& e : graph.entities()) {
        if (e.ref.kind != query.target) continue;
        bool ok = std::all_of(checks.begin(), checks.end(), [&](const auto& check) {
            return check.second(check.first->get(graph, e));
        });
        if (!ok) continue;
        if (result.total >= query.offset && result.ids.size() < query.limit) result.ids.push_back(e.ref.id);
        ++result.total;
    }
    return result;
}

json to_json(const QueryResult& result, const FilterQuery& query) {
    return {{"kind", std::string(to_string(query.target))},
            {"ids", result.ids},
            {"total", result.total},
            {"limit", query.limit},
            {"offset", query.offset}};
}

}  // namespace appvault
