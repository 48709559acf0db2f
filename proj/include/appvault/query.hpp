#pragma once

// Conjunctive filter language over graph entities.
//
//   query    := [ conjunct { AND conjunct } ]
//   conjunct := field-path op literal
//   op       := = | != | < | <= | > | >= | contains | in
//   literal  := "quoted" | bareword | ( literal { , literal } )
//
// A bareword is read as a number or boolean when the field type asks for
// one; quoted literals are always strings. A conjunct over a field the
// record does not carry (e.g. crawl.score on a third-party-market app) is
// false.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "appvault/graph.hpp"

namespace appvault {

enum class CompareOp { eq, ne, lt, le, gt, ge, contains, in };

std::string_view to_string(CompareOp op);

struct Scalar {
    std::string text;
    bool quoted = false;

    friend bool operator==(const Scalar&, const Scalar&) = default;
};

struct Literal {
    std::variant<Scalar, std::vector<Scalar>> value;

    bool is_list() const { return std::holds_alternative<std::vector<Scalar>>(value); }
    friend bool operator==(const Literal&, const Literal&) = default;
};

struct Conjunct {
    std::string field;
    CompareOp op = CompareOp::eq;
    Literal literal;

    friend bool operator==(const Conjunct&, const Conjunct&) = default;
};

struct FilterQuery {
    std::vector<Conjunct> conjuncts;
    EntityKind target = EntityKind::APP;
    std::size_t limit = 100;
    std::size_t offset = 0;
};

enum class FieldType { string, integer, number, boolean, set };

// Field paths accepted for `kind`, with their types.
std::vector<std::pair<std::string, FieldType>> field_catalog(EntityKind kind);

std::vector<Conjunct> parse_filter(std::string_view text);
std::string format_filter(const std::vector<Conjunct>& conjuncts);

struct QueryResult {
    std::vector<std::string> ids;
    std::size_t total = 0;
};

// Ids of matching entities in ascending id order, paginated. Throws
// QueryError for unknown field paths, unsupported operators and literals of
// the wrong type.
QueryResult evaluate(const Graph& graph, const FilterQuery& query);

nlohmann::json to_json(const QueryResult& result, const FilterQuery& query);

}  // namespace appvault
