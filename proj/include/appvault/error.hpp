#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace appvault {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A corpus or store line that could not be accepted. `line` is 1-based; 0
// means the failure is not tied to a single line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::string field, const std::string& message)
        : Error(format(line, field, message)), line_(line), field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

    ParseError at_line(std::size_t line) const {
        return ParseError(line, field_, detail_from(what()));
    }

private:
    static std::string format(std::size_t line, const std::string& field,
                              const std::string& message) {
        std::string out;
        if (line != 0) out += "line " + std::to_string(line) + ": ";
        if (!field.empty()) out += "field '" + field + "': ";
        return out + message;
    }
    static std::string detail_from(const std::string& what) {
        // strip any "line N: " and "field 'x': " prefixes produced by format()
        std::string rest = what;
        if (rest.rfind("line ", 0) == 0) rest = rest.substr(rest.find(": ") + 2);
        if (rest.rfind("field '", 0) == 0) rest = rest.substr(rest.find("': ") + 3);
        return rest;
    }

    std::size_t line_;
    std::string field_;
};

class NotFound : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class QueryError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace appvault
