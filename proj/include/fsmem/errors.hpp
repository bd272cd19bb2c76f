#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fsmem {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed log text. `record` is the zero-based record index, or npos when
// the document itself is not valid JSON.
class ParseError : public Error {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    ParseError(std::size_t record, const std::string& what)
        : Error(record == npos ? what : "record " + std::to_string(record) + ": " + what),
          record_(record) {}

    std::size_t record() const noexcept { return record_; }

private:
    std::size_t record_;
};

// A retained event lacks a field its variant requires, or holds a bad value.
class SchemaError : public Error {
public:
    SchemaError(std::size_t event, std::string field, const std::string& what)
        : Error("event " + std::to_string(event) + ", field '" + field + "': " + what),
          event_(event), field_(std::move(field)) {}

    std::size_t event() const noexcept { return event_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t event_;
    std::string field_;
};

class InputError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// A requested value falls outside its allowed range (e.g. a tier shift past L or R).
class RangeError : public Error {
public:
    using Error::Error;
};

class ProviderUnavailable : public Error {
public:
    using Error::Error;
};

} // namespace fsmem
