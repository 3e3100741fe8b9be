#pragma once

#include <stdexcept>
#include <string>

namespace lowlying {

enum class ErrorKind {
    domain,
    budget,
    network,
    schema,
    invariant,
    unstable,
    insufficient_data,
    invalid_argument,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};
struct BudgetError : Error {
    explicit BudgetError(const std::string& w) : Error(ErrorKind::budget, w) {}
};
struct NetworkError : Error {
    explicit NetworkError(const std::string& w) : Error(ErrorKind::network, w) {}
};
struct SchemaError : Error {
    explicit SchemaError(const std::string& w) : Error(ErrorKind::schema, w) {}
};
struct InvariantError : Error {
    explicit InvariantError(const std::string& w) : Error(ErrorKind::invariant, w) {}
};
struct UnstableCountError : Error {
    explicit UnstableCountError(const std::string& w) : Error(ErrorKind::unstable, w) {}
};
struct InsufficientDataError : Error {
    explicit InsufficientDataError(const std::string& w) : Error(ErrorKind::insufficient_data, w) {}
};

}  // namespace lowlying
