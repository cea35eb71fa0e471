#pragma once

#include <stdexcept>
#include <string>

namespace leadmetric {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Elements or sets from two different group models were combined.
class ModelMismatch : public Error {
public:
    using Error::Error;
};

/// Two actions (or a set and an action) live on incompatible measure spaces.
class BackendMismatch : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// A configured resource cap (ball radius, ground size, support size...) was hit.
class ResourceLimit : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& where, const std::string& what)
        : Error(where.empty() ? what : where + ": " + what), where_(where) {}
    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

}  // namespace leadmetric
