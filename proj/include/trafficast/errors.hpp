#pragma once

#include <stdexcept>
#include <string>

namespace trafficast {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

class NonFiniteError : public Error {
public:
    explicit NonFiniteError(const std::string& what) : Error(what) {}
};

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& what) : Error(what) {}
};

class TooShort : public Error {
public:
    explicit TooShort(const std::string& what) : Error(what) {}
};

class MissingColumn : public Error {
public:
    explicit MissingColumn(const std::string& what) : Error(what) {}
};

class MalformedRow : public Error {
public:
    MalformedRow(std::size_t row_index, const std::string& what)
        : Error("row " + std::to_string(row_index) + ": " + what), row(row_index) {}
    std::size_t row;
};

class DegenerateRange : public Error {
public:
    explicit DegenerateRange(const std::string& what) : Error(what) {}
};

class ZeroVariance : public Error {
public:
    explicit ZeroVariance(const std::string& what) : Error(what) {}
};

class InvalidProfile : public Error {
public:
    explicit InvalidProfile(const std::string& what) : Error(what) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(what) {}
};

class Diverged : public Error {
public:
    Diverged(std::size_t epoch_index, const std::string& what)
        : Error("epoch " + std::to_string(epoch_index) + ": " + what), epoch(epoch_index) {}
    std::size_t epoch;
};

class InsufficientPositive : public Error {
public:
    explicit InsufficientPositive(const std::string& what) : Error(what) {}
};

class NothingToPlot : public Error {
public:
    explicit NothingToPlot(const std::string& what) : Error(what) {}
};

class AllRulesSilent : public Error {
public:
    explicit AllRulesSilent(const std::string& what) : Error(what) {}
};

} // namespace trafficast
