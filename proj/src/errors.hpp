#pragma once

#include <stdexcept>
#include <string>

namespace pcitk {

// Error categories map 1:1 onto the C API status codes and the CLI exit
// codes, so the class of a failure survives the language boundary.
enum class ErrorCode : int {
    Generic = 1,
    Schema = 2,       // malformed input: missing column, bad JSON, bad config
    Data = 3,         // insufficient rows, singular covariance, degenerate test
    Infeasible = 4,   // empty feasible correlation set
    InvalidArgument = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& msg) : Error(ErrorCode::Schema, msg) {}
};

struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(ErrorCode::Data, msg) {}
};

struct InfeasibleError : Error {
    explicit InfeasibleError(const std::string& msg) : Error(ErrorCode::Infeasible, msg) {}
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& msg) : Error(ErrorCode::InvalidArgument, msg) {}
};

}  // namespace pcitk
