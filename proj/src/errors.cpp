#include "llmprior/errors.hpp"

#include <utility>

namespace llmprior {

SchemaError::SchemaError(std::string field, const std::string& what)
    : ValidationError(what), field_(std::move(field)) {}

LookupError::LookupError(const std::string& what, std::vector<std::string> available)
    : ValidationError(what), available_(std::move(available)) {}

ParseError::ParseError(const std::string& what, std::string raw, std::size_t line, std::size_t column)
    : ValidationError(what), raw_(std::move(raw)), line_(line), column_(column) {}

FoldError::FoldError(int fold, const std::string& what)
    : ValidationError("fold " + std::to_string(fold) + ": " + what), fold_(fold) {}

NonConvergenceError::NonConvergenceError(NonConvergenceCause cause, int iterations, const std::string& what)
    : NumericError(what), cause_(cause), iterations_(iterations) {}

DegenerateDataError::DegenerateDataError(const std::string& what, std::vector<double> coefficients)
    : NumericError(what), coefficients_(std::move(coefficients)) {}

TransportError::TransportError(TransportFailure kind, int status, int attempts, std::string body,
                               const std::string& what)
    : Error(what), kind_(kind), status_(status), attempts_(attempts), body_(std::move(body)) {}

}  // namespace llmprior
