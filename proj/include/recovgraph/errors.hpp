#ifndef RECOVGRAPH_ERRORS_HPP
#define RECOVGRAPH_ERRORS_HPP

#include <stdexcept>

namespace recovgraph {

/// Base class for all recovgraph errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input text: bad header, wrong field count, unparsable number.
struct ParseError : Error {
    using Error::Error;
};

/// Structurally valid input with unusable content: non-finite values,
/// sessions too short for a sample standard deviation.
struct DataError : Error {
    using Error::Error;
};

/// Numerical failure: matrix singular beyond the ridge ladder, precision
/// matrix with a non-positive diagonal.
struct NumericError : Error {
    using Error::Error;
};

/// Broken interface contract: mismatched sample counts, pair-ordering
/// mismatch, gap in an instance sequence.
struct ContractError : Error {
    using Error::Error;
};

} // namespace recovgraph

#endif
