#pragma once

#include <stdexcept>
#include <string>

namespace attrseq {

// Error taxonomy used across the library. The CLI maps these onto exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error { using Error::Error; };      // shape mismatch
struct ConfigError : Error { using Error::Error; };         // bad parameter values
struct NumericalError : Error { using Error::Error; };      // non-finite loss / divergence
struct VocabError : Error { using Error::Error; };          // item index outside vocabulary
struct LengthError : Error { using Error::Error; };         // sequence longer than padding target
struct ParseError : Error { using Error::Error; };          // malformed input file
struct SchemaError : Error { using Error::Error; };         // inconsistent attribute keys/kinds
struct EmptySequenceError : Error { using Error::Error; };  // op requires at least one item
struct UndefinedMetricError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace attrseq
