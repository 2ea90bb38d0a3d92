#pragma once

#include <stdexcept>
#include <string>

namespace promptpore {

/// Base class of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Bytes were readable but do not match the expected format or schema.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A precondition on an argument was violated.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Input has too little structure for the requested statistics
/// (e.g. fewer distinct intensities than clusters).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// A centroid record has no foreground pixels to prompt from.
class UnusableRecordError : public Error {
public:
    using Error::Error;
};

/// Segmentation backend failed to load or run.
class BackendError : public Error {
public:
    using Error::Error;
};

/// Synthetic fixture could not be generated under the given constraints.
class GenerationError : public Error {
public:
    using Error::Error;
};

}  // namespace promptpore
