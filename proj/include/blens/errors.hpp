#pragma once

#include <stdexcept>
#include <string>

namespace blens {

/// Base class for every error raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A mass, weight, or probability was negative (or not finite).
struct NegativeMass : Error { using Error::Error; };

/// An element label does not belong to the space it was used with.
struct UnknownElement : Error { using Error::Error; };

/// Masses of a distribution (or mixture weights) do not sum to one
/// within the active tolerance.
struct NotNormalized : Error { using Error::Error; };

/// Two spaces that had to coincide (or to stand in a dom/cod relation)
/// do not.
struct SpaceMismatch : Error { using Error::Error; };

/// A channel table lacks the row for some domain element.
struct MissingRow : Error { using Error::Error; };

/// A density row does not integrate to one against its base measure.
struct NotCausal : Error { using Error::Error; };

/// A pushforward carries no mass at the requested observation.  When the
/// error arises from running a query, `detail` holds the serialized
/// predicted distribution so callers can report what *was* predicted.
struct EmptyPushforward : Error {
    std::string detail;
    explicit EmptyPushforward(const std::string& msg, std::string detail_ = {})
        : Error(msg), detail(std::move(detail_)) {}
};

/// An exhaustive or randomized search finished without a witness.
struct NotFound : Error { using Error::Error; };

/// Position of a token in a model source file (1-based).
struct SourcePos {
    int line = 0;
    int col = 0;
};

/// Base for errors that carry a source position.
struct PositionedError : Error {
    SourcePos pos;
    PositionedError(const std::string& msg, SourcePos p) : Error(msg), pos(p) {}
};

/// The model text does not match the grammar.
struct SyntaxError : PositionedError { using PositionedError::PositionedError; };

/// A declaration reuses a name already taken within its kind.
struct DuplicateName : PositionedError { using PositionedError::PositionedError; };

/// A statement refers to a name that has not been declared yet.
struct ForwardReference : PositionedError { using PositionedError::PositionedError; };

inline std::string at_pos(const SourcePos& p) {
    return "line " + std::to_string(p.line) + ", col " + std::to_string(p.col);
}

} // namespace blens
