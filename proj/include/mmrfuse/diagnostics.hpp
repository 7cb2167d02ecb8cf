#pragma once

/** \file diagnostics.hpp
 *  \brief Error types and the process-wide warning sink.
 */

#include <cstddef>
#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace mmrfuse {

/** \brief Base class for every error raised by the library. */
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/** \brief Malformed input file; carries the 1-based line number when known. */
class ParseError : public Error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/** \brief Well-formed input violating a data-model invariant. */
class ValidationError : public Error {
public:
    using Error::Error;
};

/** \brief Invalid or incomplete run configuration. */
class ConfigError : public Error {
public:
    using Error::Error;
};

/** \brief Network failure talking to a summarizer endpoint. Retryable. */
class TransportError : public Error {
public:
    using Error::Error;
};

/** \brief Summarizer endpoint answered with a non-conforming body. */
class ProtocolError : public Error {
public:
    using Error::Error;
};

/** \brief Numeric input outside an operation's domain (empty vocabulary, m > |candidates|, ...). */
class DomainError : public Error {
public:
    using Error::Error;
};

/** \brief A distance or similarity that cannot be computed for the given pair. */
class MeasureUndefined : public Error {
public:
    using Error::Error;
};

/** \brief Filesystem failure. */
class IoError : public Error {
public:
    using Error::Error;
};

namespace diag {

using WarningSink = std::function<void(std::string_view)>;

namespace detail {

struct SinkState {
    std::mutex mutex;
    WarningSink sink;
};

inline SinkState& state() {
    static SinkState s;
    return s;
}

}  // namespace detail

/** \brief Replaces the warning sink; an empty function restores the stderr default.
 *  Returns the previous sink so callers can restore it.
 */
inline WarningSink set_warning_sink(WarningSink sink) {
    auto& s = detail::state();
    std::lock_guard lock(s.mutex);
    return std::exchange(s.sink, std::move(sink));
}

inline void warn(std::string_view message) {
    auto& s = detail::state();
    std::lock_guard lock(s.mutex);
    if (s.sink) {
        s.sink(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

/** \brief RAII capture of warnings, used by tests and the CLI. */
class ScopedWarningCapture {
public:
    explicit ScopedWarningCapture(WarningSink sink) : previous_(set_warning_sink(std::move(sink))) {}
    ~ScopedWarningCapture() { set_warning_sink(std::move(previous_)); }

    ScopedWarningCapture(const ScopedWarningCapture&) = delete;
    ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

private:
    WarningSink previous_;
};

}  // namespace diag
}  // namespace mmrfuse
