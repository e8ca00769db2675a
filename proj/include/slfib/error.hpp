#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace slfib {

/// Failure raised by any operation of the library.
///
/// `token()` is a stable machine-readable identifier such as
/// "solver-diverged" or "out-of-domain"; the CLI prints it on stderr and
/// maps it to an exit code. `detail()` carries free-form context (e.g. the
/// final residual of a failed Newton solve).
class Error : public std::runtime_error {
public:
    Error(std::string token, std::string detail = {})
        : std::runtime_error(detail.empty() ? token : token + ": " + detail),
          token_(std::move(token)),
          detail_(std::move(detail)) {}

    const std::string& token() const noexcept { return token_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string token_;
    std::string detail_;
};

} // namespace slfib
