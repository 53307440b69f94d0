#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace grlol {

enum class Errc {
    invalid_input,
    zero_column,
    length_mismatch,
    dimension_mismatch,
    empty_set,
    bad_group_count,
    orthogonal_design,
    no_feasible_leader,
    invalid_constants,
    singular_gram,
    a3_violated,
    not_admissible,
    not_subset_of_leaders,
    zero_signal,
    invalid_config,
    io_error,
};

std::string_view errc_name(Errc code) noexcept;

/// Every error raised by the library. The message is surfaced verbatim by
/// the CLI, prefixed with the error name.
class Error : public std::runtime_error
{
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code)
    {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace grlol
