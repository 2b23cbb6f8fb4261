#pragma once

#include <stdexcept>
#include <string>

namespace vptt {

enum class errc {
    invalid_argument,   // bad parameters, malformed config
    zero_norm,          // normalize() on a zero vector
    empty_text,         // embed() on an empty string
    dimension_mismatch,
    allocation_empty,   // quota mass is zero but budget > 0
    budget_too_small,   // word budget below the query length
    missing_client,     // composer/backend needs a remote client
    data,               // malformed records, schema violations
    missing_cell,       // incomplete score table
    degenerate_variance,
    score_out_of_range,
    score_off_grid,
    missing_label,
    duplicate_label,
    remote,             // transport / remote service failure
    overflow,
};

const char* errc_name(errc c);

// Single exception type; code() keeps failures machine-checkable.
class error : public std::runtime_error {
  public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const { return code_; }

  private:
    errc code_;
};

} // namespace vptt
