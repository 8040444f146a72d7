#ifndef SPEF_ERRORS_HPP
#define SPEF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spef {

/// Failure classes raised by the estimators. Invalid arguments (wrong
/// dimensions, bad configuration) use std::invalid_argument instead.
enum class ErrorKind {
    log_partition_overflow,
    zero_base_measure,
    empty_kernel_neighborhood,
    vanishing_density,
    degenerate_sample,
    isolated_y,
    lfc_overflow,
    density_floor,
    objective_infeasible,
    all_data_missing,
    g1_overflow,
    zero_integral,
};

class NumericalError : public std::runtime_error {
public:
    NumericalError(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace spef

#endif
