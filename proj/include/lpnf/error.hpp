#ifndef LPNF_ERROR_HPP
#define LPNF_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lpnf {

enum class errc {
    dimension_mismatch,
    base_point_mismatch,
    truncation_exceeded,
    not_tangent_to_identity,
    umax_too_small,
    zero_small_divisor,
    not_good_perturbation,
    not_diagonal_linear,
    not_in_span,
    empty_ring,
    no_nonzero_weights,
    on_coordinate_hyperplane,
    degenerate_up_to_mu_max,
    epsilon_too_large,
    non_positive_denominator,
    schedule_not_diophantine,
    precondition_violated,
    not_symplectic_perturbation,
    not_volume_preserving,
    flow_escaped_domain,
    step_underflow,
    schema_error,
};

const char *errc_name(errc c);

class Error : public std::runtime_error {
  public:
    Error(errc code, const std::string &what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    errc code() const { return code_; }

  private:
    errc code_;
};

} // namespace lpnf

#endif
