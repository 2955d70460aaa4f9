#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace equilibria {

enum class Errc {
    invalid_argument,
    degenerate_input,
    dimension_mismatch,
    at_site,
    duplicate_sites,
    limits_exceeded,
    not_positive_codim,
    non_generic_slice,
    non_generic_diagram,
    unsupported_dimension,
    non_integer_alpha,
    unresolved,
    collinear_sites,
    identity_violation,
    reduction_failure,
    non_regular_value,
    zero_polynomial,
    degenerate_census,
    validation,
};

constexpr std::string_view errc_name(Errc code)
{
    switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::degenerate_input: return "DegenerateInput";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::at_site: return "AtSite";
    case Errc::duplicate_sites: return "DuplicateSites";
    case Errc::limits_exceeded: return "LimitsExceeded";
    case Errc::not_positive_codim: return "NotPositiveCodim";
    case Errc::non_generic_slice: return "NonGenericSlice";
    case Errc::non_generic_diagram: return "NonGenericDiagram";
    case Errc::unsupported_dimension: return "UnsupportedDimension";
    case Errc::non_integer_alpha: return "NonIntegerAlpha";
    case Errc::unresolved: return "Unresolved";
    case Errc::collinear_sites: return "CollinearSites";
    case Errc::identity_violation: return "IdentityViolation";
    case Errc::reduction_failure: return "ReductionFailure";
    case Errc::non_regular_value: return "NonRegularValue";
    case Errc::zero_polynomial: return "ZeroPolynomial";
    case Errc::degenerate_census: return "DegenerateCensus";
    case Errc::validation: return "ValidationError";
    }
    return "Unknown";
}

/// Single exception type for the library; the code tells callers what went wrong.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code)
    {
    }

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace equilibria
