#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace fusionspec {

// Numeric failures inside the pipeline (exit code 2 at the CLI).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Precondition violations on caller-supplied data (exit code 1 at the CLI).
struct contract_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct dimension_error : contract_error {
    using contract_error::contract_error;
};

// Kernel failing the validity conditions varsigma > 0, f(2) > 0 or monotonicity.
struct kernel_condition_error : numeric_error {
    using numeric_error::numeric_error;
};

// A degree entry collapsed below the representable floor.
struct degenerate_degree_error : numeric_error {
    using numeric_error::numeric_error;
};

// Zero denominator in the eigenvalue-ratio statistic.
struct degenerate_spectrum_error : numeric_error {
    using numeric_error::numeric_error;
};

// Transform evaluated outside its domain or a numeric inversion failed.
struct transform_domain_error : numeric_error {
    using numeric_error::numeric_error;
};

// Density reconstruction drifted too far from unit mass.
struct inversion_quality_error : numeric_error {
    using numeric_error::numeric_error;
};

// Eigenvalue solver did not converge; carries whatever eigenvalues were found.
struct solver_error : numeric_error {
    solver_error(const std::string& what, std::vector<std::complex<double>> partial = {})
        : numeric_error(what), partial_result(std::move(partial)) {}
    std::vector<std::complex<double>> partial_result;
};

// File-system problems (exit code 3 at the CLI).
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fusionspec
