#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace fusionspec::spectra {

// Eigenvalues of a real square matrix, ordered by descending real part,
// ties broken by descending imaginary part, then by original index.
struct Spectrum {
    std::vector<std::complex<double>> eigenvalues;
    double trace_residual = 0.0;    // |sum(lambda) - tr(M)|
    double trace2_residual = 0.0;   // |sum(lambda^2) - tr(M^2)|
    bool conjugate_pairing_ok = true;

    int size() const { return static_cast<int>(eigenvalues.size()); }
    double re(int i) const { return eigenvalues[static_cast<size_t>(i)].real(); }
};

// Uniform measure on real atoms, sorted descending.
struct EmpiricalMeasure {
    std::vector<double> atoms;
};

// Dense general eigensolver (balancing + Hessenberg + shifted QR via LAPACK).
Spectrum eigenvalues_general(const Eigen::MatrixXd& m);

// Symmetric path; rejects inputs with ||M - M^T||_max > 1e-12 ||M||_max.
EmpiricalMeasure eigenvalues_symmetric(const Eigen::MatrixXd& m);

// (1/n) sum 1/(lambda_i - z) for Im z > 0.
std::complex<double> esd_stieltjes(const EmpiricalMeasure& m, std::complex<double> z);

// QR factor of g with diag(R) made positive; Haar when g is i.i.d. Gaussian.
Eigen::MatrixXd qr_orthonormal_haar(const Eigen::MatrixXd& g);

}  // namespace fusionspec::spectra
