#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>

#include "fusionspec/rngkit.hpp"

namespace fusionspec::kernelgraph {

// The kernel values the spectral theory consumes: f and its first two
// derivatives at t = 2, f(0), and varsigma = f(0) + 2 f'(2) - f(2).
struct KernelValues {
    double f0 = 0.0;
    double f2 = 0.0;
    double df2 = 0.0;
    double ddf2 = 0.0;
    double varsigma = 0.0;
};

// Twice-differentiable decreasing kernel with cached values at 0 and 2 and
// the shift constant varsigma = f(0) + 2 f'(2) - f(2). Construction enforces
// varsigma > 0, f(2) > 0 and spot-checks monotonicity on a 64-point log grid
// over [0, 10].
class KernelFn {
  public:
    KernelFn(std::string name, std::function<double(double)> f,
             std::function<double(double)> df, std::function<double(double)> ddf,
             double bandwidth = 0.0);

    double operator()(double t) const { return f_(t); }
    double deriv1(double t) const { return df_(t); }
    double deriv2(double t) const { return ddf_(t); }

    const std::string& name() const { return name_; }
    double bandwidth() const { return bandwidth_; }
    const KernelValues& values() const { return values_; }
    double f0() const { return values_.f0; }
    double f2() const { return values_.f2; }
    double df2() const { return values_.df2; }
    double ddf2() const { return values_.ddf2; }
    double varsigma() const { return values_.varsigma; }

  private:
    std::string name_;
    std::function<double(double)> f_, df_, ddf_;
    double bandwidth_ = 0.0;
    KernelValues values_;
};

// f(t) = exp(-t / (2 sigma^2)).
KernelFn gaussian_kernel(double sigma);

// Affinity matrix W(i,j) = f(||x_i - x_j||^2), its degrees and the row
// stochastic normalization A = D^{-1} W.
struct AffinityBundle {
    Eigen::MatrixXd W;
    Eigen::VectorXd D;
    Eigen::MatrixXd A;
    KernelValues kernel;
    int n = 0;
};

// Distances computed via the Gram expansion ||x_i||^2 + ||x_j||^2 - 2 x_i'x_j
// clamped at zero. Throws degenerate_degree_error if any degree <= 1e-300.
AffinityBundle build_affinity(const rngkit::DataCloud& cloud, const KernelFn& kernel);

// W = sh0 + sh1 + sh2 + w_tilde with
//   sh0 = f(2) 1 1'
//   sh1 = f'(2) [1 psi' + psi 1']
//   sh2 = (f''(2)/2) [1 (psi o psi)' + (psi o psi) 1' + 2 psi psi']
// and psi(i) = ||x_i||^2 - 1.
struct ShiftDecomposition {
    Eigen::MatrixXd sh0, sh1, sh2;
    Eigen::VectorXd psi;
    Eigen::MatrixXd w_tilde;
};

ShiftDecomposition shift_decomposition(const AffinityBundle& bundle,
                                       const rngkit::DataCloud& cloud);

// max_i |n / D(i) - 1 / f(2)|.
double degree_deviation(const AffinityBundle& bundle);

// K(i,j) = f(2) - 2 f'(2) x_i'x_j off-diagonal, f(0) on the diagonal;
// K_breve = -2 f'(2) X'X + varsigma I.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> k_matrices(const rngkit::DataCloud& cloud,
                                                       const KernelFn& kernel);

}  // namespace fusionspec::kernelgraph
