#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace fusionspec::freeprob {

using Complex = std::complex<double>;

// Marchenko-Pastur family for the n x n Gram matrix sigma2 * X'X + shift with
// X of shape p x n and i.i.d. N(0, 1/p) entries. Convention: c = n/p, atom at
// `shift` of mass (1 - 1/c)+, continuous support
// [shift + sigma2 (1-sqrt(c))^2, shift + sigma2 (1+sqrt(c))^2].
struct MpLaw {
    double c = 1.0;
    double sigma2 = 1.0;
    double shift = 0.0;
};

struct DiscreteAtoms {
    std::vector<double> atoms;
    std::vector<double> weights;
};

// Piecewise-linear density on knots x with optional point masses.
struct GridDensity {
    std::vector<double> x;
    std::vector<double> density;
    std::vector<std::pair<double, double>> atoms;  // (position, mass)
};

struct QuantileResult {
    double value = 0.0;
    bool in_gap = false;  // landed inside a zero-density stretch
};

// Probability measure on R exposing the transforms the spectral theory uses.
// Immutable after construction; all evaluations are pure and thread-safe.
class SpectralMeasure {
  public:
    static SpectralMeasure mp(double c, double sigma2, double shift = 0.0);
    static SpectralMeasure dirac(double a);
    static SpectralMeasure atoms(std::vector<double> positions, std::vector<double> weights);
    static SpectralMeasure grid(std::vector<double> x, std::vector<double> density,
                                std::vector<std::pair<double, double>> atoms = {});
    // Uniform measure on a list of samples (used for empirical spectra).
    static SpectralMeasure empirical(const std::vector<double>& samples);

    // Stieltjes transform m(z) = int (lambda - z)^{-1} dmu, Im z > 0 only.
    Complex stieltjes(Complex z) const;
    // Also valid for real z strictly below the support and, via Schwarz
    // reflection, for Im z < 0. Used by the transform inversions.
    Complex stieltjes_any(Complex z) const;

    double support_lower() const;
    double support_upper() const;
    bool positive_support() const;
    double mass_at(double point) const;

    // mu([x, infinity)).
    double tail_mass(double x) const;

    // gamma(j): int_gamma^inf dmu = (j - 1/2) / n, solved to 1e-10 in mass.
    QuantileResult typical_location_flagged(int j, int n) const;
    double typical_location(int j, int n) const {
        return typical_location_flagged(j, n).value;
    }

    const MpLaw* as_mp() const { return std::get_if<MpLaw>(&rep_); }
    const DiscreteAtoms* as_atoms() const { return std::get_if<DiscreteAtoms>(&rep_); }
    const GridDensity* as_grid() const { return std::get_if<GridDensity>(&rep_); }

  private:
    explicit SpectralMeasure(std::variant<MpLaw, DiscreteAtoms, GridDensity> rep);
    std::variant<MpLaw, DiscreteAtoms, GridDensity> rep_;
};

// eta(z) = m(-1/z)/z and M(z) = z m(z) / (1 + z m(z)); S and R are filled
// only where their real-ray inversions are defined.
struct TransformValues {
    Complex eta;
    Complex M;
    std::optional<double> S_at;
    std::optional<double> R_at;
};

TransformValues transforms(const SpectralMeasure& mu, Complex z);

Complex eta_transform(const SpectralMeasure& mu, Complex z);
Complex m_transform(const SpectralMeasure& mu, Complex z);

// S(z) = -(z+1)/z * eta^{-1}(z+1) for z in (-1, 0); positive support only.
double s_transform(const SpectralMeasure& mu, double z);
// Same inversion driven by an arbitrary Stieltjes evaluator (e.g. the
// subordination solver for a free convolution).
double s_transform_from_m(const std::function<Complex(Complex)>& m_fn, double z);

// R(z) = m^{-1}(-z) - 1/z via bisection on the ray below the support.
double r_transform(const SpectralMeasure& mu, double z);

struct SolveOptions {
    double damping = 0.5;
    double tolerance = 1e-12;
    int max_iterations = 10000;
    // Accept a stalled iteration whose defect is below this instead of
    // throwing; keeps near-real-axis evaluations usable.
    double accept_residual = 1e-12;
};

struct SubordinationResult {
    Complex omega_a;
    Complex omega_b;
    Complex m_conv;
    int iterations = 0;
    double residual = 0.0;
};

// Free multiplicative convolution via the subordination fixed point
//   Omega_a <- z M_a(Omega_b) / Omega_b,  Omega_b <- z M_b(Omega_a) / Omega_a
// damped by 0.5, started at Omega = z; m is recovered from M = M_{a ⊠ b}(z)
// through m = M / (z (1 - M)). Requires positive support and Im z > 0.
SubordinationResult free_mult_convolve(const SpectralMeasure& a, const SpectralMeasure& b,
                                       Complex z, const SolveOptions& opts = {});

// Free additive convolution via
//   omega_a <- F_a(omega_b) + z - omega_b,  omega_b <- F_b(omega_a) + z - omega_a
// with F = -1/m; returns m_{a ⊞ b}(z).
SubordinationResult free_add_convolve(const SpectralMeasure& a, const SpectralMeasure& b,
                                      Complex z, const SolveOptions& opts = {});

// Stieltjes inversion: density = Im m(x + i eta)/pi on a uniform grid with
// Richardson extrapolation over eta and eta/2, negative values clipped, then
// renormalized to unit mass. The renormalization factor must stay in
// [0.99, 1.01]. Edges are where the density first exceeds 1e-6.
struct DensityRecovery {
    SpectralMeasure measure;
    double renormalization = 1.0;
    double edge_lower = 0.0;
    double edge_upper = 0.0;
};

DensityRecovery invert_to_density(const std::function<Complex(Complex)>& m_fn, double lo,
                                  double hi, double eta, int grid_points = 2048);

// Bisection refinement of the point where the Richardson density crosses the
// 1e-6 floor between x_inside (above floor) and x_outside (below floor).
double refine_edge(const std::function<Complex(Complex)>& m_fn, double eta,
                   double x_outside, double x_inside);

// Diagonal deterministic equivalents: quantiles of nu for the first
// min(n, p) entries, padded with varsigma when n > p.
std::pair<Eigen::VectorXd, Eigen::VectorXd> sigma_matrices(const SpectralMeasure& nu_x,
                                                           const SpectralMeasure& nu_y,
                                                           int n, int p1, int p2,
                                                           double varsigma);

}  // namespace fusionspec::freeprob
