#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fusionspec/kernelgraph.hpp"
#include "fusionspec/rngkit.hpp"
#include "fusionspec/spectra.hpp"

namespace fusionspec::inference {

// T(L) = max_{3 <= i <= L} |Re lambda_i / Re lambda_{i+1}| over the spectrum
// in descending-real-part order.
struct RatioStatistic {
    int L = 0;
    double value = 0.0;
    std::string spectrum_ref;
};

RatioStatistic ratio_statistic(const spectra::Spectrum& spec, int L);

// Resampling thresholds: theta(L) is the smallest half-width around 1 that
// covers at least alpha of the B null replicates of T(L); theta* is the
// largest theta(L) over 3 <= L <= L0 and L* the largest L attaining it.
struct CalibrationTable {
    int n = 0, p1 = 0, p2 = 0;
    double alpha = 0.0;
    int L0 = 0, B = 0;
    std::vector<double> theta_of_L;  // index 0 corresponds to L = 3
    double theta_star = 0.0;
    int L_star = 0;
    std::uint64_t master_seed = 0;
    std::string kernel_name;
    double kernel_sigma = 0.0;

    double theta(int L) const { return theta_of_L[static_cast<size_t>(L - 3)]; }
};

CalibrationTable calibrate(int n, int p1, int p2, const kernelgraph::KernelFn& kernel,
                           double alpha, int L0, int B, const rngkit::SeedSpec& seed);

struct TestOutcome {
    RatioStatistic statistic;
    bool reject = false;
    double theta_star = 0.0;
    int L_star = 0;
    double significance = 0.0;  // 1 - alpha
};

// Rejects iff |T(L*) - 1| > theta*. The calibration is distribution
// specific, so mismatched dimensions are a hard error.
TestOutcome run_test(const rngkit::DataCloud& x, const rngkit::DataCloud& y,
                     const kernelgraph::KernelFn& kernel, const CalibrationTable& calib);

struct PowerPoint {
    int n = 0, p1 = 0, p2 = 0;
    double power = 0.0;
    double null_rejection_rate = 0.0;
};

struct PowerSettings {
    double alpha = 0.95;
    int L0 = 80;
    int B_calib = 500;
    int B_power = 200;
};

// For each (n, p1, p2): calibrate on nulls, then measure the rejection
// frequency over correlated pairs drawn from the rank-one alternative.
std::vector<PowerPoint> power_curve(const std::vector<std::array<int, 3>>& settings,
                                    const kernelgraph::KernelFn& kernel,
                                    const PowerSettings& ps, const rngkit::SeedSpec& seed);

// |Im lambda_i| / |Re lambda_i| for i = 1..k; infinity marks a zero real part.
std::vector<double> imaginary_ratio_profile(const spectra::Spectrum& spec, int k);

// Shared helper: spectrum of S_xy for a data pair.
spectra::Spectrum ncca_spectrum(const rngkit::DataCloud& x, const rngkit::DataCloud& y,
                                const kernelgraph::KernelFn& kernel);

}  // namespace fusionspec::inference
