#include "fusionspec/rngkit.hpp"

#include <cmath>

#include "fusionspec/errors.hpp"
#include "fusionspec/parallel.hpp"
#include "fusionspec/spectra.hpp"

namespace fusionspec::rngkit {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

std::uint64_t derive_key(const SeedSpec& s) {
    std::uint64_t k = mix64(s.master_seed + kGamma);
    k = mix64(k ^ (s.stream_id + 0xD6E8FEB86659FD93ull));
    k = mix64(k ^ (static_cast<std::uint64_t>(s.purpose) + 0xA5CB3B2C0A5CB3B3ull));
    return k;
}

}  // namespace

CounterRng::CounterRng(const SeedSpec& seed) : key_(derive_key(seed)) {}

std::uint64_t CounterRng::u64_at(std::uint64_t i) const {
    return mix64(key_ + (i + 1) * kGamma);
}

double CounterRng::unit_at(std::uint64_t i) const {
    return (static_cast<double>(u64_at(i) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::gaussian_at(std::uint64_t i) const {
    return inverse_normal_cdf(unit_at(i));
}

// Wichura's PPND16 (algorithm AS 241).
double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw contract_error("inverse_normal_cdf: p outside (0,1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                      2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                    3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                  4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                      1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                    6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                  2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                    2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                  5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                      1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                    1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                  5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -value : value;
}

DataCloud sample_gaussian_cloud(int n, int p, const SeedSpec& seed) {
    if (n < 2 || p < 1) throw dimension_error("sample_gaussian_cloud: need n >= 2, p >= 1");
    CounterRng rng(seed);
    DataCloud cloud;
    cloud.p = p;
    cloud.n = n;
    cloud.data.resize(p, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(p));
    double* ptr = cloud.data.data();  // column major, index j*p + i
    parallel_for(0, static_cast<std::int64_t>(p) * n,
                 [&](std::int64_t idx) { ptr[idx] = rng.gaussian_at(idx) * scale; });
    return cloud;
}

Eigen::MatrixXd sample_haar_orthogonal(int n, const SeedSpec& seed) {
    if (n < 1) throw dimension_error("sample_haar_orthogonal: need n >= 1");
    CounterRng rng(seed);
    Eigen::MatrixXd g(n, n);
    double* ptr = g.data();
    parallel_for(0, static_cast<std::int64_t>(n) * n,
                 [&](std::int64_t idx) { ptr[idx] = rng.gaussian_at(idx); });
    return spectra::qr_orthonormal_haar(g);
}

std::pair<DataCloud, DataCloud> sample_alternative_pair(int n, int p1, int p2,
                                                        const SeedSpec& seed) {
    if (n < 2 || p1 < 1 || p2 < 1)
        throw dimension_error("sample_alternative_pair: bad dimensions");
    DataCloud y = sample_gaussian_cloud(n, p2, seed.with_purpose(Purpose::YCloud));
    DataCloud x;
    x.p = p1;
    x.n = n;
    x.data = Eigen::MatrixXd::Zero(p1, n);
    const double coeff =
        0.25 * y.data.col(0).sum() / std::sqrt(static_cast<double>(p1) * p2);
    x.data.col(0).setConstant(coeff);
    return {std::move(x), std::move(y)};
}

}  // namespace fusionspec::rngkit
