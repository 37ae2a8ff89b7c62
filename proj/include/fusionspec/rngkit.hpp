#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

namespace fusionspec::rngkit {

enum class Purpose : std::uint32_t { XCloud = 0, YCloud = 1, Haar = 2, Other = 3 };

// Addresses one logical random stream. Identical specs reproduce identical
// output regardless of thread count or call order; distinct stream ids give
// statistically independent streams.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;
    Purpose purpose = Purpose::Other;

    SeedSpec with_stream(std::uint64_t sid) const { return {master_seed, sid, purpose}; }
    SeedSpec with_purpose(Purpose p) const { return {master_seed, stream_id, p}; }
};

// Counter-based generator: output i is a mix of (derived key) + i * gamma,
// so any index is addressable in O(1) and parallel fills stay deterministic.
class CounterRng {
  public:
    explicit CounterRng(const SeedSpec& seed);

    std::uint64_t u64_at(std::uint64_t i) const;
    // Uniform on the open interval (0, 1).
    double unit_at(std::uint64_t i) const;
    // Standard normal via inverse CDF; consumes exactly one counter slot.
    double gaussian_at(std::uint64_t i) const;

    std::uint64_t next_u64() { return u64_at(counter_++); }
    double next_unit() { return unit_at(counter_++); }
    double next_gaussian() { return gaussian_at(counter_++); }

  private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

// Inverse of the standard normal CDF, good to ~1e-15 relative accuracy.
double inverse_normal_cdf(double p);

// n samples in R^p, columns x_i; c = n/p.
struct DataCloud {
    Eigen::MatrixXd data;  // p x n
    int p = 0;
    int n = 0;

    double aspect_ratio() const { return static_cast<double>(n) / p; }
};

// p x n matrix with i.i.d. N(0, 1/p) entries, E||x_i||^2 = 1.
DataCloud sample_gaussian_cloud(int n, int p, const SeedSpec& seed);

// Haar-distributed orthogonal matrix: QR of an i.i.d. Gaussian matrix with
// the sign of diag(R) folded into Q. The sign fix is required for Haar-ness.
Eigen::MatrixXd sample_haar_orthogonal(int n, const SeedSpec& seed);

// Correlated pair: Y is a null cloud, X^T = A Y^T B' with A = 0.5 e1 e1^T and
// B' the p2 x p1 all-ones matrix scaled by 0.5/sqrt(p1 p2). Every column of X
// except the first is zero and the first is a multiple of the all-ones vector.
std::pair<DataCloud, DataCloud> sample_alternative_pair(int n, int p1, int p2,
                                                        const SeedSpec& seed);

}  // namespace fusionspec::rngkit
