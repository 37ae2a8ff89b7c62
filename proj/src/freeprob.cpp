#include "fusionspec/freeprob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fusionspec/errors.hpp"

namespace fusionspec::freeprob {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMassTol = 1e-10;
constexpr double kDensityFloor = 1e-6;

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature.

double simpson_rule(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double fa,
                            double b, double fb, double m, double fm, double whole,
                            double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson_rule(a, fa, m, fm, flm);
    const double right = simpson_rule(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, simpson_rule(a, fa, b, fb, fm),
                                tol, 40);
}

// ---------------------------------------------------------------------------
// Marchenko-Pastur internals. All in the c = n/p convention.

struct MpGeometry {
    double lam_minus = 0.0;
    double lam_plus = 0.0;
    double atom_mass = 0.0;       // at `shift`
    double continuous_mass = 1.0;
};

MpGeometry mp_geometry(const MpLaw& mp) {
    MpGeometry g;
    const double rc = std::sqrt(mp.c);
    g.lam_minus = mp.shift + mp.sigma2 * (1.0 - rc) * (1.0 - rc);
    g.lam_plus = mp.shift + mp.sigma2 * (1.0 + rc) * (1.0 + rc);
    g.atom_mass = mp.c > 1.0 ? 1.0 - 1.0 / mp.c : 0.0;
    g.continuous_mass = 1.0 - g.atom_mass;
    return g;
}

double mp_density(const MpLaw& mp, double x) {
    const MpGeometry g = mp_geometry(mp);
    if (x <= g.lam_minus || x >= g.lam_plus) return 0.0;
    return std::sqrt((g.lam_plus - x) * (x - g.lam_minus)) /
           (2.0 * kPi * mp.sigma2 * mp.c * (x - mp.shift));
}

// Integral of the continuous density over [a, b] with square-root edge
// substitutions so the integrand stays smooth for adaptive Simpson.
double mp_cont_integral(const MpLaw& mp, double a, double b) {
    const MpGeometry g = mp_geometry(mp);
    a = std::max(a, g.lam_minus);
    b = std::min(b, g.lam_plus);
    if (!(b > a)) return 0.0;
    const double mid = 0.5 * (g.lam_minus + g.lam_plus);
    double total = 0.0;
    if (a < std::min(b, mid)) {
        // x = lam_minus + v^2
        const double v_lo = std::sqrt(a - g.lam_minus);
        const double v_hi = std::sqrt(std::min(b, mid) - g.lam_minus);
        auto f = [&](double v) { return 2.0 * v * mp_density(mp, g.lam_minus + v * v); };
        total += adaptive_simpson(f, v_lo, v_hi);
    }
    if (b > std::max(a, mid)) {
        // x = lam_plus - u^2
        const double u_lo = std::sqrt(g.lam_plus - b);
        const double u_hi = std::sqrt(g.lam_plus - std::max(a, mid));
        auto f = [&](double u) { return 2.0 * u * mp_density(mp, g.lam_plus - u * u); };
        total += adaptive_simpson(f, u_lo, u_hi);
    }
    return total;
}

double mp_tail(const MpLaw& mp, double x) {
    const MpGeometry g = mp_geometry(mp);
    double tail = mp_cont_integral(mp, x, g.lam_plus);
    if (x <= mp.shift) tail += g.atom_mass;
    return tail;
}

// Closed-form Stieltjes transform of the standardized MP law (sigma2 = 1,
// shift = 0): c w m^2 + (w - 1 + c) m + 1 = 0.
Complex mp_stieltjes_std(const MpLaw& mp, Complex w) {
    const double c = mp.c;
    const Complex a = w * c;
    const Complex b = w - 1.0 + c;
    const Complex disc = std::sqrt(b * b - 4.0 * a);
    // Stable split: q and 1/(a q) are the two roots of a m^2 + b m + 1.
    const Complex q = (std::real(std::conj(b) * disc) >= 0.0) ? (-b - disc) * 0.5
                                                              : (-b + disc) * 0.5;
    Complex r1 = q / a;
    Complex r2 = (q != 0.0) ? 1.0 / q : (-b - q) / a;
    if (w.imag() > 0.0) return (r1.imag() > 0.0) ? r1 : r2;
    if (w.imag() < 0.0) return (r1.imag() < 0.0) ? r1 : r2;
    // Real w below the support: m is real and bounded; the spurious root is
    // the one of larger magnitude (they never collide off the edges).
    if (r1.real() > 0.0 && r2.real() <= 0.0) return r1;
    if (r2.real() > 0.0 && r1.real() <= 0.0) return r2;
    return std::abs(r1) <= std::abs(r2) ? r1 : r2;
}

Complex mp_stieltjes(const MpLaw& mp, Complex z) {
    const Complex w = (z - mp.shift) / mp.sigma2;
    return mp_stieltjes_std(mp, w) / mp.sigma2;
}

// ---------------------------------------------------------------------------
// Grid internals: piecewise-linear density integrated exactly per segment.

Complex grid_segment_stieltjes(double x1, double r1, double x2, double r2, Complex z) {
    const double s = (r2 - r1) / (x2 - x1);
    const Complex u1 = x1 - z, u2 = x2 - z;
    return s * (u2 - u1) + (r1 + s * (z - Complex(x1))) * (std::log(u2) - std::log(u1));
}

double grid_cell_mass(const GridDensity& g, size_t k) {
    return 0.5 * (g.density[k] + g.density[k + 1]) * (g.x[k + 1] - g.x[k]);
}

double grid_max_density(const GridDensity& g) {
    double m = 0.0;
    for (double d : g.density) m = std::max(m, d);
    return m;
}

double grid_tail(const GridDensity& g, double x) {
    double tail = 0.0;
    for (const auto& [pos, w] : g.atoms)
        if (pos >= x) tail += w;
    const size_t nseg = g.x.size() - 1;
    for (size_t k = 0; k < nseg; ++k) {
        if (g.x[k + 1] <= x) continue;
        if (g.x[k] >= x) {
            tail += grid_cell_mass(g, k);
        } else {
            const double s = (g.density[k + 1] - g.density[k]) / (g.x[k + 1] - g.x[k]);
            const double rho_x = g.density[k] + s * (x - g.x[k]);
            tail += 0.5 * (rho_x + g.density[k + 1]) * (g.x[k + 1] - x);
        }
    }
    return tail;
}

// ---------------------------------------------------------------------------

double measure_total_mass(const std::variant<MpLaw, DiscreteAtoms, GridDensity>& rep) {
    if (std::holds_alternative<MpLaw>(rep)) return 1.0;
    if (const auto* d = std::get_if<DiscreteAtoms>(&rep))
        return std::accumulate(d->weights.begin(), d->weights.end(), 0.0);
    const auto& g = std::get<GridDensity>(rep);
    double mass = 0.0;
    for (size_t k = 0; k + 1 < g.x.size(); ++k) mass += grid_cell_mass(g, k);
    for (const auto& [pos, w] : g.atoms) mass += w;
    return mass;
}

}  // namespace

// ---------------------------------------------------------------------------
// SpectralMeasure

SpectralMeasure::SpectralMeasure(std::variant<MpLaw, DiscreteAtoms, GridDensity> rep)
    : rep_(std::move(rep)) {}

SpectralMeasure SpectralMeasure::mp(double c, double sigma2, double shift) {
    if (!(c > 0.0) || !(sigma2 > 0.0))
        throw contract_error("SpectralMeasure::mp: need c > 0 and sigma2 > 0");
    return SpectralMeasure(MpLaw{c, sigma2, shift});
}

SpectralMeasure SpectralMeasure::dirac(double a) {
    return SpectralMeasure(DiscreteAtoms{{a}, {1.0}});
}

SpectralMeasure SpectralMeasure::atoms(std::vector<double> positions,
                                       std::vector<double> weights) {
    if (positions.empty() || positions.size() != weights.size())
        throw contract_error("SpectralMeasure::atoms: size mismatch");
    double mass = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw contract_error("SpectralMeasure::atoms: weights must be positive");
        mass += w;
    }
    if (std::abs(mass - 1.0) > 1e-9)
        throw contract_error("SpectralMeasure::atoms: weights must sum to 1");
    return SpectralMeasure(DiscreteAtoms{std::move(positions), std::move(weights)});
}

SpectralMeasure SpectralMeasure::grid(std::vector<double> x, std::vector<double> density,
                                      std::vector<std::pair<double, double>> atoms) {
    if (x.size() < 2 || x.size() != density.size())
        throw contract_error("SpectralMeasure::grid: bad grid");
    for (size_t k = 0; k + 1 < x.size(); ++k)
        if (!(x[k + 1] > x[k])) throw contract_error("SpectralMeasure::grid: knots not increasing");
    for (double d : density)
        if (d < 0.0 || !std::isfinite(d))
            throw contract_error("SpectralMeasure::grid: density must be finite and >= 0");
    GridDensity g{std::move(x), std::move(density), std::move(atoms)};
    const double mass = measure_total_mass(g);
    if (std::abs(mass - 1.0) > 1e-6)
        throw contract_error("SpectralMeasure::grid: total mass " + std::to_string(mass) +
                             " not within 1e-6 of 1");
    return SpectralMeasure(std::move(g));
}

SpectralMeasure SpectralMeasure::empirical(const std::vector<double>& samples) {
    if (samples.empty()) throw contract_error("SpectralMeasure::empirical: no samples");
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double w = 1.0 / static_cast<double>(sorted.size());
    // Merge duplicates so atom positions stay strictly increasing.
    std::vector<double> pos;
    std::vector<double> wts;
    for (double v : sorted) {
        if (!pos.empty() && v == pos.back())
            wts.back() += w;
        else {
            pos.push_back(v);
            wts.push_back(w);
        }
    }
    return SpectralMeasure(DiscreteAtoms{std::move(pos), std::move(wts)});
}

Complex SpectralMeasure::stieltjes(Complex z) const {
    if (!(z.imag() > 0.0)) throw transform_domain_error("stieltjes: need Im z > 0");
    return stieltjes_any(z);
}

Complex SpectralMeasure::stieltjes_any(Complex z) const {
    if (z.imag() < 0.0) return std::conj(stieltjes_any(std::conj(z)));
    if (z.imag() == 0.0 && z.real() >= support_lower() - 1e-14)
        throw transform_domain_error("stieltjes: real evaluation requires z below the support");
    if (const auto* mp = std::get_if<MpLaw>(&rep_)) return mp_stieltjes(*mp, z);
    if (const auto* d = std::get_if<DiscreteAtoms>(&rep_)) {
        Complex acc = 0.0;
        for (size_t k = 0; k < d->atoms.size(); ++k)
            acc += d->weights[k] / (Complex(d->atoms[k]) - z);
        return acc;
    }
    const auto& g = std::get<GridDensity>(rep_);
    Complex acc = 0.0;
    for (size_t k = 0; k + 1 < g.x.size(); ++k) {
        if (g.density[k] == 0.0 && g.density[k + 1] == 0.0) continue;
        acc += grid_segment_stieltjes(g.x[k], g.density[k], g.x[k + 1], g.density[k + 1], z);
    }
    Complex atom_acc = 0.0;
    for (const auto& [pos, w] : g.atoms) atom_acc += w / (Complex(pos) - z);
    return acc + atom_acc;
}

double SpectralMeasure::support_lower() const {
    if (const auto* mp = std::get_if<MpLaw>(&rep_)) {
        const MpGeometry g = mp_geometry(*mp);
        return g.atom_mass > 0.0 ? mp->shift : g.lam_minus;
    }
    if (const auto* d = std::get_if<DiscreteAtoms>(&rep_))
        return *std::min_element(d->atoms.begin(), d->atoms.end());
    const auto& g = std::get<GridDensity>(rep_);
    double lo = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k + 1 < g.x.size(); ++k)
        if (g.density[k] > 0.0 || g.density[k + 1] > 0.0) {
            lo = g.x[k];
            break;
        }
    for (const auto& [pos, w] : g.atoms)
        if (w > 0.0) lo = std::min(lo, pos);
    return lo;
}

double SpectralMeasure::support_upper() const {
    if (const auto* mp = std::get_if<MpLaw>(&rep_)) return mp_geometry(*mp).lam_plus;
    if (const auto* d = std::get_if<DiscreteAtoms>(&rep_))
        return *std::max_element(d->atoms.begin(), d->atoms.end());
    const auto& g = std::get<GridDensity>(rep_);
    double hi = -std::numeric_limits<double>::infinity();
    for (size_t k = g.x.size(); k-- > 1;)
        if (g.density[k] > 0.0 || g.density[k - 1] > 0.0) {
            hi = g.x[k];
            break;
        }
    for (const auto& [pos, w] : g.atoms)
        if (w > 0.0) hi = std::max(hi, pos);
    return hi;
}

bool SpectralMeasure::positive_support() const { return support_lower() > 0.0; }

double SpectralMeasure::mass_at(double point) const {
    if (const auto* mp = std::get_if<MpLaw>(&rep_)) {
        const MpGeometry g = mp_geometry(*mp);
        return (point == mp->shift) ? g.atom_mass : 0.0;
    }
    if (const auto* d = std::get_if<DiscreteAtoms>(&rep_)) {
        double m = 0.0;
        for (size_t k = 0; k < d->atoms.size(); ++k)
            if (d->atoms[k] == point) m += d->weights[k];
        return m;
    }
    const auto& g = std::get<GridDensity>(rep_);
    double m = 0.0;
    for (const auto& [pos, w] : g.atoms)
        if (pos == point) m += w;
    return m;
}

double SpectralMeasure::tail_mass(double x) const {
    if (const auto* mp = std::get_if<MpLaw>(&rep_)) return mp_tail(*mp, x);
    if (const auto* d = std::get_if<DiscreteAtoms>(&rep_)) {
        double tail = 0.0;
        for (size_t k = 0; k < d->atoms.size(); ++k)
            if (d->atoms[k] >= x) tail += d->weights[k];
        return tail;
    }
    return grid_tail(std::get<GridDensity>(rep_), x);
}

QuantileResult SpectralMeasure::typical_location_flagged(int j, int n) const {
    if (j < 1 || j > n) throw contract_error("typical_location: need 1 <= j <= n");
    const double target = (j - 0.5) / n;

    if (const auto* mp = std::get_if<MpLaw>(&rep_)) {
        const MpGeometry g = mp_geometry(*mp);
        if (target > g.continuous_mass + kMassTol) return {mp->shift, false};
        double lo = g.lam_minus, hi = g.lam_plus;
        // Bisection on the continuous tail; ~50 rounds reach 1e-10 in mass.
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double tail = mp_cont_integral(*mp, mid, g.lam_plus);
            if (std::abs(tail - target) <= kMassTol * 0.5) return {mid, false};
            (tail > target ? lo : hi) = mid;
        }
        return {0.5 * (lo + hi), false};
    }

    if (const auto* d = std::get_if<DiscreteAtoms>(&rep_)) {
        // Atoms ascending; sweep from the top until the tail reaches target.
        double acc = 0.0;
        for (size_t k = d->atoms.size(); k-- > 0;) {
            acc += d->weights[k];
            if (acc >= target - kMassTol) return {d->atoms[k], false};
        }
        return {d->atoms.front(), false};
    }

    const auto& g = std::get<GridDensity>(rep_);
    if (!g.atoms.empty())
        throw transform_domain_error("typical_location: grid measures with atoms unsupported");
    const double gap_eps = 1e-12 * std::max(grid_max_density(g), 1.0);
    auto flat = [&](size_t cell) {
        return (g.density[cell] <= gap_eps && g.density[cell + 1] <= gap_eps) ||
               grid_cell_mass(g, cell) <= kMassTol;
    };
    double acc = 0.0;
    for (size_t k = g.x.size() - 1; k-- > 0;) {
        const double cell = grid_cell_mass(g, k);
        if (acc + cell >= target - 1e-15) {
            if (flat(k)) {
                // Landed in a zero-density stretch: report its upper endpoint.
                size_t top = k + 1;
                while (top + 1 < g.x.size() && g.density[top] <= gap_eps) ++top;
                return {g.x[top], true};
            }
            const double want = target - acc;  // mass of [x, x_{k+1}]
            const double width = g.x[k + 1] - g.x[k];
            const double s = (g.density[k + 1] - g.density[k]) / width;
            const double r2 = g.density[k + 1];
            // Solve r2*h - s*h^2/2 = want for h = x_{k+1} - x in [0, width].
            double h;
            if (std::abs(s) < 1e-300) {
                h = (r2 > 0.0) ? want / r2 : width;
            } else {
                const double disc = r2 * r2 - 2.0 * s * want;
                h = (r2 - std::sqrt(std::max(disc, 0.0))) / s;
                if (!(h >= 0.0 && h <= width)) h = want / std::max(r2, gap_eps);
            }
            // Consuming the whole cell with only a zero-density stretch below
            // means the quantile is ambiguous across the gap; this knot is the
            // gap's upper endpoint.
            const bool at_bottom = h >= width - 1e-12 * std::max(width, 1.0);
            const bool gap_below = k > 0 && flat(k - 1);
            if (at_bottom && gap_below) return {g.x[k], true};
            return {g.x[k + 1] - std::min(std::max(h, 0.0), width), false};
        }
        acc += cell;
    }
    return {g.x.front(), acc + 1e-15 < target};
}

// ---------------------------------------------------------------------------
// Transforms

Complex eta_transform(const SpectralMeasure& mu, Complex z) {
    if (z == 0.0) throw transform_domain_error("eta_transform: z = 0");
    return mu.stieltjes_any(-1.0 / z) / z;
}

Complex m_transform(const SpectralMeasure& mu, Complex z) {
    const Complex m = mu.stieltjes_any(z);
    return z * m / (1.0 + z * m);
}

namespace {

double eta_real(const std::function<Complex(Complex)>& m_fn, double w) {
    return (m_fn(Complex(-1.0 / w, 0.0)) / w).real();
}

double s_transform_impl(const std::function<Complex(Complex)>& m_fn, double z) {
    if (!(z > -1.0 && z < 0.0))
        throw transform_domain_error("s_transform: z must lie in (-1, 0)");
    const double target = z + 1.0;
    double lo = 1e-14, hi = 1e14;
    if (!(eta_real(m_fn, lo) > target) || !(eta_real(m_fn, hi) < target))
        throw transform_domain_error("s_transform: eta inversion target out of range");
    for (int it = 0; it < 220; ++it) {
        const double mid = std::sqrt(lo * hi);
        (eta_real(m_fn, mid) > target ? lo : hi) = mid;
    }
    const double w = std::sqrt(lo * hi);
    return -(z + 1.0) / z * w;
}

}  // namespace

double s_transform(const SpectralMeasure& mu, double z) {
    if (!mu.positive_support())
        throw transform_domain_error("s_transform: measure must have positive support");
    return s_transform_impl([&mu](Complex zz) { return mu.stieltjes_any(zz); }, z);
}

double s_transform_from_m(const std::function<Complex(Complex)>& m_fn, double z) {
    return s_transform_impl(m_fn, z);
}

double r_transform(const SpectralMeasure& mu, double z) {
    if (!(z < 0.0)) throw transform_domain_error("r_transform: implemented for z < 0");
    const double target = -z;  // solve m(x) = -z on the ray below the support
    const double lo_support = mu.support_lower();
    const double scale = std::max(std::abs(lo_support), 1.0);
    double lo = lo_support - 1e18 * scale;
    double hi = lo_support - 1e-13 * scale;
    auto m_real = [&](double x) { return mu.stieltjes_any(Complex(x, 0.0)).real(); };
    if (m_real(hi) < target) {
        // Walk toward the edge in case the transform stays bounded there.
        bool ok = false;
        for (int k = 0; k < 40; ++k) {
            hi = lo_support - (lo_support - hi) * 0.25;
            if (m_real(hi) >= target) {
                ok = true;
                break;
            }
        }
        if (!ok) throw transform_domain_error("r_transform: -z above the reachable range");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (m_real(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) + 1.0 / z;
}

TransformValues transforms(const SpectralMeasure& mu, Complex z) {
    TransformValues out;
    out.eta = eta_transform(mu, z);
    out.M = m_transform(mu, z);
    if (z.imag() == 0.0) {
        try {
            out.S_at = s_transform(mu, z.real());
        } catch (const numeric_error&) {
        }
        try {
            out.R_at = r_transform(mu, z.real());
        } catch (const numeric_error&) {
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Subordination solvers

namespace {

Complex measure_m_transform(const SpectralMeasure& mu, Complex z) {
    const Complex m = mu.stieltjes_any(z);
    return z * m / (1.0 + z * m);
}

}  // namespace

SubordinationResult free_mult_convolve(const SpectralMeasure& a, const SpectralMeasure& b,
                                       Complex z, const SolveOptions& opts) {
    if (!a.positive_support() || !b.positive_support())
        throw transform_domain_error("free_mult_convolve: measures must be supported on (0, inf)");
    if (!(z.imag() > 0.0)) throw transform_domain_error("free_mult_convolve: need Im z > 0");

    Complex o1 = z, o2 = z;
    const double d = opts.damping;
    double defect = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        o1 = (1.0 - d) * o1 + d * (z * measure_m_transform(a, o2) / o2);
        o2 = (1.0 - d) * o2 + d * (z * measure_m_transform(b, o1) / o1);
        const double d1 = std::abs(o1 - z * measure_m_transform(a, o2) / o2);
        const double d2 = std::abs(o2 - z * measure_m_transform(b, o1) / o1);
        defect = std::max(d1, d2);
        if (defect < opts.tolerance) break;
    }
    if (defect >= opts.tolerance && defect > opts.accept_residual)
        throw solver_error("free_mult_convolve: no convergence after " +
                           std::to_string(opts.max_iterations) +
                           " iterations, residual " + std::to_string(defect));
    const Complex big_m = measure_m_transform(a, o2);
    SubordinationResult res;
    res.omega_a = o1;
    res.omega_b = o2;
    res.m_conv = big_m / (z * (1.0 - big_m));
    res.iterations = it;
    res.residual = defect;

#ifdef FUSIONSPEC_DEBUG_CHECKS
    // Cross-check S_{a⊠b} = S_a S_b at one interior point per call.
    static thread_local bool checking = false;
    if (!checking) {
        checking = true;
        try {
            const double z0 = -0.5;
            SolveOptions relaxed = opts;
            relaxed.accept_residual = 1e-9;
            auto m_fn = [&](Complex zz) {
                return free_mult_convolve(a, b, Complex(zz.real(), zz.imag() + 1e-9), relaxed)
                    .m_conv;
            };
            const double lhs = s_transform_from_m(m_fn, z0);
            const double rhs = s_transform(a, z0) * s_transform(b, z0);
            checking = false;
            if (std::abs(lhs - rhs) > 1e-6 * std::max(1.0, std::abs(rhs)))
                throw numeric_error("free_mult_convolve: S-transform identity violated");
        } catch (const transform_domain_error&) {
            checking = false;  // identity not evaluable for this pair; skip
        } catch (...) {
            checking = false;
            throw;
        }
    }
#endif
    return res;
}

SubordinationResult free_add_convolve(const SpectralMeasure& a, const SpectralMeasure& b,
                                      Complex z, const SolveOptions& opts) {
    if (!(z.imag() > 0.0)) throw transform_domain_error("free_add_convolve: need Im z > 0");
    auto Fa = [&](Complex w) { return -1.0 / a.stieltjes_any(w); };
    auto Fb = [&](Complex w) { return -1.0 / b.stieltjes_any(w); };

    Complex o1 = z, o2 = z;
    const double d = opts.damping;
    double defect = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        o1 = (1.0 - d) * o1 + d * (Fa(o2) + z - o2);
        o2 = (1.0 - d) * o2 + d * (Fb(o1) + z - o1);
        const double d1 = std::abs(Fa(o2) + z - o2 - o1);
        const double d2 = std::abs(Fb(o1) + z - o1 - o2);
        defect = std::max(d1, d2);
        if (defect < opts.tolerance) break;
    }
    if (defect >= opts.tolerance && defect > opts.accept_residual)
        throw solver_error("free_add_convolve: no convergence after " +
                           std::to_string(opts.max_iterations) + " iterations, residual " +
                           std::to_string(defect));
    SubordinationResult res;
    res.omega_a = o1;
    res.omega_b = o2;
    res.m_conv = a.stieltjes_any(o2);
    res.iterations = it;
    res.residual = defect;
    return res;
}

// ---------------------------------------------------------------------------
// Stieltjes inversion

namespace {

double richardson_density(const std::function<Complex(Complex)>& m_fn, double x, double eta) {
    const double d1 = m_fn(Complex(x, eta)).imag();
    const double d2 = m_fn(Complex(x, 0.5 * eta)).imag();
    return std::max((2.0 * d2 - d1) / kPi, 0.0);
}

}  // namespace

DensityRecovery invert_to_density(const std::function<Complex(Complex)>& m_fn, double lo,
                                  double hi, double eta, int grid_points) {
    if (!(eta >= 1e-7 && eta <= 1e-3))
        throw contract_error("invert_to_density: eta must lie in [1e-7, 1e-3]");
    if (!(hi > lo) || grid_points < 16)
        throw contract_error("invert_to_density: bad bracket or grid");

    std::vector<double> xs(static_cast<size_t>(grid_points));
    std::vector<double> rho(static_cast<size_t>(grid_points));
    const double step = (hi - lo) / (grid_points - 1);
    for (int k = 0; k < grid_points; ++k) {
        xs[static_cast<size_t>(k)] = lo + step * k;
        rho[static_cast<size_t>(k)] = richardson_density(m_fn, lo + step * k, eta);
    }

    double mass = 0.0;
    for (int k = 0; k + 1 < grid_points; ++k)
        mass += 0.5 * (rho[static_cast<size_t>(k)] + rho[static_cast<size_t>(k) + 1]) * step;
    if (!(mass > 0.0)) throw inversion_quality_error("invert_to_density: zero recovered mass");
    const double renorm = 1.0 / mass;
    if (renorm < 0.99 || renorm > 1.01)
        throw inversion_quality_error("invert_to_density: renormalization factor " +
                                      std::to_string(renorm) + " outside [0.99, 1.01]");
    for (double& r : rho) r *= renorm;

    DensityRecovery out{SpectralMeasure::grid(xs, rho), renorm, lo, hi};
    for (int k = 0; k < grid_points; ++k)
        if (rho[static_cast<size_t>(k)] > kDensityFloor) {
            out.edge_lower = xs[static_cast<size_t>(k)];
            break;
        }
    for (int k = grid_points; k-- > 0;)
        if (rho[static_cast<size_t>(k)] > kDensityFloor) {
            out.edge_upper = xs[static_cast<size_t>(k)];
            break;
        }
    return out;
}

double refine_edge(const std::function<Complex(Complex)>& m_fn, double eta, double x_outside,
                   double x_inside) {
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (x_outside + x_inside);
        if (richardson_density(m_fn, mid, eta) > kDensityFloor)
            x_inside = mid;
        else
            x_outside = mid;
    }
    return 0.5 * (x_outside + x_inside);
}

// ---------------------------------------------------------------------------

std::pair<Eigen::VectorXd, Eigen::VectorXd> sigma_matrices(const SpectralMeasure& nu_x,
                                                           const SpectralMeasure& nu_y,
                                                           int n, int p1, int p2,
                                                           double varsigma) {
    if (n < 1 || p1 < 1 || p2 < 1) throw dimension_error("sigma_matrices: bad dimensions");
    auto fill = [&](const SpectralMeasure& nu, int p) {
        Eigen::VectorXd sigma(n);
        const int head = std::min(n, p);
        for (int j = 1; j <= head; ++j) sigma(j - 1) = nu.typical_location(j, n);
        for (int j = head; j < n; ++j) sigma(j) = varsigma;
        return sigma;
    };
    return {fill(nu_x, p1), fill(nu_y, p2)};
}

}  // namespace fusionspec::freeprob
