#include <CLI11.hpp>

#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "fusionspec/csvio.hpp"
#include "fusionspec/errors.hpp"
#include "fusionspec/freeprob.hpp"
#include "fusionspec/fusion.hpp"
#include "fusionspec/inference.hpp"
#include "fusionspec/jsonio.hpp"
#include "fusionspec/kernelgraph.hpp"
#include "fusionspec/parallel.hpp"
#include "fusionspec/rngkit.hpp"
#include "fusionspec/spectra.hpp"
#include "fusionspec/verify.hpp"

namespace fs = fusionspec;
namespace stdfs = std::filesystem;

namespace {

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOpts {
    std::uint64_t seed = 0;
    std::string out;
    std::string kernel = "gaussian";
    double sigma = 1.0;
    int threads = 0;
};

fs::kernelgraph::KernelFn make_kernel(const CommonOpts& c) {
    if (c.kernel != "gaussian")
        throw usage_error("unsupported kernel '" + c.kernel + "' (available: gaussian)");
    return fs::kernelgraph::gaussian_kernel(c.sigma);
}

void add_common(CLI::App* cmd, CommonOpts& c) {
    std::uint64_t default_seed = 0;
    if (const char* env = std::getenv("FUSIONSPEC_SEED")) {
        try {
            default_seed = std::stoull(env);
        } catch (const std::exception&) {
            default_seed = 0;
        }
    }
    c.seed = default_seed;
    cmd->add_option("--seed", c.seed, "Master seed (FUSIONSPEC_SEED overrides the default)");
    cmd->add_option("--out", c.out, "Output path (stdout when omitted)");
    cmd->add_option("--kernel", c.kernel, "Kernel family")->default_str("gaussian");
    cmd->add_option("--sigma", c.sigma, "Kernel bandwidth")->default_val(1.0);
    cmd->add_option("--threads", c.threads, "Cap on worker threads (default: all cores)");
}

void apply_threads(const CommonOpts& c) {
    if (c.threads > 0) fs::set_threads(c.threads);
}

// Writes `text` to the file at path, or to stdout when path is empty.
void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw fs::io_error("cannot open for writing: " + path);
    out << text;
}

// ---------------------------------------------------------------------------
// measure specs: mp:c=..,s2=..[,shift=..] | atoms:@file | atoms:<spec> | grid:@file

fs::freeprob::SpectralMeasure parse_measure(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw usage_error("measure spec '" + spec + "' lacks a kind prefix");
    const std::string kind = spec.substr(0, colon);
    const std::string body = spec.substr(colon + 1);

    if (kind == "mp") {
        double c = 0.0, s2 = 0.0, shift = 0.0;
        bool have_c = false, have_s2 = false;
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw usage_error("bad mp parameter '" + item + "' in '" + spec + "'");
            const std::string key = item.substr(0, eq);
            double value;
            try {
                value = std::stod(item.substr(eq + 1));
            } catch (const std::exception&) {
                throw usage_error("bad numeric value in '" + item + "'");
            }
            if (key == "c") {
                c = value;
                have_c = true;
            } else if (key == "s2") {
                s2 = value;
                have_s2 = true;
            } else if (key == "shift") {
                shift = value;
            } else {
                throw usage_error("unknown mp key '" + key + "' in '" + spec + "'");
            }
        }
        if (!have_c || !have_s2) throw usage_error("mp spec needs c= and s2=: '" + spec + "'");
        return fs::freeprob::SpectralMeasure::mp(c, s2, shift);
    }

    if (kind == "atoms") {
        if (!body.empty() && body[0] == '@') {
            const auto m = fs::csvio::read_matrix_file(body.substr(1));
            if (m.cols() == 1) {
                std::vector<double> pos(m.rows());
                for (Eigen::Index i = 0; i < m.rows(); ++i) pos[static_cast<size_t>(i)] = m(i, 0);
                return fs::freeprob::SpectralMeasure::empirical(pos);
            }
            if (m.cols() == 2) {
                std::vector<double> pos(m.rows()), w(m.rows());
                for (Eigen::Index i = 0; i < m.rows(); ++i) {
                    pos[static_cast<size_t>(i)] = m(i, 0);
                    w[static_cast<size_t>(i)] = m(i, 1);
                }
                return fs::freeprob::SpectralMeasure::atoms(pos, w);
            }
            throw usage_error("atoms file must have 1 or 2 columns: '" + body + "'");
        }
        // Inline forms: a single delta "δ<v>"/"d<v>" or "v=w,v=w,...".
        std::string text = body;
        if (text.rfind("\xce\xb4", 0) == 0) text = "d" + text.substr(2);
        if (!text.empty() && text[0] == 'd') {
            try {
                return fs::freeprob::SpectralMeasure::dirac(std::stod(text.substr(1)));
            } catch (const std::exception&) {
                throw usage_error("bad delta spec '" + body + "'");
            }
        }
        std::vector<double> pos, w;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            try {
                if (eq == std::string::npos) {
                    pos.push_back(std::stod(item));
                    w.push_back(1.0);
                } else {
                    pos.push_back(std::stod(item.substr(0, eq)));
                    w.push_back(std::stod(item.substr(eq + 1)));
                }
            } catch (const std::exception&) {
                throw usage_error("bad atom '" + item + "' in '" + spec + "'");
            }
        }
        if (pos.empty()) throw usage_error("empty atoms spec '" + spec + "'");
        double total = 0.0;
        for (double x : w) total += x;
        for (double& x : w) x /= total;
        return fs::freeprob::SpectralMeasure::atoms(pos, w);
    }

    if (kind == "grid") {
        if (body.empty() || body[0] != '@')
            throw usage_error("grid spec must reference a file: '" + spec + "'");
        const auto m = fs::csvio::read_matrix_file(body.substr(1));
        if (m.cols() != 2) throw usage_error("grid file must have columns x,density");
        std::vector<double> x(m.rows()), d(m.rows());
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            x[static_cast<size_t>(i)] = m(i, 0);
            d[static_cast<size_t>(i)] = m(i, 1);
        }
        return fs::freeprob::SpectralMeasure::grid(x, d);
    }

    throw usage_error("unknown measure kind '" + kind + "' in '" + spec + "'");
}

// ---------------------------------------------------------------------------

struct SimulateOpts {
    CommonOpts common;
    int n = 500, p1 = 100, p2 = 100;
    std::string model = "null";
    bool emit_chain = false;
};

int cmd_simulate(const SimulateOpts& o) {
    apply_threads(o.common);
    const auto kernel = make_kernel(o.common);

    fs::rngkit::DataCloud x, y;
    if (o.model == "null") {
        x = fs::rngkit::sample_gaussian_cloud(
            o.n, o.p1, {o.common.seed, 0, fs::rngkit::Purpose::XCloud});
        y = fs::rngkit::sample_gaussian_cloud(
            o.n, o.p2, {o.common.seed, 0, fs::rngkit::Purpose::YCloud});
    } else if (o.model == "alt") {
        std::tie(x, y) = fs::rngkit::sample_alternative_pair(
            o.n, o.p1, o.p2, {o.common.seed, 0, fs::rngkit::Purpose::Other});
    } else {
        throw usage_error("--model must be null or alt");
    }

    const auto bx = fs::kernelgraph::build_affinity(x, kernel);
    const auto by = fs::kernelgraph::build_affinity(y, kernel);
    const double nn = static_cast<double>(o.n);
    const auto spec =
        fs::spectra::eigenvalues_general(nn * nn * fs::fusion::ncca_matrix(bx, by).matrix);

    const int k = std::min(100, o.n);
    const auto ratios = fs::inference::imaginary_ratio_profile(spec, k);
    std::vector<double> idx(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<size_t>(i)] = i + 1;

    if (o.common.out.empty()) {
        std::ostringstream ss;
        fs::csvio::write_spectrum(ss, spec);
        std::cout << ss.str();
    } else {
        stdfs::create_directories(o.common.out);
        const stdfs::path dir(o.common.out);
        fs::csvio::write_spectrum_file((dir / "spectrum.csv").string(), spec);
        {
            std::ofstream out(dir / "imag_ratio.csv");
            if (!out) throw fs::io_error("cannot open imag_ratio.csv");
            fs::csvio::write_pairs(out, "index", "im_over_re", idx, ratios);
        }
        if (o.emit_chain) {
            const auto chain = fs::fusion::reduction_chain(
                x, y, kernel, {o.common.seed, 0, fs::rngkit::Purpose::Haar});
            const char* names[] = {"chain_n2sxy.csv", "chain_s1.csv", "chain_s2.csv",
                                   "chain_s3.csv", "chain_qxy.csv"};
            for (size_t i = 0; i < chain.size(); ++i) {
                const auto cs = fs::spectra::eigenvalues_general(chain[i].matrix);
                fs::csvio::write_spectrum_file((dir / names[i]).string(), cs, "index");
            }
        }
    }
    return 0;
}

struct CalibrateOpts {
    CommonOpts common;
    int n = 500, p1 = 100, p2 = 100;
    double alpha = 0.95;
    int L0 = 80, B = 1000;
};

int cmd_calibrate(const CalibrateOpts& o) {
    apply_threads(o.common);
    const auto kernel = make_kernel(o.common);
    const auto table =
        fs::inference::calibrate(o.n, o.p1, o.p2, kernel, o.alpha, o.L0, o.B,
                                 {o.common.seed, 0, fs::rngkit::Purpose::Other});
    emit(o.common.out, fs::jsonio::calibration_to_json(table));
    return 0;
}

struct TestOpts {
    CommonOpts common;
    std::string x_path, y_path, calib_path;
};

int cmd_test(const TestOpts& o) {
    apply_threads(o.common);
    const auto kernel = make_kernel(o.common);
    const auto x = fs::csvio::read_cloud_file(o.x_path);
    const auto y = fs::csvio::read_cloud_file(o.y_path);
    const auto calib = fs::jsonio::read_calibration_file(o.calib_path);
    const auto outcome = fs::inference::run_test(x, y, kernel, calib);
    emit(o.common.out, fs::jsonio::outcome_to_json(outcome));
    return 0;
}

struct PowerOpts {
    CommonOpts common;
    std::vector<std::string> settings;
    double alpha = 0.95;
    int L0 = 80, B_calib = 500, B_power = 200;
};

int cmd_power(const PowerOpts& o) {
    apply_threads(o.common);
    const auto kernel = make_kernel(o.common);
    std::vector<std::array<int, 3>> settings;
    for (const auto& s : o.settings) {
        std::array<int, 3> v{};
        std::stringstream ss(s);
        std::string item;
        int k = 0;
        while (std::getline(ss, item, ',') && k < 3) {
            try {
                v[static_cast<size_t>(k++)] = std::stoi(item);
            } catch (const std::exception&) {
                throw usage_error("bad setting '" + s + "' (want n,p1,p2)");
            }
        }
        if (k != 3) throw usage_error("bad setting '" + s + "' (want n,p1,p2)");
        settings.push_back(v);
    }
    if (settings.empty()) throw usage_error("power: need at least one --setting n,p1,p2");

    fs::inference::PowerSettings ps;
    ps.alpha = o.alpha;
    ps.L0 = o.L0;
    ps.B_calib = o.B_calib;
    ps.B_power = o.B_power;
    const auto points = fs::inference::power_curve(
        settings, kernel, ps, {o.common.seed, 0, fs::rngkit::Purpose::Other});

    std::ostringstream ss;
    ss << "n,p1,p2,power\n";
    for (const auto& pt : points)
        ss << pt.n << ',' << pt.p1 << ',' << pt.p2 << ','
           << fs::csvio::format_double(pt.power) << '\n';
    emit(o.common.out, ss.str());
    return 0;
}

struct SpectrumOpts {
    CommonOpts common;
    std::string matrix_path;
};

int cmd_spectrum(const SpectrumOpts& o) {
    apply_threads(o.common);
    const auto m = fs::csvio::read_matrix_file(o.matrix_path);
    const auto spec = fs::spectra::eigenvalues_general(m);
    std::ostringstream ss;
    fs::csvio::write_spectrum(ss, spec);
    emit(o.common.out, ss.str());
    return 0;
}

struct FreeconvOpts {
    CommonOpts common;
    std::string a_spec, b_spec;
    std::string grid = "auto";
    double eta = 1e-4;
    int grid_points = 2048;
};

int cmd_freeconv(const FreeconvOpts& o) {
    apply_threads(o.common);
    const auto a = parse_measure(o.a_spec);
    const auto b = parse_measure(o.b_spec);

    double lo, hi;
    int points = o.grid_points;
    if (o.grid == "auto") {
        lo = a.support_lower() * b.support_lower() * 0.4;
        hi = a.support_upper() * b.support_upper() * 1.25;
    } else {
        std::stringstream ss(o.grid);
        std::string slo, shi, sk;
        if (!std::getline(ss, slo, ':') || !std::getline(ss, shi, ':'))
            throw usage_error("bad --grid '" + o.grid + "' (want lo:hi[:points])");
        try {
            lo = std::stod(slo);
            hi = std::stod(shi);
            if (std::getline(ss, sk, ':')) points = std::stoi(sk);
        } catch (const std::exception&) {
            throw usage_error("bad --grid '" + o.grid + "'");
        }
    }

    auto m_fn = [&](fs::freeprob::Complex z) {
        return fs::freeprob::free_mult_convolve(a, b, z).m_conv;
    };
    const auto rec = fs::freeprob::invert_to_density(m_fn, lo, hi, o.eta, points);
    const auto* g = rec.measure.as_grid();
    std::ostringstream ss;
    fs::csvio::write_pairs(ss, "x", "density", g->x, g->density);
    emit(o.common.out, ss.str());
    return 0;
}

struct VerifyOpts {
    CommonOpts common;
    std::string check = "rigidity";
    int n = 500, p1 = 500, p2 = 500, L = 10, trials = 50, draws = 100;
    std::string constants_path;
};

int cmd_verify(const VerifyOpts& o) {
    apply_threads(o.common);
    const auto kernel = make_kernel(o.common);
    const auto constants = o.constants_path.empty()
                               ? fs::verify::default_constants()
                               : fs::verify::load_constants(o.constants_path);

    if (o.check == "rigidity") {
        const auto cloud = fs::rngkit::sample_gaussian_cloud(
            o.n, o.p1, {o.common.seed, 0, fs::rngkit::Purpose::XCloud});
        const auto rep = fs::verify::check_rigidity(cloud, kernel, constants);
        emit(o.common.out, fs::jsonio::rigidity_to_json(rep));
        return 0;
    }
    if (o.check == "edge") {
        const auto cx = fs::rngkit::sample_gaussian_cloud(
            o.n, o.p1, {o.common.seed, 0, fs::rngkit::Purpose::XCloud});
        const auto cy = fs::rngkit::sample_gaussian_cloud(
            o.n, o.p2, {o.common.seed, 0, fs::rngkit::Purpose::YCloud});
        const auto rep = fs::verify::check_edge_cluster(cx, cy, kernel, o.L, constants);
        emit(o.common.out, fs::jsonio::edge_to_json(rep));
        return 0;
    }
    if (o.check == "inequalities") {
        fs::rngkit::CounterRng rng({o.common.seed, 0, fs::rngkit::Purpose::Other});
        int violations = 0;
        fs::verify::InequalityRecord last;
        const int dim = 30;
        for (int d = 0; d < o.draws; ++d) {
            Eigen::MatrixXd a(dim, dim), b(dim, dim);
            std::uint64_t ctr = static_cast<std::uint64_t>(d) * 2 * dim * dim;
            for (int j = 0; j < dim; ++j)
                for (int i = 0; i < dim; ++i) {
                    a(i, j) = rng.gaussian_at(ctr++);
                    b(i, j) = rng.gaussian_at(ctr++);
                }
            const Eigen::MatrixXd sa = 0.5 * (a + a.transpose());
            const Eigen::MatrixXd sb = 0.5 * (b + b.transpose());
            last = fs::verify::inequality_harness(sa, sb);
            if (!last.hw_ok || !last.weyl_ok || !last.levy_bound_ok) ++violations;
        }
        emit(o.common.out, fs::jsonio::inequality_to_json(last, violations, o.draws));
        return violations == 0 ? 0 : 2;
    }
    if (o.check == "oracle") {
        // Monte-Carlo model vs the subordination density for the kernel laws.
        const double f2 = kernel.f2(), s2 = -2.0 * kernel.df2(), vs = kernel.varsigma();
        const auto nu_x = fs::freeprob::SpectralMeasure::mp(
            static_cast<double>(o.n) / o.p1, s2, vs);
        const auto nu_y = fs::freeprob::SpectralMeasure::mp(
            static_cast<double>(o.n) / o.p2, s2, vs);
        const auto [sx, sy] =
            fs::freeprob::sigma_matrices(nu_x, nu_y, o.n, o.p1, o.p2, vs);
        const auto pooled = fs::verify::mc_free_conv_oracle(
            sx, sy, o.trials, {o.common.seed, 0, fs::rngkit::Purpose::Haar});
        auto m_fn = [&](fs::freeprob::Complex z) {
            return fs::freeprob::free_mult_convolve(nu_x, nu_y, z).m_conv;
        };
        const double lo = nu_x.support_lower() * nu_y.support_lower() * 0.4;
        const double hi = nu_x.support_upper() * nu_y.support_upper() * 1.25;
        const auto rec = fs::freeprob::invert_to_density(m_fn, lo, hi, 1e-4);
        const auto* g = rec.measure.as_grid();
        const double ks = fs::verify::kolmogorov_distance(pooled, g->x, g->density);
        std::ostringstream ss;
        ss << "{\n  \"kolmogorov_distance\": " << fs::csvio::format_double(ks)
           << ",\n  \"trials\": " << o.trials << ",\n  \"n\": " << o.n << "\n}\n";
        emit(o.common.out, ss.str());
        (void)f2;
        return 0;
    }
    throw usage_error("unknown --check '" + o.check +
                      "' (rigidity|edge|inequalities|oracle)");
}

}  // namespace

int main(int argc, char** argv) {
    // LAPACK stays serial; parallelism lives in the replicate/row loops so
    // results are identical for any thread count.
    setenv("OPENBLAS_NUM_THREADS", "1", 0);

    CLI::App app{"Kernel sensor-fusion spectra: null-model laws, calibration and tests"};
    app.require_subcommand(1);

    SimulateOpts sim;
    auto* c_sim = app.add_subcommand("simulate", "Draw a data pair and emit fusion spectra");
    add_common(c_sim, sim.common);
    c_sim->add_option("--n", sim.n, "Samples per cloud")->required();
    c_sim->add_option("--p1", sim.p1, "Dimension of the first cloud")->required();
    c_sim->add_option("--p2", sim.p2, "Dimension of the second cloud")->required();
    c_sim->add_option("--model", sim.model, "null or alt")->default_str("null");
    c_sim->add_flag("--emit-chain", sim.emit_chain, "Also write the reduction-chain spectra");

    CalibrateOpts cal;
    auto* c_cal = app.add_subcommand("calibrate", "Resample null thresholds (theta*, L*)");
    add_common(c_cal, cal.common);
    c_cal->add_option("--n", cal.n)->required();
    c_cal->add_option("--p1", cal.p1)->required();
    c_cal->add_option("--p2", cal.p2)->required();
    c_cal->add_option("--alpha", cal.alpha)->default_val(0.95);
    c_cal->add_option("--L0", cal.L0)->default_val(80);
    c_cal->add_option("--B", cal.B)->default_val(1000);

    TestOpts tst;
    auto* c_tst = app.add_subcommand("test", "Run the independence test on data files");
    add_common(c_tst, tst.common);
    c_tst->add_option("--x", tst.x_path, "CSV of the first cloud")->required();
    c_tst->add_option("--y", tst.y_path, "CSV of the second cloud")->required();
    c_tst->add_option("--calib", tst.calib_path, "Calibration JSON")->required();

    PowerOpts pow;
    auto* c_pow = app.add_subcommand("power", "Empirical power across settings");
    add_common(c_pow, pow.common);
    c_pow->add_option("--setting", pow.settings, "n,p1,p2 (repeatable)")->required();
    c_pow->add_option("--alpha", pow.alpha)->default_val(0.95);
    c_pow->add_option("--L0", pow.L0)->default_val(80);
    c_pow->add_option("--B-calib", pow.B_calib)->default_val(500);
    c_pow->add_option("--B-power", pow.B_power)->default_val(200);

    SpectrumOpts spc;
    auto* c_spc = app.add_subcommand("spectrum", "Eigenvalues of a dense matrix CSV");
    add_common(c_spc, spc.common);
    c_spc->add_option("--matrix", spc.matrix_path, "Dense CSV")->required();

    FreeconvOpts frc;
    auto* c_frc = app.add_subcommand("freeconv", "Density of a free multiplicative convolution");
    add_common(c_frc, frc.common);
    c_frc->add_option("--a", frc.a_spec, "Measure spec")->required();
    c_frc->add_option("--b", frc.b_spec, "Measure spec")->required();
    c_frc->add_option("--grid", frc.grid, "lo:hi[:points] or auto")->default_str("auto");
    c_frc->add_option("--eta", frc.eta, "Inversion offset in [1e-7, 1e-3]")->default_val(1e-4);

    VerifyOpts ver;
    auto* c_ver = app.add_subcommand("verify", "Run a theorem check and emit a JSON report");
    add_common(c_ver, ver.common);
    c_ver->add_option("--check", ver.check, "rigidity|edge|inequalities|oracle")->required();
    c_ver->add_option("--n", ver.n)->default_val(500);
    c_ver->add_option("--p1", ver.p1)->default_val(500);
    c_ver->add_option("--p2", ver.p2)->default_val(500);
    c_ver->add_option("--L", ver.L)->default_val(10);
    c_ver->add_option("--trials", ver.trials)->default_val(50);
    c_ver->add_option("--draws", ver.draws)->default_val(100);
    c_ver->add_option("--constants", ver.constants_path, "Frozen-constants file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (c_sim->parsed()) return cmd_simulate(sim);
        if (c_cal->parsed()) return cmd_calibrate(cal);
        if (c_tst->parsed()) return cmd_test(tst);
        if (c_pow->parsed()) return cmd_power(pow);
        if (c_spc->parsed()) return cmd_spectrum(spc);
        if (c_frc->parsed()) return cmd_freeconv(frc);
        if (c_ver->parsed()) return cmd_verify(ver);
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const fs::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
