#include "invlab/pipelines.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "invlab/noise.hpp"
#include "invlab/passive.hpp"
#include "invlab/recon.hpp"
#include "invlab/wave_recon.hpp"

namespace invlab {

namespace {

namespace fs = std::filesystem;

struct Artifacts {
    fs::path dir;
    std::vector<std::string> files;
    std::ostringstream report;
    bool ok = true;

    std::string path(const std::string& rel) {
        files.push_back(rel);
        return (dir / rel).string();
    }
    void check(bool pass, const std::string& what) {
        report << (pass ? "ok   " : "FAIL ") << what << '\n';
        ok = ok && pass;
    }
    void note(const std::string& line) { report << line << '\n'; }
};

std::function<cplx(double, double)> elliptic_q_family(ConfigView& v) {
    std::string name = v.get_string("q", "zero");
    double amp = v.get_double("q_amp", 1.0);
    if (name == "zero") return [](double, double) { return cplx(0.0); };
    if (name == "const") return [amp](double, double) { return cplx(amp); };
    if (name == "sinsin") {
        int kx = v.get_int("q_kx", 2), ky = v.get_int("q_ky", 2);
        return [=](double x, double y) {
            return cplx(amp * std::sin(kx * M_PI * x) * std::sin(ky * M_PI * y));
        };
    }
    if (name == "sinx") return [amp](double x, double) { return cplx(amp * std::sin(2 * M_PI * x)); };
    throw ConfigError("unknown elliptic potential family '" + name + "'");
}

std::function<double(double, double)> wave_q_family(ConfigView& v, double T,
                                                    const std::string& prefix = "q") {
    std::string name = v.get_string(prefix, "fig4");
    double amp = v.get_double(prefix + "_amp", 0.5);
    if (name == "zero") return [](double, double) { return 0.0; };
    if (name == "const") return [amp](double, double) { return amp; };
    if (name == "fig4")
        return [amp, T](double t, double x) { return 1.0 + amp * std::sin(2 * M_PI * x) * std::sin(M_PI * t / T); };
    if (name == "sinx") return [amp](double, double x) { return 1.0 + amp * std::sin(2 * M_PI * x); };
    throw ConfigError("unknown wave potential family '" + name + "'");
}

void write_scan_csv(const ScanResult& r, const std::vector<double>& values, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "t,x,value\n";
    for (std::size_t k = 0; k < r.t.size(); ++k)
        out << fmt_g17(r.t[k]) << ',' << fmt_g17(r.x[k]) << ',' << fmt_g17(values[k]) << '\n';
}

void write_manifest(Artifacts& art) {
    std::ofstream rep((art.dir / "report.txt").string());
    rep << art.report.str();
    rep.close();
    art.files.push_back("report.txt");

    std::sort(art.files.begin(), art.files.end());
    std::ofstream out((art.dir / "manifest").string());
    if (!out) throw Error("cannot write manifest");
    for (const std::string& rel : art.files)
        out << rel << '\t' << sha256_file((art.dir / rel).string()) << '\n';
}

// ---- identity-suite ---------------------------------------------------------

void run_identity_suite(ConfigView& v, Artifacts& art) {
    int n = v.get_int("n", 64);
    std::vector<double> eps_sweep = v.get_double_list("eps_sweep", {0.32, 0.16, 0.08});
    std::vector<double> n_sweep_d = v.get_double_list("n_sweep", {8, 16, 32});
    double eps_fixed = v.get_double("eps_fixed", 2e-3);
    std::vector<int> n_sweep(n_sweep_d.begin(), n_sweep_d.end());

    auto q_fn = [](double x, double y) { return cplx(std::sin(M_PI * x) * std::sin(M_PI * y)); };
    std::vector<IdentityRow> rows = identity_convergence_table(q_fn, 2, n, eps_sweep, n_sweep, eps_fixed);
    {
        std::ofstream out(art.path("identity_table.csv"));
        out << "eps,h,identity_residual\n";
        for (const IdentityRow& r : rows)
            out << fmt_g17(r.eps) << ',' << fmt_g17(r.h) << ',' << fmt_g17(r.identity_residual) << '\n';
    }
    for (std::size_t k = 0; k + 1 < eps_sweep.size(); ++k) {
        double ratio = rows[k].identity_residual / rows[k + 1].identity_residual;
        art.check(ratio > 1.7, "identity residual halves-or-better when eps halves (ratio " +
                                   fmt_g17(ratio) + ")");
    }
    std::size_t base = eps_sweep.size();
    for (std::size_t k = 0; k + 1 < n_sweep.size(); ++k) {
        double ratio = rows[base + k].identity_residual / rows[base + k + 1].identity_residual;
        art.check(ratio > 3.0, "identity residual quarters when n doubles (ratio " + fmt_g17(ratio) + ")");
    }

    // null-vector identities
    {
        std::mt19937_64 rng(2027);
        std::uniform_real_distribution<double> u(-20.0, 20.0);
        double worst = 0.0;
        for (int dim : {2, 3})
            for (int rep = 0; rep < 10000; ++rep) {
                std::vector<double> k(static_cast<std::size_t>(dim));
                double scale = 0.0;
                for (double& c : k) {
                    c = u(rng);
                    scale += c * c;
                }
                scale = std::max(1.0, scale);
                NullVectorPair nv = null_vectors(k);
                cplx dot1 = 0.0, dot2 = 0.0;
                for (std::size_t c = 0; c < k.size(); ++c) {
                    dot1 += nv.xi1[c] * nv.xi1[c];
                    dot2 += nv.xi2[c] * nv.xi2[c];
                    worst = std::max(worst, std::abs(nv.xi1[c] + nv.xi2[c] - cplx(0.0, k[c])) / std::sqrt(scale));
                }
                worst = std::max({worst, std::abs(dot1) / scale, std::abs(dot2) / scale});
            }
        art.check(worst <= 1e-12, "null-vector identities to 1e-12 (worst " + fmt_g17(worst) + ")");
    }

    // first linearization is potential-independent
    {
        Grid2D g = build_grid(24);
        BoundaryData f = make_boundary(g, [](double x, double y) { return cplx(x - y); });
        BoundaryData lambda0 = normal_derivative(solve_harmonic(f, g));
        double eps = 1e-3, worst = 0.0;
        for (double amp : {1.0, -2.0}) {
            EllipticProblem p;
            p.grid = g;
            p.m = 2;
            p.delta = 1e-2;
            p.q = make_field(g, [amp](double x, double y) {
                return cplx(amp * (1.0 + std::sin(2 * M_PI * x) * std::sin(2 * M_PI * y)));
            });
            DtnOracle dtn = make_dtn(p);
            BoundaryData dd = mixed_derivative_dtn(dtn, std::vector<BoundaryData>{f},
                                                   EpsilonSchedule{eps});
            data_axpy(dd, -1.0, lambda0);
            worst = std::max(worst, dd.norm_w2());
        }
        art.check(worst <= 10.0 * eps, "first linearization carries no potential signature (" +
                                           fmt_g17(worst) + " <= 10 eps)");
    }

    // wave checks: exact transport and conserved energy
    {
        SpaceTimeGrid g = make_st_grid(128, 512, 4.0);
        SpaceTimeField q(g);
        auto pulse = [](double t) {
            double s = (t - 0.1) / 0.1;
            return (s > 0 && s < 1) ? std::sin(M_PI * s) * std::sin(M_PI * s) : 0.0;
        };
        WaveSource src;
        src.control = make_control(g, 0, pulse);
        SpaceTimeField u = solve_wave(q, 2, src);
        bool exact = true;
        for (int j = 0; j <= g.nt && exact; ++j)
            for (int i = 0; i <= g.nx; ++i) {
                if (g.t(j) + g.x(i) >= 2.05) continue;
                if (u.at(j, i) != pulse(g.t(j) - g.x(i))) {
                    exact = false;
                    break;
                }
            }
        art.check(exact, "d'Alembert transport bit-exact at lambda = 1");

        SpaceTimeGrid ge = make_st_grid(128, 270, 2.0);
        SpaceTimeField qe(ge);
        WaveSource se;
        se.control = make_control(ge, 0, pulse);
        SpaceTimeField ue = solve_wave(qe, 2, se);
        int j0 = static_cast<int>(std::ceil(0.25 / ge.dt()));
        double e0 = leapfrog_energy(ue, j0), drift = 0.0;
        for (int j = j0; j < ge.nt; ++j) drift = std::max(drift, std::abs(leapfrog_energy(ue, j) - e0));
        art.check(drift <= 1e-10 * e0, "discrete energy constant to 1e-10 after the control ends");
    }
}

// ---- elliptic-recon ---------------------------------------------------------

void run_elliptic_recon(ConfigView& v, Artifacts& art) {
    int n = v.get_int("n", 64);
    int m = v.get_int("m", 2);
    int K = v.get_int("kmax", 3);
    double eps = v.get_double("eps", 1e-3);
    double delta = v.get_double("delta", 1e-2);
    auto q_fn = elliptic_q_family(v);

    Grid2D g = build_grid(n);
    EllipticProblem p;
    p.grid = g;
    p.m = m;
    p.delta = delta;
    p.q = make_field(g, q_fn);
    DtnOracle oracle = make_dtn(p);

    ReconOptions ropt;
    ropt.growth_cap = v.get_double("growth_cap", default_growth_cap());
    ropt.reject_ratio = v.get_double("reject_ratio", 0.5);
    ReconResult r = reconstruct_q(oracle, m, K, g, EpsilonSchedule::uniform(m, eps), ropt);

    write_fourier_csv(r.table, art.path("qhat.csv"));
    write_field_csv(r.q, art.path("recon.csv"));

    ScalarField truth = field_from_table(direct_fourier_table(q_fn, K, std::max(128, 2 * n)), g);
    write_field_csv(truth, art.path("truth.csv"));
    double rel = relative_l2(r.q, truth);
    art.note("rel_l2_vs_truncated_truth " + fmt_g17(rel));
    art.note("oracle_calls " + std::to_string(oracle.calls()));

    int rejected = 0, capped = 0;
    for (int s : r.table.status) {
        rejected += s == 1;
        capped += s == 2;
    }
    art.note("samples_rejected " + std::to_string(rejected));
    art.note("samples_outside_cap " + std::to_string(capped));
    art.check(std::isfinite(rel), "reconstruction finite");
}

// ---- wave-fig4 --------------------------------------------------------------

void run_wave_fig4(ConfigView& v, Artifacts& art) {
    int nx = v.get_int("nx", 256);
    double T = v.get_double("T", 4.0);
    int m = v.get_int("m", 2);
    if (m != 2) throw ConfigError("wave-fig4: the three-pulse design requires m = 2");
    int nt = v.get_int("nt", static_cast<int>(std::lround(T * nx)));
    SpaceTimeGrid g = make_st_grid(nx, nt, T);

    auto q_fn = wave_q_family(v, T);
    SpaceTimeField q = make_st_field(g, q_fn);
    double delta = v.get_double("delta", 1.0);
    WaveDtn oracle = wave_dtn(q, m, delta);

    ScanOptions opt;
    opt.point.sigma_p = v.get_double("sigma_p", 0.12);
    opt.point.eps = v.get_double("eps", 0.5);
    opt.spacing_t = v.get_double("scan_dt", 0.0125);
    opt.spacing_x = v.get_double("scan_dx", 0.025);
    bool noisy = v.has("snr_db");
    if (noisy) {
        opt.snr_db = v.require_double("snr_db");
        if (!v.has("seed")) throw ConfigError("wave-fig4: seed is mandatory when snr_db is set");
        opt.seed = v.get_u64("seed", 0);
        opt.smooth_t = v.get_double("smooth_t", 0.5);
        opt.smooth_x = v.get_double("smooth_x", 0.08);
    } else {
        opt.smooth_t = v.get_double("smooth_t", 0.0);
        opt.smooth_x = v.get_double("smooth_x", 0.0);
        (void)v.get_u64("seed", 0); // allowed but unused without noise
    }

    ScanResult r = reconstruct_q_diamond(oracle, q, opt);
    write_scan_csv(r, r.truth, art.path("truth.csv"));
    write_scan_csv(r, r.recon, art.path("recon.csv"));
    write_scan_csv(r, r.error, art.path("error.csv"));
    art.note("scan_points " + std::to_string(r.t.size()));
    art.note("rel_l2 " + fmt_g17(r.rel_l2));
    art.check(std::isfinite(r.rel_l2), "reconstruction finite");
}

// ---- wave-sweep -------------------------------------------------------------

void run_wave_sweep(ConfigView& v, Artifacts& art) {
    int nx = v.get_int("nx", 128);
    double T = v.get_double("T", 4.0);
    int nt = v.get_int("nt", static_cast<int>(std::lround(T * nx)));
    SpaceTimeGrid g = make_st_grid(nx, nt, T);

    SpaceTimeField q1 = make_st_field(g, wave_q_family(v, T, "q"));
    SpaceTimeField q2 = make_st_field(g, wave_q_family(v, T, "q2"));
    std::vector<double> deltas = v.get_double_list("deltas", {1e-3, 3e-3, 1e-2, 3e-2, 1e-1});
    int s_theory = v.get_int("s", 1);
    int m_theory = v.get_int("m_theory", 4);

    ScanOptions opt;
    opt.point.sigma_p = v.get_double("sigma_p", 0.12);
    opt.point.eps = v.get_double("eps", 0.4);
    opt.spacing_t = v.get_double("scan_dt", 0.4);
    opt.spacing_x = v.get_double("scan_dx", 0.2);

    SweepResult sw = stability_sweep(q1, q2, 2, deltas, s_theory, m_theory, opt);
    {
        std::ofstream out(art.path("sweep.csv"));
        out << "delta,error,fitted_slope,sigma_theory\n";
        for (const SweepRow& row : sw.rows)
            out << fmt_g17(row.delta) << ',' << fmt_g17(row.error) << ',' << fmt_g17(sw.fitted_slope)
                << ',' << fmt_g17(sw.sigma_theory) << '\n';
    }
    art.note("fitted_slope " + fmt_g17(sw.fitted_slope));
    art.note("sigma_theory " + fmt_g17(sw.sigma_theory) + " (= 24/487 at (n,s,m)=(1,1,4))");
    art.check(sw.fitted_slope > 0.0, "log-log slope of discrepancy vs delta is positive");
}

// ---- passive-cone -----------------------------------------------------------

void run_passive_cone(ConfigView& v, Artifacts& art) {
    int res = v.get_int("res", 256);
    double amp = v.get_double("c_amp", 0.3);
    std::string cname = v.get_string("c", "sinx1");
    std::function<double(double, double)> c_fn;
    if (cname == "flat") c_fn = [](double, double) { return 1.0; };
    else if (cname == "sinx1") c_fn = [amp](double x1, double) { return 1.0 + amp * std::sin(2 * M_PI * x1); };
    else throw ConfigError("unknown conformal family '" + cname + "'");
    MetricField metric = make_metric(res, c_fn);

    int K = v.get_int("observers", 8);
    int n_sources = v.get_int("sources", 20);
    int cone_obs = v.get_int("cone_observers", 20);
    int cone_points = v.get_int("cone_points", 5);
    std::uint64_t seed = v.get_u64("seed", 7);

    // observer ring and a deterministic pseudo-random source sample
    ObserverSet F;
    for (int k = 0; k < K; ++k) {
        double th = 2 * M_PI * k / K;
        F.z.push_back({static_cast<int>(std::lround((0.5 + 0.31 * std::cos(th)) * res)),
                       static_cast<int>(std::lround((0.5 + 0.31 * std::sin(th)) * res))});
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> cell(0, res - 1);
    std::vector<LatticePoint> X;
    while (static_cast<int>(X.size()) < n_sources) {
        LatticePoint p{cell(rng), cell(rng)};
        bool dup = false;
        for (const auto& q : X) dup = dup || (q == p);
        if (!dup) X.push_back(p);
    }

    write_metric_csv(metric, art.path("metric.csv"));
    DistanceDifferenceFamily fam = build_distance_difference_family(metric, F, X);
    write_dd_family_csv(fam, art.path("dd_family.csv"));

    // record-level invariants
    bool anti = true, bound = true;
    std::vector<std::vector<double>> obs_fields;
    for (const auto& z : F.z) obs_fields.push_back(geodesic_distances(metric, z));
    for (const auto& rec : fam.records)
        for (int i = 0; i < fam.K && anti && bound; ++i)
            for (int j = 0; j < fam.K; ++j) {
                if (rec.at(i, j) != -rec.at(j, i)) anti = false;
                double dij = obs_fields[static_cast<std::size_t>(i)]
                                       [static_cast<std::size_t>(metric.id(F.z[static_cast<std::size_t>(j)].i,
                                                                           F.z[static_cast<std::size_t>(j)].j))];
                if (std::abs(rec.at(i, j)) > dij + 1e-12) bound = false;
            }
    art.check(anti, "distance differences are antisymmetric");
    art.check(bound, "distance differences satisfy the reverse triangle bound");

    InjectivityReport rep = verify_injectivity(fam);
    art.note("min_separation " + fmt_g17(rep.min_separation));
    art.check(rep.min_separation > 0.0 && !rep.degenerate, "distance-difference family separates the sources");

    // Lorentzian product spacetime: observation family and coordinates
    PassiveSystem sys(metric, F);
    std::vector<std::pair<double, LatticePoint>> events;
    for (const auto& x : X) events.emplace_back(0.0, x);
    write_obs_family_csv(build_observation_family(sys, events), art.path("obs_family.csv"));

    int full = 0, total = 0;
    for (const auto& x : X) {
        ObsCoordinates oc = obs_coordinates(sys, 0.0, x, {0, K / 3, (2 * K) / 3});
        ++total;
        full += oc.full_rank ? 1 : 0;
    }
    art.note("coordinate_full_rank " + std::to_string(full) + "/" + std::to_string(total));
    art.check(full * 10 >= total * 9, "observation coordinates full rank at >= 90% of sample points");

    // cone fits at interior test points with a denser observer ring
    ObserverSet ring;
    for (int k = 0; k < cone_obs; ++k) {
        double th = 2 * M_PI * k / cone_obs;
        ring.z.push_back({static_cast<int>(std::lround((0.5 + 0.27 * std::cos(th)) * res)),
                          static_cast<int>(std::lround((0.5 + 0.27 * std::sin(th)) * res))});
    }
    PassiveSystem cone_sys(metric, ring);
    std::ofstream cone_csv(art.path("cone.csv"));
    cone_csv << "i,j,conformal_error,null_residual,used\n";
    double worst_cone = 0.0;
    for (int kpt = 0; kpt < cone_points; ++kpt) {
        double th = 2 * M_PI * kpt / cone_points;
        LatticePoint x{static_cast<int>(std::lround((0.5 + 0.08 * std::cos(th)) * res)),
                       static_cast<int>(std::lround((0.5 + 0.08 * std::sin(th)) * res))};
        ConeFit fit = fit_light_cone(cone_sys, x);
        worst_cone = std::max(worst_cone, fit.conformal_error);
        cone_csv << x.i << ',' << x.j << ',' << fmt_g17(fit.conformal_error) << ','
                 << fmt_g17(fit.null_residual_max) << ',' << fit.used << '\n';
    }
    cone_csv.close();
    art.note("worst_conformal_error " + fmt_g17(worst_cone));
    art.check(worst_cone <= 0.05, "cone spatial block within 5% of c^-2 identity");
}

} // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    Artifacts art;
    art.dir = out_dir;
    ConfigView v(cfg);

    if (cfg.pipeline == "identity-suite") run_identity_suite(v, art);
    else if (cfg.pipeline == "elliptic-recon") run_elliptic_recon(v, art);
    else if (cfg.pipeline == "wave-fig4") run_wave_fig4(v, art);
    else if (cfg.pipeline == "wave-sweep") run_wave_sweep(v, art);
    else if (cfg.pipeline == "passive-cone") run_passive_cone(v, art);
    else throw ConfigError("unknown pipeline '" + cfg.pipeline + "'");

    v.assert_all_consumed();
    write_manifest(art);
    art.files.push_back("manifest");

    RunResult out;
    out.ok = art.ok;
    out.files = art.files;
    out.summary = art.report.str();
    return out;
}

void validate_experiment(const ExperimentConfig& cfg) {
    static const std::map<std::string, std::set<std::string>> allowed = {
        {"identity-suite", {"n", "eps_sweep", "n_sweep", "eps_fixed"}},
        {"elliptic-recon",
         {"n", "m", "kmax", "eps", "delta", "q", "q_amp", "q_kx", "q_ky", "growth_cap", "reject_ratio"}},
        {"wave-fig4",
         {"nx", "nt", "T", "m", "eps", "sigma_p", "scan_dt", "scan_dx", "snr_db", "seed", "smooth_t",
          "smooth_x", "q", "q_amp", "delta"}},
        {"wave-sweep",
         {"nx", "nt", "T", "deltas", "s", "m_theory", "sigma_p", "eps", "scan_dt", "scan_dx", "q",
          "q_amp", "q2", "q2_amp"}},
        {"passive-cone",
         {"res", "c", "c_amp", "observers", "sources", "cone_observers", "cone_points", "seed"}},
    };
    auto it = allowed.find(cfg.pipeline);
    if (it == allowed.end()) throw ConfigError("unknown pipeline '" + cfg.pipeline + "'");
    for (const auto& [key, value] : cfg.kv)
        if (it->second.count(key) == 0)
            throw ConfigError("unknown config key '" + key + "' for pipeline '" + cfg.pipeline + "'");
    if (cfg.pipeline == "wave-fig4" && cfg.kv.count("snr_db") != 0 && cfg.kv.count("seed") == 0)
        throw ConfigError("wave-fig4: seed is mandatory when snr_db is set");
}

} // namespace invlab
