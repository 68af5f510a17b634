#include "covlaw/harness.hpp"

#include "covlaw/errors.hpp"
#include "covlaw/moments.hpp"
#include "covlaw/sampler.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>

namespace covlaw {

namespace {

using Clock = std::chrono::steady_clock;

// Runs fn(s) for s in [0, count) across threads; the first exception is rethrown.
template <class Fn>
void parallel_for(int count, Fn&& fn) {
    std::exception_ptr error;
    std::mutex mu;
#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < count; ++s) {
        try {
            fn(s);
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

double elapsed_ms(Clock::time_point start, const RunOptions& opt) {
    if (!opt.timing) return 0.0;
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

SeedSpec seed_for(const RunConfig& cfg, const std::string& kind, int n, std::uint64_t sample,
                  std::uint64_t copy = 0) {
    return SeedSpec{cfg.seed, cfg.experiment + ":" + kind, static_cast<std::uint64_t>(n), sample, copy};
}

void fill_bounds(RunRecord& r, const DiscreteCovariance& eta, int degree) {
    const int p = std::max(1, (degree + 1) / 2);
    const BoundReport b = bounds(eta, {p});
    r.bound_sigma = b.sigma;
    r.bound_v = b.v;
    r.bound_w4 = b.w4_bound;
    r.bound_crossing = b.crossing_bound.front();
    const double ln = std::log(static_cast<double>(r.n));
    r.log3_choi = ln * ln * ln * eta.choi_norm();
}

CovPolynomial strip_stars(const CovPolynomial& f) {
    std::vector<CovMonomial> terms;
    for (const CovMonomial& m : f.terms()) {
        std::vector<Word> words = m.words();
        for (Word& w : words)
            for (Letter& l : w) l.starred = false;
        terms.emplace_back(m.coefficient(), std::move(words), m.pairing(), m.indices());
    }
    return CovPolynomial(f.alphabet(), std::move(terms));
}

// Every letter evaluates to a Hermitian matrix, so stars do not change the value.
bool is_self_adjoint(const CovPolynomial& f) { return strip_stars(adjoint(f)) == strip_stars(f); }

double matrix_norm(const Matrix& a, bool hermitian) {
    if (hermitian) return spectral_radius_hermitian(a);
    return std::sqrt(spectral_radius_hermitian(a.adjoint() * a));
}

RealVector hermitian_eigenvalues(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t k = std::min(x.size(), y.size());
    if (k < 2) return std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t a = 0; a < k; ++a) {
        if (!(x[a] > 0) || !(y[a] > 0)) return std::numeric_limits<double>::quiet_NaN();
        const double lx = std::log(x[a]), ly = std::log(y[a]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double kk = static_cast<double>(k);
    return (kk * sxy - sx * sy) / (kk * sxx - sx * sx);
}

double exact_gaussian_trace(const RunConfig& cfg, const DiscreteCovariance& eta, const HermitianTuple& b) {
    const CovPolynomial& f = cfg.polynomial;
    bool has_base = false;
    for (const CovMonomial& m : f.terms())
        for (const Word& w : m.words())
            for (const Letter& l : w) has_base = has_base || l.kind == LetterKind::Base;
    if (cfg.model.kind == "gue" && !has_base) return gue_family_exact_trace(f, eta.n());

    const int n = eta.n();
    Complex acc = 0.0;
    for (const CovMonomial& m : f.terms()) {
        if (m.k() > 0)
            throw ConfigError("exact-gaussian references for covariance blocks exist only for GUE models without base letters");
        std::vector<std::string> idx;
        std::vector<Matrix> coeffs{Matrix::Identity(n, n)};
        for (const Letter& l : m.words().front()) {
            if (l.kind == LetterKind::Semicircular) {
                idx.push_back(l.symbol);
                coeffs.push_back(Matrix::Identity(n, n));
            } else {
                const Matrix& a = b.at(l.symbol);
                coeffs.back() = coeffs.back() * (l.starred ? Matrix(a.adjoint()) : a);
            }
        }
        acc += m.coefficient() * normalized_trace(gaussian_moment_exact(eta, idx, coeffs));
    }
    return acc.real();
}

// ---------------------------------------------------------------------------

RunResult weak_convergence_run(const RunConfig& cfg, const RunOptions& opt) {
    if (cfg.statistic && *cfg.statistic != Statistic::Trace)
        throw ConfigError("field 'statistic': weak runs use the trace statistic");
    RunResult out;
    out.kind = "weak";
    out.experiment = cfg.experiment;
    const CovPolynomial& f = cfg.polynomial;

    const DiscreteCovariance eta_ref = build_covariance(cfg.model, cfg.n_ref);
    const double limit = semicircular_trace(f, eta_ref, cfg.base.discretize(cfg.n_ref)).real();

    double max_z = 0.0;
    for (int n : cfg.schedule) {
        const auto start = Clock::now();
        const DiscreteCovariance eta = build_covariance(cfg.model, n);
        const HermitianTuple b = cfg.base.discretize(n);
        std::vector<double> values(static_cast<std::size_t>(cfg.samples));
        parallel_for(cfg.samples, [&](int s) {
            const HermitianTuple x = sample(eta, seed_for(cfg, "weak", n, static_cast<std::uint64_t>(s)), Exec::Serial);
            values[static_cast<std::size_t>(s)] = evaluate_trace(f, EvalInputs{&b, &x, &eta}).real();
        });
        const MeanStderr ms = mean_stderr(values);
        const double at_n = semicircular_trace(f, eta, b).real();

        RunRecord r;
        r.n = n;
        r.N = cfg.samples;
        r.mean = ms.mean;
        r.stderr_ = ms.stderr_;
        switch (cfg.reference) {
            case Reference::SemicircularAtN: r.reference = at_n; break;
            case Reference::SemicircularAtNref: r.reference = limit; break;
            case Reference::ExactGaussian: r.reference = exact_gaussian_trace(cfg, eta, b); break;
        }
        r.gap = std::abs(r.mean - r.reference);
        r.seed = cfg.seed;
        fill_bounds(r, eta, degree(f));
        r.extra["semicircular_at_n"] = at_n;
        r.extra["semicircular_at_nref"] = limit;
        const double z = r.stderr_ > 0 ? r.gap / r.stderr_ : (r.gap == 0 ? 0.0 : std::numeric_limits<double>::infinity());
        r.extra["z"] = std::isfinite(z) ? nlohmann::ordered_json(z) : nlohmann::ordered_json(nullptr);
        r.extra["relative_gap_to_limit"] = limit != 0 ? std::abs(r.mean - limit) / std::abs(limit) : std::abs(r.mean);
        max_z = std::max(max_z, z);
        r.wall_ms = elapsed_ms(start, opt);
        out.records.push_back(std::move(r));
    }
    out.summary["polynomial"] = to_string(f);
    out.summary["reference"] = to_string(cfg.reference);
    out.summary["n_ref"] = cfg.n_ref;
    out.summary["limit"] = limit;
    out.summary["max_z"] = std::isfinite(max_z) ? nlohmann::ordered_json(max_z) : nlohmann::ordered_json(nullptr);
    out.pass = max_z <= 5.0;
    return out;
}

RunResult strong_convergence_run(const RunConfig& cfg, const RunOptions& opt) {
    if (cfg.statistic && *cfg.statistic != Statistic::OpNorm)
        throw ConfigError("field 'statistic': strong runs use the opnorm statistic");
    RunResult out;
    out.kind = "strong";
    out.experiment = cfg.experiment;
    const CovPolynomial& f = cfg.polynomial;
    const bool hermitian = is_self_adjoint(f);
    const CovPolynomial ff = hermitian ? f * f : adjoint(f) * f;

    // Moment-root proxies at n_ref.
    const DiscreteCovariance eta_ref = build_covariance(cfg.model, cfg.n_ref);
    const HermitianTuple b_ref = cfg.base.discretize(cfg.n_ref);
    nlohmann::ordered_json proxies = nlohmann::ordered_json::array();
    std::vector<double> proxy_values;
    bool sampled = false;
    std::vector<RealVector> ref_spectra;  // |eigenvalues| of F or F*F at n_ref, when sampling
    for (int m : cfg.strong.moment_orders) {
        const double predicted = std::pow(static_cast<double>(std::max<std::size_t>(1, ff.terms().size())), m);
        double value = 0.0;
        bool this_sampled = false;
        if (predicted <= static_cast<double>(cfg.strong.term_budget) && !f.is_zero()) {
            const double tr = semicircular_trace(ff.pow(m), eta_ref, b_ref).real();
            value = std::pow(std::max(0.0, tr), 1.0 / (2.0 * m));
        } else if (!f.is_zero()) {
            this_sampled = sampled = true;
            if (ref_spectra.empty()) {
                ref_spectra.resize(static_cast<std::size_t>(cfg.samples));
                parallel_for(cfg.samples, [&](int s) {
                    const HermitianTuple x = sample(eta_ref, seed_for(cfg, "strong-ref", cfg.n_ref, static_cast<std::uint64_t>(s)), Exec::Serial);
                    const Matrix fm = evaluate(f, EvalInputs{&b_ref, &x, &eta_ref});
                    RealVector ev = hermitian ? hermitian_eigenvalues(fm) : hermitian_eigenvalues(fm.adjoint() * fm);
                    ref_spectra[static_cast<std::size_t>(s)] = ev.cwiseAbs();
                });
            }
            double acc = 0.0;
            for (const RealVector& ev : ref_spectra) {
                const double power = hermitian ? 2.0 * m : static_cast<double>(m);
                acc += ev.array().pow(power).sum() / cfg.n_ref;
            }
            value = std::pow(acc / static_cast<double>(ref_spectra.size()), 1.0 / (2.0 * m));
        }
        proxy_values.push_back(value);
        nlohmann::ordered_json p;
        p["m"] = m;
        p["proxy"] = value;
        p["sampled"] = this_sampled;
        proxies.push_back(p);
    }
    bool monotone = true;
    for (std::size_t k = 1; k < proxy_values.size(); ++k)
        if (proxy_values[k] < proxy_values[k - 1] * (1.0 - 1e-12)) monotone = false;
    const double reference = proxy_values.empty() ? 0.0 : proxy_values.back();

    double prev_log3 = std::numeric_limits<double>::infinity();
    bool log3_decreasing = true;
    for (int n : cfg.schedule) {
        const auto start = Clock::now();
        const DiscreteCovariance eta = build_covariance(cfg.model, n);
        const HermitianTuple b = cfg.base.discretize(n);
        std::vector<double> values(static_cast<std::size_t>(cfg.samples));
        Matrix first;
        parallel_for(cfg.samples, [&](int s) {
            const HermitianTuple x = sample(eta, seed_for(cfg, "strong", n, static_cast<std::uint64_t>(s)), Exec::Serial);
            const Matrix fm = evaluate(f, EvalInputs{&b, &x, &eta});
            values[static_cast<std::size_t>(s)] = matrix_norm(fm, hermitian);
            if (s == 0 && !opt.spectrum_dir.empty()) first = fm;
        });
        if (!opt.spectrum_dir.empty()) {
            std::filesystem::create_directories(opt.spectrum_dir);
            std::ofstream sp(std::filesystem::path(opt.spectrum_dir) / ("spectrum_n" + std::to_string(n) + ".csv"));
            sp << "index,eigenvalue\n";
            const RealVector ev = hermitian ? hermitian_eigenvalues(first) : hermitian_eigenvalues(first.adjoint() * first);
            for (Eigen::Index k = 0; k < ev.size(); ++k) sp << k << ',' << format_number(ev[k]) << '\n';
        }
        const MeanStderr ms = mean_stderr(values);
        RunRecord r;
        r.n = n;
        r.N = cfg.samples;
        r.mean = ms.mean;
        r.stderr_ = ms.stderr_;
        r.reference = reference;
        r.gap = std::abs(r.mean - r.reference);
        r.seed = cfg.seed;
        fill_bounds(r, eta, degree(f));
        if (!(r.log3_choi < prev_log3)) log3_decreasing = false;
        prev_log3 = r.log3_choi;
        r.extra["choi_norm"] = eta.choi_norm();
        r.extra["edge_bound"] = 2.0 * std::sqrt(eta.eta_one_norm());
        r.wall_ms = elapsed_ms(start, opt);
        out.records.push_back(std::move(r));
    }
    out.summary["polynomial"] = to_string(f);
    out.summary["self_adjoint"] = hermitian;
    out.summary["n_ref"] = cfg.n_ref;
    out.summary["proxy_label"] = "moment-root lower bound tau((f*f)^m)^(1/2m) at n_ref";
    out.summary["proxies"] = proxies;
    out.summary["proxy_sampled"] = sampled;
    out.summary["proxy_monotone"] = monotone;
    out.summary["log3_choi_decreasing"] = log3_decreasing;
    out.pass = monotone;
    return out;
}

RunResult eta_estimator_run(const RunConfig& cfg, const RunOptions& opt) {
    if (cfg.statistic && *cfg.statistic != Statistic::EtaEstimator)
        throw ConfigError("field 'statistic': estimator runs use the eta-estimator statistic");
    RunResult out;
    out.kind = "estimator";
    out.experiment = cfg.experiment;
    const int n = cfg.schedule.front();
    const DiscreteCovariance eta = build_covariance(cfg.model, n);
    const int i = eta.index_of(cfg.estimator.i);
    const int j = eta.index_of(cfg.estimator.j);

    Matrix y;
    const std::string& target = cfg.estimator.target;
    if (target == "identity") {
        y = Matrix::Identity(n, n);
    } else if (target == "zero") {
        y = Matrix::Zero(n, n);
    } else if (target == "random") {
        std::mt19937_64 gen(cfg.seed);
        y = random_hermitian(n, gen) / std::sqrt(static_cast<double>(n));
    } else if (target.rfind("base:", 0) == 0) {
        const HermitianTuple b = cfg.base.discretize(n);
        const std::string name = target.substr(5);
        if (!b.contains(name)) throw ConfigError("field 'estimator.target': unknown base function '" + name + "'");
        y = b.at(name);
    } else {
        throw ConfigError("field 'estimator.target': expected identity | zero | random | base:<name>");
    }
    const Matrix truth = eta.apply(i, j, y);
    const int reps = cfg.estimator.repetitions;
    const BoundReport br = bounds(eta, {1});

    std::vector<double> ms_list, err_list;
    double worst_z = 0.0;
    for (std::size_t mk = 0; mk < cfg.estimator.m.size(); ++mk) {
        const auto start = Clock::now();
        const int m = cfg.estimator.m[mk];
        std::vector<Matrix> est(static_cast<std::size_t>(reps));
        std::vector<double> errs(static_cast<std::size_t>(reps));
        parallel_for(reps, [&](int r) {
            const SeedSpec seed = seed_for(cfg, "estimator", n, mk * static_cast<std::uint64_t>(reps) + static_cast<std::uint64_t>(r));
            Matrix acc = Matrix::Zero(n, n);
            for (int t = 0; t < m; ++t) {
                const HermitianTuple x = sample(eta, seed.with_copy(static_cast<std::uint64_t>(t)), Exec::Serial);
                acc.noalias() += x[static_cast<std::size_t>(i)] * y * x[static_cast<std::size_t>(j)];
            }
            acc /= static_cast<double>(m);
            errs[static_cast<std::size_t>(r)] = operator_norm(acc - truth);
            est[static_cast<std::size_t>(r)] = std::move(acc);
        });
        // Entrywise unbiasedness over repetitions.
        double max_z = 0.0;
        for (int s = 0; s < n; ++s)
            for (int t = 0; t < n; ++t)
                for (int part = 0; part < 2; ++part) {
                    std::vector<double> v(static_cast<std::size_t>(reps));
                    for (int r = 0; r < reps; ++r) {
                        const Complex e = est[static_cast<std::size_t>(r)](s, t);
                        v[static_cast<std::size_t>(r)] = part ? e.imag() : e.real();
                    }
                    const MeanStderr me = mean_stderr(v);
                    const double want = part ? truth(s, t).imag() : truth(s, t).real();
                    const double d = std::abs(me.mean - want);
                    const double z = me.stderr_ > 0 ? d / me.stderr_ : (d <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity());
                    max_z = std::max(max_z, z);
                }
        const MeanStderr me = mean_stderr(errs);
        RunRecord rec;
        rec.n = n;
        rec.N = m;
        rec.mean = me.mean;
        rec.stderr_ = me.stderr_;
        rec.reference = 0.0;
        rec.gap = max_z;
        rec.bound_sigma = br.sigma;
        rec.bound_v = br.v;
        rec.bound_w4 = br.w4_bound;
        rec.bound_crossing = br.crossing_bound.front();
        const double ln = std::log(static_cast<double>(n));
        rec.log3_choi = ln * ln * ln * eta.choi_norm();
        rec.seed = cfg.seed;
        rec.param = m;
        rec.extra["repetitions"] = reps;
        rec.extra["unbiased"] = max_z <= 5.0;
        rec.wall_ms = elapsed_ms(start, opt);
        worst_z = std::max(worst_z, max_z);
        ms_list.push_back(m);
        err_list.push_back(me.mean);
        out.records.push_back(std::move(rec));
    }
    const double slope = log_log_slope(ms_list, err_list);
    out.summary["n"] = n;
    out.summary["target"] = target;
    out.summary["slope"] = std::isfinite(slope) ? nlohmann::ordered_json(slope) : nlohmann::ordered_json(nullptr);
    out.summary["max_unbiasedness_z"] = std::isfinite(worst_z) ? nlohmann::ordered_json(worst_z) : nlohmann::ordered_json(nullptr);
    out.summary["unbiased"] = worst_z <= 5.0;
    out.summary["slope_in_range"] = std::isfinite(slope) && slope >= -0.65 && slope <= -0.35;
    out.pass = worst_z <= 5.0;
    return out;
}

RunResult tail_diagnostic_run(const RunConfig& cfg, const RunOptions& opt) {
    if (cfg.statistic && *cfg.statistic != Statistic::Tail)
        throw ConfigError("field 'statistic': tail runs use the tail statistic");
    RunResult out;
    out.kind = "tail";
    out.experiment = cfg.experiment;
    const double lip = cfg.tail.lipschitz;
    bool pass = true;
    for (int n : cfg.schedule) {
        const auto start = Clock::now();
        const DiscreteCovariance eta = build_covariance(cfg.model, n);
        const double t_norm = eta.choi_norm();
        std::vector<double> values(static_cast<std::size_t>(cfg.samples));
        parallel_for(cfg.samples, [&](int s) {
            const HermitianTuple x = sample(eta, seed_for(cfg, "tail", n, static_cast<std::uint64_t>(s)), Exec::Serial);
            double acc = 0.0;
            for (const Matrix& a : x.matrices()) acc += a.squaredNorm() / n;
            values[static_cast<std::size_t>(s)] = lip * std::sqrt(acc);
        });
        const MeanStderr ms = mean_stderr(values);
        const BoundReport br = bounds(eta, {1});
        const double elapsed = elapsed_ms(start, opt);
        for (double d : cfg.tail.delta) {
            const double delta = cfg.tail.delta_in_sqrt_t ? d * std::sqrt(t_norm) : d;
            long long hits = 0;
            for (double v : values)
                if (std::abs(v - ms.mean) >= delta) ++hits;
            const double freq = static_cast<double>(hits) / cfg.samples;
            const double se = std::sqrt(freq * (1.0 - freq) / cfg.samples);
            double bound = 4.0;
            if (delta > 0) bound = t_norm > 0 ? 4.0 * std::exp(-n * delta * delta / (2.0 * t_norm * lip * lip)) : 0.0;
            const bool ok = freq <= bound + 3.0 * se;
            pass = pass && ok;
            RunRecord r;
            r.n = n;
            r.N = cfg.samples;
            r.mean = freq;
            r.stderr_ = se;
            r.reference = bound;
            r.gap = freq - bound;
            r.bound_sigma = br.sigma;
            r.bound_v = br.v;
            r.bound_w4 = br.w4_bound;
            r.bound_crossing = br.crossing_bound.front();
            const double ln = std::log(static_cast<double>(n));
            r.log3_choi = ln * ln * ln * t_norm;
            r.seed = cfg.seed;
            r.wall_ms = elapsed;
            r.param = delta;
            r.extra["delta_grid"] = d;
            r.extra["statistic_mean"] = ms.mean;
            r.extra["pass"] = ok;
            out.records.push_back(std::move(r));
        }
    }
    out.summary["statistic"] = "lipschitz * (sum_i tr_n X_i^2)^(1/2)";
    out.summary["lipschitz"] = lip;
    out.summary["delta_units"] = cfg.tail.delta_in_sqrt_t ? "sqrt_t" : "absolute";
    out.pass = pass;
    return out;
}

}  // namespace covlaw
