#include "covlaw/models.hpp"

#include "covlaw/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace covlaw::models {

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order) {
    if (order < 1) throw DomainError("Gauss-Legendre order must be >= 1");
    std::vector<double> x(order), w(order);
    for (int k = 0; k < order; ++k) {
        double z = std::cos(std::numbers::pi * (k + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int j = 2; j <= order; ++j) {
                const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            if (order == 1) p0 = 1.0, p1 = z;
            dp = order * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[k] = z;
        w[k] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

// ---------------------------------------------------------------------------
// PiecewiseLinear

PiecewiseLinear::PiecewiseLinear(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() < 2 || xs_.size() != ys_.size()) {
        throw DomainError("piecewise-linear table needs >= 2 matching (x, y) points");
    }
    for (std::size_t k = 0; k < xs_.size(); ++k) {
        if (!std::isfinite(xs_[k]) || !std::isfinite(ys_[k])) {
            throw DomainError("piecewise-linear table has non-finite values");
        }
        if (k && !(xs_[k] > xs_[k - 1])) throw DomainError("piecewise-linear breakpoints must increase");
    }
}

PiecewiseLinear PiecewiseLinear::constant_on_unit(double c) { return PiecewiseLinear({0.0, 1.0}, {c, c}); }

double PiecewiseLinear::operator()(double x) const {
    if (xs_.empty() || x < xs_.front() || x > xs_.back()) return 0.0;
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    if (it == xs_.end()) return ys_.back();
    const std::size_t k = static_cast<std::size_t>(it - xs_.begin());
    const double x0 = xs_[k - 1], x1 = xs_[k];
    const double lam = (x - x0) / (x1 - x0);
    return ys_[k - 1] + lam * (ys_[k] - ys_[k - 1]);
}

double PiecewiseLinear::integral(double a, double b, int power) const {
    if (power != 1 && power != 2) throw DomainError("integral power must be 1 or 2");
    if (xs_.empty()) return 0.0;
    const double lo = std::max(a, xs_.front());
    const double hi = std::min(b, xs_.back());
    if (!(hi > lo)) return 0.0;
    std::vector<double> cuts{lo};
    for (double x : xs_)
        if (x > lo && x < hi) cuts.push_back(x);
    cuts.push_back(hi);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double l = cuts[k], r = cuts[k + 1];
        // Evaluate strictly inside the piece so endpoint conventions do not matter.
        const double mid = 0.5 * (l + r);
        const double fm = (*this)(mid);
        const double slope = ((*this)(l + 0.75 * (r - l)) - (*this)(l + 0.25 * (r - l))) / (0.5 * (r - l));
        const double fl = fm - slope * 0.5 * (r - l);
        const double fr = fm + slope * 0.5 * (r - l);
        const double len = r - l;
        acc += power == 1 ? len * (fl + fr) / 2.0 : len * (fl * fl + fl * fr + fr * fr) / 3.0;
    }
    return acc;
}

double PiecewiseLinear::sup_abs() const {
    double m = 0.0;
    for (double y : ys_) m = std::max(m, std::abs(y));
    return m;
}

// ---------------------------------------------------------------------------
// Kernel primitives

namespace {

double grid_eval(const GridKernel& g, double s, double t) {
    auto locate = [](const std::vector<double>& nodes, double x) {
        auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
        std::size_t k = static_cast<std::size_t>(it - nodes.begin());
        k = std::clamp<std::size_t>(k, 1, nodes.size() - 1);
        const double lam = std::clamp((x - nodes[k - 1]) / (nodes[k] - nodes[k - 1]), 0.0, 1.0);
        return std::pair{k - 1, lam};
    };
    const auto [a, ls] = locate(g.s_nodes, s);
    const auto [b, lt] = locate(g.t_nodes, t);
    const auto& v = g.values;
    const auto ai = static_cast<Eigen::Index>(a), bi = static_cast<Eigen::Index>(b);
    return (1 - ls) * (1 - lt) * v(ai, bi) + ls * (1 - lt) * v(ai + 1, bi) + (1 - ls) * lt * v(ai, bi + 1) +
           ls * lt * v(ai + 1, bi + 1);
}

// Integral of profile(|u|/eps) * w(u) du where w(u) = |[s0,s1] cap [t0+u, t1+u]|.
double band_integral(const BandKernel& k, double s0, double s1, double t0, double t1) {
    const double eps = k.epsilon;
    auto f = [&](double u) {
        const double r = std::abs(u) / eps;
        return r >= 1.0 ? 0.0 : k.profile(r);
    };
    auto w = [&](double u) { return std::max(0.0, std::min(s1, t1 + u) - std::max(s0, t0 + u)); };
    const double lo = s0 - t1, hi = s1 - t0;
    // Cells touching the band edge only through rounding are structural zeros.
    const double edge = eps * (1.0 - 1e-12);
    if (lo >= edge || hi <= -edge) return 0.0;
    std::vector<double> cuts{lo, hi, s0 - t0, s1 - t1, 0.0};
    for (double r : k.profile.xs()) {
        cuts.push_back(r * eps);
        cuts.push_back(-r * eps);
    }
    cuts.push_back(eps);
    cuts.push_back(-eps);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t q = 0; q + 1 < cuts.size(); ++q) {
        const double l = std::max(cuts[q], lo), r = std::min(cuts[q + 1], hi);
        if (!(r > l)) continue;
        // f and w are affine on (l, r): integrate the quadratic product exactly.
        const double len = r - l;
        const double a1 = l + len / 4.0, a2 = l + 3.0 * len / 4.0, mid = l + len / 2.0;
        const double fs = (f(a2) - f(a1)) / (len / 2.0), ws = (w(a2) - w(a1)) / (len / 2.0);
        const double fl = f(mid) - fs * len / 2.0, fr = f(mid) + fs * len / 2.0;
        const double wl = w(mid) - ws * len / 2.0, wr = w(mid) + ws * len / 2.0;
        acc += len * (2.0 * fl * wl + fl * wr + fr * wl + 2.0 * fr * wr) / 6.0;
    }
    return acc;
}

double grid_integral(const GridKernel& g, double s0, double s1, double t0, double t1, int order) {
    const auto [nodes, weights] = gauss_legendre(order);
    auto cuts = [](const std::vector<double>& grid, double lo, double hi) {
        std::vector<double> c{lo};
        for (double x : grid)
            if (x > lo && x < hi) c.push_back(x);
        c.push_back(hi);
        return c;
    };
    const auto sc = cuts(g.s_nodes, s0, s1);
    const auto tc = cuts(g.t_nodes, t0, t1);
    double acc = 0.0;
    for (std::size_t a = 0; a + 1 < sc.size(); ++a)
        for (std::size_t b = 0; b + 1 < tc.size(); ++b) {
            const double hs = (sc[a + 1] - sc[a]) / 2, ms = (sc[a + 1] + sc[a]) / 2;
            const double ht = (tc[b + 1] - tc[b]) / 2, mt = (tc[b + 1] + tc[b]) / 2;
            for (int p = 0; p < order; ++p)
                for (int q = 0; q < order; ++q)
                    acc += weights[p] * weights[q] * hs * ht * grid_eval(g, ms + hs * nodes[p], mt + ht * nodes[q]);
        }
    return acc;
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

double KernelFunction::operator()(double s, double t) const {
    double acc = 0.0;
    for (const auto& term : terms) {
        acc += std::visit(
            Overloaded{
                [](const ConstantKernel& c) { return c.value; },
                [&](const BandKernel& b) {
                    const double r = std::abs(s - t) / b.epsilon;
                    return r >= 1.0 ? 0.0 : b.profile(r);
                },
                [&](const SeparableKernel& k) {
                    return k.coefficient * std::pow(k.u(s), k.power) * std::pow(k.v(t), k.power);
                },
                [&](const GridKernel& g) { return grid_eval(g, s, t); },
            },
            term);
    }
    return acc;
}

double KernelFunction::integral(double s0, double s1, double t0, double t1, int order) const {
    double acc = 0.0;
    for (const auto& term : terms) {
        acc += std::visit(
            Overloaded{
                [&](const ConstantKernel& c) { return c.value * (s1 - s0) * (t1 - t0); },
                [&](const BandKernel& b) { return band_integral(b, s0, s1, t0, t1); },
                [&](const SeparableKernel& k) {
                    return k.coefficient * k.u.integral(s0, s1, k.power) * k.v.integral(t0, t1, k.power);
                },
                [&](const GridKernel& g) { return grid_integral(g, s0, s1, t0, t1, order); },
            },
            term);
    }
    return acc;
}

double KernelFunction::sup_abs() const {
    double acc = 0.0;
    for (const auto& term : terms) {
        acc += std::visit(
            Overloaded{
                [](const ConstantKernel& c) { return std::abs(c.value); },
                [](const BandKernel& b) { return b.profile.sup_abs(); },
                [](const SeparableKernel& k) {
                    return std::abs(k.coefficient) * std::pow(k.u.sup_abs(), k.power) *
                           std::pow(k.v.sup_abs(), k.power);
                },
                [](const GridKernel& g) { return g.values.cwiseAbs().maxCoeff(); },
            },
            term);
    }
    return acc;
}

const KernelFunction* KernelSpec::find(const std::string& i, const std::string& j) const {
    const auto it = h.find({i, j});
    return it == h.end() ? nullptr : &it->second;
}

double KernelSpec::operator()(const std::string& i, const std::string& j, double s, double t) const {
    const KernelFunction* f = find(i, j);
    return f ? (*f)(s, t) : 0.0;
}

void KernelSpec::validate(int probe) const {
    if (indices.empty()) throw DomainError("kernel needs a nonempty index set");
    for (const auto& [key, f] : h) {
        if (std::find(indices.begin(), indices.end(), key.first) == indices.end() ||
            std::find(indices.begin(), indices.end(), key.second) == indices.end()) {
            throw DomainError("kernel entry (" + key.first + "," + key.second + ") outside the index set");
        }
        for (const auto& term : f.terms) {
            if (const auto* b = std::get_if<BandKernel>(&term)) {
                if (!(b->epsilon > 0)) throw DomainError("band width must be positive");
            }
            if (const auto* g = std::get_if<GridKernel>(&term)) {
                if (g->s_nodes.size() < 2 || g->t_nodes.size() < 2 ||
                    g->values.rows() != static_cast<Eigen::Index>(g->s_nodes.size()) ||
                    g->values.cols() != static_cast<Eigen::Index>(g->t_nodes.size())) {
                    throw DomainError("grid kernel shape mismatch");
                }
            }
        }
    }
    const int m = static_cast<int>(indices.size());
    double worst_sym = 0.0, worst_psd = 0.0;
    for (int a = 0; a < probe; ++a)
        for (int b = 0; b < probe; ++b) {
            const double s = (a + 0.5) / probe, t = (b + 0.5) / probe;
            RealMatrix block(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    block(i, j) = (*this)(indices[i], indices[j], s, t);
                    worst_sym = std::max(worst_sym, std::abs(block(i, j) - (*this)(indices[j], indices[i], t, s)));
                }
            const double asym = (block - block.transpose()).cwiseAbs().maxCoeff();
            worst_sym = std::max(worst_sym, asym);
            Eigen::SelfAdjointEigenSolver<RealMatrix> es((block + block.transpose()) / 2, Eigen::EigenvaluesOnly);
            worst_psd = std::min(worst_psd, es.eigenvalues()(0));
        }
    if (worst_sym > 1e-12) {
        throw InvariantViolation("kernel violates h_ij(s,t) = h_ji(t,s) (residual " + std::to_string(worst_sym) + ")",
                                 worst_sym);
    }
    if (worst_psd < -1e-10) {
        throw InvariantViolation("kernel matrix (h_ij(s,t)) not PSD: lambda_min = " + std::to_string(worst_psd),
                                 worst_psd);
    }
}

RealMatrix discretize_table(const KernelFunction& h, int n, DiscretizeOptions opt, Exec exec) {
    if (n < 1) throw DomainError("discretization level must be >= 1");
    RealMatrix table(n, n);
    const double nn = static_cast<double>(n) * n;
    auto row = [&](int s) {
        for (int t = 0; t < n; ++t) {
            table(s, t) = nn * h.integral(static_cast<double>(s) / n, static_cast<double>(s + 1) / n,
                                          static_cast<double>(t) / n, static_cast<double>(t + 1) / n,
                                          opt.quadrature_order);
        }
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 8)
        for (int s = 0; s < n; ++s) row(s);
    } else {
        for (int s = 0; s < n; ++s) row(s);
    }
    return table;
}

DiscreteCovariance discretize(const KernelSpec& kernel, int n, DiscretizeOptions opt, Exec exec) {
    kernel.validate();
    std::vector<RealMatrix> tables;
    for (const auto& i : kernel.indices)
        for (const auto& j : kernel.indices) {
            const KernelFunction* f = kernel.find(i, j);
            tables.push_back(f ? discretize_table(*f, n, opt, exec) : RealMatrix::Zero(n, n));
        }
    return DiscreteCovariance::from_kernel_table(n, kernel.indices, std::move(tables));
}

KernelSpec gue_kernel(std::vector<std::string> indices) {
    KernelSpec k;
    k.indices = std::move(indices);
    for (const auto& i : k.indices) k.h[{i, i}] = KernelFunction{{ConstantKernel{1.0}}};
    return k;
}

DiscreteCovariance gue(int n, std::vector<std::string> indices) { return discretize(gue_kernel(std::move(indices)), n); }

KernelSpec band_kernel(const PiecewiseLinear& profile, double epsilon, const std::string& index) {
    if (!(epsilon > 0)) throw DomainError("band width must be positive");
    for (double y : profile.ys())
        if (y < 0) throw DomainError("band profile must be nonnegative");
    if (profile.xs().front() > 0.0 || profile.xs().back() < 1.0 || profile(1.0) != 0.0) {
        throw DomainError("band profile must be tabulated on [0,1] in units of the band width and vanish at 1");
    }
    KernelSpec k;
    k.indices = {index};
    k.h[{index, index}] = KernelFunction{{BandKernel{profile, epsilon}}};
    return k;
}

DiscreteCovariance band(const PiecewiseLinear& profile, double epsilon, int n, const std::string& index) {
    return discretize(band_kernel(profile, epsilon, index), n);
}

double choi_norm_ceiling(const KernelSpec& kernel, int n) {
    double acc = 0.0;
    for (const auto& i : kernel.indices)
        for (const auto& j : kernel.indices)
            if (const KernelFunction* f = kernel.find(i, j)) acc += f->sup_abs() / n;
    return acc;
}

Matrix discretize_function(const PiecewiseLinear& b, int n) {
    Matrix d = Matrix::Zero(n, n);
    for (int s = 0; s < n; ++s) {
        d(s, s) = n * b.integral(static_cast<double>(s) / n, static_cast<double>(s + 1) / n);
    }
    return d;
}

HermitianTuple BaseTuple::discretize(int n) const {
    std::vector<std::string> names;
    std::vector<Matrix> mats;
    for (const auto& [name, f] : functions) {
        names.push_back(name);
        mats.push_back(discretize_function(f, n));
    }
    return HermitianTuple(n, std::move(names), std::move(mats));
}

// ---------------------------------------------------------------------------
// Interpolated free group factors

namespace {

IntervalUnion normalized(const IntervalUnion& u, const std::string& what) {
    IntervalUnion v = u;
    for (const auto& [a, b] : v) {
        if (!(a >= 0.0 && b <= 1.0 && a < b)) {
            throw DomainError(what + ": intervals must satisfy 0 <= a < b <= 1");
        }
    }
    std::sort(v.begin(), v.end());
    IntervalUnion merged;
    for (const auto& iv : v) {
        if (!merged.empty() && iv.first <= merged.back().second) {
            merged.back().second = std::max(merged.back().second, iv.second);
        } else {
            merged.push_back(iv);
        }
    }
    return merged;
}

double overlap(const IntervalUnion& a, const IntervalUnion& b) {
    double acc = 0.0;
    for (const auto& [a0, a1] : a)
        for (const auto& [b0, b1] : b) acc += std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
    return acc;
}

}  // namespace

double measure(const IntervalUnion& u) {
    double acc = 0.0;
    for (const auto& [a, b] : normalized(u, "measure")) acc += b - a;
    return acc;
}

PiecewiseLinear smoothed_indicator(const IntervalUnion& u, double ramp) {
    if (!(ramp > 0.0)) throw DomainError("indicator smoothing ramp must be positive");
    const IntervalUnion v = normalized(u, "indicator");
    if (v.empty()) throw DomainError("indicator of an empty set");
    std::vector<double> xs, ys;
    auto push = [&](double x, double y) {
        if (!xs.empty() && x <= xs.back()) {
            ys.back() = std::max(ys.back(), y);
            return;
        }
        xs.push_back(x);
        ys.push_back(y);
    };
    for (const auto& [a, b] : v) {
        const double r = std::min(ramp, (b - a) / 2.0);
        if (a > 0.0) {
            push(a, 0.0);
            push(a + r, 1.0);
        } else {
            push(0.0, 1.0);
        }
        if (b < 1.0) {
            push(b - r, 1.0);
            push(b, 0.0);
        } else {
            push(1.0, 1.0);
        }
    }
    return PiecewiseLinear(std::move(xs), std::move(ys));
}

FgfModel fgf_kernels(const FgfSpec& spec, double ramp) {
    if (spec.j1.empty() && spec.j2.empty()) {
        throw DomainError("fgf model needs at least one index (J1 and J2 are both empty)");
    }
    FgfModel model;
    double t = 1.0;
    bool generating_j2 = false;
    for (const auto& e : spec.j1) {
        const IntervalUnion f = normalized(e.supp_f, "J1 support of f_" + e.index);
        if (f.empty()) throw DomainError("J1 support of f_" + e.index + " is empty");
        if (!e.supp_g.empty() && normalized(e.supp_g, "J1 support of g_" + e.index) != f) {
            throw DomainError("J1 index " + e.index + " needs supp(f) = supp(g)");
        }
        const double mf = measure(f);
        t += mf * mf;
        const PiecewiseLinear fi = smoothed_indicator(f, ramp);
        model.kernel.indices.push_back(e.index);
        model.kernel.h[{e.index, e.index}] = KernelFunction{{SeparableKernel{1.0, fi, fi, 2}}};
    }
    for (const auto& e : spec.j2) {
        const IntervalUnion f = normalized(e.supp_f, "J2 support of f_" + e.index);
        const IntervalUnion g = normalized(e.supp_g, "J2 support of g_" + e.index);
        if (f.empty() || g.empty()) throw DomainError("J2 index " + e.index + " needs nonempty supports");
        if (overlap(f, g) > 0.0) throw DomainError("J2 index " + e.index + " needs disjoint supports of f and g");
        const double mf = measure(f), mg = measure(g);
        t += 2.0 * mf * mg;
        if (std::abs(mf + mg - 1.0) < 1e-12 && mf > 0.0 && mf < 1.0) generating_j2 = true;
        const PiecewiseLinear fi = smoothed_indicator(f, ramp), gi = smoothed_indicator(g, ramp);
        model.kernel.indices.push_back(e.index);
        model.kernel.h[{e.index, e.index}] =
            KernelFunction{{SeparableKernel{1.0, fi, gi, 2}, SeparableKernel{1.0, gi, fi, 2}}};
    }
    if (!spec.j2.empty() && !generating_j2) {
        throw DomainError("fgf model needs some i in J2 with m(supp f_i) + m(supp g_i) = 1 and 0 < m(supp f_i) < 1");
    }
    {
        auto sorted = model.kernel.indices;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw DomainError("fgf indices in J1 and J2 must be distinct");
        }
    }
    model.kernel.validate();
    model.t = t;
    return model;
}

}  // namespace covlaw::models
