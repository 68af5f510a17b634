#include "covlaw/moments.hpp"

#include "chain.hpp"
#include "covlaw/errors.hpp"
#include "covlaw/rng.hpp"

#include <json.hpp>


#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

namespace covlaw {

using detail::Operand;
using detail::OperandPtr;

namespace {

std::vector<int> index_positions(const DiscreteCovariance& eta, const std::vector<std::string>& names) {
    std::vector<int> idx;
    idx.reserve(names.size());
    for (const auto& s : names) idx.push_back(eta.index_of(s));
    return idx;
}

void check_coeffs(const DiscreteCovariance& eta, std::size_t length, const std::vector<Matrix>& coeffs) {
    if (coeffs.size() != length + 1)
        throw DomainError("expected " + std::to_string(length + 1) + " coefficient matrices, got " +
                          std::to_string(coeffs.size()));
    for (const Matrix& b : coeffs)
        if (b.rows() != eta.n() || b.cols() != eta.n())
            throw DomainError("coefficient matrix has the wrong size");
}

// M(p, q) = E_B[x_p c_p x_{p+1} ... c_{q-1} x_q] for 0-based letter positions.
OperandPtr interval_recursion(const DiscreteCovariance& eta, const std::vector<int>& idx,
                              const std::vector<OperandPtr>& inner_coeffs) {
    const int l = static_cast<int>(idx.size());
    const int n = eta.n();
    // table[p][q+1]: interval [p, q]; empty intervals are the identity.
    std::vector<std::vector<OperandPtr>> table(l + 1, std::vector<OperandPtr>(l + 1));
    for (int p = 0; p <= l; ++p) table[p][p] = detail::identity_operand();
    for (int len = 2; len <= l; len += 2) {
        for (int p = 0; p + len <= l; ++p) {
            const int q = p + len - 1;
            OperandPtr acc;
            for (int r = p + 1; r <= q; r += 2) {
                OperandPtr inner = inner_coeffs[p];
                if (r > p + 1) {
                    inner = detail::multiply(*inner, *table[p + 1][r]);
                    inner = detail::multiply(*inner, *inner_coeffs[r - 1]);
                }
                OperandPtr term = detail::apply_eta(eta, idx[p], idx[r], *inner);
                if (r < q) {
                    term = detail::multiply(*term, *inner_coeffs[r]);
                    term = detail::multiply(*term, *table[r + 1][q + 1]);
                }
                acc = acc ? detail::add(*acc, *term, n) : term;
            }
            table[p][q + 1] = acc;
        }
    }
    return table[0][l];
}

// Semicircular expectation over operands: coeffs has l+1 entries.
OperandPtr semicircular_operand(const DiscreteCovariance& eta, const std::vector<int>& idx,
                                const std::vector<OperandPtr>& coeffs) {
    const int l = static_cast<int>(idx.size());
    if (l % 2 != 0) return detail::make_diagonal(Vector::Zero(eta.n()));
    if (coeffs.size() == 1) return coeffs.front();
    std::vector<OperandPtr> inner(coeffs.begin() + 1, coeffs.end() - 1);
    OperandPtr mid = l == 0 ? detail::identity_operand() : interval_recursion(eta, idx, inner);
    return detail::multiply(*detail::multiply(*coeffs.front(), *mid), *coeffs.back());
}

}  // namespace

Matrix eta_pi_eval(const DiscreteCovariance& eta, const PairPartition& pi,
                   const std::vector<std::string>& indices, const std::vector<Matrix>& args,
                   ReductionOrder order) {
    const int l = pi.length();
    if (l == 0) {
        if (!args.empty()) throw DomainError("the empty pairing takes no arguments");
        return Matrix::Identity(eta.n(), eta.n());
    }
    if (static_cast<int>(args.size()) != l - 1)
        throw DomainError("pairing of length " + std::to_string(l) + " needs " + std::to_string(l - 1) +
                          " arguments, got " + std::to_string(args.size()));
    if (!is_noncrossing(pi)) throw DomainError("pairing " + pi.to_string() + " is crossing");
    detail::ChainEvaluator ev(eta.n());
    std::vector<detail::Chain> slots(l + 1);
    for (int r = 1; r < l; ++r) slots[r] = {detail::Factor{"a" + std::to_string(r), detail::make_operand(args[r - 1])}};
    return ev.to_matrix(ev.reduce(&eta, pi, indices, std::move(slots), order));
}

Matrix semicircular_expectation(const DiscreteCovariance& eta, const std::vector<std::string>& indices,
                                const std::vector<Matrix>& coeffs, MomentMethod method, Exec exec) {
    check_coeffs(eta, indices.size(), coeffs);
    const int l = static_cast<int>(indices.size());
    const int n = eta.n();
    if (l % 2 != 0) return Matrix::Zero(n, n);
    if (l == 0) return coeffs.front();
    const std::vector<int> idx = index_positions(eta, indices);
    if (method == MomentMethod::IntervalRecursion) {
        std::vector<OperandPtr> ops;
        for (const Matrix& b : coeffs) ops.push_back(detail::make_operand(b));
        return detail::to_matrix(*semicircular_operand(eta, idx, ops), n);
    }
    const std::vector<PairPartition> nc = enumerate_noncrossing(l);
    const std::vector<Matrix> inner(coeffs.begin() + 1, coeffs.end() - 1);
    std::vector<Matrix> terms(nc.size());
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
    for (std::size_t p = 0; p < nc.size(); ++p) terms[p] = eta_pi_eval(eta, nc[p], indices, inner);
    Matrix sum = Matrix::Zero(n, n);
    for (const Matrix& t : terms) sum += t;
    return coeffs.front() * sum * coeffs.back();
}

// ---------------------------------------------------------------------------
// Semicircular traces of covariance polynomials

namespace {

struct Item {
    bool is_x = false;
    int index = 0;       // is_x
    OperandPtr op;       // otherwise
};

using Items = std::vector<Item>;

class SemicircularEvaluator {
public:
    SemicircularEvaluator(const DiscreteCovariance& eta, const HermitianTuple& b) : eta_(eta), b_(b) {
        if (b_.size() > 0 && b_.n() != eta_.n()) throw DomainError("base tuple and covariance sizes differ");
    }

    Complex trace(const CovMonomial& m) {
        std::vector<Items> slots;
        for (const Word& w : m.words()) slots.push_back(items(w));
        PairPartition pi = m.pairing();
        std::vector<std::string> indices = m.indices();
        while (!pi.empty()) {
            const int r = find_innermost_adjacent(pi).first;
            const OperandPtr arg = expect(slots[r]);
            Item eta_item;
            eta_item.op = detail::apply_eta(eta_, eta_.index_of(indices[r - 1]), eta_.index_of(indices[r]), *arg);
            Items merged = std::move(slots[r - 1]);
            merged.push_back(std::move(eta_item));
            merged.insert(merged.end(), slots[r + 1].begin(), slots[r + 1].end());
            slots[r - 1] = std::move(merged);
            slots.erase(slots.begin() + r, slots.begin() + r + 2);
            indices.erase(indices.begin() + (r - 1), indices.begin() + (r + 1));
            pi = pi.without_adjacent(r);
        }
        const OperandPtr top = expect(slots.front());
        const int n = eta_.n();
        switch (top->kind) {
            case Operand::Kind::Identity: return 1.0;
            case Operand::Kind::Diagonal: return top->diag.sum() / static_cast<double>(n);
            case Operand::Kind::Dense: return top->dense.trace() / static_cast<double>(n);
        }
        return 0.0;
    }

private:
    const DiscreteCovariance& eta_;
    const HermitianTuple& b_;

    Items items(const Word& w) {
        Items out;
        for (const Letter& l : w) {
            Item it;
            if (l.kind == LetterKind::Semicircular) {
                it.is_x = true;
                it.index = eta_.index_of(l.symbol);
            } else {
                if (!b_.contains(l.symbol)) throw DomainError("no matrix supplied for base symbol '" + l.symbol + "'");
                const Matrix& a = b_.at(l.symbol);
                it.op = detail::make_operand(l.starred ? Matrix(a.adjoint()) : a);
                if (eta_.base() == BaseAlgebra::Diagonal && it.op->kind == Operand::Kind::Dense)
                    throw DomainError("base symbol '" + l.symbol + "' is not diagonal for a diagonal base");
            }
            out.push_back(std::move(it));
        }
        return out;
    }

    // E_B of an alternating product of x-letters and base elements.
    OperandPtr expect(const Items& seq) {
        std::vector<int> idx;
        std::vector<OperandPtr> coeffs{detail::identity_operand()};
        for (const Item& it : seq) {
            if (it.is_x) {
                idx.push_back(it.index);
                coeffs.push_back(detail::identity_operand());
            } else {
                coeffs.back() = detail::multiply(*coeffs.back(), *it.op);
            }
        }
        OperandPtr out = semicircular_operand(eta_, idx, coeffs);
        if (eta_.base() == BaseAlgebra::Diagonal && out->kind == Operand::Kind::Dense)
            out = detail::make_diagonal(out->dense.diagonal());
        return out;
    }
};

}  // namespace

Complex semicircular_trace(const CovPolynomial& f, const DiscreteCovariance& eta, const HermitianTuple& b) {
    SemicircularEvaluator ev(eta, b);
    Complex acc = 0.0;
    for (const CovMonomial& m : f.terms()) acc += m.coefficient() * ev.trace(m);
    return acc;
}

// ---------------------------------------------------------------------------
// Exact Gaussian moments

double wick_cost(int length, std::size_t kraus_count) {
    if (length % 2 != 0) return 0.0;
    return static_cast<double>(double_factorial_odd(length)) *
           std::pow(static_cast<double>(kraus_count), length / 2);
}

namespace {

// step[t][k] = a_{k, i_t} * b_{t+1}
std::vector<std::vector<Matrix>> wick_steps(const DiscreteCovariance& eta, const std::vector<int>& idx,
                                            const std::vector<Matrix>& coeffs) {
    const auto& kraus = eta.kraus();
    std::vector<std::vector<Matrix>> step(idx.size(), std::vector<Matrix>(kraus.size()));
    for (std::size_t t = 0; t < idx.size(); ++t)
        for (std::size_t k = 0; k < kraus.size(); ++k) step[t][k] = kraus[k][idx[t]] * coeffs[t + 1];
    return step;
}

void check_budget(double cost, const WickOptions& opt) {
    if (cost > opt.budget)
        throw BudgetExceeded("exact Gaussian moment needs " + std::to_string(static_cast<long double>(cost)) +
                             " Kraus-index terms, budget is " + std::to_string(static_cast<long double>(opt.budget)));
}

class WickAllPairings {
public:
    WickAllPairings(const std::vector<std::vector<Matrix>>& step, int l) : step_(step), l_(l) {}

    void run(int t, const Matrix& prefix, std::vector<int>& open, Matrix& acc) const {
        if (t == l_) {
            acc += prefix;
            return;
        }
        const int remaining = l_ - t;
        // Close an open block.
        for (std::size_t o = 0; o < open.size(); ++o) {
            const int k = open[o];
            open.erase(open.begin() + static_cast<std::ptrdiff_t>(o));
            run(t + 1, prefix * step_[t][k], open, acc);
            open.insert(open.begin() + static_cast<std::ptrdiff_t>(o), k);
        }
        // Open a new block.
        if (static_cast<int>(open.size()) + 1 <= remaining - 1) {
            for (std::size_t k = 0; k < step_[t].size(); ++k) {
                open.push_back(static_cast<int>(k));
                run(t + 1, prefix * step_[t][k], open, acc);
                open.pop_back();
            }
        }
    }

private:
    const std::vector<std::vector<Matrix>>& step_;
    int l_;
};

}  // namespace

Matrix gaussian_moment_exact(const DiscreteCovariance& eta, const std::vector<std::string>& indices,
                             const std::vector<Matrix>& coeffs, WickOptions opt) {
    check_coeffs(eta, indices.size(), coeffs);
    const int l = static_cast<int>(indices.size());
    const int n = eta.n();
    if (l % 2 != 0) return Matrix::Zero(n, n);
    if (l == 0) return coeffs[0] * coeffs[1];
    check_budget(wick_cost(l, eta.kraus().size()), opt);
    const auto step = wick_steps(eta, index_positions(eta, indices), coeffs);
    const std::size_t m = eta.kraus().size();
    const WickAllPairings dfs(step, l);
    std::vector<Matrix> partial(m, Matrix::Zero(n, n));
#pragma omp parallel for schedule(dynamic) if (opt.exec == Exec::Parallel)
    for (std::size_t k = 0; k < m; ++k) {
        std::vector<int> open{static_cast<int>(k)};
        dfs.run(1, coeffs[0] * step[0][k], open, partial[k]);
    }
    Matrix sum = Matrix::Zero(n, n);
    for (const Matrix& p : partial) sum += p;
    return sum;
}

Matrix wick_term(const DiscreteCovariance& eta, const PairPartition& pi,
                 const std::vector<std::string>& indices, const std::vector<Matrix>& coeffs,
                 WickOptions opt) {
    check_coeffs(eta, indices.size(), coeffs);
    const int l = pi.length();
    if (static_cast<int>(indices.size()) != l) throw DomainError("index tuple does not match the pairing");
    const int n = eta.n();
    if (l == 0) return coeffs[0] * coeffs[1];
    const std::size_t m = eta.kraus().size();
    check_budget(std::pow(static_cast<double>(m), l / 2), opt);
    const auto step = wick_steps(eta, index_positions(eta, indices), coeffs);
    const std::vector<int> partner = pi.partners();
    std::function<void(int, const Matrix&, std::vector<int>&, Matrix&)> run =
        [&](int t, const Matrix& prefix, std::vector<int>& kof, Matrix& acc) {
            if (t == l) {
                acc += prefix;
                return;
            }
            if (partner[t] < t) {
                run(t + 1, prefix * step[t][kof[partner[t]]], kof, acc);
                return;
            }
            for (std::size_t k = 0; k < m; ++k) {
                kof[t] = static_cast<int>(k);
                run(t + 1, prefix * step[t][k], kof, acc);
            }
        };
    std::vector<Matrix> partial(m, Matrix::Zero(n, n));
#pragma omp parallel for schedule(dynamic) if (opt.exec == Exec::Parallel)
    for (std::size_t k = 0; k < m; ++k) {
        std::vector<int> kof(l, -1);
        kof[0] = static_cast<int>(k);
        run(1, coeffs[0] * step[0][k], kof, partial[k]);
    }
    Matrix sum = Matrix::Zero(n, n);
    for (const Matrix& p : partial) sum += p;
    return sum;
}

// ---------------------------------------------------------------------------
// GUE genus sums

namespace {

// Sum over colour-respecting pairings of n^{cycles(gamma pi)}; colours[p] labels position p.
double genus_sum(const std::vector<int>& gamma, const std::vector<int>& colour, int n) {
    const int total = static_cast<int>(gamma.size());
    std::vector<int> pi(total, -1);
    double acc = 0.0;
    std::function<void()> rec = [&]() {
        int first = -1;
        for (int p = 0; p < total; ++p)
            if (pi[p] < 0) {
                first = p;
                break;
            }
        if (first < 0) {
            std::vector<char> seen(total, 0);
            int cycles = 0;
            for (int p = 0; p < total; ++p) {
                if (seen[p]) continue;
                ++cycles;
                for (int q = p; !seen[q]; q = gamma[pi[q]]) seen[q] = 1;
            }
            acc += std::pow(static_cast<double>(n), cycles);
            return;
        }
        for (int q = first + 1; q < total; ++q) {
            if (pi[q] >= 0 || colour[q] != colour[first]) continue;
            pi[first] = q;
            pi[q] = first;
            rec();
            pi[first] = pi[q] = -1;
        }
    };
    rec();
    return acc * std::pow(static_cast<double>(n), -total / 2.0);
}

// E prod_w tr_n(word w) for independent GUE matrices; letters are colour labels.
double gue_words_exact(const std::vector<std::vector<int>>& words, int n) {
    std::vector<int> gamma, colour;
    int traces = 0;
    for (const auto& w : words) {
        if (w.empty()) continue;
        ++traces;
        const int start = static_cast<int>(gamma.size());
        for (std::size_t p = 0; p < w.size(); ++p) {
            gamma.push_back(start + static_cast<int>((p + 1) % w.size()));
            colour.push_back(w[p]);
        }
    }
    if (gamma.size() % 2 != 0) return 0.0;
    return genus_sum(gamma, colour, n) / std::pow(static_cast<double>(n), traces);
}

}  // namespace

double gue_trace_product_exact(const std::vector<int>& powers, int n) {
    std::vector<std::vector<int>> words;
    for (int p : powers) {
        if (p < 0) throw DomainError("negative power");
        words.emplace_back(static_cast<std::size_t>(p), 0);
    }
    return gue_words_exact(words, n);
}

double gue_family_exact_trace(const CovPolynomial& f, int n) {
    std::map<std::string, int> colour;
    for (std::size_t c = 0; c < f.alphabet().indices.size(); ++c) colour[f.alphabet().indices[c]] = static_cast<int>(c);
    Complex acc = 0.0;
    for (const CovMonomial& m : f.terms()) {
        // Each slot is a word of colours; reducing a block traces its content.
        std::vector<std::vector<int>> slots;
        for (const Word& w : m.words()) {
            std::vector<int> c;
            for (const Letter& l : w) {
                if (l.kind == LetterKind::Base) throw DomainError("GUE oracle takes no base letters");
                c.push_back(colour.at(l.symbol));
            }
            slots.push_back(std::move(c));
        }
        std::vector<std::vector<int>> traced;
        PairPartition pi = m.pairing();
        std::vector<std::string> indices = m.indices();
        bool vanishes = false;
        while (!pi.empty()) {
            const int r = find_innermost_adjacent(pi).first;
            if (indices[r - 1] != indices[r]) vanishes = true;
            traced.push_back(std::move(slots[r]));
            std::vector<int> merged = std::move(slots[r - 1]);
            merged.insert(merged.end(), slots[r + 1].begin(), slots[r + 1].end());
            slots[r - 1] = std::move(merged);
            slots.erase(slots.begin() + r, slots.begin() + r + 2);
            indices.erase(indices.begin() + (r - 1), indices.begin() + (r + 1));
            pi = pi.without_adjacent(r);
        }
        if (vanishes) continue;
        traced.push_back(std::move(slots.front()));
        acc += m.coefficient() * gue_words_exact(traced, n);
    }
    return acc.real();
}

// ---------------------------------------------------------------------------
// Crossing gap and bounds

namespace {

// max_i E tr_n X_i^power for an even power, by exact Wick sums.
double max_even_moment(const DiscreteCovariance& eta, const std::vector<int>& positions, int power,
                       WickOptions opt) {
    if (power == 0) return 1.0;
    const int n = eta.n();
    double best = 0.0;
    for (int i : positions) {
        std::vector<std::string> idx(static_cast<std::size_t>(power), eta.indices()[i]);
        std::vector<Matrix> ones(static_cast<std::size_t>(power) + 1, Matrix::Identity(n, n));
        best = std::max(best, normalized_trace(gaussian_moment_exact(eta, idx, ones, opt)).real());
    }
    return best;
}

}  // namespace

CrossingGap crossing_gap(const DiscreteCovariance& eta, const std::vector<std::string>& indices,
                         const std::vector<Matrix>& coeffs, WickOptions opt) {
    check_coeffs(eta, indices.size(), coeffs);
    const int l = static_cast<int>(indices.size());
    CrossingGap out;
    if (l % 2 != 0) return out;
    const Complex exact = normalized_trace(gaussian_moment_exact(eta, indices, coeffs, opt));
    const Complex free = normalized_trace(semicircular_expectation(eta, indices, coeffs));
    out.gap = std::abs(exact - free);
    if (l < 4) return out;

    std::vector<int> positions;
    for (const auto& s : indices) positions.push_back(eta.index_of(s));
    std::sort(positions.begin(), positions.end());
    positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
    const DiscreteCovariance sub = eta.restrict(positions);

    double norms = operator_norm(coeffs.back() * coeffs.front());
    for (int t = 1; t < l; ++t) norms *= operator_norm(coeffs[t]);
    out.moment = max_even_moment(eta, positions, l - 4, opt);
    out.bound = static_cast<double>(crossing_count(l)) * 2.0 * sub.choi_norm() * sub.eta_one_norm() * norms * out.moment;
    return out;
}

double bbvh_gap_bound(double eta_one_norm, double choi_norm, int p) {
    return 2.0 * std::pow(static_cast<double>(p), 0.75) * std::pow(eta_one_norm, 0.25) * std::pow(choi_norm, 0.25);
}

double moment_cap(double eta_one_norm, double choi_norm, int p) {
    return 2.0 * std::sqrt(eta_one_norm) + bbvh_gap_bound(eta_one_norm, choi_norm, p);
}

BoundReport bounds(const DiscreteCovariance& eta, const std::vector<int>& ps) {
    BoundReport r;
    const double t = eta.choi_norm();
    const double e = eta.eta_one_norm();
    r.sigma = std::sqrt(e);
    r.v = std::sqrt(t);
    r.w4_bound = 2.0 * t * e;
    r.herbst_rate = t > 0 ? eta.n() / (2.0 * t) : std::numeric_limits<double>::infinity();
    for (int p : ps) {
        if (p < 1) throw DomainError("moment order must be positive");
        r.p.push_back(p);
        r.bbvh_gap_bound.push_back(bbvh_gap_bound(e, t, p));
        r.moment_cap.push_back(moment_cap(e, t, p));
        const int l = 2 * p;
        double crossing = 0.0;
        if (l >= 4) {
            const int q = (l - 4) / 2;
            const double cap = q == 0 ? 1.0 : std::pow(moment_cap(e, t, q), 2 * q);
            crossing = static_cast<double>(crossing_count(l)) * r.w4_bound * cap;
        }
        r.crossing_bound.push_back(crossing);
    }
    return r;
}

void write_json(std::ostream& os, const BoundReport& r) {
    nlohmann::ordered_json j;
    j["sigma"] = r.sigma;
    j["v"] = r.v;
    j["w4_bound"] = r.w4_bound;
    if (std::isfinite(r.herbst_rate)) j["herbst_rate"] = r.herbst_rate;
    else j["herbst_rate"] = nullptr;
    j["p"] = r.p;
    j["bbvh_gap_bound"] = r.bbvh_gap_bound;
    j["moment_cap"] = r.moment_cap;
    j["crossing_bound"] = r.crossing_bound;
    os << j.dump(2) << '\n';
}

}  // namespace covlaw
