#include "covlaw/covpoly.hpp"

#include "chain.hpp"
#include "covlaw/errors.hpp"

#include <algorithm>

namespace covlaw {

Word star(const Word& w) {
    Word out(w.rbegin(), w.rend());
    for (Letter& l : out) l.starred = !l.starred;
    return out;
}

namespace {

void sort_unique(std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

bool contains_sorted(const std::vector<std::string>& v, const std::string& s) {
    return std::binary_search(v.begin(), v.end(), s);
}

}  // namespace

Alphabet Alphabet::make(std::vector<std::string> base, std::vector<std::string> indices) {
    sort_unique(base);
    sort_unique(indices);
    return Alphabet{std::move(base), std::move(indices)};
}

bool Alphabet::has_base(const std::string& s) const { return contains_sorted(base, s); }
bool Alphabet::has_index(const std::string& s) const { return contains_sorted(indices, s); }

// ---------------------------------------------------------------------------
// Monomials

CovMonomial::CovMonomial(Complex coefficient, std::vector<Word> words, PairPartition pairing,
                         std::vector<std::string> indices)
    : coefficient_(coefficient), words_(std::move(words)), pairing_(std::move(pairing)),
      indices_(std::move(indices)) {
    const int l = pairing_.length();
    if (static_cast<int>(words_.size()) != l + 1)
        throw DomainError("monomial needs " + std::to_string(l + 1) + " words, got " +
                          std::to_string(words_.size()));
    if (static_cast<int>(indices_.size()) != l)
        throw DomainError("monomial index tuple has length " + std::to_string(indices_.size()) +
                          ", expected " + std::to_string(l));
    if (!is_noncrossing(pairing_))
        throw DomainError("monomial pairing " + pairing_.to_string() + " is crossing");
}

int CovMonomial::degree() const {
    int d = 0;
    for (const Word& w : words_) d += static_cast<int>(w.size());
    return d;
}

CovMonomial CovMonomial::with_coefficient(Complex c) const {
    CovMonomial m = *this;
    m.coefficient_ = c;
    return m;
}

std::weak_ordering CovMonomial::compare_shape(const CovMonomial& o) const {
    if (auto c = k() <=> o.k(); c != 0) return c;
    if (auto c = degree() <=> o.degree(); c != 0) return c;
    if (auto c = words_ <=> o.words_; c != 0) return c;
    if (auto c = pairing_ <=> o.pairing_; c != 0) return c;
    return indices_ <=> o.indices_;
}

// ---------------------------------------------------------------------------
// Polynomials

CovPolynomial::CovPolynomial(Alphabet alphabet, std::vector<CovMonomial> terms)
    : alphabet_(std::move(alphabet)) {
    for (const CovMonomial& m : terms) {
        for (const Word& w : m.words())
            for (const Letter& l : w) {
                const bool ok = l.kind == LetterKind::Base ? alphabet_.has_base(l.symbol)
                                                           : alphabet_.has_index(l.symbol);
                if (!ok)
                    throw DomainError("symbol '" + l.symbol + "' is not in the alphabet");
            }
        for (const std::string& i : m.indices())
            if (!alphabet_.has_index(i)) throw DomainError("index '" + i + "' is not in the alphabet");
    }
    std::stable_sort(terms.begin(), terms.end(), [](const CovMonomial& a, const CovMonomial& b) {
        return a.compare_shape(b) < 0;
    });
    for (CovMonomial& m : terms) {
        if (!terms_.empty() && terms_.back().same_shape(m)) {
            terms_.back() = terms_.back().with_coefficient(terms_.back().coefficient() + m.coefficient());
        } else {
            terms_.push_back(std::move(m));
        }
    }
    std::erase_if(terms_, [](const CovMonomial& m) { return m.coefficient() == Complex(0.0, 0.0); });
}

CovPolynomial CovPolynomial::scalar(const Alphabet& a, Complex c) {
    return CovPolynomial(a, {CovMonomial(c, {Word{}}, PairPartition{}, {})});
}

CovPolynomial CovPolynomial::base(const Alphabet& a, const std::string& omega, bool starred) {
    return CovPolynomial(
        a, {CovMonomial(1.0, {Word{Letter{LetterKind::Base, omega, starred}}}, PairPartition{}, {})});
}

CovPolynomial CovPolynomial::x(const Alphabet& a, const std::string& i, bool starred) {
    return CovPolynomial(
        a, {CovMonomial(1.0, {Word{Letter{LetterKind::Semicircular, i, starred}}}, PairPartition{}, {})});
}

void CovPolynomial::require_same_alphabet(const CovPolynomial& g) const {
    if (!(alphabet_ == g.alphabet_)) throw DomainError("polynomials have different alphabets");
}

CovPolynomial CovPolynomial::operator+(const CovPolynomial& g) const {
    require_same_alphabet(g);
    std::vector<CovMonomial> t = terms_;
    t.insert(t.end(), g.terms_.begin(), g.terms_.end());
    return CovPolynomial(alphabet_, std::move(t));
}

CovPolynomial CovPolynomial::operator-(const CovPolynomial& g) const { return *this + (-g); }

CovPolynomial CovPolynomial::operator-() const { return scaled(-1.0); }

CovPolynomial CovPolynomial::scaled(Complex c) const {
    std::vector<CovMonomial> t;
    t.reserve(terms_.size());
    for (const CovMonomial& m : terms_) t.push_back(m.with_coefficient(c * m.coefficient()));
    return CovPolynomial(alphabet_, std::move(t));
}

CovPolynomial CovPolynomial::operator*(const CovPolynomial& g) const { return multiply(*this, g); }

CovPolynomial CovPolynomial::pow(int k) const {
    if (k < 0) throw DomainError("negative polynomial power");
    CovPolynomial out = one(alphabet_);
    for (int p = 0; p < k; ++p) out = out * *this;
    return out;
}

namespace {

CovMonomial multiply_monomials(const CovMonomial& a, const CovMonomial& b) {
    std::vector<Word> words(a.words().begin(), a.words().end() - 1);
    Word joint = a.words().back();
    joint.insert(joint.end(), b.words().front().begin(), b.words().front().end());
    words.push_back(std::move(joint));
    words.insert(words.end(), b.words().begin() + 1, b.words().end());
    std::vector<std::string> indices = a.indices();
    indices.insert(indices.end(), b.indices().begin(), b.indices().end());
    return CovMonomial(a.coefficient() * b.coefficient(), std::move(words),
                       a.pairing().concat(b.pairing()), std::move(indices));
}

}  // namespace

CovPolynomial multiply(const CovPolynomial& f, const CovPolynomial& g) {
    if (!(f.alphabet() == g.alphabet())) throw DomainError("polynomials have different alphabets");
    std::vector<CovMonomial> t;
    t.reserve(f.terms().size() * g.terms().size());
    for (const CovMonomial& a : f.terms())
        for (const CovMonomial& b : g.terms()) t.push_back(multiply_monomials(a, b));
    return CovPolynomial(f.alphabet(), std::move(t));
}

CovPolynomial adjoint(const CovPolynomial& f) {
    std::vector<CovMonomial> t;
    for (const CovMonomial& m : f.terms()) {
        std::vector<Word> words;
        for (auto it = m.words().rbegin(); it != m.words().rend(); ++it) words.push_back(star(*it));
        std::vector<std::string> indices(m.indices().rbegin(), m.indices().rend());
        t.emplace_back(std::conj(m.coefficient()), std::move(words), m.pairing().reflected(),
                       std::move(indices));
    }
    return CovPolynomial(f.alphabet(), std::move(t));
}

CovPolynomial apply_lambda(const std::string& i, const std::string& j, const CovPolynomial& f) {
    std::vector<CovMonomial> t;
    for (const CovMonomial& m : f.terms()) {
        std::vector<Word> words{Word{}};
        words.insert(words.end(), m.words().begin(), m.words().end());
        words.emplace_back();
        std::vector<std::string> indices{i};
        indices.insert(indices.end(), m.indices().begin(), m.indices().end());
        indices.push_back(j);
        t.emplace_back(m.coefficient(), std::move(words), m.pairing().nested_in_outer(),
                       std::move(indices));
    }
    return CovPolynomial(f.alphabet(), std::move(t));
}

int depth(const CovPolynomial& f) {
    int d = 0;
    for (const CovMonomial& m : f.terms()) d = std::max(d, m.depth());
    return d;
}

int degree(const CovPolynomial& f) {
    int d = 0;
    for (const CovMonomial& m : f.terms()) d = std::max(d, m.degree());
    return d;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

int input_dimension(const EvalInputs& in) {
    int n = -1;
    auto take = [&n](int m, const char* what) {
        if (n >= 0 && m != n)
            throw DomainError(std::string("size mismatch: ") + what + " has n=" + std::to_string(m) +
                              ", expected " + std::to_string(n));
        n = m;
    };
    if (in.eta) take(in.eta->n(), "covariance");
    if (in.base && in.base->size() > 0) take(in.base->n(), "base tuple");
    if (in.x && in.x->size() > 0) take(in.x->n(), "x tuple");
    if (n < 0) throw DomainError("evaluation needs at least one of covariance, base or x data");
    return n;
}

class MonomialEvaluator {
public:
    explicit MonomialEvaluator(const EvalInputs& in) : in_(in), chains_(input_dimension(in)) {}

    detail::Chain reduced(const CovMonomial& m, ReductionOrder order) {
        std::vector<detail::Chain> slots;
        slots.reserve(m.words().size());
        for (const Word& w : m.words()) slots.push_back(word_chain(w));
        return chains_.reduce(in_.eta, m.pairing(), m.indices(), std::move(slots), order);
    }

    detail::ChainEvaluator& chains() { return chains_; }

private:
    const EvalInputs& in_;
    detail::ChainEvaluator chains_;
    std::map<std::string, detail::OperandPtr> letters_;

    detail::Chain word_chain(const Word& w) {
        detail::Chain c;
        c.reserve(w.size());
        for (const Letter& l : w) c.push_back(letter_factor(l));
        return c;
    }

    detail::Factor letter_factor(const Letter& l) {
        const bool is_base = l.kind == LetterKind::Base;
        std::string key = (is_base ? "b:" : "x:") + l.symbol + (l.starred ? "*" : "");
        if (auto it = letters_.find(key); it != letters_.end()) return {key, it->second};
        const HermitianTuple* tuple = is_base ? in_.base : in_.x;
        if (tuple == nullptr || !tuple->contains(l.symbol))
            throw DomainError("no matrix supplied for symbol '" + key + "'");
        const Matrix& a = tuple->at(l.symbol);
        detail::OperandPtr op = l.starred ? detail::make_operand(a.adjoint()) : detail::make_operand(a);
        letters_.emplace(key, op);
        return {key, op};
    }
};

}  // namespace

Matrix evaluate(const CovPolynomial& f, const EvalInputs& in, ReductionOrder order) {
    MonomialEvaluator ev(in);
    const int n = ev.chains().n();
    Matrix out = Matrix::Zero(n, n);
    for (const CovMonomial& m : f.terms())
        out += m.coefficient() * ev.chains().to_matrix(ev.reduced(m, order));
    return out;
}

Complex evaluate_trace(const CovPolynomial& f, const EvalInputs& in) {
    MonomialEvaluator ev(in);
    Complex acc = 0.0;
    for (const CovMonomial& m : f.terms())
        acc += m.coefficient() * ev.chains().trace(ev.reduced(m, ReductionOrder::SmallestFirst));
    return acc;
}

}  // namespace covlaw
