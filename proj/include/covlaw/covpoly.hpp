#pragma once

#include "covlaw/covariance.hpp"
#include "covlaw/partitions.hpp"

#include <compare>
#include <optional>
#include <string>
#include <vector>

namespace covlaw {

enum class LetterKind { Base, Semicircular };

/// A generator b_omega (Base) or x_i (Semicircular), possibly starred.
struct Letter {
    LetterKind kind = LetterKind::Base;
    std::string symbol;
    bool starred = false;

    auto operator<=>(const Letter&) const = default;
};

using Word = std::vector<Letter>;

/// Reversed word with every star toggled.
Word star(const Word& w);

/// Declared symbols: base names Omega and index names I (x-letters and Lambda indices).
struct Alphabet {
    std::vector<std::string> base;
    std::vector<std::string> indices;

    /// Sorted, deduplicated alphabet.
    static Alphabet make(std::vector<std::string> base, std::vector<std::string> indices);
    bool has_base(const std::string& s) const;
    bool has_index(const std::string& s) const;

    auto operator<=>(const Alphabet&) const = default;
};

/// coefficient * w_0 eta_{pi, i}[w_1, ..., w_{2k-1}] w_{2k}, pi non-crossing.
class CovMonomial {
public:
    CovMonomial() : words_(1) {}
    /// Validates 2k+1 words, |indices| = 2k and non-crossing pairing.
    CovMonomial(Complex coefficient, std::vector<Word> words, PairPartition pairing,
                std::vector<std::string> indices);

    Complex coefficient() const noexcept { return coefficient_; }
    const std::vector<Word>& words() const noexcept { return words_; }
    const PairPartition& pairing() const noexcept { return pairing_; }
    const std::vector<std::string>& indices() const noexcept { return indices_; }
    int k() const noexcept { return static_cast<int>(pairing_.size()); }
    int depth() const { return pairing_.nesting_depth(); }
    int degree() const;

    CovMonomial with_coefficient(Complex c) const;

    /// Ordering and equality of (words, pairing, indices), ignoring the coefficient.
    std::weak_ordering compare_shape(const CovMonomial& other) const;
    bool same_shape(const CovMonomial& other) const { return compare_shape(other) == 0; }

    bool operator==(const CovMonomial& other) const {
        return coefficient_ == other.coefficient_ && same_shape(other);
    }

private:
    Complex coefficient_{1.0, 0.0};
    std::vector<Word> words_;
    PairPartition pairing_;
    std::vector<std::string> indices_;
};

/// Finite sum of monomials in canonical form: sorted by shape, merged, zero terms pruned.
class CovPolynomial {
public:
    CovPolynomial() = default;
    explicit CovPolynomial(Alphabet alphabet) : alphabet_(std::move(alphabet)) {}
    CovPolynomial(Alphabet alphabet, std::vector<CovMonomial> terms);

    static CovPolynomial scalar(const Alphabet& a, Complex c);
    static CovPolynomial one(const Alphabet& a) { return scalar(a, 1.0); }
    static CovPolynomial base(const Alphabet& a, const std::string& omega, bool starred = false);
    static CovPolynomial x(const Alphabet& a, const std::string& i, bool starred = false);

    const Alphabet& alphabet() const noexcept { return alphabet_; }
    const std::vector<CovMonomial>& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }

    CovPolynomial operator+(const CovPolynomial& g) const;
    CovPolynomial operator-(const CovPolynomial& g) const;
    CovPolynomial operator-() const;
    CovPolynomial operator*(const CovPolynomial& g) const;
    CovPolynomial scaled(Complex c) const;
    CovPolynomial pow(int k) const;

    bool operator==(const CovPolynomial& g) const = default;

private:
    Alphabet alphabet_;
    std::vector<CovMonomial> terms_;
    void require_same_alphabet(const CovPolynomial& g) const;
};

CovPolynomial multiply(const CovPolynomial& f, const CovPolynomial& g);
CovPolynomial adjoint(const CovPolynomial& f);
CovPolynomial apply_lambda(const std::string& i, const std::string& j, const CovPolynomial& f);
int depth(const CovPolynomial& f);
int degree(const CovPolynomial& f);

/// Which adjacent block the reduction removes first.
enum class ReductionOrder { SmallestFirst, LargestFirst };

/// Concrete data for evaluation. Absent tuples may only be absent if unused.
struct EvalInputs {
    const HermitianTuple* base = nullptr;
    const HermitianTuple* x = nullptr;
    const DiscreteCovariance* eta = nullptr;
};

Matrix evaluate(const CovPolynomial& f, const EvalInputs& in,
                ReductionOrder order = ReductionOrder::SmallestFirst);

/// tr_n(evaluate(f)), computed without forming the final product when possible.
Complex evaluate_trace(const CovPolynomial& f, const EvalInputs& in);

/// Text form: terms joined by " + " / " - "; a term is an optional coefficient
/// (real or {re,im}) followed by factors b:name, x:name (optional '*' suffix),
/// L[i,j](...), (...), each optionally raised with ^k.
std::string to_string(const CovPolynomial& f);

/// Parses the text form. Without an alphabet, it is inferred from the symbols used.
/// Throws DomainError with the offending column.
CovPolynomial parse_polynomial(const std::string& text,
                               const std::optional<Alphabet>& alphabet = std::nullopt);

}  // namespace covlaw
