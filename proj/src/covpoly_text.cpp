#include "covlaw/covpoly.hpp"

#include "covlaw/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace covlaw {

namespace {

std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string letter_text(const Letter& l) {
    return (l.kind == LetterKind::Base ? "b:" : "x:") + l.symbol + (l.starred ? "*" : "");
}

void append_word(std::vector<std::string>& out, const Word& w) {
    for (std::size_t p = 0; p < w.size();) {
        std::size_t q = p;
        while (q < w.size() && w[q] == w[p]) ++q;
        std::string tok = letter_text(w[p]);
        if (q - p > 1) tok += "^" + std::to_string(q - p);
        out.push_back(std::move(tok));
        p = q;
    }
}

std::string join(const std::vector<std::string>& toks) {
    std::string s;
    for (std::size_t p = 0; p < toks.size(); ++p) {
        if (p) s += ' ';
        s += toks[p];
    }
    return s;
}

// Slot `first` followed by the blocks opening in [lo, hi].
std::string emit_sequence(const CovMonomial& m, const std::vector<int>& partner, int first, int lo, int hi) {
    std::vector<std::string> toks;
    append_word(toks, m.words()[first]);
    for (int p = lo; p <= hi;) {
        const int q = partner[p - 1] + 1;
        const std::string inner = emit_sequence(m, partner, p, p + 1, q - 1);
        toks.push_back("L[" + m.indices()[p - 1] + "," + m.indices()[q - 1] + "](" + (inner.empty() ? "1" : inner) + ")");
        append_word(toks, m.words()[q]);
        p = q + 1;
    }
    return join(toks);
}

std::string monomial_body(const CovMonomial& m) {
    return emit_sequence(m, m.pairing().partners(), 0, 1, m.pairing().length());
}

// ---------------------------------------------------------------------------

class Parser {
public:
    Parser(const std::string& text, Alphabet alphabet) : s_(text), a_(std::move(alphabet)) {}

    CovPolynomial parse() {
        CovPolynomial f = sum();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return f;
    }

private:
    const std::string& s_;
    Alphabet a_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw DomainError("polynomial parse error at column " + std::to_string(pos_ + 1) + ": " + what);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    bool accept(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    bool starts_with(const char* lit) {
        skip_ws();
        return s_.compare(pos_, std::char_traits<char>::length(lit), lit) == 0;
    }

    std::string name() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        if (pos_ == start) fail("expected a symbol name");
        return s_.substr(start, pos_ - start);
    }

    double number() {
        skip_ws();
        double v = 0.0;
        const char* begin = s_.data() + pos_;
        const auto res = std::from_chars(begin, s_.data() + s_.size(), v);
        if (res.ec != std::errc() || res.ptr == begin) fail("expected a number");
        pos_ += static_cast<std::size_t>(res.ptr - begin);
        return v;
    }

    bool at_number() {
        skip_ws();
        return pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.');
    }

    bool at_factor() {
        skip_ws();
        if (pos_ >= s_.size()) return false;
        const char c = s_[pos_];
        return c == '(' || c == '{' || at_number() || starts_with("b:") || starts_with("x:") ||
               starts_with("L[");
    }

    CovPolynomial sum() {
        CovPolynomial acc(a_);
        bool negative = false;
        if (accept('-')) negative = true;
        else accept('+');
        for (;;) {
            CovPolynomial t = term();
            acc = negative ? acc - t : acc + t;
            if (accept('+')) negative = false;
            else if (accept('-')) negative = true;
            else break;
        }
        return acc;
    }

    CovPolynomial term() {
        if (!at_factor()) fail("expected a term");
        CovPolynomial acc = CovPolynomial::one(a_);
        while (at_factor()) acc = acc * factor();
        return acc;
    }

    CovPolynomial factor() {
        CovPolynomial base = primary();
        if (accept('^')) {
            skip_ws();
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (pos_ == start) fail("expected an exponent");
            base = base.pow(std::stoi(s_.substr(start, pos_ - start)));
        }
        return base;
    }

    CovPolynomial primary() {
        if (accept('(')) {
            CovPolynomial f = sum();
            expect(')');
            return f;
        }
        if (accept('{')) {
            const double re = number();
            expect(',');
            const double im = number();
            expect('}');
            return CovPolynomial::scalar(a_, Complex(re, im));
        }
        if (at_number()) return CovPolynomial::scalar(a_, number());
        if (starts_with("b:") || starts_with("x:")) {
            const bool is_base = s_[pos_] == 'b';
            pos_ += 2;
            const std::string sym = name();
            const bool starred = pos_ < s_.size() && s_[pos_] == '*' && (++pos_, true);
            if (is_base) {
                if (!a_.has_base(sym)) fail("base symbol '" + sym + "' is not in the alphabet");
                return CovPolynomial::base(a_, sym, starred);
            }
            if (!a_.has_index(sym)) fail("index '" + sym + "' is not in the alphabet");
            return CovPolynomial::x(a_, sym, starred);
        }
        if (starts_with("L[")) {
            pos_ += 2;
            const std::string i = name();
            expect(',');
            const std::string j = name();
            expect(']');
            if (!a_.has_index(i) || !a_.has_index(j)) fail("Lambda index is not in the alphabet");
            expect('(');
            CovPolynomial inner = sum();
            expect(')');
            return apply_lambda(i, j, inner);
        }
        fail("expected a factor");
    }
};

Alphabet infer_alphabet(const std::string& text) {
    std::vector<std::string> base, indices;
    auto read_name = [&text](std::size_t p) {
        std::size_t q = p;
        while (q < text.size() && (std::isalnum(static_cast<unsigned char>(text[q])) || text[q] == '_')) ++q;
        return text.substr(p, q - p);
    };
    for (std::size_t p = 0; p + 1 < text.size(); ++p) {
        if (text[p + 1] == ':' && (text[p] == 'b' || text[p] == 'x')) {
            const std::string sym = read_name(p + 2);
            if (!sym.empty()) (text[p] == 'b' ? base : indices).push_back(sym);
        } else if (text[p] == 'L' && text[p + 1] == '[') {
            std::size_t q = p + 2;
            while (q < text.size() && std::isspace(static_cast<unsigned char>(text[q]))) ++q;
            const std::string i = read_name(q);
            q += i.size();
            while (q < text.size() && (std::isspace(static_cast<unsigned char>(text[q])) || text[q] == ',')) ++q;
            const std::string j = read_name(q);
            if (!i.empty()) indices.push_back(i);
            if (!j.empty()) indices.push_back(j);
        }
    }
    return Alphabet::make(std::move(base), std::move(indices));
}

}  // namespace

std::string to_string(const CovPolynomial& f) {
    if (f.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const CovMonomial& m : f.terms()) {
        Complex c = m.coefficient();
        bool negative = false;
        if (c.imag() == 0.0 && std::signbit(c.real())) {
            negative = true;
            c = -c;
        }
        const std::string body = monomial_body(m);
        std::string coef;
        if (c.imag() != 0.0) coef = "{" + format_real(c.real()) + "," + format_real(c.imag()) + "}";
        else if (!(c.real() == 1.0 && !body.empty())) coef = format_real(c.real());
        std::string text = coef.empty() ? body : body.empty() ? coef : coef + " " + body;
        if (first) out += negative ? "-" + text : text;
        else out += (negative ? " - " : " + ") + text;
        first = false;
    }
    return out;
}

CovPolynomial parse_polynomial(const std::string& text, const std::optional<Alphabet>& alphabet) {
    Parser p(text, alphabet ? *alphabet : infer_alphabet(text));
    return p.parse();
}

}  // namespace covlaw
