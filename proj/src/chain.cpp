#include "chain.hpp"

#include "covlaw/errors.hpp"

namespace covlaw::detail {

std::string chain_key(const Chain& c) {
    std::string key;
    for (std::size_t p = 0; p < c.size(); ++p) {
        if (p) key += ' ';
        key += c[p].key;
    }
    return key;
}

OperandPtr identity_operand() {
    static const OperandPtr id = std::make_shared<Operand>();
    return id;
}

OperandPtr make_diagonal(Vector d) {
    auto op = std::make_shared<Operand>();
    op->kind = Operand::Kind::Diagonal;
    op->diag = std::move(d);
    return op;
}

OperandPtr make_operand(const Matrix& m) {
    bool diagonal = true;
    for (Eigen::Index t = 0; t < m.cols() && diagonal; ++t)
        for (Eigen::Index s = 0; s < m.rows(); ++s)
            if (s != t && m(s, t) != Complex(0.0, 0.0)) {
                diagonal = false;
                break;
            }
    if (diagonal) return make_diagonal(m.diagonal());
    auto op = std::make_shared<Operand>();
    op->kind = Operand::Kind::Dense;
    op->dense = m;
    return op;
}

Matrix to_matrix(const Operand& op, int n) {
    switch (op.kind) {
        case Operand::Kind::Identity: return Matrix::Identity(n, n);
        case Operand::Kind::Diagonal: {
            Matrix m = Matrix::Zero(n, n);
            m.diagonal() = op.diag;
            return m;
        }
        case Operand::Kind::Dense: return op.dense;
    }
    return {};
}

OperandPtr multiply(const Operand& a, const Operand& b) {
    using K = Operand::Kind;
    auto out = std::make_shared<Operand>();
    if (a.kind == K::Identity) {
        *out = b;
    } else if (b.kind == K::Identity) {
        *out = a;
    } else if (a.kind == K::Diagonal && b.kind == K::Diagonal) {
        out->kind = K::Diagonal;
        out->diag = a.diag.cwiseProduct(b.diag);
    } else if (a.kind == K::Diagonal) {
        out->kind = K::Dense;
        out->dense = a.diag.asDiagonal() * b.dense;
    } else if (b.kind == K::Diagonal) {
        out->kind = K::Dense;
        out->dense = a.dense * b.diag.asDiagonal();
    } else {
        out->kind = K::Dense;
        out->dense.noalias() = a.dense * b.dense;
    }
    return out;
}

OperandPtr add(const Operand& a, const Operand& b, int n) {
    using K = Operand::Kind;
    auto diag_of = [n](const Operand& op) -> Vector {
        return op.kind == K::Identity ? Vector(Vector::Ones(n)) : op.diag;
    };
    if (a.kind != K::Dense && b.kind != K::Dense) return make_diagonal(diag_of(a) + diag_of(b));
    auto out = std::make_shared<Operand>();
    out->kind = K::Dense;
    out->dense = to_matrix(a, n) + to_matrix(b, n);
    return out;
}

OperandPtr apply_eta(const DiscreteCovariance& eta, int i, int j, const Operand& op) {
    const int n = eta.n();
    if (eta.is_kernel()) {
        Vector d;
        switch (op.kind) {
            case Operand::Kind::Identity: d = Vector::Ones(n); break;
            case Operand::Kind::Diagonal: d = op.diag; break;
            case Operand::Kind::Dense: d = op.dense.diagonal(); break;
        }
        return make_diagonal(eta.apply_diagonal(i, j, d));
    }
    return make_operand(eta.apply(i, j, to_matrix(op, n)));
}

OperandPtr ChainEvaluator::product(const Chain& c) {
    if (c.empty()) return identity_operand();
    if (c.size() == 1) return c.front().op;
    const std::string key = chain_key(c);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const auto mid = c.begin() + static_cast<std::ptrdiff_t>(c.size() / 2);
    const OperandPtr left = product(Chain(c.begin(), mid));
    const OperandPtr right = product(Chain(mid, c.end()));
    OperandPtr result = multiply(*left, *right);
    memo_.emplace(key, result);
    return result;
}

Vector ChainEvaluator::diagonal(const Chain& c) {
    using K = Operand::Kind;
    auto diag_of = [this](const Operand& op) -> Vector {
        switch (op.kind) {
            case K::Identity: return Vector::Ones(n_);
            case K::Diagonal: return op.diag;
            case K::Dense: return op.dense.diagonal();
        }
        return {};
    };
    if (c.empty()) return Vector::Ones(n_);
    if (c.size() == 1) return diag_of(*c.front().op);
    // Peel diagonal factors at either end.
    if (c.front().op->kind != K::Dense)
        return diag_of(*c.front().op).cwiseProduct(diagonal(Chain(c.begin() + 1, c.end())));
    if (c.back().op->kind != K::Dense)
        return diagonal(Chain(c.begin(), c.end() - 1)).cwiseProduct(diag_of(*c.back().op));
    if (auto it = memo_.find(chain_key(c)); it != memo_.end()) return diag_of(*it->second);
    const auto mid = c.begin() + static_cast<std::ptrdiff_t>(c.size() / 2);
    const OperandPtr left = product(Chain(c.begin(), mid));
    const OperandPtr right = product(Chain(mid, c.end()));
    if (left->kind != K::Dense || right->kind != K::Dense)
        return diag_of(*multiply(*left, *right));
    return left->dense.cwiseProduct(right->dense.transpose()).rowwise().sum();
}

Complex ChainEvaluator::trace(const Chain& c) {
    for (std::size_t p = 0; p < c.size(); ++p) {
        if (c[p].op->kind != Operand::Kind::Dense) {
            Chain rotated(c.begin() + static_cast<std::ptrdiff_t>(p), c.end());
            rotated.insert(rotated.end(), c.begin(), c.begin() + static_cast<std::ptrdiff_t>(p));
            return diagonal(rotated).sum() / static_cast<double>(n_);
        }
    }
    return diagonal(c).sum() / static_cast<double>(n_);
}

Factor ChainEvaluator::eta_factor(const DiscreteCovariance& eta, int i, int j,
                                  const std::string& name_i, const std::string& name_j,
                                  const Chain& inner) {
    const std::string key = "L[" + name_i + "," + name_j + "](" + chain_key(inner) + ")";
    if (auto it = memo_.find(key); it != memo_.end()) return {key, it->second};
    OperandPtr op;
    if (eta.is_kernel()) {
        op = make_diagonal(eta.apply_diagonal(i, j, diagonal(inner)));
    } else {
        op = apply_eta(eta, i, j, *product(inner));
    }
    memo_.emplace(key, op);
    return {key, op};
}

Chain ChainEvaluator::reduce(const DiscreteCovariance* eta, PairPartition pi,
                             std::vector<std::string> indices, std::vector<Chain> slots,
                             ReductionOrder order) {
    if (static_cast<int>(indices.size()) != pi.length())
        throw DomainError("index tuple length does not match the pairing");
    if (static_cast<int>(slots.size()) != pi.length() + 1)
        throw DomainError("expected " + std::to_string(pi.length() + 1) + " slots, got " +
                          std::to_string(slots.size()));
    if (!pi.empty() && eta == nullptr) throw DomainError("evaluation needs a covariance");
    if (!is_noncrossing(pi)) throw DomainError("pairing " + pi.to_string() + " is crossing");
    while (!pi.empty()) {
        int r = 0;
        if (order == ReductionOrder::SmallestFirst) {
            r = find_innermost_adjacent(pi).first;
        } else {
            for (const auto& [a, b] : pi.blocks())
                if (b == a + 1) r = std::max(r, a);
        }
        const std::string& ni = indices[r - 1];
        const std::string& nj = indices[r];
        Factor f = eta_factor(*eta, eta->index_of(ni), eta->index_of(nj), ni, nj, slots[r]);
        Chain merged = std::move(slots[r - 1]);
        merged.push_back(std::move(f));
        merged.insert(merged.end(), slots[r + 1].begin(), slots[r + 1].end());
        slots[r - 1] = std::move(merged);
        slots.erase(slots.begin() + r, slots.begin() + r + 2);
        indices.erase(indices.begin() + (r - 1), indices.begin() + (r + 1));
        pi = pi.without_adjacent(r);
    }
    return std::move(slots.front());
}

}  // namespace covlaw::detail
