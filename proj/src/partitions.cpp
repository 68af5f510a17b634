#include "covlaw/partitions.hpp"

#include "covlaw/errors.hpp"

#include <algorithm>
#include <sstream>

namespace covlaw {

namespace {

void require_even(int length) {
    if (length < 0 || length % 2 != 0) {
        throw DomainError("pair partitions need a nonnegative even length, got " +
                          std::to_string(length));
    }
}

void enumerate_all(std::vector<int>& free_points, std::vector<PairPartition::Block>& acc,
                   std::vector<PairPartition>& out) {
    if (free_points.empty()) {
        out.emplace_back(acc);
        return;
    }
    const int first = free_points.front();
    for (std::size_t k = 1; k < free_points.size(); ++k) {
        const int partner = free_points[k];
        std::vector<int> rest;
        rest.reserve(free_points.size() - 2);
        for (std::size_t q = 1; q < free_points.size(); ++q) {
            if (q != k) rest.push_back(free_points[q]);
        }
        acc.emplace_back(first, partner);
        enumerate_all(rest, acc, out);
        acc.pop_back();
    }
}

// Non-crossing matchings of the interval [lo, hi]: lo pairs with some m such that
// both (lo, m) and (m, hi] have even size.
std::vector<std::vector<PairPartition::Block>> noncrossing_on(int lo, int hi) {
    std::vector<std::vector<PairPartition::Block>> out;
    if (lo > hi) {
        out.emplace_back();
        return out;
    }
    for (int m = lo + 1; m <= hi; m += 2) {
        const auto inner = noncrossing_on(lo + 1, m - 1);
        const auto outer = noncrossing_on(m + 1, hi);
        for (const auto& a : inner) {
            for (const auto& b : outer) {
                std::vector<PairPartition::Block> blocks;
                blocks.reserve(1 + a.size() + b.size());
                blocks.emplace_back(lo, m);
                blocks.insert(blocks.end(), a.begin(), a.end());
                blocks.insert(blocks.end(), b.begin(), b.end());
                out.push_back(std::move(blocks));
            }
        }
    }
    return out;
}

}  // namespace

PairPartition::PairPartition(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
    for (auto& b : blocks_) {
        if (b.first > b.second) std::swap(b.first, b.second);
    }
    std::sort(blocks_.begin(), blocks_.end());
    const int len = length();
    std::vector<int> seen(static_cast<std::size_t>(len) + 1, 0);
    for (const auto& [r, s] : blocks_) {
        if (r < 1 || s > len || r == s) {
            throw DomainError("pair partition block out of range: " + to_string());
        }
        if (seen[r]++ || seen[s]++) {
            throw DomainError("pair partition is not a perfect matching: " + to_string());
        }
    }
}

std::vector<int> PairPartition::partners() const {
    std::vector<int> p(static_cast<std::size_t>(length()));
    for (const auto& [r, s] : blocks_) {
        p[r - 1] = s - 1;
        p[s - 1] = r - 1;
    }
    return p;
}

PairPartition PairPartition::concat(const PairPartition& other) const {
    std::vector<Block> blocks = blocks_;
    const int shift = length();
    for (const auto& [r, s] : other.blocks_) blocks.emplace_back(r + shift, s + shift);
    return PairPartition(std::move(blocks));
}

PairPartition PairPartition::nested_in_outer() const {
    std::vector<Block> blocks;
    blocks.reserve(blocks_.size() + 1);
    blocks.emplace_back(1, length() + 2);
    for (const auto& [r, s] : blocks_) blocks.emplace_back(r + 1, s + 1);
    return PairPartition(std::move(blocks));
}

PairPartition PairPartition::reflected() const {
    std::vector<Block> blocks;
    blocks.reserve(blocks_.size());
    const int len = length();
    for (const auto& [r, s] : blocks_) blocks.emplace_back(len + 1 - s, len + 1 - r);
    return PairPartition(std::move(blocks));
}

PairPartition PairPartition::without_adjacent(int r) const {
    std::vector<Block> blocks;
    blocks.reserve(blocks_.size());
    bool found = false;
    auto relabel = [r](int p) { return p < r ? p : p - 2; };
    for (const auto& b : blocks_) {
        if (b.first == r && b.second == r + 1) {
            found = true;
            continue;
        }
        blocks.emplace_back(relabel(b.first), relabel(b.second));
    }
    if (!found) throw DomainError("block (" + std::to_string(r) + "," + std::to_string(r + 1) +
                                  ") not in " + to_string());
    return PairPartition(std::move(blocks));
}

int PairPartition::nesting_depth() const {
    int best = 0;
    for (int point = 1; point <= length(); ++point) {
        int around = 0;
        for (const auto& [r, s] : blocks_) {
            if (r <= point && point <= s) ++around;
        }
        best = std::max(best, around);
    }
    return best;
}

std::string PairPartition::to_string() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
        if (k) os << ',';
        os << '(' << blocks_[k].first << ',' << blocks_[k].second << ')';
    }
    os << '}';
    return os.str();
}

std::vector<PairPartition> enumerate_pair_partitions(int length) {
    require_even(length);
    std::vector<int> points(static_cast<std::size_t>(length));
    for (int p = 0; p < length; ++p) points[p] = p + 1;
    std::vector<PairPartition::Block> acc;
    std::vector<PairPartition> out;
    out.reserve(static_cast<std::size_t>(double_factorial_odd(length)));
    enumerate_all(points, acc, out);
    return out;
}

std::vector<PairPartition> enumerate_noncrossing(int length) {
    require_even(length);
    std::vector<PairPartition> out;
    for (auto& blocks : noncrossing_on(1, length)) out.emplace_back(std::move(blocks));
    std::sort(out.begin(), out.end());
    return out;
}

bool is_noncrossing(const PairPartition& pi) {
    const auto& b = pi.blocks();
    for (std::size_t a = 0; a < b.size(); ++a) {
        for (std::size_t c = 0; c < b.size(); ++c) {
            const auto [r1, s1] = b[a];
            const auto [r2, s2] = b[c];
            if (r1 < r2 && r2 < s1 && s1 < s2) return false;
        }
    }
    return true;
}

PairPartition::Block find_innermost_adjacent(const PairPartition& pi) {
    if (pi.empty()) throw DomainError("empty partition has no adjacent block");
    if (!is_noncrossing(pi)) throw DomainError("partition has a crossing: " + pi.to_string());
    for (const auto& b : pi.blocks()) {
        if (b.second == b.first + 1) return b;
    }
    // Unreachable for a non-crossing matching.
    throw DomainError("no adjacent block in " + pi.to_string());
}

long long double_factorial_odd(int length) {
    require_even(length);
    long long v = 1;
    for (int k = length - 1; k > 1; k -= 2) v *= k;
    return v;
}

long long catalan(int k) {
    long long c = 1;
    for (int j = 0; j < k; ++j) c = c * 2 * (2 * j + 1) / (j + 2);
    return c;
}

long long crossing_count(int length) {
    return double_factorial_odd(length) - catalan(length / 2);
}

}  // namespace covlaw
