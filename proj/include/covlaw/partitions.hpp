#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace covlaw {

/// A perfect matching of {1,...,length}. Blocks are 1-based pairs (r,s), r < s,
/// kept sorted by r so that equal matchings compare equal.
class PairPartition {
public:
    using Block = std::pair<int, int>;

    PairPartition() = default;
    /// Validates the matching and sorts it into canonical form.
    explicit PairPartition(std::vector<Block> blocks);

    int length() const noexcept { return static_cast<int>(2 * blocks_.size()); }
    std::size_t size() const noexcept { return blocks_.size(); }
    bool empty() const noexcept { return blocks_.empty(); }
    const std::vector<Block>& blocks() const noexcept { return blocks_; }

    /// partner[p-1] = q-1 for every block {p,q} (0-based).
    std::vector<int> partners() const;

    /// This matching followed by `other` with its blocks shifted by length().
    PairPartition concat(const PairPartition& other) const;
    /// {(1,2k+2)} plus this matching shifted by one.
    PairPartition nested_in_outer() const;
    /// Mirror image p -> length()+1-p.
    PairPartition reflected() const;
    /// Remove block (r, r+1) and renumber the remaining points.
    PairPartition without_adjacent(int r) const;

    /// Maximal number of blocks nested around a single point (0 for empty).
    int nesting_depth() const;

    std::string to_string() const;

    auto operator<=>(const PairPartition&) const = default;

private:
    std::vector<Block> blocks_;
};

/// All (l-1)!! matchings of {1..l}; l=0 gives the single empty matching.
std::vector<PairPartition> enumerate_pair_partitions(int length);

/// The Catalan(l/2) non-crossing matchings, generated directly (not by filtering).
std::vector<PairPartition> enumerate_noncrossing(int length);

bool is_noncrossing(const PairPartition& pi);

/// Smallest r with (r, r+1) a block. Throws DomainError on crossing or empty input.
PairPartition::Block find_innermost_adjacent(const PairPartition& pi);

/// Number of matchings of `length` points with at least one crossing.
long long crossing_count(int length);

long long double_factorial_odd(int length);  // (length-1)!!
long long catalan(int k);

}  // namespace covlaw
