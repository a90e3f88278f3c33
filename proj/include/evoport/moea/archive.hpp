#pragma once

#include "evoport/moea/core.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace evoport::moea {

// Non-dominated archive maintained by the four archiving rules:
//   - every evaluated solution is a candidate for archiving,
//   - a candidate that dominates existing members evicts them,
//   - a candidate dominated by any member is discarded,
//   - a mutually non-dominated candidate is added.
// Duplicates (identical objective vectors) are kept at most once.
// Members are therefore pairwise non-dominated at all times.
template <typename GenomeType>
class ParetoArchive {
public:
    using Member = Individual<GenomeType>;

    ParetoArchive() = default;

    // capacity 0 means unbounded; otherwise the most crowded member
    // (smallest nearest-neighbor distance profile) is dropped on overflow.
    explicit ParetoArchive(std::size_t capacity) : capacity_(capacity) {}

    // Returns true when the candidate entered the archive.
    bool insert(Member candidate) {
        for (const Member& m : members_) {
            if (m.objectives == candidate.objectives)
                return false;
            if (dominates(m.objectives, candidate.objectives))
                return false;
        }
        std::erase_if(members_, [&](const Member& m) {
            return dominates(candidate.objectives, m.objectives);
        });
        members_.push_back(std::move(candidate));
        if (capacity_ != 0 && members_.size() > capacity_)
            truncate_most_crowded();
        return true;
    }

    const std::vector<Member>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    std::size_t capacity() const { return capacity_; }

    // Test hook: verifies the mutual non-domination invariant.
    bool mutually_nondominated() const {
        for (std::size_t i = 0; i < members_.size(); ++i)
            for (std::size_t j = 0; j < members_.size(); ++j)
                if (i != j && dominates(members_[i].objectives, members_[j].objectives))
                    return false;
        return true;
    }

private:
    void truncate_most_crowded() {
        const std::size_t n = members_.size();
        std::vector<std::vector<double>> profile(n);
        for (std::size_t i = 0; i < n; ++i) {
            profile[i].reserve(n - 1);
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j)
                    continue;
                double d2 = 0.0;
                for (std::size_t k = 0; k < members_[i].objectives.size(); ++k) {
                    const double diff = members_[i].objectives[k] - members_[j].objectives[k];
                    d2 += diff * diff;
                }
                profile[i].push_back(d2);
            }
            std::sort(profile[i].begin(), profile[i].end());
        }
        std::size_t victim = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (profile[i] < profile[victim])
                victim = i;
        members_.erase(members_.begin() + static_cast<std::ptrdiff_t>(victim));
    }

    std::vector<Member> members_;
    std::size_t capacity_ = 0;
};

} // namespace evoport::moea
