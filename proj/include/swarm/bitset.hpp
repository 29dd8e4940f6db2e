#ifndef SWARM_BITSET_HPP
#define SWARM_BITSET_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace swarm {

// Fixed-size bit vector for dense position sets.
class PositionSet {
public:
    PositionSet() = default;
    explicit PositionSet(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

    static PositionSet all(std::size_t n) {
        PositionSet s(n);
        for (auto& w : s.words_) w = ~0ULL;
        s.trim();
        return s;
    }

    std::size_t size() const { return n_; }

    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1ULL; }
    void set(std::size_t i) { words_[i >> 6] |= 1ULL << (i & 63); }
    void reset(std::size_t i) { words_[i >> 6] &= ~(1ULL << (i & 63)); }

    bool operator==(const PositionSet& o) const { return n_ == o.n_ && words_ == o.words_; }

    PositionSet& operator&=(const PositionSet& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }
    PositionSet& operator|=(const PositionSet& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }

    bool empty() const {
        for (auto w : words_)
            if (w) return false;
        return true;
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
        return c;
    }

    bool subset_of(const PositionSet& o) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~o.words_[i]) return false;
        return true;
    }

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;

    void trim() {
        if (n_ & 63) words_.back() &= (1ULL << (n_ & 63)) - 1;
    }
};

}  // namespace swarm

#endif
