#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "scalar.hpp"
#include "space.hpp"

namespace blens {

/// A finitely-supported probability distribution over a Space.
///
/// Masses are stored sparsely as (index, mass) pairs sorted by index;
/// zero masses are never stored, so `entries()` is exactly the support.
/// Construction validates: every label belongs to the space, masses are
/// nonnegative and finite, and the total is one (exactly in rational
/// mode, within `norm_eps` in float mode).
template <class T>
class Dist {
public:
    using traits = scalar_traits<T>;
    using Entry = std::pair<std::size_t, T>;

    /// Builds a distribution from labelled masses.  Duplicate labels
    /// accumulate.  Throws UnknownElement / NegativeMass / NotNormalized.
    static Dist make(const Space& space,
                     const std::vector<std::pair<std::string, T>>& masses,
                     const T& norm_eps = traits::norm_eps()) {
        std::vector<T> dense(space.size(), traits::zero());
        for (const auto& [label, m] : masses) {
            std::size_t i = space.index_of(label);
            if (!traits::finite(m))
                throw NegativeMass("mass at \"" + label + "\" is not finite");
            if (m < traits::zero())
                throw NegativeMass("mass at \"" + label + "\" is negative: " + traits::to_text(m));
            dense[i] += m;
        }
        return from_dense(space, dense, norm_eps);
    }

    /// Builds a distribution from a dense mass vector in element order.
    static Dist from_dense(const Space& space, const std::vector<T>& dense,
                           const T& norm_eps = traits::norm_eps()) {
        if (dense.size() != space.size())
            throw SpaceMismatch("dense mass vector has " + std::to_string(dense.size()) +
                                " entries for space " + space.name() + " of size " +
                                std::to_string(space.size()));
        std::vector<Entry> entries;
        T total = traits::zero();
        for (std::size_t i = 0; i < dense.size(); ++i) {
            const T& m = dense[i];
            if (!traits::finite(m))
                throw NegativeMass("mass at \"" + space.label(i) + "\" is not finite");
            if (m < traits::zero())
                throw NegativeMass("mass at \"" + space.label(i) + "\" is negative: " +
                                   traits::to_text(m));
            if (m == traits::zero()) continue;
            entries.emplace_back(i, m);
            total += m;
        }
        if (!approx_eq(total, traits::one(), norm_eps))
            throw NotNormalized("masses on " + space.name() + " sum to " +
                                traits::to_text(total) + ", not 1");
        return Dist(space, std::move(entries), Trusted{});
    }

    /// The point mass at one element.
    static Dist dirac(const Space& space, std::string_view x) {
        std::size_t i = space.index_of(x);
        return Dist(space, {{i, traits::one()}}, Trusted{});
    }

    /// Internal constructor for values that are normalized by
    /// construction (entries must be sorted, positive, zero-free).
    struct Trusted {};
    Dist(Space space, std::vector<Entry> entries, Trusted)
        : space_(std::move(space)), entries_(std::move(entries)) {}

    const Space& space() const { return space_; }

    /// Support as sorted (index, mass) pairs.
    const std::vector<Entry>& entries() const { return entries_; }

    std::size_t support_size() const { return entries_.size(); }

    T mass(std::size_t idx) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), idx,
                                   [](const Entry& e, std::size_t i) { return e.first < i; });
        if (it != entries_.end() && it->first == idx) return it->second;
        return traits::zero();
    }

    T mass(std::string_view label) const { return mass(space_.index_of(label)); }

    bool in_support(std::size_t idx) const { return mass(idx) != traits::zero(); }

    T total() const {
        T t = traits::zero();
        for (const auto& [i, m] : entries_) t += m;
        return t;
    }

    std::vector<T> dense() const {
        std::vector<T> out(space_.size(), traits::zero());
        for (const auto& [i, m] : entries_) out[i] = m;
        return out;
    }

private:
    Space space_;
    std::vector<Entry> entries_;
};

/// Pointwise equality of two distributions within eps.  Distributions on
/// different spaces are never equal.
template <class T>
bool dists_equal(const Dist<T>& a, const Dist<T>& b,
                 const T& eps = scalar_traits<T>::cmp_eps()) {
    if (a.space() != b.space()) return false;
    auto da = a.dense(), db = b.dense();
    for (std::size_t i = 0; i < da.size(); ++i)
        if (!approx_eq(da[i], db[i], eps)) return false;
    return true;
}

/// Total-variation distance: half the L1 distance between mass vectors.
template <class T>
T total_variation(const Dist<T>& a, const Dist<T>& b) {
    if (a.space() != b.space())
        throw SpaceMismatch("total_variation: " + a.space().name() + " vs " + b.space().name());
    using traits = scalar_traits<T>;
    auto da = a.dense(), db = b.dense();
    T sum = traits::zero();
    for (std::size_t i = 0; i < da.size(); ++i)
        sum += traits::abs(da[i] - db[i]);
    return sum / traits::from_int(2);
}

/// Convex combination sum_k w_k * d_k.  The weights must form a
/// distribution themselves (nonnegative, summing to one) and all
/// components must live on the same space.
template <class T>
Dist<T> convex_mix(const std::vector<std::pair<T, Dist<T>>>& parts,
                   const T& norm_eps = scalar_traits<T>::norm_eps()) {
    using traits = scalar_traits<T>;
    if (parts.empty()) throw NotNormalized("convex_mix: no components");
    const Space& sp = parts.front().second.space();
    T wsum = traits::zero();
    std::vector<T> acc(sp.size(), traits::zero());
    for (const auto& [w, d] : parts) {
        if (!traits::finite(w))
            throw NegativeMass("convex_mix: weight is not finite");
        if (w < traits::zero())
            throw NegativeMass("convex_mix: negative weight " + traits::to_text(w));
        if (d.space() != sp)
            throw SpaceMismatch("convex_mix: component on " + d.space().name() +
                                ", expected " + sp.name());
        wsum += w;
        for (const auto& [i, m] : d.entries()) acc[i] += w * m;
    }
    if (!approx_eq(wsum, traits::one(), norm_eps))
        throw NotNormalized("convex_mix: weights sum to " + traits::to_text(wsum) + ", not 1");
    typename Dist<T>::Trusted tag;
    std::vector<typename Dist<T>::Entry> entries;
    for (std::size_t i = 0; i < acc.size(); ++i)
        if (acc[i] != traits::zero()) entries.emplace_back(i, acc[i]);
    return Dist<T>(sp, std::move(entries), tag);
}

} // namespace blens
