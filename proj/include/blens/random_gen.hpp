#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "channel.hpp"

namespace blens {

/// Deterministic 64-bit stream (splitmix64).  Every randomized routine
/// in the library draws from one of these, keyed by (seed, trial index),
/// so runs are reproducible bit-for-bit regardless of platform, standard
/// library, or execution order — which is what lets parallel and serial
/// verification runs produce identical reports.
struct TrialRng {
    std::uint64_t state;

    explicit TrialRng(std::uint64_t s) : state(s) {}

    /// Independent stream for one trial of a seeded run.
    static TrialRng for_trial(std::uint64_t seed, std::uint64_t trial) {
        TrialRng mixer(seed + 0x9e3779b97f4a7c15ULL * (trial + 1));
        mixer.next();
        return mixer;
    }

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform draw in [0, n) via fixed-point multiply (no modulo bias
    /// worth speaking of at these ranges, and fully deterministic).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    /// Uniform draw in [lo, hi] inclusive.
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
        return lo + below(hi - lo + 1);
    }

    bool coin() { return (next() & 1) != 0; }
};

/// A fresh space named `name` with elements e0, e1, ...
inline Space fresh_space(const std::string& name, std::size_t n) {
    std::vector<std::string> elems;
    elems.reserve(n);
    for (std::size_t i = 0; i < n; ++i) elems.push_back("e" + std::to_string(i));
    return Space(name, std::move(elems));
}

/// Random distribution on a space.  With `full_support` every element
/// receives mass at least 1/(4k) where k is the support size (= the
/// space size): masses are 1/(4k) + (3/4) w_i / W for integer weights
/// w_i in [1, 64], W their sum.  Exact in rational mode; the float mode
/// draws the same integers, so the two modes generate the same instance.
/// Without `full_support` a random nonempty subset carries the mass,
/// floored the same way on that subset.
template <class T>
Dist<T> random_dist(const Space& space, TrialRng& rng, bool full_support = true) {
    using traits = scalar_traits<T>;
    std::size_t n = space.size();
    std::vector<std::size_t> chosen;
    if (full_support) {
        for (std::size_t i = 0; i < n; ++i) chosen.push_back(i);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            if (rng.coin()) chosen.push_back(i);
        if (chosen.empty()) chosen.push_back(rng.below(n));
    }
    std::size_t k = chosen.size();
    std::vector<long> w(k);
    long wsum = 0;
    for (std::size_t i = 0; i < k; ++i) {
        w[i] = static_cast<long>(rng.between(1, 64));
        wsum += w[i];
    }
    std::vector<typename Dist<T>::Entry> entries;
    entries.reserve(k);
    T floor = traits::ratio(1, static_cast<long>(4 * k));
    T rest = traits::ratio(3, 4);
    for (std::size_t i = 0; i < k; ++i)
        entries.emplace_back(chosen[i], floor + rest * traits::ratio(w[i], wsum));
    typename Dist<T>::Trusted tag;
    return Dist<T>(space, std::move(entries), tag);
}

/// Random channel: an independent random row per domain element.
template <class T>
Channel<T> random_channel(const Space& dom, const Space& cod, TrialRng& rng,
                          bool full_support = true) {
    std::vector<Dist<T>> rows;
    rows.reserve(dom.size());
    for (std::size_t i = 0; i < dom.size(); ++i)
        rows.push_back(random_dist<T>(cod, rng, full_support));
    return Channel<T>::from_rows(dom, cod, std::move(rows));
}

/// Random deterministic channel: each element maps to a uniformly chosen
/// point mass.
template <class T>
Channel<T> random_deterministic_channel(const Space& dom, const Space& cod, TrialRng& rng) {
    std::vector<Dist<T>> rows;
    rows.reserve(dom.size());
    for (std::size_t i = 0; i < dom.size(); ++i)
        rows.push_back(Dist<T>::dirac(cod, cod.label(rng.below(cod.size()))));
    return Channel<T>::from_rows(dom, cod, std::move(rows));
}

} // namespace blens
