#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "channel.hpp"

namespace blens {

/// Result of Bayesian inversion: the inverse channel together with the
/// codomain elements that carried zero predicted mass (where the inverse
/// is a convention, not an inference).
template <class T>
struct InversionResult {
    Channel<T> channel;
    std::vector<std::string> zero_support;
};

/// The joint state on X (x) Y obtained by copying the prior and running
/// the channel on the second leg: mass(x,y) = prior(x) * c(y|x).
/// Equals (id (x) c) o copy o prior, computed directly.
template <class T>
Dist<T> joint_forward(const Dist<T>& prior, const Channel<T>& c) {
    using traits = scalar_traits<T>;
    if (prior.space() != c.dom())
        throw SpaceMismatch("joint_forward: prior on " + prior.space().name() +
                            ", channel expects " + c.dom().name());
    Space xy = Space::product(c.dom(), c.cod());
    std::vector<typename Dist<T>::Entry> entries;
    for (const auto& [x, px] : prior.entries())
        for (const auto& [y, cyx] : c.row(x).entries())
            entries.emplace_back(xy.pair_index(x, y), px * cyx);
    // Entries are produced in ascending flat order already: x ascending,
    // y ascending within x.
    typename Dist<T>::Trusted tag;
    return Dist<T>(xy, std::move(entries), tag);
}

/// The joint state on X (x) Y obtained by running a candidate inverse on
/// the *output* distribution: mass(x,y) = nu(y) * k(x|y).
/// Equals (k (x) id) o copy o nu.
template <class T>
Dist<T> joint_backward(const Dist<T>& nu, const Channel<T>& k, const Space& xy) {
    using traits = scalar_traits<T>;
    if (nu.space() != k.dom())
        throw SpaceMismatch("joint_backward: state on " + nu.space().name() +
                            ", channel expects " + k.dom().name());
    std::vector<T> acc(xy.size(), traits::zero());
    for (const auto& [y, ny] : nu.entries())
        for (const auto& [x, kxy] : k.row(y).entries())
            acc[xy.pair_index(x, y)] += ny * kxy;
    std::vector<typename Dist<T>::Entry> entries;
    for (std::size_t i = 0; i < acc.size(); ++i)
        if (acc[i] != traits::zero()) entries.emplace_back(i, acc[i]);
    typename Dist<T>::Trusted tag;
    return Dist<T>(xy, std::move(entries), tag);
}

/// Whether k is a Bayesian inverse of c at prior: the two joints on
/// X (x) Y agree, i.e. prior(x) c(y|x) = (c o prior)(y) k(x|y) for all
/// x, y.  This is the defining equation, checked literally.
template <class T>
bool satisfies_bayes_relation(const Channel<T>& c, const Dist<T>& prior, const Channel<T>& k,
                              const T& eps = scalar_traits<T>::cmp_eps()) {
    if (k.dom() != c.cod() || k.cod() != c.dom()) return false;
    Dist<T> lhs = joint_forward(prior, c);
    Dist<T> nu = push_state(c, prior);
    Dist<T> rhs = joint_backward(nu, k, lhs.space());
    return dists_equal(lhs, rhs, eps);
}

/// Exact Bayesian inversion of a channel at a prior.
///
/// On observations y with positive predicted mass the posterior row is
///   k(x|y) = c(y|x) prior(x) / (c o prior)(y).
/// Observations with zero predicted mass get the prior itself as their
/// row — a deliberate convention (any row would satisfy the defining
/// relation there) — and are reported in `zero_support`.
///
/// In float mode each computed row is renormalized after the division;
/// the renormalization factor must be within the normalization tolerance
/// of one, otherwise the arithmetic has gone wrong and we throw.
template <class T>
InversionResult<T> invert(const Channel<T>& c, const Dist<T>& prior,
                          const T& norm_eps = scalar_traits<T>::norm_eps()) {
    using traits = scalar_traits<T>;
    if (prior.space() != c.dom())
        throw SpaceMismatch("invert: prior on " + prior.space().name() +
                            ", channel expects " + c.dom().name());
    Dist<T> nu = push_state(c, prior);
    if (nu.support_size() == 0)
        throw EmptyPushforward("invert: pushforward carries no mass");

    std::vector<Dist<T>> rows;
    rows.reserve(c.cod().size());
    std::vector<std::string> zero_support;
    typename Dist<T>::Trusted tag;
    for (std::size_t y = 0; y < c.cod().size(); ++y) {
        T ny = nu.mass(y);
        if (ny == traits::zero()) {
            zero_support.push_back(c.cod().label(y));
            rows.push_back(prior);
            continue;
        }
        std::vector<typename Dist<T>::Entry> entries;
        T total = traits::zero();
        for (const auto& [x, px] : prior.entries()) {
            T cyx = c.at(x, y);
            if (cyx == traits::zero()) continue;
            T mass = cyx * px / ny;
            entries.emplace_back(x, mass);
            total += mass;
        }
        if constexpr (traits::exact) {
            if (total != traits::one())
                throw std::logic_error("invert: exact row failed to normalize");
        } else {
            if (!approx_eq(total, traits::one(), norm_eps))
                throw NotNormalized("invert: row at \"" + c.cod().label(y) +
                                    "\" renormalizes by " + traits::to_text(total));
            for (auto& [x, m] : entries) m = m / total;
        }
        rows.emplace_back(prior.space(), std::move(entries), tag);
    }
    return InversionResult<T>{Channel<T>::from_rows(c.cod(), prior.space(), std::move(rows)),
                              std::move(zero_support)};
}

/// Equality of channels almost everywhere with respect to a state on
/// their (common) domain: the joints against the state agree.  This is
/// the graded equality under which inversion is unique.
template <class T>
bool almost_equal(const Channel<T>& f, const Channel<T>& g, const Dist<T>& state,
                  const T& eps = scalar_traits<T>::cmp_eps()) {
    if (f.dom() != g.dom() || f.cod() != g.cod())
        throw SpaceMismatch("almost_equal: channels are not parallel");
    return dists_equal(joint_forward(state, f), joint_forward(state, g), eps);
}

/// The equivalent row-wise characterization: rows agree wherever the
/// state has mass.  Coincides with `almost_equal` (a tested invariant);
/// exposed separately so the coincidence itself can be checked.
template <class T>
bool almost_equal_rowwise(const Channel<T>& f, const Channel<T>& g, const Dist<T>& state,
                          const T& eps = scalar_traits<T>::cmp_eps()) {
    if (f.dom() != g.dom() || f.cod() != g.cod())
        throw SpaceMismatch("almost_equal_rowwise: channels are not parallel");
    for (const auto& [x, px] : state.entries())
        if (!dists_equal(f.row(x), g.row(x), eps)) return false;
    return true;
}

/// Largest row-wise total-variation gap on the support of a state:
/// the quantitative side of almost-equality (zero iff almost equal in
/// exact mode).
template <class T>
T support_gap(const Channel<T>& f, const Channel<T>& g, const Dist<T>& state) {
    using traits = scalar_traits<T>;
    if (f.dom() != g.dom() || f.cod() != g.cod())
        throw SpaceMismatch("support_gap: channels are not parallel");
    T worst = traits::zero();
    for (const auto& [x, px] : state.entries()) {
        T gap = total_variation(f.row(x), g.row(x));
        if (gap > worst) worst = gap;
    }
    return worst;
}

/// A state-dependent channel: a family of channels dom -> cod indexed by
/// states on an index space.  Stored extensionally as a function; two
/// such families can only ever be compared pointwise at sampled states.
template <class T>
class StatChannel {
public:
    using Fn = std::function<Channel<T>(const Dist<T>&)>;

    StatChannel(Space index, Space dom, Space cod, Fn fn)
        : index_(std::move(index)), dom_(std::move(dom)), cod_(std::move(cod)),
          fn_(std::move(fn)) {}

    /// A family that ignores its index state.
    static StatChannel constant(const Space& index, const Channel<T>& c) {
        return StatChannel(index, c.dom(), c.cod(),
                           [c](const Dist<T>&) { return c; });
    }

    /// The identity on `dom` at every index state.
    static StatChannel identity(const Space& index, const Space& dom) {
        return StatChannel(index, dom, dom,
                           [dom](const Dist<T>&) { return Channel<T>::identity(dom); });
    }

    const Space& index_space() const { return index_; }
    const Space& dom() const { return dom_; }
    const Space& cod() const { return cod_; }

    /// Evaluates the family at a state.  The state must live on the index
    /// space and the produced channel is checked against (dom, cod).
    Channel<T> operator()(const Dist<T>& state) const {
        if (state.space() != index_)
            throw SpaceMismatch("StatChannel: state on " + state.space().name() +
                                ", index space is " + index_.name());
        Channel<T> out = fn_(state);
        if (out.dom() != dom_ || out.cod() != cod_)
            throw SpaceMismatch("StatChannel: family produced a channel of the wrong shape");
        return out;
    }

private:
    Space index_;
    Space dom_;
    Space cod_;
    Fn fn_;
};

/// Reindexes a state-dependent family along a channel into the index
/// space: (pullback of alpha along c)(rho) = alpha(c o rho).
template <class T>
StatChannel<T> stat_pullback(const Channel<T>& c, const StatChannel<T>& alpha) {
    if (c.cod() != alpha.index_space())
        throw SpaceMismatch("stat_pullback: channel lands in " + c.cod().name() +
                            ", family is indexed by " + alpha.index_space().name());
    return StatChannel<T>(c.dom(), alpha.dom(), alpha.cod(),
                          [c, alpha](const Dist<T>& rho) { return alpha(push_state(c, rho)); });
}

/// Composes two families over the same index space, fibrewise.
template <class T>
StatChannel<T> stat_compose(const StatChannel<T>& alpha, const StatChannel<T>& beta) {
    if (alpha.index_space() != beta.index_space())
        throw SpaceMismatch("stat_compose: families over different index spaces");
    if (alpha.cod() != beta.dom())
        throw SpaceMismatch("stat_compose: cod " + alpha.cod().name() + " vs dom " +
                            beta.dom().name());
    return StatChannel<T>(alpha.index_space(), alpha.dom(), beta.cod(),
                          [alpha, beta](const Dist<T>& rho) {
                              return seq_compose(alpha(rho), beta(rho));
                          });
}

} // namespace blens
