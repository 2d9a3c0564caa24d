#pragma once

#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "inversion.hpp"
#include "random_gen.hpp"

namespace blens {

/// An unnormalized nonnegative weighting of a space — the "base" against
/// which densities are integrated.  Stored sparsely like Dist but with
/// no normalization requirement (only nonnegativity and finiteness).
template <class T>
class Measure {
public:
    using traits = scalar_traits<T>;
    using Entry = std::pair<std::size_t, T>;

    static Measure make(const Space& space,
                        const std::vector<std::pair<std::string, T>>& weights) {
        std::vector<T> dense(space.size(), traits::zero());
        for (const auto& [label, w] : weights) {
            std::size_t i = space.index_of(label);
            if (!traits::finite(w))
                throw NegativeMass("weight at \"" + label + "\" is not finite");
            if (w < traits::zero())
                throw NegativeMass("weight at \"" + label + "\" is negative: " +
                                   traits::to_text(w));
            dense[i] += w;
        }
        return from_dense(space, dense);
    }

    static Measure from_dense(const Space& space, const std::vector<T>& dense) {
        if (dense.size() != space.size())
            throw SpaceMismatch("measure: dense vector size mismatch on " + space.name());
        std::vector<Entry> entries;
        for (std::size_t i = 0; i < dense.size(); ++i) {
            if (!traits::finite(dense[i]) || dense[i] < traits::zero())
                throw NegativeMass("weight at \"" + space.label(i) + "\" is invalid");
            if (dense[i] != traits::zero()) entries.emplace_back(i, dense[i]);
        }
        return Measure(space, std::move(entries));
    }

    /// Counting measure: weight one everywhere.
    static Measure counting(const Space& space) {
        std::vector<Entry> entries;
        entries.reserve(space.size());
        for (std::size_t i = 0; i < space.size(); ++i)
            entries.emplace_back(i, traits::one());
        return Measure(space, std::move(entries));
    }

    /// A distribution, viewed as a measure.
    static Measure of_dist(const Dist<T>& d) {
        return Measure(d.space(), d.entries());
    }

    const Space& space() const { return space_; }
    const std::vector<Entry>& entries() const { return entries_; }
    T weight(std::size_t i) const {
        for (const auto& [j, w] : entries_)
            if (j == i) return w;
        return traits::zero();
    }
    bool in_support(std::size_t i) const { return weight(i) != traits::zero(); }

private:
    Measure(Space space, std::vector<Entry> entries)
        : space_(std::move(space)), entries_(std::move(entries)) {}

    Space space_;
    std::vector<Entry> entries_;
};

/// A nonnegative function on a space (possibly a product space), stored
/// sparsely: absent entries are zero.  Effects are the densities and
/// likelihoods of the unnormalized picture of inference.
template <class T>
class Effect {
public:
    using traits = scalar_traits<T>;
    using Entry = std::pair<std::size_t, T>;

    static Effect make(const Space& dom,
                       const std::vector<std::pair<std::string, T>>& values) {
        std::vector<T> dense(dom.size(), traits::zero());
        for (const auto& [label, v] : values) {
            std::size_t i = dom.index_of(label);
            if (!traits::finite(v))
                throw NegativeMass("effect value at \"" + label + "\" is not finite");
            if (v < traits::zero())
                throw NegativeMass("effect value at \"" + label + "\" is negative: " +
                                   traits::to_text(v));
            dense[i] = v;
        }
        return from_dense(dom, dense);
    }

    static Effect from_dense(const Space& dom, const std::vector<T>& dense) {
        if (dense.size() != dom.size())
            throw SpaceMismatch("effect: dense vector size mismatch on " + dom.name());
        std::vector<Entry> entries;
        for (std::size_t i = 0; i < dense.size(); ++i) {
            if (!traits::finite(dense[i]) || dense[i] < traits::zero())
                throw NegativeMass("effect value at \"" + dom.label(i) + "\" is invalid");
            if (dense[i] != traits::zero()) entries.emplace_back(i, dense[i]);
        }
        return Effect(dom, std::move(entries));
    }

    /// The constant-one effect (the discard-and-accept test).
    static Effect all_ones(const Space& dom) {
        std::vector<Entry> entries;
        entries.reserve(dom.size());
        for (std::size_t i = 0; i < dom.size(); ++i) entries.emplace_back(i, traits::one());
        return Effect(dom, std::move(entries));
    }

    const Space& dom() const { return dom_; }
    const std::vector<Entry>& entries() const { return entries_; }
    T value(std::size_t i) const {
        for (const auto& [j, v] : entries_)
            if (j == i) return v;
        return traits::zero();
    }
    std::vector<T> dense() const {
        std::vector<T> out(dom_.size(), traits::zero());
        for (const auto& [i, v] : entries_) out[i] = v;
        return out;
    }

private:
    Effect(Space dom, std::vector<Entry> entries)
        : dom_(std::move(dom)), entries_(std::move(entries)) {}

    Space dom_;
    std::vector<Entry> entries_;
};

/// A channel presented by a density: a joint effect p on X (x) Y and a
/// base measure on Y, meant as c(y|x) = p(x,y) mu(y).
template <class T>
struct DensityChannel {
    Effect<T> density;  // on X (x) Y
    Measure<T> base;    // on Y

    static DensityChannel make(Effect<T> density, Measure<T> base) {
        if (!density.dom().is_product())
            throw SpaceMismatch("density channel: density must live on a product space");
        if (density.dom().right() != base.space())
            throw SpaceMismatch("density channel: product right factor " +
                                density.dom().right().name() + " vs base space " +
                                base.space().name());
        return DensityChannel{std::move(density), std::move(base)};
    }

    const Space& dom() const { return density.dom().left(); }
    const Space& cod() const { return base.space(); }
};

/// Turns a density presentation into an actual channel,
/// c(y|x) = p(x,y) mu(y).  Rows must integrate to one against the base
/// (exactly in rational mode, within `norm_eps` in float); otherwise the
/// presentation is flagged as NotCausal rather than silently normalized.
template <class T>
Channel<T> realize_channel(const DensityChannel<T>& dc,
                           const T& norm_eps = scalar_traits<T>::norm_eps()) {
    using traits = scalar_traits<T>;
    const Space& x = dc.dom();
    const Space& y = dc.cod();
    const Space& xy = dc.density.dom();
    std::vector<Dist<T>> rows;
    rows.reserve(x.size());
    typename Dist<T>::Trusted tag;
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<typename Dist<T>::Entry> entries;
        T total = traits::zero();
        for (const auto& [j, w] : dc.base.entries()) {
            T v = dc.density.value(xy.pair_index(i, j));
            if (v == traits::zero()) continue;
            T mass = v * w;
            entries.emplace_back(j, mass);
            total += mass;
        }
        if (!approx_eq(total, traits::one(), norm_eps))
            throw NotCausal("density row at \"" + x.label(i) + "\" integrates to " +
                            traits::to_text(total) + ", not 1");
        rows.emplace_back(y, std::move(entries), tag);
    }
    return Channel<T>::from_rows(x, y, std::move(rows));
}

/// The density presentation of a channel against a base measure:
/// p(x,y) = c(y|x) / mu(y).  The base must be positive wherever the
/// channel has mass; realize_channel inverts this exactly.
template <class T>
DensityChannel<T> densify(const Channel<T>& c, const Measure<T>& mu) {
    if (c.cod() != mu.space())
        throw SpaceMismatch("densify: channel lands in " + c.cod().name() +
                            ", base is on " + mu.space().name());
    Space xy = Space::product(c.dom(), c.cod());
    std::vector<T> dense(xy.size(), scalar_traits<T>::zero());
    for (std::size_t i = 0; i < c.dom().size(); ++i)
        for (const auto& [j, m] : c.row(i).entries()) {
            if (!mu.in_support(j))
                throw NotCausal("densify: base has weight zero at \"" +
                                c.cod().label(j) + "\" where the channel has mass");
            dense[xy.pair_index(i, j)] = m / mu.weight(j);
        }
    return DensityChannel<T>::make(Effect<T>::from_dense(xy, dense), mu);
}

/// Sequential composition in the density picture:
///   (p ;_mu q)(x,z) = sum_y q(y,z) mu(y) p(x,y).
/// The density analogue of the matrix product, integrating the middle
/// variable against the middle base.
template <class T>
Effect<T> effect_seq(const Effect<T>& p, const Measure<T>& mu, const Effect<T>& q) {
    using traits = scalar_traits<T>;
    if (!p.dom().is_product() || !q.dom().is_product())
        throw SpaceMismatch("effect_seq: densities must live on product spaces");
    const Space& x = p.dom().left();
    const Space& y = p.dom().right();
    const Space& z = q.dom().right();
    if (y != mu.space() || q.dom().left() != y)
        throw SpaceMismatch("effect_seq: middle spaces do not agree");
    Space xz = Space::product(x, z);
    std::vector<T> dense(xz.size(), traits::zero());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t k = 0; k < z.size(); ++k) {
            T acc = traits::zero();
            for (const auto& [j, w] : mu.entries())
                acc += q.value(q.dom().pair_index(j, k)) * w *
                       p.value(p.dom().pair_index(i, j));
            dense[xz.pair_index(i, k)] = acc;
        }
    return Effect<T>::from_dense(xz, dense);
}

/// Pointwise reciprocal where the effect and the base are both positive,
/// zero elsewhere.  This is the canonical almost-inverse of an effect:
/// e * almost_inverse(e, mu) acts as the identity against mu.
template <class T>
Effect<T> almost_inverse(const Effect<T>& e, const Measure<T>& mu) {
    using traits = scalar_traits<T>;
    if (e.dom() != mu.space())
        throw SpaceMismatch("almost_inverse: effect on " + e.dom().name() +
                            ", base on " + mu.space().name());
    std::vector<T> dense(e.dom().size(), traits::zero());
    for (const auto& [i, v] : e.entries())
        if (mu.in_support(i)) dense[i] = traits::one() / v;
    return Effect<T>::from_dense(e.dom(), dense);
}

/// Whether q almost-inverts e with respect to mu:
/// e(y) q(y) mu(y) = mu(y) for every y.
template <class T>
bool is_almost_inverse(const Effect<T>& e, const Effect<T>& q, const Measure<T>& mu,
                       const T& eps = scalar_traits<T>::cmp_eps()) {
    if (e.dom() != mu.space() || q.dom() != mu.space())
        throw SpaceMismatch("is_almost_inverse: spaces do not agree");
    for (const auto& [i, w] : mu.entries())
        if (!approx_eq(e.value(i) * q.value(i) * w, w, eps)) return false;
    return true;
}

/// Equality of effects almost everywhere with respect to a measure:
/// e1(y) mu(y) = e2(y) mu(y) for every y.
template <class T>
bool effects_almost_equal(const Effect<T>& e1, const Effect<T>& e2, const Measure<T>& mu,
                          const T& eps = scalar_traits<T>::cmp_eps()) {
    if (e1.dom() != mu.space() || e2.dom() != mu.space())
        throw SpaceMismatch("effects_almost_equal: spaces do not agree");
    for (const auto& [i, w] : mu.entries())
        if (!approx_eq(e1.value(i) * w, e2.value(i) * w, eps)) return false;
    return true;
}

/// Almost-equality of channels with respect to a *measure* on their
/// domain: rows agree wherever the measure has weight.
template <class T>
bool almost_equal_by_measure(const Channel<T>& f, const Channel<T>& g, const Measure<T>& mu,
                             const T& eps = scalar_traits<T>::cmp_eps()) {
    if (f.dom() != g.dom() || f.cod() != g.cod())
        throw SpaceMismatch("almost_equal_by_measure: channels are not parallel");
    for (const auto& [i, w] : mu.entries())
        if (!dists_equal(f.row(i), g.row(i), eps)) return false;
    return true;
}

/// Bayesian inversion computed entirely in the density picture:
///   k(x|y) = likelihood_inverse(y) * p(x,y) * prior(x)
/// where likelihood(y) = sum_x p(x,y) prior(x) is the predicted density
/// and likelihood_inverse is its canonical almost-inverse.  Off the
/// support of the prediction the rows fall back to the prior, matching
/// the direct route's convention; those observations are reported.
///
/// This is a genuinely separate code path from `invert` (no shared
/// arithmetic), kept so the two can be compared against each other.
template <class T>
InversionResult<T> invert_via_density(const DensityChannel<T>& dc, const Dist<T>& prior,
                                      const T& norm_eps = scalar_traits<T>::norm_eps()) {
    using traits = scalar_traits<T>;
    const Space& x = dc.dom();
    const Space& y = dc.cod();
    const Space& xy = dc.density.dom();
    if (prior.space() != x)
        throw SpaceMismatch("invert_via_density: prior on " + prior.space().name() +
                            ", density expects " + x.name());

    // Predicted density of the observation against the base.
    std::vector<T> likelihood(y.size(), traits::zero());
    for (std::size_t j = 0; j < y.size(); ++j) {
        T acc = traits::zero();
        for (const auto& [i, px] : prior.entries())
            acc += dc.density.value(xy.pair_index(i, j)) * px;
        likelihood[j] = acc;
    }
    Effect<T> like = Effect<T>::from_dense(y, likelihood);
    Effect<T> like_inv = almost_inverse(like, dc.base);

    bool any_mass = false;
    std::vector<Dist<T>> rows;
    rows.reserve(y.size());
    std::vector<std::string> zero_support;
    typename Dist<T>::Trusted tag;
    for (std::size_t j = 0; j < y.size(); ++j) {
        T inv = like_inv.value(j);
        bool observable = dc.base.in_support(j) && likelihood[j] != traits::zero();
        if (!observable) {
            zero_support.push_back(y.label(j));
            rows.push_back(prior);
            continue;
        }
        any_mass = true;
        std::vector<typename Dist<T>::Entry> entries;
        T total = traits::zero();
        for (const auto& [i, px] : prior.entries()) {
            T pv = dc.density.value(xy.pair_index(i, j));
            if (pv == traits::zero()) continue;
            T mass = inv * pv * px;
            entries.emplace_back(i, mass);
            total += mass;
        }
        if constexpr (traits::exact) {
            if (total != traits::one())
                throw std::logic_error("invert_via_density: exact row failed to normalize");
        } else {
            if (!approx_eq(total, traits::one(), norm_eps))
                throw NotNormalized("invert_via_density: row at \"" + y.label(j) +
                                    "\" renormalizes by " + traits::to_text(total));
            for (auto& [i, m] : entries) m = m / total;
        }
        rows.emplace_back(x, std::move(entries), tag);
    }
    if (!any_mass)
        throw EmptyPushforward("invert_via_density: prediction carries no mass");
    return InversionResult<T>{Channel<T>::from_rows(y, x, std::move(rows)),
                              std::move(zero_support)};
}

/// Report for the randomized density-side properties.
struct DensityPropsReport {
    // (a) kernels scaled from mu-almost-equal effects are almost equal
    int scaled_kernel_trials = 0;
    int scaled_kernel_passed = 0;
    int scaled_kernel_skipped = 0;  // precondition (the pair is almost equal) failed
    // (b) almost-equality propagates through density-represented pushforwards
    int pushforward_trials = 0;
    int pushforward_passed = 0;
    std::string first_failure;  // empty when everything passed
    bool all_passed() const {
        return scaled_kernel_passed == scaled_kernel_trials &&
               pushforward_passed == pushforward_trials;
    }
};

namespace detail {

/// Random positive measure: integer weights 1..8.
template <class T>
Measure<T> random_positive_measure(const Space& sp, TrialRng& rng) {
    std::vector<T> dense(sp.size());
    for (std::size_t i = 0; i < sp.size(); ++i)
        dense[i] = scalar_traits<T>::from_int(static_cast<long>(rng.between(1, 8)));
    return Measure<T>::from_dense(sp, dense);
}

/// Random measure with zeros allowed (but at least one positive weight).
template <class T>
Measure<T> random_measure(const Space& sp, TrialRng& rng) {
    std::vector<T> dense(sp.size(), scalar_traits<T>::zero());
    bool any = false;
    for (std::size_t i = 0; i < sp.size(); ++i) {
        if (rng.coin()) {
            dense[i] = scalar_traits<T>::from_int(static_cast<long>(rng.between(1, 8)));
            any = true;
        }
    }
    if (!any) dense[rng.below(sp.size())] = scalar_traits<T>::one();
    return Measure<T>::from_dense(sp, dense);
}

/// Random effect with values in {0} u {1/4 .. 8/4}.
template <class T>
Effect<T> random_effect(const Space& sp, TrialRng& rng) {
    std::vector<T> dense(sp.size(), scalar_traits<T>::zero());
    for (std::size_t i = 0; i < sp.size(); ++i)
        if (!rng.coin())
            dense[i] = scalar_traits<T>::ratio(static_cast<long>(rng.between(1, 8)), 4);
    return Effect<T>::from_dense(sp, dense);
}

/// Random channel whose rows are supported inside the given index set.
template <class T>
Channel<T> random_channel_into(const Space& dom, const Space& cod,
                               const std::vector<std::size_t>& support, TrialRng& rng) {
    using traits = scalar_traits<T>;
    typename Dist<T>::Trusted tag;
    std::vector<Dist<T>> rows;
    rows.reserve(dom.size());
    for (std::size_t x = 0; x < dom.size(); ++x) {
        std::vector<long> w(support.size());
        long total = 0;
        for (auto& v : w) { v = static_cast<long>(rng.between(1, 8)); total += v; }
        std::vector<typename Dist<T>::Entry> entries;
        for (std::size_t s = 0; s < support.size(); ++s)
            entries.emplace_back(support[s], traits::ratio(w[s], total));
        rows.emplace_back(cod, std::move(entries), tag);
    }
    return Channel<T>::from_rows(dom, cod, std::move(rows));
}

} // namespace detail

/// Randomized checks of the two density-side lemmas:
/// (a) if q and r are mu-almost-equal effects on Y, then the kernels
///     alpha(y,z) = f(y,z) q(y) and beta(y,z) = f(y,z) r(y) are
///     mu-almost-equal as effects on Y (x) Z (pairs failing the
///     precondition are skipped and counted, not passed);
/// (b) if channels f, g out of Y agree almost everywhere with respect to
///     a measure nu, and d is a channel into Y density-represented with
///     base nu, then f and g agree almost everywhere with respect to
///     d o rho for every state rho — a pushforward through d cannot step
///     outside nu's support.
template <class T>
DensityPropsReport check_density_props(const RunConfig& config) {
    using traits = scalar_traits<T>;
    config.validate();
    DensityPropsReport report;
    T eps = eps_from_config<T>(config);
    for (int t = 0; t < config.trials; ++t) {
        TrialRng rng = TrialRng::for_trial(config.seed, static_cast<std::uint64_t>(t));
        std::size_t ny = rng.between(2, static_cast<std::uint64_t>(config.max_dim));
        std::size_t nz = rng.between(2, static_cast<std::uint64_t>(config.max_dim));
        Space y = fresh_space("Y", ny);
        Space z = fresh_space("Z", nz);

        // (a) scaled-kernel preservation.
        {
            Measure<T> mu = detail::random_measure<T>(y, rng);
            Effect<T> q = detail::random_effect<T>(y, rng);
            Effect<T> r = detail::random_effect<T>(y, rng);
            if (rng.coin()) {
                // Force the precondition half the time: agree on supp(mu).
                std::vector<T> rd = r.dense();
                for (const auto& [i, w] : mu.entries()) rd[i] = q.value(i);
                r = Effect<T>::from_dense(y, rd);
            }
            if (!effects_almost_equal(q, r, mu, eps)) {
                ++report.scaled_kernel_skipped;
            } else {
                ++report.scaled_kernel_trials;
                Space yz = Space::product(y, z);
                Effect<T> f = detail::random_effect<T>(yz, rng);
                std::vector<T> a(yz.size()), b(yz.size());
                for (std::size_t i = 0; i < y.size(); ++i)
                    for (std::size_t k = 0; k < z.size(); ++k) {
                        T fv = f.value(yz.pair_index(i, k));
                        a[yz.pair_index(i, k)] = fv * q.value(i);
                        b[yz.pair_index(i, k)] = fv * r.value(i);
                    }
                // mu-almost-equality of the kernels: compare against mu in
                // the first coordinate (the second is untouched).
                bool ok = true;
                for (const auto& [i, w] : mu.entries())
                    for (std::size_t k = 0; k < z.size() && ok; ++k)
                        ok = approx_eq(a[yz.pair_index(i, k)] * w,
                                       b[yz.pair_index(i, k)] * w, eps);
                if (ok) ++report.scaled_kernel_passed;
                else if (report.first_failure.empty())
                    report.first_failure = "scaled-kernel trial " + std::to_string(t);
            }
        }

        // (b) pushforward confinement.
        {
            ++report.pushforward_trials;
            Measure<T> nu = detail::random_measure<T>(y, rng);
            std::vector<std::size_t> sup;
            for (std::size_t i = 0; i < y.size(); ++i)
                if (nu.in_support(i)) sup.push_back(i);

            // f and g agree exactly on supp(nu), arbitrarily elsewhere.
            Channel<T> f = random_channel<T>(y, z, rng);
            Channel<T> g = random_channel<T>(y, z, rng);
            std::vector<Dist<T>> grows;
            for (std::size_t i = 0; i < y.size(); ++i)
                grows.push_back(nu.in_support(i) ? f.row(i) : g.row(i));
            g = Channel<T>::from_rows(y, z, std::move(grows));

            // d: W -> Y is built *from* a density presentation with base
            // nu, so it is density-represented by construction.
            std::size_t nw = rng.between(2, static_cast<std::uint64_t>(config.max_dim));
            Space w = fresh_space("W", nw);
            Channel<T> d0 = detail::random_channel_into<T>(w, y, sup, rng);
            Channel<T> d = realize_channel(densify(d0, nu));

            Dist<T> rho = random_dist<T>(w, rng);
            Dist<T> pushed = push_state(d, rho);
            bool ok = almost_equal_by_measure(f, g, nu, eps) &&
                      almost_equal(f, g, pushed, eps) &&
                      almost_equal_rowwise(f, g, pushed, eps);
            if (ok) ++report.pushforward_passed;
            else if (report.first_failure.empty())
                report.first_failure = "pushforward trial " + std::to_string(t);
        }
    }
    return report;
}

} // namespace blens
