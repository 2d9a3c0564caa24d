#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dist.hpp"

namespace blens {

/// A stochastic channel dom -> cod: one output distribution per domain
/// element (a column-stochastic matrix stored row-wise, rows indexed by
/// the domain).  Channels are the morphisms of the category this library
/// works in; every row being a Dist makes each channel causal by
/// construction (discarding the output discards the channel).
template <class T>
class Channel {
public:
    using traits = scalar_traits<T>;

    /// Builds a channel from labelled rows.  Every domain element needs
    /// exactly one row; rows are validated as distributions on cod.
    static Channel from_table(const Space& dom, const Space& cod,
                              const std::vector<std::pair<std::string, Dist<T>>>& rows) {
        std::vector<std::optional<Dist<T>>> slots(dom.size());
        for (const auto& [label, dist] : rows) {
            std::size_t i = dom.index_of(label);
            if (slots[i])
                throw MissingRow("channel: duplicate row for \"" + label + "\"");
            if (dist.space() != cod)
                throw SpaceMismatch("channel row \"" + label + "\" lives on " +
                                    dist.space().name() + ", expected " + cod.name());
            slots[i] = dist;
        }
        std::vector<Dist<T>> ordered;
        ordered.reserve(dom.size());
        for (std::size_t i = 0; i < dom.size(); ++i) {
            if (!slots[i])
                throw MissingRow("channel: no row for \"" + dom.label(i) + "\"");
            ordered.push_back(std::move(*slots[i]));
        }
        return Channel(dom, cod, std::move(ordered));
    }

    /// Builds a channel from rows already in domain order.
    static Channel from_rows(const Space& dom, const Space& cod, std::vector<Dist<T>> rows) {
        if (rows.size() != dom.size())
            throw MissingRow("channel: " + std::to_string(rows.size()) + " rows for domain " +
                             dom.name() + " of size " + std::to_string(dom.size()));
        for (const auto& r : rows)
            if (r.space() != cod)
                throw SpaceMismatch("channel row lives on " + r.space().name() +
                                    ", expected " + cod.name());
        return Channel(dom, cod, std::move(rows));
    }

    /// The identity channel: every element maps to its own point mass.
    static Channel identity(const Space& x) {
        std::vector<Dist<T>> rows;
        rows.reserve(x.size());
        for (const auto& e : x.elements()) rows.push_back(Dist<T>::dirac(x, e));
        return Channel(x, x, std::move(rows));
    }

    const Space& dom() const { return dom_; }
    const Space& cod() const { return cod_; }

    const Dist<T>& row(std::size_t i) const { return rows_.at(i); }
    const Dist<T>& row(std::string_view label) const { return rows_[dom_.index_of(label)]; }
    const std::vector<Dist<T>>& rows() const { return rows_; }

    /// Entry c(y|x) by index.
    T at(std::size_t x, std::size_t y) const { return rows_[x].mass(y); }

private:
    Channel(Space dom, Space cod, std::vector<Dist<T>> rows)
        : dom_(std::move(dom)), cod_(std::move(cod)), rows_(std::move(rows)) {}

    Space dom_;
    Space cod_;
    std::vector<Dist<T>> rows_;
};

/// Bind of the distribution monad: feeds a distribution through a
/// channel, rho |-> sum_y q(-|y) rho(y).  This is the one-step law of
/// total probability and the workhorse behind composition.
template <class T>
Dist<T> kleisli_extend(const Channel<T>& q, const Dist<T>& rho) {
    using traits = scalar_traits<T>;
    if (rho.space() != q.dom())
        throw SpaceMismatch("kleisli_extend: state on " + rho.space().name() +
                            ", channel expects " + q.dom().name());
    std::vector<T> acc(q.cod().size(), traits::zero());
    for (const auto& [y, py] : rho.entries())
        for (const auto& [z, qz] : q.row(y).entries())
            acc[z] += py * qz;
    typename Dist<T>::Trusted tag;
    std::vector<typename Dist<T>::Entry> entries;
    for (std::size_t i = 0; i < acc.size(); ++i)
        if (acc[i] != traits::zero()) entries.emplace_back(i, acc[i]);
    return Dist<T>(q.cod(), std::move(entries), tag);
}

/// The state a channel pushes a prior to (synonym for kleisli_extend,
/// named for the lens-side reading).
template <class T>
Dist<T> push_state(const Channel<T>& c, const Dist<T>& prior) {
    return kleisli_extend(c, prior);
}

/// Sequential composite in diagrammatic order: first p, then q.
/// Equals the stochastic matrix product (Chapman-Kolmogorov).
template <class T>
Channel<T> seq_compose(const Channel<T>& p, const Channel<T>& q) {
    if (p.cod() != q.dom())
        throw SpaceMismatch("seq_compose: cod " + p.cod().name() + " vs dom " + q.dom().name());
    std::vector<Dist<T>> rows;
    rows.reserve(p.dom().size());
    for (std::size_t x = 0; x < p.dom().size(); ++x)
        rows.push_back(kleisli_extend(q, p.row(x)));
    return Channel<T>::from_rows(p.dom(), q.cod(), std::move(rows));
}

/// Parallel (tensor) composite: (f (x) g)((a,b)|(x,y)) = f(a|x) g(b|y).
template <class T>
Channel<T> tensor(const Channel<T>& f, const Channel<T>& g) {
    Space dom = Space::product(f.dom(), g.dom());
    Space cod = Space::product(f.cod(), g.cod());
    std::vector<Dist<T>> rows;
    rows.reserve(dom.size());
    typename Dist<T>::Trusted tag;
    for (std::size_t x = 0; x < f.dom().size(); ++x) {
        for (std::size_t y = 0; y < g.dom().size(); ++y) {
            std::vector<typename Dist<T>::Entry> entries;
            entries.reserve(f.row(x).support_size() * g.row(y).support_size());
            for (const auto& [a, fa] : f.row(x).entries())
                for (const auto& [b, gb] : g.row(y).entries())
                    entries.emplace_back(cod.pair_index(a, b), fa * gb);
            rows.emplace_back(cod, std::move(entries), tag);
        }
    }
    return Channel<T>::from_rows(dom, cod, std::move(rows));
}

/// x |-> (x,x).  With discard below, every space is a commutative
/// comonoid; channels need not preserve copying (only deterministic
/// ones do).
template <class T>
Channel<T> copy_channel(const Space& x) {
    Space xx = Space::product(x, x);
    std::vector<Dist<T>> rows;
    rows.reserve(x.size());
    typename Dist<T>::Trusted tag;
    for (std::size_t i = 0; i < x.size(); ++i)
        rows.emplace_back(xx,
                          std::vector<typename Dist<T>::Entry>{{xx.pair_index(i, i),
                                                                scalar_traits<T>::one()}},
                          tag);
    return Channel<T>::from_rows(x, xx, std::move(rows));
}

/// x |-> * : forget the value.
template <class T>
Channel<T> discard_channel(const Space& x) {
    std::vector<Dist<T>> rows(x.size(), Dist<T>::dirac(Space::unit(), "*"));
    return Channel<T>::from_rows(x, Space::unit(), std::move(rows));
}

/// (x,y) |-> (y,x).
template <class T>
Channel<T> swap_channel(const Space& x, const Space& y) {
    Space xy = Space::product(x, y), yx = Space::product(y, x);
    std::vector<Dist<T>> rows;
    rows.reserve(xy.size());
    typename Dist<T>::Trusted tag;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            rows.emplace_back(yx,
                              std::vector<typename Dist<T>::Entry>{{yx.pair_index(j, i),
                                                                    scalar_traits<T>::one()}},
                              tag);
    return Channel<T>::from_rows(xy, yx, std::move(rows));
}

/// (x,y) |-> x.
template <class T>
Channel<T> proj1_channel(const Space& x, const Space& y) {
    Space xy = Space::product(x, y);
    std::vector<Dist<T>> rows;
    rows.reserve(xy.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            rows.push_back(Dist<T>::dirac(x, x.label(i)));
    return Channel<T>::from_rows(xy, x, std::move(rows));
}

/// (x,y) |-> y.
template <class T>
Channel<T> proj2_channel(const Space& x, const Space& y) {
    Space xy = Space::product(x, y);
    std::vector<Dist<T>> rows;
    rows.reserve(xy.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            rows.push_back(Dist<T>::dirac(y, y.label(j)));
    return Channel<T>::from_rows(xy, y, std::move(rows));
}

/// The structural map kinds, for callers that select them dynamically.
enum class Structural { copy, discard, swap, proj1, proj2 };

/// Dispatcher over the structural maps.  `copy` and `discard` take one
/// space; `swap`, `proj1`, `proj2` take two.
template <class T>
Channel<T> structural_channel(Structural kind, const Space& a,
                              const std::optional<Space>& b = std::nullopt) {
    switch (kind) {
        case Structural::copy:
            if (b) throw SpaceMismatch("structural copy takes one space");
            return copy_channel<T>(a);
        case Structural::discard:
            if (b) throw SpaceMismatch("structural discard takes one space");
            return discard_channel<T>(a);
        case Structural::swap:
            if (!b) throw SpaceMismatch("structural swap takes two spaces");
            return swap_channel<T>(a, *b);
        case Structural::proj1:
            if (!b) throw SpaceMismatch("structural proj1 takes two spaces");
            return proj1_channel<T>(a, *b);
        case Structural::proj2:
            if (!b) throw SpaceMismatch("structural proj2 takes two spaces");
            return proj2_channel<T>(a, *b);
    }
    throw Error("structural_channel: bad kind");
}

/// Embeds a function as a deterministic channel x |-> dirac(f(x)).
/// Throws UnknownElement when f maps outside cod.
template <class T>
Channel<T> lift_function(const Space& dom, const Space& cod,
                         const std::function<std::string(const std::string&)>& f) {
    std::vector<Dist<T>> rows;
    rows.reserve(dom.size());
    for (const auto& x : dom.elements()) {
        std::string y = f(x);
        if (!cod.find(y))
            throw UnknownElement("lift_function: f(\"" + x + "\") = \"" + y +
                                 "\" is not in " + cod.name());
        rows.push_back(Dist<T>::dirac(cod, y));
    }
    return Channel<T>::from_rows(dom, cod, std::move(rows));
}

/// Pointwise equality of channels within eps (same dom, same cod, every
/// matrix entry within eps).
template <class T>
bool channels_equal(const Channel<T>& a, const Channel<T>& b,
                    const T& eps = scalar_traits<T>::cmp_eps()) {
    if (a.dom() != b.dom() || a.cod() != b.cod()) return false;
    for (std::size_t x = 0; x < a.dom().size(); ++x)
        if (!dists_equal(a.row(x), b.row(x), eps)) return false;
    return true;
}

/// Largest row-wise total-variation gap between two parallel channels.
template <class T>
T max_row_gap(const Channel<T>& a, const Channel<T>& b) {
    if (a.dom() != b.dom() || a.cod() != b.cod())
        throw SpaceMismatch("max_row_gap: channels are not parallel");
    using traits = scalar_traits<T>;
    T worst = traits::zero();
    for (std::size_t x = 0; x < a.dom().size(); ++x) {
        T g = total_variation(a.row(x), b.row(x));
        if (g > worst) worst = g;
    }
    return worst;
}

/// Whether a channel is deterministic.  Two equivalent characterizations
/// are computed: every row is a point mass, and the channel preserves
/// copying (copy o c == (c (x) c) o copy).  They provably coincide; if
/// floating-point tolerances ever split them, that is a logic error, not
/// a value to return.
template <class T>
bool is_deterministic(const Channel<T>& c, const T& eps = scalar_traits<T>::cmp_eps()) {
    using traits = scalar_traits<T>;
    bool rows_dirac = true;
    for (std::size_t x = 0; x < c.dom().size() && rows_dirac; ++x) {
        const auto& r = c.row(x);
        bool has_big = false;
        for (const auto& [i, m] : r.entries()) {
            if (m >= traits::one() - eps) has_big = true;
            else if (m > eps) { rows_dirac = false; break; }
        }
        if (!has_big) rows_dirac = false;
    }
    Channel<T> lhs = seq_compose(c, copy_channel<T>(c.cod()));
    Channel<T> rhs = seq_compose(copy_channel<T>(c.dom()), tensor(c, c));
    bool comonoid_hom = channels_equal(lhs, rhs, eps);
    if (rows_dirac != comonoid_hom)
        throw std::logic_error("is_deterministic: row shape and copy-preservation disagree");
    return rows_dirac;
}

} // namespace blens
