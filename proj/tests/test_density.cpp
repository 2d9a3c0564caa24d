#include <blens/density.hpp>
#include <blens/json_io.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "support/oracles.hpp"

using namespace blens;
using R = Rational;

namespace {

Space bits() { return Space("Bit", {"0", "1"}); }

Channel<R> bsc(const R& p) {
    Space b = bits();
    R q = R(1) - p;
    return Channel<R>::from_table(b, b,
                                  {{"0", Dist<R>::make(b, {{"0", q}, {"1", p}})},
                                   {"1", Dist<R>::make(b, {{"0", p}, {"1", q}})}});
}

Dist<R> uniform(const Space& sp) {
    std::vector<R> dense(sp.size(), R(1, static_cast<long>(sp.size())));
    return Dist<R>::from_dense(sp, dense);
}

// Random effect guaranteed positive on the support of mu (so its
// canonical almost-inverse really is an almost-inverse).
Effect<R> random_effect_positive_on(const Measure<R>& mu, TrialRng& rng) {
    const Space& sp = mu.space();
    std::vector<R> dense(sp.size(), R(0));
    for (std::size_t i = 0; i < sp.size(); ++i) {
        if (mu.in_support(i) || rng.coin())
            dense[i] = R(static_cast<long>(rng.between(1, 8)), 4);
    }
    return Effect<R>::from_dense(sp, dense);
}

} // namespace

TEST_CASE("measures validate and report weights") {
    Space b = bits();
    Measure<R> m = Measure<R>::make(b, {{"0", R(3)}, {"1", R(0)}});
    CHECK(m.weight(0) == R(3));
    CHECK(m.weight(1) == R(0));
    CHECK(m.in_support(0));
    CHECK_FALSE(m.in_support(1));

    CHECK_THROWS_AS(Measure<R>::make(b, {{"0", R(-1)}, {"1", R(1)}}), NegativeMass);
    CHECK_THROWS_AS(Measure<R>::from_dense(b, {R(1)}), SpaceMismatch);

    Measure<R> counting = Measure<R>::counting(b);
    CHECK(counting.weight(0) == R(1));
    CHECK(counting.weight(1) == R(1));

    Dist<R> pi = Dist<R>::make(b, {{"0", R(2, 5)}, {"1", R(3, 5)}});
    Measure<R> as_measure = Measure<R>::of_dist(pi);
    CHECK(as_measure.weight(0) == R(2, 5));
    CHECK(as_measure.weight(1) == R(3, 5));
}

TEST_CASE("effects validate and store sparsely") {
    Space y = fresh_space("Y", 3);
    Effect<R> e = Effect<R>::make(y, {{"e0", R(2)}, {"e2", R(1, 2)}});
    CHECK(e.value(0) == R(2));
    CHECK(e.value(1) == R(0));
    CHECK(e.value(2) == R(1, 2));
    CHECK(e.entries().size() == 2);

    CHECK_THROWS_AS(Effect<R>::make(y, {{"e0", R(-2)}}), NegativeMass);
    CHECK_THROWS_AS(Effect<R>::from_dense(y, {R(1), R(1)}), SpaceMismatch);
    CHECK_THROWS_AS(Effect<R>::make(y, {{"nope", R(1)}}), UnknownElement);

    Effect<R> ones = Effect<R>::all_ones(y);
    CHECK(ones.dense() == std::vector<R>{R(1), R(1), R(1)});
}

TEST_CASE("density channels demand a product space with the right base") {
    Space b = bits();
    Space xy = Space::product(b, b);
    CHECK_THROWS_AS(DensityChannel<R>::make(Effect<R>::all_ones(b), Measure<R>::counting(b)),
                    SpaceMismatch);
    Space t = Space("T", {"u", "v", "w"});
    CHECK_THROWS_AS(DensityChannel<R>::make(Effect<R>::all_ones(xy), Measure<R>::counting(t)),
                    SpaceMismatch);
}

TEST_CASE("densify and realize invert each other") {
    Space b = bits();
    Channel<R> c = bsc(R(1, 5));

    // Against the counting base the density table *is* the channel.
    DensityChannel<R> dc = densify(c, Measure<R>::counting(b));
    Space xy = dc.density.dom();
    CHECK(dc.density.value(xy.pair_index(0, 0)) == R(4, 5));
    CHECK(dc.density.value(xy.pair_index(0, 1)) == R(1, 5));
    CHECK(channels_equal(realize_channel(dc), c, R(0)));

    // Against arbitrary positive bases the round trip is still exact.
    for (int t = 0; t < 30; ++t) {
        TrialRng rng = TrialRng::for_trial(41, static_cast<std::uint64_t>(t));
        Space x = fresh_space("X", rng.between(2, 5));
        Space y = fresh_space("Y", rng.between(2, 5));
        Channel<R> f = random_channel<R>(x, y, rng, /*full_support=*/t % 2 == 0);
        Measure<R> mu = detail::random_positive_measure<R>(y, rng);
        CHECK(channels_equal(realize_channel(densify(f, mu)), f, R(0)));
    }
}

TEST_CASE("densify rejects a base that misses channel mass") {
    Space b = bits();
    Measure<R> half = Measure<R>::make(b, {{"0", R(2)}});
    CHECK_THROWS_AS(densify(bsc(R(1, 5)), half), NotCausal);
    CHECK_THROWS_AS(densify(bsc(R(1, 5)), Measure<R>::counting(fresh_space("Z", 3))),
                    SpaceMismatch);
}

TEST_CASE("realize rejects rows that do not integrate to one") {
    Space b = bits();
    Space xy = Space::product(b, b);
    DensityChannel<R> dc =
        DensityChannel<R>::make(Effect<R>::all_ones(xy), Measure<R>::counting(b));
    CHECK_THROWS_AS(realize_channel(dc), NotCausal);
}

TEST_CASE("effect composition matches channel composition") {
    Space b = bits();
    Measure<R> counting = Measure<R>::counting(b);
    Effect<R> p = densify(bsc(R(1, 5)), counting).density;
    Effect<R> q = densify(bsc(R(1, 10)), counting).density;
    Effect<R> pq = effect_seq(p, counting, q);
    Channel<R> realized = realize_channel(DensityChannel<R>::make(pq, counting));
    CHECK(channels_equal(realized, bsc(R(13, 50)), R(0)));

    // Random instances with non-uniform bases on every interface.
    for (int t = 0; t < 25; ++t) {
        TrialRng rng = TrialRng::for_trial(42, static_cast<std::uint64_t>(t));
        Space x = fresh_space("X", rng.between(2, 4));
        Space y = fresh_space("Y", rng.between(2, 4));
        Space z = fresh_space("Z", rng.between(2, 4));
        Channel<R> c = random_channel<R>(x, y, rng);
        Channel<R> d = random_channel<R>(y, z, rng);
        Measure<R> mu = detail::random_positive_measure<R>(y, rng);
        Measure<R> nu = detail::random_positive_measure<R>(z, rng);
        Effect<R> pc = densify(c, mu).density;
        Effect<R> qd = densify(d, nu).density;
        Channel<R> via_density =
            realize_channel(DensityChannel<R>::make(effect_seq(pc, mu, qd), nu));
        CHECK(channels_equal(via_density, seq_compose(c, d), R(0)));
    }

    // Middle spaces must agree.
    Space t3 = fresh_space("T", 3);
    CHECK_THROWS_AS(effect_seq(p, Measure<R>::counting(t3), q), SpaceMismatch);
    CHECK_THROWS_AS(effect_seq(Effect<R>::all_ones(b), counting, q), SpaceMismatch);
}

TEST_CASE("the canonical almost-inverse inverts against the base") {
    Space y = fresh_space("Y", 3);
    Effect<R> e = Effect<R>::make(y, {{"e0", R(2)}, {"e2", R(1, 2)}});
    Measure<R> mu = Measure<R>::make(y, {{"e0", R(3)}, {"e2", R(4)}});

    Effect<R> ai = almost_inverse(e, mu);
    CHECK(ai.dense() == std::vector<R>{R(1, 2), R(0), R(2)});
    CHECK(is_almost_inverse(e, ai, mu));
    CHECK_FALSE(is_almost_inverse(e, Effect<R>::all_ones(y), mu));

    // A second almost-inverse may do anything off the support of the
    // base; it stays an almost-inverse and stays almost-equal to the
    // canonical one, without being equal as a function.
    std::vector<R> perturbed = ai.dense();
    perturbed[1] = R(7);
    Effect<R> ai2 = Effect<R>::from_dense(y, perturbed);
    CHECK(is_almost_inverse(e, ai2, mu));
    CHECK(effects_almost_equal(ai, ai2, mu));
    CHECK(ai.dense() != ai2.dense());

    // Property: for effects positive on supp(mu), the reciprocal is an
    // almost-inverse, and any two almost-inverses are mu-almost-equal.
    for (int t = 0; t < 40; ++t) {
        TrialRng rng = TrialRng::for_trial(43, static_cast<std::uint64_t>(t));
        Space sp = fresh_space("S", rng.between(2, 6));
        Measure<R> m = detail::random_measure<R>(sp, rng);
        Effect<R> f = random_effect_positive_on(m, rng);
        Effect<R> canonical = almost_inverse(f, m);
        REQUIRE(is_almost_inverse(f, canonical, m));

        std::vector<R> other = canonical.dense();
        for (std::size_t i = 0; i < sp.size(); ++i)
            if (!m.in_support(i)) other[i] = R(static_cast<long>(rng.between(0, 9)));
        Effect<R> alt = Effect<R>::from_dense(sp, other);
        CHECK(is_almost_inverse(f, alt, m));
        CHECK(effects_almost_equal(canonical, alt, m));
    }
}

TEST_CASE("almost-equality of effects only sees the base support") {
    Space y = fresh_space("Y", 2);
    Effect<R> q = Effect<R>::make(y, {{"e0", R(1)}, {"e1", R(5)}});
    Effect<R> r = Effect<R>::make(y, {{"e0", R(1)}, {"e1", R(9)}});
    CHECK(effects_almost_equal(q, r, Measure<R>::make(y, {{"e0", R(2)}})));
    CHECK_FALSE(effects_almost_equal(q, r, Measure<R>::counting(y)));
    // Spaces compare by element lists, so a mismatch needs different labels,
    // not just a different name.
    CHECK_THROWS_AS(effects_almost_equal(q, Effect<R>::all_ones(fresh_space("Z", 3)),
                                         Measure<R>::counting(y)),
                    SpaceMismatch);
}

TEST_CASE("almost-equality of channels by a measure on the domain") {
    Space b = bits();
    Channel<R> f = bsc(R(1, 5));
    Channel<R> g = Channel<R>::from_rows(
        b, b, {f.row(std::size_t{0}), Dist<R>::dirac(b, "0")});
    CHECK(almost_equal_by_measure(f, g, Measure<R>::make(b, {{"0", R(1)}})));
    CHECK_FALSE(almost_equal_by_measure(f, g, Measure<R>::counting(b)));
    CHECK_THROWS_AS(almost_equal_by_measure(f, Channel<R>::identity(fresh_space("Z", 3)),
                                            Measure<R>::counting(b)),
                    SpaceMismatch);
}

TEST_CASE("the density route reproduces direct inversion") {
    Space b = bits();

    // Frozen: a symmetric channel at the uniform prior is self-inverse,
    // whichever route computes it.
    InversionResult<R> via = invert_via_density(
        densify(bsc(R(1, 5)), Measure<R>::counting(b)), uniform(b));
    CHECK(channels_equal(via.channel, bsc(R(1, 5)), R(0)));
    CHECK(via.zero_support.empty());

    // Frozen sparse case: both routes report the same convention row.
    InversionResult<R> direct = invert(Channel<R>::identity(b), Dist<R>::dirac(b, "0"));
    InversionResult<R> dens = invert_via_density(
        densify(Channel<R>::identity(b), Measure<R>::counting(b)), Dist<R>::dirac(b, "0"));
    CHECK(channels_equal(dens.channel, direct.channel, R(0)));
    CHECK(dens.zero_support == std::vector<std::string>{"1"});
    CHECK(dens.zero_support == direct.zero_support);

    // Property: over random channels, positive bases, and sparse priors
    // the two arithmetically independent routes agree exactly.
    for (int t = 0; t < 40; ++t) {
        TrialRng rng = TrialRng::for_trial(44, static_cast<std::uint64_t>(t));
        Space x = fresh_space("X", rng.between(2, 5));
        Space y = fresh_space("Y", rng.between(2, 5));
        Channel<R> c = random_channel<R>(x, y, rng, /*full_support=*/t % 2 == 0);
        Measure<R> mu = detail::random_positive_measure<R>(y, rng);
        Dist<R> pi = random_dist<R>(x, rng, /*full_support=*/t % 3 != 0);
        InversionResult<R> a = invert(c, pi);
        InversionResult<R> d = invert_via_density(densify(c, mu), pi);
        CHECK(channels_equal(a.channel, d.channel, R(0)));
        CHECK(a.zero_support == d.zero_support);
    }

    // Float mode agrees within tolerance.
    for (int t = 0; t < 20; ++t) {
        TrialRng rng = TrialRng::for_trial(45, static_cast<std::uint64_t>(t));
        Space x = fresh_space("X", rng.between(2, 5));
        Space y = fresh_space("Y", rng.between(2, 5));
        Channel<double> c = random_channel<double>(x, y, rng);
        Measure<double> mu = detail::random_positive_measure<double>(y, rng);
        Dist<double> pi = random_dist<double>(x, rng);
        CHECK(channels_equal(invert(c, pi).channel,
                             invert_via_density(densify(c, mu), pi).channel, 1e-9));
    }
}

TEST_CASE("the density route flags an empty prediction") {
    Space b = bits();
    Space xy = Space::product(b, b);
    std::vector<R> dense(xy.size(), R(0));
    dense[xy.pair_index(1, 0)] = R(2);
    DensityChannel<R> dc =
        DensityChannel<R>::make(Effect<R>::from_dense(xy, dense), Measure<R>::counting(b));
    CHECK_THROWS_AS(invert_via_density(dc, Dist<R>::dirac(b, "0")), EmptyPushforward);
    CHECK_THROWS_AS(invert_via_density(dc, uniform(fresh_space("Z", 2))), SpaceMismatch);
}

TEST_CASE("randomized density lemmas pass in both modes") {
    RunConfig cfg;
    cfg.seed = 7;
    cfg.trials = 40;
    cfg.max_dim = 4;

    DensityPropsReport rat = check_density_props<R>(cfg);
    CHECK(rat.all_passed());
    CHECK(rat.first_failure.empty());
    CHECK(rat.scaled_kernel_trials + rat.scaled_kernel_skipped == cfg.trials);
    CHECK(rat.scaled_kernel_trials > 0);  // the forced half guarantees some
    CHECK(rat.pushforward_trials == cfg.trials);
    CHECK(rat.pushforward_passed == cfg.trials);

    cfg.numeric = Numeric::floating;
    DensityPropsReport flt = check_density_props<double>(cfg);
    CHECK(flt.all_passed());

    Json j = to_json(rat);
    CHECK(j["scaled_kernel"]["passed"] == rat.scaled_kernel_passed);
    CHECK(j["pushforward"]["trials"] == rat.pushforward_trials);
}
