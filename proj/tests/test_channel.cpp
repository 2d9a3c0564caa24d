#include <blens/channel.hpp>
#include <blens/json_io.hpp>
#include <blens/random_gen.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "support/oracles.hpp"

using namespace blens;
using R = Rational;

namespace {

Space bits() { return Space("Bit", {"0", "1"}); }

// Binary symmetric channel: flips the bit with probability p.
Channel<R> bsc(const R& p) {
    Space b = bits();
    R q = R(1) - p;
    return Channel<R>::from_table(b, b,
                                  {{"0", Dist<R>::make(b, {{"0", q}, {"1", p}})},
                                   {"1", Dist<R>::make(b, {{"0", p}, {"1", q}})}});
}

} // namespace

TEST_CASE("channel construction validates its table") {
    Space b = bits();
    Dist<R> u = Dist<R>::make(b, {{"0", R(1, 2)}, {"1", R(1, 2)}});
    CHECK_THROWS_AS(Channel<R>::from_table(b, b, {{"0", u}}), MissingRow);
    CHECK_THROWS_AS(Channel<R>::from_table(b, b, {{"0", u}, {"0", u}, {"1", u}}),
                    MissingRow);
    Space t = Space("T", {"x", "y", "z"});
    Dist<R> wrong = Dist<R>::dirac(t, "x");
    CHECK_THROWS_AS(Channel<R>::from_table(b, b, {{"0", wrong}, {"1", u}}), SpaceMismatch);
    CHECK_THROWS_AS(Channel<R>::from_table(b, b, {{"zzz", u}, {"1", u}}), UnknownElement);
    CHECK_THROWS_AS(Channel<R>::from_rows(b, b, {u}), MissingRow);
}

TEST_CASE("identity channel is the identity matrix") {
    Space t = Space("T", {"x", "y", "z"});
    Channel<R> id = Channel<R>::identity(t);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(id.at(i, j) == (i == j ? R(1) : R(0)));
}

TEST_CASE("kleisli extension matches the law of total probability") {
    // Reference by hand: pushing {0: 7/10, 1: 3/10} through a channel
    // that flips with probability 1/5 gives
    //   P(0) = 7/10 * 4/5 + 3/10 * 1/5 = 31/50.
    Space b = bits();
    Dist<R> prior = Dist<R>::make(b, {{"0", R(7, 10)}, {"1", R(3, 10)}});
    Dist<R> pushed = kleisli_extend(bsc(R(1, 5)), prior);
    CHECK(pushed.mass("0") == R(31, 50));
    CHECK(pushed.mass("1") == R(19, 50));
    CHECK(pushed.total() == R(1));

    // push_state is the same operation under its lens-side name.
    CHECK(dists_equal(push_state(bsc(R(1, 5)), prior), pushed, R(0)));

    // Extension along the identity is the identity on states.
    CHECK(dists_equal(kleisli_extend(Channel<R>::identity(b), prior), prior, R(0)));

    // Extension of a point mass reads off a row.
    CHECK(dists_equal(kleisli_extend(bsc(R(1, 5)), Dist<R>::dirac(b, "1")),
                      bsc(R(1, 5)).row("1"), R(0)));

    CHECK_THROWS_AS(kleisli_extend(bsc(R(1, 5)), Dist<R>::dirac(Space("T", {"t"}), "t")),
                    SpaceMismatch);
}

TEST_CASE("sequential composition is the stochastic matrix product") {
    // Two flip channels in sequence flip with the lapse-rate sum:
    //   1/5 * 9/10 + 4/5 * 1/10 = 13/50.
    Channel<R> two = seq_compose(bsc(R(1, 5)), bsc(R(1, 10)));
    CHECK(channels_equal(two, bsc(R(13, 50)), R(0)));

    // Against the dense matrix oracle on random instances.
    for (int t = 0; t < 30; ++t) {
        TrialRng rng = TrialRng::for_trial(11, static_cast<std::uint64_t>(t));
        Space x = fresh_space("X", rng.between(2, 4));
        Space y = fresh_space("Y", rng.between(2, 4));
        Space z = fresh_space("Z", rng.between(2, 4));
        Channel<R> f = random_channel<R>(x, y, rng);
        Channel<R> g = random_channel<R>(y, z, rng);
        CHECK(oracles::channel_matches(seq_compose(f, g),
                                       oracles::matmul(oracles::matrix(f),
                                                       oracles::matrix(g)),
                                       R(0)));
    }

    CHECK_THROWS_AS(seq_compose(bsc(R(1, 5)), Channel<R>::identity(Space("T", {"t", "u"}))),
                    SpaceMismatch);
}

TEST_CASE("composition satisfies the category laws") {
    for (int t = 0; t < 30; ++t) {
        TrialRng rng = TrialRng::for_trial(12, static_cast<std::uint64_t>(t));
        Space x = fresh_space("X", rng.between(2, 5));
        Space y = fresh_space("Y", rng.between(2, 5));
        Space z = fresh_space("Z", rng.between(2, 5));
        Space w = fresh_space("W", rng.between(2, 5));
        Channel<R> f = random_channel<R>(x, y, rng);
        Channel<R> g = random_channel<R>(y, z, rng);
        Channel<R> h = random_channel<R>(z, w, rng);

        CHECK(channels_equal(seq_compose(Channel<R>::identity(x), f), f, R(0)));
        CHECK(channels_equal(seq_compose(f, Channel<R>::identity(y)), f, R(0)));
        CHECK(channels_equal(seq_compose(seq_compose(f, g), h),
                             seq_compose(f, seq_compose(g, h)), R(0)));
    }
}

TEST_CASE("tensor multiplies entries independently") {
    Channel<R> f = bsc(R(1, 5));
    Channel<R> g = bsc(R(1, 10));
    Channel<R> fg = tensor(f, g);
    const Space& dom = fg.dom();
    const Space& cod = fg.cod();
    REQUIRE(dom.size() == 4);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t c = 0; c < 2; ++c)
                for (std::size_t d = 0; d < 2; ++d)
                    CHECK(fg.at(dom.pair_index(a, b), cod.pair_index(c, d)) ==
                          f.at(a, c) * g.at(b, d));
    CHECK(cod.label(cod.pair_index(0, 1)) == "(0,1)");
}

TEST_CASE("tensor is natural with respect to projections and satisfies interchange") {
    for (int t = 0; t < 25; ++t) {
        TrialRng rng = TrialRng::for_trial(13, static_cast<std::uint64_t>(t));
        Space x1 = fresh_space("X1", rng.between(2, 3));
        Space x2 = fresh_space("X2", rng.between(2, 3));
        Space y1 = fresh_space("Y1", rng.between(2, 3));
        Space y2 = fresh_space("Y2", rng.between(2, 3));
        Space z1 = fresh_space("Z1", rng.between(2, 3));
        Space z2 = fresh_space("Z2", rng.between(2, 3));
        Channel<R> f = random_channel<R>(x1, y1, rng);
        Channel<R> g = random_channel<R>(x2, y2, rng);
        Channel<R> f2 = random_channel<R>(y1, z1, rng);
        Channel<R> g2 = random_channel<R>(y2, z2, rng);

        // Project-then-apply equals apply-then-project.
        CHECK(channels_equal(seq_compose(tensor(f, g), proj1_channel<R>(y1, y2)),
                             seq_compose(proj1_channel<R>(x1, x2), f), R(0)));
        CHECK(channels_equal(seq_compose(tensor(f, g), proj2_channel<R>(y1, y2)),
                             seq_compose(proj2_channel<R>(x1, x2), g), R(0)));

        // Interchange of sequential and parallel composition.
        CHECK(channels_equal(tensor(seq_compose(f, f2), seq_compose(g, g2)),
                             seq_compose(tensor(f, g), tensor(f2, g2)), R(0)));
    }
}

TEST_CASE("copy and discard make every space a commutative comonoid") {
    for (int t = 0; t < 20; ++t) {
        TrialRng rng = TrialRng::for_trial(14, static_cast<std::uint64_t>(t));
        Space x = fresh_space("X", rng.between(2, 5));
        Channel<R> id = Channel<R>::identity(x);

        // Counitality: copying then projecting out either leg is the identity.
        CHECK(channels_equal(seq_compose(copy_channel<R>(x), proj1_channel<R>(x, x)), id,
                             R(0)));
        CHECK(channels_equal(seq_compose(copy_channel<R>(x), proj2_channel<R>(x, x)), id,
                             R(0)));

        // Commutativity: copying then swapping is copying.
        CHECK(channels_equal(seq_compose(copy_channel<R>(x), swap_channel<R>(x, x)),
                             copy_channel<R>(x), R(0)));

        // Coassociativity: the two double-copies agree entry by entry.
        // Their codomains differ as nested products, but the row-major
        // flat indexing coincides, so the dense rows must match.
        Channel<R> left = seq_compose(copy_channel<R>(x),
                                      tensor(copy_channel<R>(x), Channel<R>::identity(x)));
        Channel<R> right = seq_compose(copy_channel<R>(x),
                                       tensor(Channel<R>::identity(x), copy_channel<R>(x)));
        REQUIRE(left.dom().size() == right.dom().size());
        for (std::size_t i = 0; i < left.dom().size(); ++i)
            CHECK(left.row(i).dense() == right.row(i).dense());
    }
}

TEST_CASE("swapping twice is the identity") {
    Space a = Space("A", {"a1", "a2"});
    Space b = Space("B", {"b1", "b2", "b3"});
    CHECK(channels_equal(seq_compose(swap_channel<R>(a, b), swap_channel<R>(b, a)),
                         Channel<R>::identity(Space::product(a, b)), R(0)));
}

TEST_CASE("every channel is causal: discarding the output discards the channel") {
    for (int t = 0; t < 20; ++t) {
        TrialRng rng = TrialRng::for_trial(15, static_cast<std::uint64_t>(t));
        Space x = fresh_space("X", rng.between(2, 5));
        Space y = fresh_space("Y", rng.between(2, 5));
        Channel<R> c = random_channel<R>(x, y, rng);
        CHECK(channels_equal(seq_compose(c, discard_channel<R>(y)), discard_channel<R>(x),
                             R(0)));
    }
}

TEST_CASE("the structural dispatcher selects the named maps and checks arity") {
    Space a = Space("A", {"a1", "a2"});
    Space b = Space("B", {"b1", "b2", "b3"});
    CHECK(channels_equal(structural_channel<R>(Structural::copy, a), copy_channel<R>(a),
                         R(0)));
    CHECK(channels_equal(structural_channel<R>(Structural::discard, a),
                         discard_channel<R>(a), R(0)));
    CHECK(channels_equal(structural_channel<R>(Structural::swap, a, b),
                         swap_channel<R>(a, b), R(0)));
    CHECK(channels_equal(structural_channel<R>(Structural::proj1, a, b),
                         proj1_channel<R>(a, b), R(0)));
    CHECK(channels_equal(structural_channel<R>(Structural::proj2, a, b),
                         proj2_channel<R>(a, b), R(0)));
    CHECK_THROWS_AS(structural_channel<R>(Structural::copy, a, b), SpaceMismatch);
    CHECK_THROWS_AS(structural_channel<R>(Structural::swap, a), SpaceMismatch);
    CHECK_THROWS_AS(structural_channel<R>(Structural::proj1, a), SpaceMismatch);
}

TEST_CASE("copying is not natural for stochastic channels") {
    // Copying a noisy output is correlated; sampling twice independently
    // is not.  For the flip channel with p = 1/5 at input 0:
    //   copy-after: P((0,0)) = 4/5;  sample-twice: P((0,0)) = 16/25.
    Channel<R> c = bsc(R(1, 5));
    Channel<R> lhs = seq_compose(c, copy_channel<R>(c.cod()));
    Channel<R> rhs = seq_compose(copy_channel<R>(c.dom()), tensor(c, c));
    CHECK(lhs.at(0, 0) == R(4, 5));
    CHECK(rhs.at(0, 0) == R(16, 25));
    CHECK_FALSE(channels_equal(lhs, rhs, R(0)));

    // For deterministic channels the two sides agree.
    Space b = bits();
    Channel<R> negate = lift_function<R>(b, b, [](const std::string& s) {
        return s == "0" ? "1" : "0";
    });
    CHECK(channels_equal(seq_compose(negate, copy_channel<R>(b)),
                         seq_compose(copy_channel<R>(b), tensor(negate, negate)), R(0)));
}

TEST_CASE("lift_function embeds functions as deterministic channels") {
    Space b = bits();
    Space t = Space("T", {"lo", "hi"});
    Channel<R> f = lift_function<R>(b, t, [](const std::string& s) {
        return s == "0" ? "lo" : "hi";
    });
    CHECK(f.row("0").mass("lo") == R(1));
    CHECK(f.row("1").mass("hi") == R(1));
    CHECK(channels_equal(lift_function<R>(b, b, [](const std::string& s) { return s; }),
                         Channel<R>::identity(b), R(0)));
    CHECK_THROWS_AS(lift_function<R>(b, t, [](const std::string&) { return "nope"; }),
                    UnknownElement);
}

TEST_CASE("determinism detection agrees across both characterizations") {
    Space b = bits();
    CHECK(is_deterministic(Channel<R>::identity(b)));
    CHECK(is_deterministic(lift_function<R>(b, b, [](const std::string&) { return "0"; })));
    CHECK_FALSE(is_deterministic(bsc(R(1, 5))));

    // The dual characterization (rows are point masses vs the channel
    // preserving copy) must never disagree: is_deterministic throws a
    // logic error if they split, so running it at all is the check.
    for (int t = 0; t < 40; ++t) {
        TrialRng rng = TrialRng::for_trial(16, static_cast<std::uint64_t>(t));
        Space x = fresh_space("X", rng.between(2, 4));
        Space y = fresh_space("Y", rng.between(2, 4));
        CHECK_FALSE(is_deterministic(random_channel<R>(x, y, rng)));
        CHECK(is_deterministic(random_deterministic_channel<R>(x, y, rng)));
    }
}

TEST_CASE("max_row_gap reports the worst row distance") {
    CHECK(max_row_gap(bsc(R(1, 5)), bsc(R(3, 10))) == R(1, 10));
    CHECK(max_row_gap(bsc(R(1, 5)), bsc(R(1, 5))) == R(0));
    CHECK_THROWS_AS(max_row_gap(bsc(R(1, 5)), Channel<R>::identity(Space("T", {"t", "u"}))),
                    SpaceMismatch);
}

TEST_CASE("channel JSON round-trips and rejects corrupt imports") {
    Channel<R> c = bsc(R(1, 5));
    Json j = to_json(c);
    CHECK(j["rows"]["0"]["1"] == "1/5");
    Channel<R> back = channel_from_json<R>(j, "Bit", "Bit");
    CHECK(channels_equal(c, back, R(0)));

    Channel<double> cf = Channel<double>::from_table(
        bits(), bits(),
        {{"0", Dist<double>::make(bits(), {{"0", 0.8}, {"1", 0.2}})},
         {"1", Dist<double>::make(bits(), {{"0", 0.2}, {"1", 0.8}})}});
    Channel<double> backf = channel_from_json<double>(to_json(cf));
    CHECK(channels_equal(cf, backf, 0.0));

    // A row that fails to sum to one is rejected on import.
    Json bad = j;
    bad["rows"]["0"]["1"] = "1/10";
    CHECK_THROWS_AS(channel_from_json<R>(bad), NotNormalized);

    // A row whose labels do not match the codomain is rejected.
    Json badlabel = j;
    badlabel["rows"]["0"]["oops"] = "1/5";
    CHECK_THROWS_AS(channel_from_json<R>(badlabel), Error);
}
