#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "config.hpp"
#include "density.hpp"
#include "json_io.hpp"
#include "lens.hpp"
#include "random_gen.hpp"

namespace blens {

namespace harness_detail {

/// Replaces the first on-support row of an inversion with a blend of
/// itself and the uniform distribution.  Used as a negative control: the
/// result is still a valid channel but no longer the Bayesian inverse,
/// so the verification pipeline must flag it.
template <class T>
Channel<T> corrupt_first_row(const Channel<T>& k, const Dist<T>& support_of) {
    using traits = scalar_traits<T>;
    if (support_of.entries().empty()) return k;
    std::size_t victim = support_of.entries().front().first;
    std::vector<Dist<T>> rows;
    rows.reserve(k.dom().size());
    for (std::size_t y = 0; y < k.dom().size(); ++y) {
        if (y != victim) {
            rows.push_back(k.row(y));
            continue;
        }
        std::size_t n = k.cod().size();
        std::vector<T> dense = k.row(y).dense();
        T half = traits::ratio(1, 2);
        T unif = traits::ratio(1, static_cast<long>(2 * n));
        for (auto& m : dense) m = half * m + unif;
        rows.push_back(Dist<T>::from_dense(k.cod(), dense, traits::norm_eps()));
    }
    return Channel<T>::from_rows(k.dom(), k.cod(), std::move(rows));
}

/// Splits [0, trials) into `jobs` chunks and runs `body(t)` for every
/// trial index, in parallel when jobs > 1.  Each trial writes only its
/// own slot, so results are identical to a serial run by construction.
template <class Body>
void run_trials(int trials, int jobs, Body&& body) {
    if (jobs <= 1) {
        for (int t = 0; t < trials; ++t) body(t);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) {
        int lo = static_cast<int>(static_cast<long>(trials) * j / jobs);
        int hi = static_cast<int>(static_cast<long>(trials) * (j + 1) / jobs);
        workers.emplace_back([lo, hi, &body] {
            for (int t = lo; t < hi; ++t) body(t);
        });
    }
    for (auto& w : workers) w.join();
}

template <class T>
struct VerifyTrial {
    bool holds = true;
    T gap = scalar_traits<T>::zero();
    int bayes_checked = 0;
    int bayes_passed = 0;
    bool density_ran = false;
    bool density_holds = true;
    bool density_effect_identity = true;
    T density_gap = scalar_traits<T>::zero();
    std::optional<Json> witness;
};

template <class T>
struct LawsTrial {
    bool getput = true;
    bool putget_at_prediction = true;
    bool putget_random = true;        // almost always false by design
    std::string putget_obs;
    T putget_gap = scalar_traits<T>::zero();
    bool putput_found = false;
    std::optional<Json> putput_witness;
};

} // namespace harness_detail

/// One density-route comparison, shared between cmd_verify's quarter
/// trials and the acceptance run: presents random channels by densities,
/// inverts through the density route, and compares row-for-row with the
/// direct route; also checks that composing densities (integrating out
/// the middle variable) realizes to the composite channel.
template <class T>
struct DensityTrial {
    bool inversion_matches = true;       // row-for-row on the support
    bool zero_support_matches = true;    // same excluded observations
    bool effect_identity = true;         // density composite == channel composite
    bool bayes_ok = true;                // density-route inverse passes the relation
    T gap = scalar_traits<T>::zero();
};

/// Random strictly positive base measure with small integer weights.
template <class T>
Measure<T> random_base_measure(const Space& sp, TrialRng& rng) {
    std::vector<T> dense(sp.size());
    for (std::size_t i = 0; i < sp.size(); ++i)
        dense[i] = scalar_traits<T>::ratio(static_cast<long>(rng.between(1, 6)), 2);
    return Measure<T>::from_dense(sp, dense);
}

template <class T>
DensityTrial<T> density_trial(TrialRng& rng, int max_dim, const T& eps) {
    std::size_t nx = rng.between(2, static_cast<std::uint64_t>(max_dim));
    std::size_t ny = rng.between(2, static_cast<std::uint64_t>(max_dim));
    std::size_t nz = rng.between(2, static_cast<std::uint64_t>(max_dim));
    Space x = fresh_space("X", nx), y = fresh_space("Y", ny), z = fresh_space("Z", nz);
    Channel<T> c = random_channel<T>(x, y, rng);
    Channel<T> d = random_channel<T>(y, z, rng);
    Dist<T> prior = random_dist<T>(x, rng);
    Measure<T> mu = random_base_measure<T>(y, rng);
    Measure<T> nu = random_base_measure<T>(z, rng);

    DensityTrial<T> out;

    // Inversion through the density route vs the direct route.
    DensityChannel<T> dc = densify(c, mu);
    InversionResult<T> via_density = invert_via_density(dc, prior);
    InversionResult<T> direct = invert(c, prior);
    Dist<T> predicted = push_state(c, prior);
    out.gap = support_gap(via_density.channel, direct.channel, predicted);
    out.inversion_matches =
        almost_equal_rowwise(via_density.channel, direct.channel, predicted, eps);
    out.zero_support_matches = via_density.zero_support == direct.zero_support;
    out.bayes_ok = satisfies_bayes_relation(c, prior, via_density.channel, eps);

    // Composing the density presentations realizes the composite channel.
    DensityChannel<T> qd = densify(d, nu);
    Effect<T> composite_density = effect_seq(dc.density, mu, qd.density);
    Channel<T> realized =
        realize_channel(DensityChannel<T>::make(composite_density, nu));
    Channel<T> composite = seq_compose(c, d);
    out.effect_identity = almost_equal(realized, composite, prior, eps) &&
                          almost_equal_rowwise(realized, composite, prior, eps);
    return out;
}

/// Randomized verification of the central result: for random (c, d,
/// prior) the inverse of the composite equals the lens composite of the
/// inverses, almost everywhere with respect to the composite pushforward.
/// Every inversion computed along the way is also checked against the
/// defining relation of Bayesian inversion.  A quarter of the trials
/// additionally run the density-route comparison.
///
/// `jobs` only controls execution; reports are byte-identical across
/// serial and parallel runs of the same config (wall-clock aside).
/// `corrupt_inversion` is the negative-control hook: it deliberately
/// perturbs one posterior row per trial, and the run must fail.
template <class T>
Json run_verify(const RunConfig& config, int jobs = 1, bool corrupt_inversion = false) {
    using traits = scalar_traits<T>;
    config.validate();
    T eps = eps_from_config<T>(config);
    auto started = std::chrono::steady_clock::now();

    std::vector<harness_detail::VerifyTrial<T>> results(
        static_cast<std::size_t>(config.trials));
    harness_detail::run_trials(config.trials, jobs, [&](int t) {
        harness_detail::VerifyTrial<T>& out = results[static_cast<std::size_t>(t)];
        TrialRng rng = TrialRng::for_trial(config.seed, static_cast<std::uint64_t>(t));
        std::size_t nx = rng.between(2, static_cast<std::uint64_t>(config.max_dim));
        std::size_t ny = rng.between(2, static_cast<std::uint64_t>(config.max_dim));
        std::size_t nz = rng.between(2, static_cast<std::uint64_t>(config.max_dim));
        Space x = fresh_space("X", nx), y = fresh_space("Y", ny), z = fresh_space("Z", nz);
        Channel<T> c = random_channel<T>(x, y, rng);
        Channel<T> d = random_channel<T>(y, z, rng);
        Dist<T> prior = random_dist<T>(x, rng);

        Channel<T> composite = seq_compose(c, d);
        Dist<T> nu = push_state(composite, prior);
        Channel<T> direct = invert(composite, prior).channel;
        if (corrupt_inversion)
            direct = harness_detail::corrupt_first_row(direct, nu);
        Channel<T> composed =
            lens_compose(exact_lens(c), exact_lens(d)).backward(prior);
        out.holds = almost_equal(direct, composed, nu, eps) &&
                    almost_equal_rowwise(direct, composed, nu, eps);
        out.gap = support_gap(direct, composed, nu);

        // Defining-relation audit of every inversion this trial computed.
        Dist<T> mid = push_state(c, prior);
        auto audit = [&](const Channel<T>& fwd, const Dist<T>& pi, const Channel<T>& inv) {
            ++out.bayes_checked;
            if (satisfies_bayes_relation(fwd, pi, inv, eps)) ++out.bayes_passed;
        };
        audit(composite, prior, direct);
        audit(c, prior, invert(c, prior).channel);
        audit(d, mid, invert(d, mid).channel);

        if (t % 4 == 0) {
            out.density_ran = true;
            DensityTrial<T> dt = density_trial<T>(rng, config.max_dim, eps);
            out.density_holds = dt.inversion_matches && dt.zero_support_matches;
            out.density_effect_identity = dt.effect_identity;
            out.density_gap = dt.gap;
            ++out.bayes_checked;
            if (dt.bayes_ok) ++out.bayes_passed;
        }

        if (!out.holds) {
            out.witness = Json{{"trial", t},
                               {"dims", Json::array({nx, ny, nz})},
                               {"prior", to_json(prior)},
                               {"c", to_json(c)},
                               {"d", to_json(d)},
                               {"direct_inverse", to_json(direct)},
                               {"lens_composite", to_json(composed)},
                               {"gap", scalar_json(out.gap)}};
        }
    });

    int passed = 0, failed = 0;
    long bayes_checked = 0, bayes_passed = 0;
    int density_trials = 0, density_passed = 0, effect_identity_passed = 0;
    T max_gap = traits::zero(), density_max_gap = traits::zero();
    Json witnesses = Json::array();
    for (const auto& r : results) {
        (r.holds ? passed : failed)++;
        if (r.gap > max_gap) max_gap = r.gap;
        bayes_checked += r.bayes_checked;
        bayes_passed += r.bayes_passed;
        if (r.density_ran) {
            ++density_trials;
            if (r.density_holds) ++density_passed;
            if (r.density_effect_identity) ++effect_identity_passed;
            if (r.density_gap > density_max_gap) density_max_gap = r.density_gap;
        }
        if (r.witness && witnesses.size() < 5) witnesses.push_back(*r.witness);
    }
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    return Json{{"command", "verify"},
                {"config", to_json(config)},
                {"theorem", Json{{"trials", config.trials},
                                 {"passed", passed},
                                 {"failed", failed},
                                 {"max_gap", scalar_json(max_gap)}}},
                {"bayes_relation", Json{{"checked", bayes_checked},
                                        {"passed", bayes_passed}}},
                {"density_route", Json{{"trials", density_trials},
                                       {"passed", density_passed},
                                       {"effect_identity_passed", effect_identity_passed},
                                       {"max_gap", scalar_json(density_max_gap)}}},
                {"witnesses", witnesses},
                {"elapsed_ms", elapsed}};
}

/// Randomized check of the lens laws for exact inversion lenses:
/// GetPut must hold on every trial; PutGet must hold when the observed
/// state is the prior's own prediction; PutGet at random point
/// observations is expected to fail and failures are recorded as
/// expected witnesses; and each trial samples one (y1, y2) pair looking
/// for a PutPut counterexample of gap >= 1/20.
///
/// With `deterministic_generators` the channels are function channels;
/// PutPut counterexamples must then disappear.
template <class T>
Json run_laws(const RunConfig& config, int jobs = 1, bool deterministic_generators = false) {
    using traits = scalar_traits<T>;
    config.validate();
    T eps = eps_from_config<T>(config);
    T threshold = traits::ratio(1, 20);
    auto started = std::chrono::steady_clock::now();

    std::vector<harness_detail::LawsTrial<T>> results(
        static_cast<std::size_t>(config.trials));
    harness_detail::run_trials(config.trials, jobs, [&](int t) {
        harness_detail::LawsTrial<T>& out = results[static_cast<std::size_t>(t)];
        TrialRng rng = TrialRng::for_trial(config.seed ^ 0xa5a5a5a5a5a5a5a5ULL,
                                           static_cast<std::uint64_t>(t));
        std::size_t nx = rng.between(2, static_cast<std::uint64_t>(config.max_dim));
        std::size_t ny = rng.between(2, static_cast<std::uint64_t>(config.max_dim));
        Space x = fresh_space("X", nx), y = fresh_space("Y", ny);
        Channel<T> c = deterministic_generators
                           ? random_deterministic_channel<T>(x, y, rng)
                           : random_channel<T>(x, y, rng);
        Dist<T> prior = random_dist<T>(x, rng);

        out.getput = check_getput(c, prior, eps).holds;
        out.putget_at_prediction =
            check_putget_at(c, prior, push_state(c, prior), eps).holds;

        // Random point observation: PutGet generally fails here.
        Dist<T> obs = Dist<T>::dirac(y, y.label(rng.below(y.size())));
        LawReport<T> pg = check_putget_at(c, prior, obs, eps);
        out.putget_random = pg.holds;
        out.putget_obs = y.label(obs.entries().front().first);
        if (pg.witness) out.putget_gap = pg.witness->gap;

        // One sampled (y1, y2) pair per trial.  Pairs that would condition
        // on an observation of zero predicted mass are skipped: those
        // updates fall back to a reporting convention, not an inference,
        // so they cannot witness a law failure.
        std::size_t y1 = rng.below(y.size()), y2 = rng.below(y.size());
        Channel<T> once = invert(c, prior).channel;
        Dist<T> first_predicted = push_state(c, prior);
        if (!first_predicted.in_support(y1)) return;
        Channel<T> twice = invert(c, once.row(y1)).channel;
        Dist<T> second_predicted = push_state(c, once.row(y1));
        if (!second_predicted.in_support(y2)) return;
        T gap = total_variation(twice.row(y2), once.row(y2));
        if (gap >= threshold) {
            out.putput_found = true;
            out.putput_witness = Json{{"trial", t},
                                      {"prior", to_json(prior)},
                                      {"c", to_json(c)},
                                      {"first_observation", y.label(y1)},
                                      {"second_observation", y.label(y2)},
                                      {"double_update", to_json(twice.row(y2))},
                                      {"single_update", to_json(once.row(y2))},
                                      {"gap", scalar_json(gap)}};
        }
    });

    int getput_passed = 0, putget_passed = 0, putget_random_violations = 0;
    int putput_found_count = 0, first_found = -1;
    Json putget_witnesses = Json::array();
    Json putput_witness;
    for (int t = 0; t < config.trials; ++t) {
        const auto& r = results[static_cast<std::size_t>(t)];
        if (r.getput) ++getput_passed;
        if (r.putget_at_prediction) ++putget_passed;
        if (!r.putget_random) {
            ++putget_random_violations;
            if (putget_witnesses.size() < 10)
                putget_witnesses.push_back(Json{{"trial", t},
                                                {"observation", r.putget_obs},
                                                {"gap", scalar_json(r.putget_gap)}});
        }
        if (r.putput_found) {
            ++putput_found_count;
            if (first_found < 0) {
                first_found = t;
                putput_witness = *r.putput_witness;
            }
        }
    }
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    Json putput{{"sampled", config.trials},
                {"found", putput_found_count > 0},
                {"found_count", putput_found_count},
                {"first_found_trial", first_found}};
    if (first_found >= 0) putput["witness"] = putput_witness;
    return Json{{"command", "laws"},
                {"config", to_json(config)},
                {"generators", deterministic_generators ? "deterministic" : "stochastic"},
                {"get_put", Json{{"trials", config.trials}, {"passed", getput_passed}}},
                {"put_get_at_prediction",
                 Json{{"trials", config.trials}, {"passed", putget_passed}}},
                {"put_get_random", Json{{"trials", config.trials},
                                        {"violations", putget_random_violations},
                                        {"witnesses", putget_witnesses}}},
                {"put_put", putput},
                {"elapsed_ms", elapsed}};
}

/// The same JSON with the wall-clock field removed — what reproducibility
/// comparisons are made over.
inline Json strip_wall_clock(Json j) {
    j.erase("elapsed_ms");
    return j;
}

/// Whether a verify/laws report signals overall success (the exit-code
/// contract: laws ignores the expected PutGet violations and the PutPut
/// search result).
inline bool report_passed(const Json& report) {
    if (report.at("command") == "verify") {
        return report.at("theorem").at("failed").get<int>() == 0 &&
               report.at("bayes_relation").at("checked") ==
                   report.at("bayes_relation").at("passed") &&
               report.at("density_route").at("trials") ==
                   report.at("density_route").at("passed") &&
               report.at("density_route").at("trials") ==
                   report.at("density_route").at("effect_identity_passed");
    }
    return report.at("get_put").at("trials") == report.at("get_put").at("passed") &&
           report.at("put_get_at_prediction").at("trials") ==
               report.at("put_get_at_prediction").at("passed");
}

} // namespace blens
