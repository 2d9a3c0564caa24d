#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "density.hpp"
#include "lens.hpp"

namespace blens {

/// All serialization uses insertion-ordered JSON so that element order
/// (= declaration order) is preserved and output is reproducible
/// byte-for-byte.
using Json = nlohmann::ordered_json;

/// Scalars: rationals as "p/q" strings, floats as plain numbers.
inline Json scalar_json(const Rational& r) { return r.str(); }
inline Json scalar_json(double d) { return d; }

template <class T>
T scalar_from_json(const Json& j) {
    if constexpr (scalar_traits<T>::exact) {
        if (j.is_string()) return Rational::parse(j.get<std::string>());
        if (j.is_number_integer()) return Rational(j.get<long>());
        if (j.is_number_float())
            throw Error("rational mode: refusing to read a float mass; use \"p/q\"");
        throw Error("cannot read a rational from " + j.dump());
    } else {
        if (j.is_number()) return j.get<double>();
        if (j.is_string()) return scalar_traits<double>::parse(j.get<std::string>());
        throw Error("cannot read a number from " + j.dump());
    }
}

// ---------------------------------------------------------------- Dist

template <class T>
Json to_json(const Dist<T>& d) {
    Json masses = Json::object();
    for (const auto& [i, m] : d.entries())
        masses[d.space().label(i)] = scalar_json(m);
    return Json{{"space", d.space().name()}, {"masses", masses}};
}

/// Reads a distribution; the caller supplies the space the "space" field
/// refers to.  Validation (normalization and labels) applies as usual.
template <class T>
Dist<T> dist_from_json(const Json& j, const Space& space,
                       const T& norm_eps = scalar_traits<T>::norm_eps()) {
    std::vector<std::pair<std::string, T>> masses;
    for (const auto& [label, v] : j.at("masses").items())
        masses.emplace_back(label, scalar_from_json<T>(v));
    return Dist<T>::make(space, masses, norm_eps);
}

// ------------------------------------------------------------- Channel

template <class T>
Json to_json(const Channel<T>& c) {
    Json rows = Json::object();
    for (std::size_t x = 0; x < c.dom().size(); ++x) {
        Json row = Json::object();
        for (const auto& [y, m] : c.row(x).entries())
            row[c.cod().label(y)] = scalar_json(m);
        rows[c.dom().label(x)] = row;
    }
    return Json{{"dom", c.dom().elements()}, {"cod", c.cod().elements()}, {"rows", rows}};
}

/// Reads a channel.  Spaces are reconstructed from the embedded element
/// lists; stochasticity of every row is validated on import.
template <class T>
Channel<T> channel_from_json(const Json& j, const std::string& dom_name = "dom",
                             const std::string& cod_name = "cod",
                             const T& norm_eps = scalar_traits<T>::norm_eps()) {
    Space dom(dom_name, j.at("dom").get<std::vector<std::string>>());
    Space cod(cod_name, j.at("cod").get<std::vector<std::string>>());
    std::vector<std::pair<std::string, Dist<T>>> rows;
    for (const auto& [label, rj] : j.at("rows").items()) {
        std::vector<std::pair<std::string, T>> masses;
        for (const auto& [elem, v] : rj.items())
            masses.emplace_back(elem, scalar_from_json<T>(v));
        rows.emplace_back(label, Dist<T>::make(cod, masses, norm_eps));
    }
    return Channel<T>::from_table(dom, cod, rows);
}

// ---------------------------------------------------- InversionResult

template <class T>
Json to_json(const InversionResult<T>& r) {
    Json j = to_json(r.channel);
    j["zero_support"] = r.zero_support;
    return j;
}

// ------------------------------------------------- Measure and Effect

template <class T>
Json to_json(const Measure<T>& m) {
    Json masses = Json::object();
    for (const auto& [i, w] : m.entries())
        masses[m.space().label(i)] = scalar_json(w);
    return Json{{"space", m.space().name()}, {"masses", masses}};
}

template <class T>
Measure<T> measure_from_json(const Json& j, const Space& space) {
    std::vector<std::pair<std::string, T>> weights;
    for (const auto& [label, v] : j.at("masses").items())
        weights.emplace_back(label, scalar_from_json<T>(v));
    return Measure<T>::make(space, weights);
}

template <class T>
Json to_json(const Effect<T>& e) {
    Json masses = Json::object();
    for (const auto& [i, v] : e.entries())
        masses[e.dom().label(i)] = scalar_json(v);
    return Json{{"space", e.dom().name()}, {"masses", masses}};
}

template <class T>
Effect<T> effect_from_json(const Json& j, const Space& dom) {
    std::vector<std::pair<std::string, T>> values;
    for (const auto& [label, v] : j.at("masses").items())
        values.emplace_back(label, scalar_from_json<T>(v));
    return Effect<T>::make(dom, values);
}

template <class T>
Json to_json(const DensityChannel<T>& dc) {
    return Json{{"density", to_json(dc.density)}, {"base", to_json(dc.base)}};
}

// ------------------------------------------------------------ Reports

template <class T>
Json to_json(const CompositionReport<T>& r) {
    return Json{{"holds", r.holds},
                {"max_gap", scalar_json(r.max_gap)},
                {"zero_support", r.zero_support}};
}

template <class T>
Json to_json(const LawWitness<T>& w) {
    Json inputs = Json::object();
    for (const auto& [name, d] : w.inputs) inputs[name] = to_json(d);
    Json labels = Json::object();
    for (const auto& [name, l] : w.labels) labels[name] = l;
    return Json{{"inputs", inputs},
                {"labels", labels},
                {"lhs", to_json(w.lhs)},
                {"rhs", to_json(w.rhs)},
                {"gap", scalar_json(w.gap)}};
}

template <class T>
Json to_json(const LawReport<T>& r) {
    Json j{{"law", law_name(r.law)}, {"holds", r.holds}};
    if (r.witness) j["witness"] = to_json(*r.witness);
    return j;
}

inline Json to_json(const DensityPropsReport& r) {
    return Json{{"scaled_kernel",
                 Json{{"trials", r.scaled_kernel_trials},
                      {"passed", r.scaled_kernel_passed},
                      {"skipped_precondition", r.scaled_kernel_skipped}}},
                {"pushforward",
                 Json{{"trials", r.pushforward_trials}, {"passed", r.pushforward_passed}}},
                {"first_failure", r.first_failure}};
}

inline Json to_json(const RunConfig& c) {
    return Json{{"seed", c.seed},
                {"trials", c.trials},
                {"max_dim", c.max_dim},
                {"numeric", numeric_name(c.numeric)},
                {"tolerance", c.tolerance},
                {"format", format_name(c.format)}};
}

} // namespace blens
