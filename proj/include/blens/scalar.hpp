#pragma once

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rational.hpp"

namespace blens {

/// The library's numeric core is generic over the scalar type.  Two
/// instantiations are supported:
///   - Rational: exact arithmetic, all comparisons literal equality;
///   - double:   floating arithmetic with explicit tolerances.
/// scalar_traits bundles what the generic code needs to know about each.
template <class T>
struct scalar_traits;

template <>
struct scalar_traits<Rational> {
    static constexpr bool exact = true;
    static Rational zero() { return Rational(0); }
    static Rational one() { return Rational(1); }
    /// Default comparison / normalization tolerances (exact mode: none).
    static Rational cmp_eps() { return Rational(0); }
    static Rational norm_eps() { return Rational(0); }
    static Rational ratio(long n, long d) { return Rational(n, d); }
    static Rational from_int(long n) { return Rational(n); }
    static Rational abs(const Rational& x) { return blens::abs(x); }
    static bool finite(const Rational&) { return true; }
    static double to_double(const Rational& x) { return x.to_double(); }
    /// Parses "p/q", integers, and exact decimals.
    static Rational parse(std::string_view text) { return Rational::parse(text); }
    static std::string to_text(const Rational& x) { return x.str(); }
    static const char* mode_name() { return "rational"; }
};

template <>
struct scalar_traits<double> {
    static constexpr bool exact = false;
    static double zero() { return 0.0; }
    static double one() { return 1.0; }
    static double cmp_eps() { return 1e-9; }
    static double norm_eps() { return 1e-9; }
    static double ratio(long n, long d) { return static_cast<double>(n) / static_cast<double>(d); }
    static double from_int(long n) { return static_cast<double>(n); }
    static double abs(double x) { return std::fabs(x); }
    static bool finite(double x) { return std::isfinite(x); }
    static double to_double(double x) { return x; }
    /// Accepts the same source forms as the exact mode ("p/q", integers,
    /// decimals) so model files mean the same thing in either mode.
    static double parse(std::string_view text) {
        if (text.find('/') != std::string_view::npos)
            return Rational::parse(text).to_double();
        std::string buf(text);
        char* end = nullptr;
        double v = std::strtod(buf.c_str(), &end);
        if (end != buf.c_str() + buf.size() || buf.empty())
            throw std::invalid_argument("double: cannot parse \"" + buf + "\"");
        return v;
    }
    /// Shortest round-trip decimal form.
    static std::string to_text(double x) {
        char buf[64];
        auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
        if (ec != std::errc{}) throw std::runtime_error("double: format failure");
        return std::string(buf, p);
    }
    static const char* mode_name() { return "float"; }
};

/// |a - b| <= eps (exact mode: eps is 0, so literal equality).
template <class T>
bool approx_eq(const T& a, const T& b, const T& eps) {
    return scalar_traits<T>::abs(a - b) <= eps;
}

} // namespace blens
