#pragma once

#include <gmpxx.h>

#include <string>

#include "pexp/common.hpp"

namespace pexp {

// All probabilities and moments are exact rationals end to end; floating
// point only appears in the float PSD cross-check and in report summaries.
using Rat = mpq_class;

inline Rat rat_pow2(long e) {
    Rat r = 1;
    if (e >= 0) {
        mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(e));
    } else {
        mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(-e));
    }
    return r;
}

inline std::string rat_to_string(const Rat& r) { return r.get_str(); }

inline double rat_to_double(const Rat& r) { return r.get_d(); }

/// Parses "p/q", "p", or a plain decimal such as "0.25" into an exact rational.
inline Rat rat_from_string(const std::string& s) {
    if (s.empty()) throw input_error("empty rational literal");
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        if (s.find('/') != std::string::npos)
            throw input_error("rational literal mixes '/' and '.': " + s);
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        std::size_t frac_len = s.size() - dot - 1;
        if (digits.empty() || digits == "-" || digits == "+")
            throw input_error("bad decimal literal: " + s);
        mpz_class num;
        if (mpz_set_str(num.get_mpz_t(), digits.c_str(), 10) != 0)
            throw input_error("bad decimal literal: " + s);
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_len);
        Rat r(num, den);
        r.canonicalize();
        return r;
    }
    Rat r;
    if (mpq_set_str(r.get_mpq_t(), s.c_str(), 10) != 0)
        throw input_error("bad rational literal: " + s);
    if (mpz_sgn(mpq_denref(r.get_mpq_t())) == 0)
        throw input_error("zero denominator: " + s);
    r.canonicalize();
    return r;
}

}  // namespace pexp
