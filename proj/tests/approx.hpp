// doctest's Approx folds an absolute term (scale, default 1.0) into the
// tolerance, which silently passes any relative comparison between
// pico-scale quantities. approx() removes the absolute term so epsilon is
// purely relative. Comparisons against an expected value of exactly zero
// need explicit absolute bounds instead.
#ifndef DIAMAG_TEST_APPROX_HPP
#define DIAMAG_TEST_APPROX_HPP

#include <doctest.h>

inline doctest::Approx approx(double value, double rel = 1e-9) {
    return doctest::Approx(value).epsilon(rel).scale(0.0);
}

#endif
