#include <komega/dynamics.hpp>
#include <komega/rng.hpp>
#include <komega/spectral.hpp>

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

using namespace komega;
using namespace komega::spectral;

namespace {

constexpr double pi = std::numbers::pi;

// Direct-evaluation oracle: p(n) = sum_{l<n} e^{i l w} v_l with the phase for
// every term computed from scratch in extended precision (no multiplicative
// update, no renormalization).
ArrayXcd naive_weighted_sums(const ArrayXd& v, double omega) {
    ArrayXcd p(v.size() + 1);
    p[0] = {0, 0};
    std::complex<long double> acc(0, 0);
    for (Index l = 0; l < v.size(); ++l) {
        const long double angle = static_cast<long double>(omega) * static_cast<long double>(l);
        acc += std::polar(1.0L, angle) * static_cast<long double>(v[l]);
        p[l + 1] = std::complex<double>(static_cast<double>(acc.real()),
                                        static_cast<double>(acc.imag()));
    }
    return p;
}

// Brute-force structure function straight from the definition.
double brute_S(const ArrayXcd& p, Index n, Index J) {
    long double acc = 0;
    for (Index j = 0; j < J; ++j) {
        const std::complex<double> d = p[j + n] - p[j];
        acc += static_cast<long double>(std::norm(d));
    }
    return static_cast<double>(acc / J);
}

double uniform_pm1(std::uint64_t seed, std::uint64_t k) {
    return 2.0 * rng::uniform_open01(rng::derive(seed, rng::Stream::omega_draw, k)) - 1.0;
}

ArrayXd random_series(Index n, std::uint64_t seed) {
    ArrayXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform_pm1(seed, static_cast<std::uint64_t>(i));
    return v;
}

ArrayXcd random_complex(Index n, std::uint64_t seed) {
    ArrayXcd p(n);
    for (Index i = 0; i < n; ++i)
        p[i] = {uniform_pm1(seed, 2 * static_cast<std::uint64_t>(i)),
                uniform_pm1(seed, 2 * static_cast<std::uint64_t>(i) + 1)};
    return p;
}

TimeSeries series_of(const ArrayXd& v) {
    TimeSeries ts;
    ts.values = v;
    return ts;
}

double rel_err(double got, double want) {
    const double scale = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / scale;
}

}  // namespace

TEST_CASE("weighted sums: alternating weights at omega = pi") {
    ArrayXd v(3);
    v << 1, 2, 3;
    const auto p = weighted_sums(series_of(v), pi);
    REQUIRE(p.values.size() == 4);
    CHECK(p.values[0] == std::complex<double>(0, 0));
    const double want[4] = {0, 1, -1, 2};
    for (Index n = 0; n < 4; ++n) {
        CHECK(std::abs(p.values[n].real() - want[n]) < 1e-14);
        CHECK(std::abs(p.values[n].imag()) < 1e-14);
    }
}

TEST_CASE("weighted sums: fourth roots of unity at omega = pi/2") {
    ArrayXd v = ArrayXd::Ones(4);
    const auto p = weighted_sums(series_of(v), pi / 2);
    const std::complex<double> want[5] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}};
    for (Index n = 0; n < 5; ++n) CHECK(std::abs(p.values[n] - want[n]) < 1e-14);
}

TEST_CASE("weighted sums match the direct-evaluation oracle") {
    for (std::uint64_t trial = 0; trial < 8; ++trial) {
        const ArrayXd v = random_series(64, 100 + trial);
        const double omega = rng::uniform_open(rng::derive(7, rng::Stream::omega_draw, trial), 0.01, pi - 0.01);
        const auto p = weighted_sums(series_of(v), omega);
        const ArrayXcd q = naive_weighted_sums(v, omega);
        for (Index n = 0; n <= 64; ++n) {
            const double scale = std::max(1.0, std::abs(q[n]));
            CHECK(std::abs(p.values[n] - q[n]) / scale < 1e-12);
        }
    }
}

TEST_CASE("weighted sums increment invariant: p(n) - p(n-1) = e^{i(n-1)w} v_{n-1}") {
    const ArrayXd v = random_series(256, 11);
    const double omega = 1.234567;
    const auto p = weighted_sums(series_of(v), omega);
    for (Index n = 1; n <= 256; ++n) {
        const std::complex<double> inc = p.values[n] - p.values[n - 1];
        const long double angle = static_cast<long double>(omega) * (n - 1);
        const std::complex<double> want(
            static_cast<double>(std::cos(angle) * v[n - 1]),
            static_cast<double>(std::sin(angle) * v[n - 1]));
        CHECK(std::abs(inc - want) < 1e-10);
    }
}

TEST_CASE("weighted sums phase accumulator stays accurate at N = 1e6") {
    const auto ts = dynamics::logistic_orbit(3.97, 0.63, 1000, 1000000);
    const double omega = 2.4041;  // forces many renormalization windows
    const auto p = weighted_sums(ts, omega);
    const ArrayXcd q = naive_weighted_sums(ts.values, omega);
    double worst = 0;
    for (Index n = 0; n <= ts.size(); n += 97) {
        const double scale = std::max(1.0, std::abs(q[n]));
        worst = std::max(worst, std::abs(p.values[n] - q[n]) / scale);
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("weighted sums domain checks") {
    const ArrayXd v = ArrayXd::Ones(8);
    CHECK_THROWS_AS(weighted_sums(series_of(v), 0.0), DomainError);
    CHECK_THROWS_AS(weighted_sums(series_of(v), -1.0), DomainError);
    CHECK_THROWS_AS(weighted_sums(series_of(v), pi + 0.01), DomainError);
    CHECK_NOTHROW(weighted_sums(series_of(v), pi));
}

TEST_CASE("direct structure function: constant series closed form") {
    const double c = 0.75, omega = 1.1;
    const ArrayXd v = ArrayXd::Constant(600, c);
    const auto p = weighted_sums(series_of(v), omega);
    const Index n_max = 24, J = 500;
    const ArrayXd S = structure_function_direct(p, n_max, J);
    for (Index n = 1; n <= n_max; ++n) {
        const double want = c * c * (1 - std::cos(n * omega)) / (1 - std::cos(omega));
        CHECK(rel_err(S[n - 1], want) < 1e-10);
    }
}

TEST_CASE("direct structure function: impulse series") {
    ArrayXd v = ArrayXd::Zero(128);
    v[0] = -2.5;
    const auto p = weighted_sums(series_of(v), 0.77);
    const Index n_max = 16, J = 100;
    const ArrayXd S = structure_function_direct(p, n_max, J);
    for (Index n = 0; n < n_max; ++n) CHECK(rel_err(S[n], 2.5 * 2.5 / J) < 1e-12);
}

TEST_CASE("structure function size checks") {
    const ArrayXcd p = random_complex(101, 3);  // N = 100
    CHECK_THROWS_AS(structure_function_direct<double>(p, 50, 51), DomainError);
    CHECK_THROWS_AS(structure_function_fast<double>(p, 50, 51), DomainError);
    CHECK_THROWS_AS(structure_function_direct<double>(p, 0, 10), DomainError);
    CHECK_THROWS_AS(structure_function_fast<double>(p, 10, 0), DomainError);
    CHECK_NOTHROW(structure_function_fast<double>(p, 50, 50));
}

TEST_CASE("fast structure function equals the direct oracle on random input") {
    for (std::uint64_t trial = 0; trial < 30; ++trial) {
        const Index N = 256 + static_cast<Index>(rng::derive(21, rng::Stream::omega_draw, trial) % 1800);
        const ArrayXcd p = random_complex(N + 1, 500 + trial);
        const Index n_max = 32;
        const Index J = N - n_max;
        const ArrayXd fast = structure_function_fast<double>(p, n_max, J);
        const ArrayXd direct = structure_function_direct<double>(p, n_max, J);
        for (Index n = 0; n < n_max; ++n) CHECK(rel_err(fast[n], direct[n]) < 1e-9);
    }
}

TEST_CASE("fast structure function: single lag equals mean squared increment") {
    const ArrayXd v = random_series(400, 9);
    const double omega = 2.02;
    const auto p = weighted_sums(series_of(v), omega);
    const Index J = 399;
    const ArrayXd S = structure_function_fast(p, 1, J);
    long double want = 0;
    for (Index j = 0; j < J; ++j) want += static_cast<long double>(v[j]) * v[j];
    CHECK(rel_err(S[0], static_cast<double>(want / J)) < 1e-12);
}

TEST_CASE("all-lag structure function matches per-lag brute force") {
    const Index N = 300;
    const ArrayXcd p = [&] {
        ArrayXcd q = random_complex(N + 1, 77);
        q[0] = {0, 0};
        return q;
    }();
    const ArrayXd S = structure_function_all_lags<double>(p, N - 1);
    for (Index n = 1; n <= N - 1; ++n) {
        const double want = brute_S(p, n, N - n);
        const double scale = std::max(std::abs(want), 1e-12);
        CHECK(std::abs(S[n - 1] - want) / scale < 1e-9);
    }
    CHECK_THROWS_AS(structure_function_all_lags<double>(p, N), DomainError);
}

TEST_CASE("conjugate frequency symmetry: S at 2pi - w equals S at w") {
    const ArrayXd v = random_series(2000, 13);
    const double omega = 1.3;
    const auto p = weighted_sums(series_of(v), omega);
    const ArrayXcd p_mirror = naive_weighted_sums(v, 2 * pi - omega);  // outside (0, pi]; oracle path
    const Index n_max = 20, J = 2000 - n_max;
    const ArrayXd S = structure_function_direct(p, n_max, J);
    const ArrayXd S_mirror = structure_function_direct<double>(p_mirror, n_max, J);
    for (Index n = 0; n < n_max; ++n) CHECK(rel_err(S_mirror[n], S[n]) < 1e-12);
}

TEST_CASE("mean observable: constants, two-point average, logistic density") {
    CHECK(mean_observable(series_of(ArrayXd::Constant(1000, 3.25))) == 3.25);
    ArrayXd two(2);
    two << 0, 1;
    CHECK(mean_observable(series_of(two)) == 0.5);
    // Invariant density of the fully chaotic map is symmetric about 1/2.
    const auto ts = dynamics::logistic_orbit(4.0, 0.2345, 1000, 1000000);
    CHECK(std::abs(mean_observable(ts) - 0.5) < 0.01);
}

TEST_CASE("prefix means agree bitwise with whole-prefix evaluation") {
    const auto ts = dynamics::logistic_orbit(3.9, 0.41, 100, 5000);
    const std::vector<Index> lengths = {100, 1234, 5000};
    const ArrayXd means = prefix_means(ts, lengths);
    for (std::size_t k = 0; k < lengths.size(); ++k) {
        TimeSeries prefix;
        prefix.values = ts.values.head(lengths[k]);
        CHECK(means[static_cast<Index>(k)] == mean_observable(prefix));
    }
    CHECK_THROWS_AS(prefix_means(ts, std::vector<Index>{5000, 100}), DomainError);
    CHECK_THROWS_AS(prefix_means(ts, std::vector<Index>{6000}), DomainError);
}

TEST_CASE("modified msd: worked three-point examples") {
    // Correction weights (1 - cos n pi/2)/(1 - cos pi/2) are 1, 2, 1.
    ArrayXd S(3);
    S << 1, 2, 3;
    const auto up = modified_msd<double>(S, 1.0, pi / 2);
    CHECK(std::abs(up.D0[0]) < 1e-12);
    CHECK(std::abs(up.D0[1]) < 1e-12);
    CHECK(std::abs(up.D0[2] - 2) < 1e-12);
    // D0 never dips below zero here, so no shift is applied.
    CHECK(std::abs(up.C) < 1e-12);
    CHECK(std::abs(up.D[2] - 2) < 1e-12);

    // A negative excursion fixes C at its magnitude and the minimum lands
    // exactly on zero.
    ArrayXd S2(3);
    S2 << 0, 3, 1;
    const auto dip = modified_msd<double>(S2, 1.0, pi / 2);
    CHECK(std::abs(dip.D0[0] + 1) < 1e-12);
    CHECK(std::abs(dip.D0[1] - 1) < 1e-12);
    CHECK(std::abs(dip.D0[2]) < 1e-12);
    CHECK(std::abs(dip.C - 1) < 1e-12);
    CHECK(dip.D.minCoeff() == 0.0);
    CHECK(std::abs(dip.D[1] - 2) < 1e-12);
}

TEST_CASE("modified msd: synthetic constant-series input cancels exactly") {
    // S built from the very expression the correction uses, so the
    // subtraction cancels bit for bit.
    const double c = 3.5, omega = 0.9;
    const Index n_max = 50;
    ArrayXd S(n_max);
    const double denom = one_minus_cos(omega);
    for (Index n = 1; n <= n_max; ++n) S[n - 1] = c * c * (one_minus_cos(n * omega) / denom);
    const auto curves = modified_msd<double>(S, c, omega);
    for (Index i = 0; i < n_max; ++i) {
        CHECK(curves.D0[i] == 0.0);
        CHECK(curves.D[i] == 0.0);
    }
    CHECK(curves.C == 0.0);
}

TEST_CASE("modified msd: zero mean passes S through unshifted") {
    ArrayXd S(4);
    S << 1, 4, 9, 16;
    const auto curves = modified_msd<double>(S, 0.0, 1.5);
    for (Index i = 0; i < 4; ++i) {
        CHECK(curves.D0[i] == S[i]);
        CHECK(curves.D[i] == S[i]);
    }
    CHECK(curves.C == 0.0);
}

TEST_CASE("modified msd domain checks") {
    ArrayXd S = ArrayXd::Ones(4);
    CHECK_THROWS_AS(modified_msd<double>(S, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(modified_msd<double>(S, 1.0, 1e-7), DomainError);  // 1 - cos below 1e-12
    CHECK_THROWS_AS(modified_msd<double>(S, 1.0, 4.0), DomainError);
    CHECK_NOTHROW(modified_msd<double>(S, 1.0, pi));
}

TEST_CASE("regression: pure power laws are recovered") {
    const Index n_max = 100;
    ArrayXd lin(n_max), flat(n_max), quad(n_max), half(n_max);
    for (Index n = 1; n <= n_max; ++n) {
        lin[n - 1] = static_cast<double>(n);
        flat[n - 1] = 7.0;
        quad[n - 1] = static_cast<double>(n) * static_cast<double>(n);
        half[n - 1] = 3.0 * std::sqrt(static_cast<double>(n));
    }
    CHECK(estimate_k<double>(lin, n_max).K == 1.0);
    CHECK(estimate_k<double>(flat, n_max).K == 0.0);
    CHECK(std::abs(estimate_k<double>(quad, n_max).K - 2.0) < 1e-12);
    CHECK(std::abs(estimate_k<double>(half, n_max).K - 0.5) < 1e-12);
    CHECK(estimate_k<double>(lin, n_max).points_used == n_max);

    const auto est = estimate_k<double>(quad, n_max);
    CHECK(est.residual_rms < 1e-12);
    CHECK(std::abs(est.intercept) < 1e-12);
}

TEST_CASE("regression skips non-positive entries and flags degenerate data") {
    ArrayXd D(5);
    D << 1.0, 0.0, 9.0, 0.0, 25.0;  // squares at n = 1, 3, 5
    const auto est = estimate_k<double>(D, 5);
    CHECK(est.points_used == 3);
    CHECK(std::abs(est.K - 2.0) < 1e-12);

    ArrayXd bad(4);
    bad << 1.0, 2.0, 0.0, 0.0;
    CHECK_THROWS_AS(estimate_k<double>(bad, 4), NumericalError);
    CHECK_THROWS_AS(estimate_k<double>(D, 6), DomainError);
    CHECK_THROWS_AS(estimate_k<double>(D, 0), DomainError);
}

TEST_CASE("spectral profile: shapes, invariants, cutoff arithmetic") {
    const auto ts = dynamics::logistic_orbit(3.9, 0.52, 1000, 1000);
    const double omega = 1.7;
    const auto prof = spectral_profile(ts, omega, 0.01);
    CHECK(prof.n_max == 10);
    CHECK(prof.J == 990);
    CHECK(prof.S.size() == 10);
    CHECK((prof.S >= 0).all());
    CHECK((prof.D >= 0).all());
    CHECK(prof.C == std::max(0.0, -prof.D0.minCoeff()));
    for (Index i = 0; i < prof.D.size(); ++i) CHECK(prof.D[i] == prof.D0[i] + prof.C);

    // Profile from precomputed sums is the same object.
    const auto p = weighted_sums(ts, omega);
    const auto prof2 = spectral_profile_from_sums<double>(p.values, omega, mean_observable(ts), 0.01);
    for (Index i = 0; i < prof.S.size(); ++i) {
        CHECK(prof2.S[i] == prof.S[i]);
        CHECK(prof2.D[i] == prof.D[i]);
    }
}

TEST_CASE("pipeline k_for_omega: dichotomy at desk scale") {
    // Fully chaotic parameter: slope near 1 for random frequencies.
    const auto chaotic = dynamics::logistic_orbit(4.0, 0.2345, 1000, 10000);
    for (std::uint64_t t = 0; t < 5; ++t) {
        const double omega = rng::uniform_open(rng::derive(42, rng::Stream::omega_draw, t), 0.01, pi - 0.01);
        const auto kc = k_for_omega(chaotic, omega, 0.01);
        CHECK(kc.omega == omega);
        CHECK(kc.K > 0.7);
        CHECK(kc.K < 1.2);
    }

    // Period-3 window: slope near 0 away from the exceptional frequencies
    // (the cycle's own frequency 2 pi/3 and the edge of the window near 0).
    const auto periodic = dynamics::logistic_orbit(3.83, 0.2345, 1000, 10000);
    for (const double omega : {0.7, 1.3, 1.9, 2.6, 3.0}) {
        const auto kp = k_for_omega(periodic, omega, 0.01);
        CHECK(kp.K > -0.2);
        CHECK(kp.K < 0.3);
    }

    // At resonance the weighted sums of a 3-periodic signal grow linearly in
    // n, so the displacement grows ballistically.  Finitely many such
    // frequencies exist; they are what the undecided count absorbs.
    const auto res = k_for_omega(periodic, 2 * pi / 3, 0.01);
    CHECK(res.K > 1.5);
}

TEST_CASE("pipeline rejects constant observables as degenerate") {
    TimeSeries flat;
    flat.values = ArrayXd::Constant(10000, 0.42);
    CHECK_THROWS_AS(k_for_omega(flat, 1.9, 0.01), NumericalError);
    TimeSeries zero;
    zero.values = ArrayXd::Zero(10000);
    CHECK_THROWS_AS(k_for_omega(zero, 1.9, 0.01), NumericalError);
}

TEST_CASE("pipeline cutoff prechecks") {
    const auto ts = dynamics::logistic_orbit(3.9, 0.52, 100, 500);
    CHECK_THROWS_AS(k_for_omega(ts, 1.9, 0.01), DomainError);  // floor(0.01*500) = 5 < 10
    CHECK_THROWS_AS(k_for_omega(ts, 1.9, 0.0), DomainError);
    CHECK_THROWS_AS(k_for_omega(ts, 1.9, 1.0), DomainError);
}

TEST_CASE("constant-observable nullity across magnitudes") {
    for (const double c : {1.0, 1e-3, 1e3}) {
        TimeSeries flat;
        flat.values = ArrayXd::Constant(2000, c);
        for (std::uint64_t t = 0; t < 5; ++t) {
            const double omega = rng::uniform_open(rng::derive(5, rng::Stream::omega_draw, t), 0.01, pi - 0.01);
            const auto prof = spectral_profile(flat, omega, 0.01);
            CHECK(prof.D0.abs().maxCoeff() <= 1e-8 * c * c * static_cast<double>(prof.n_max));
        }
    }
}
