#pragma once

#include <komega/types.hpp>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace komega::spectral {

// Fourier-weighted partial sums p(n) = sum_{l<n} e^{i l w} v_l, n = 0..N.
template <typename Scalar>
struct WeightedSumsT {
    Scalar omega{};
    ComplexArrayX<Scalar> values;  // N+1 entries, values[0] == 0

    Index series_length() const { return values.size() - 1; }
};
using WeightedSums = WeightedSumsT<double>;

// Everything derived from one (series, omega) pair up to the regression input.
template <typename Scalar>
struct SpectralProfileT {
    Scalar omega{};
    Index n_max{};
    Index J{};
    ArrayX<Scalar> S;   // S(1)..S(n_max)
    Scalar mean_v{};
    ArrayX<Scalar> D0;  // S minus the oscillatory mean term
    Scalar C{};         // smallest shift making D0 + C non-negative
    ArrayX<Scalar> D;   // D0 + C, regression ordinate
};
using SpectralProfile = SpectralProfileT<double>;

template <typename Scalar>
struct KEstimateT {
    Scalar omega{};
    Scalar K{};
    Scalar intercept{};
    Index points_used{};
    Scalar residual_rms{};
};
using KEstimate = KEstimateT<double>;

namespace detail {

// Phase is renormalized to unit modulus this often; keeps multiplicative
// drift bounded for series up to ~1e7 samples.
inline constexpr Index phase_renorm_interval = Index(1) << 16;

template <typename Scalar>
Eigen::FFT<Scalar>& fft_engine() {
    static thread_local Eigen::FFT<Scalar> engine;  // caches twiddle plans per length
    return engine;
}

}  // namespace detail

// Numerically stable 1 - cos(x).  Exposed so that exact-cancellation checks
// can evaluate the same expression the displacement correction uses.
template <typename Scalar>
Scalar one_minus_cos(Scalar x) {
    const Scalar s = std::sin(x / Scalar(2));
    return Scalar(2) * s * s;
}

// Single accumulation pass with a multiplicatively updated rotating phase.
// Both the phase and the running sum are carried in extended precision; the
// stored p(n) are rounded back to Scalar.
template <typename Scalar>
WeightedSumsT<Scalar> weighted_sums(const TimeSeriesT<Scalar>& series, Scalar omega) {
    using Wide = widen_t<Scalar>;
    using WC = std::complex<Wide>;
    if (!(omega > 0) || !(omega <= std::numbers::pi_v<Scalar>))
        throw DomainError("weighted_sums: omega must lie in (0, pi]");
    const Index n = series.size();
    if (n < 1) throw DomainError("weighted_sums: empty series");

    WeightedSumsT<Scalar> out;
    out.omega = omega;
    out.values.resize(n + 1);
    out.values[0] = std::complex<Scalar>(0, 0);

    const WC rot = std::polar<Wide>(Wide(1), static_cast<Wide>(omega));
    WC phase(1, 0);
    WC acc(0, 0);
    const Scalar* v = series.values.data();
    for (Index l = 0; l < n; ++l) {
        if (l != 0 && l % detail::phase_renorm_interval == 0) phase /= std::abs(phase);
        acc += phase * static_cast<Wide>(v[l]);
        out.values[l + 1] = std::complex<Scalar>(static_cast<Scalar>(acc.real()),
                                                 static_cast<Scalar>(acc.imag()));
        phase *= rot;
    }
    return out;
}

// Definitional structure function: S(n) = (1/J) sum_{j<J} |p(j+n) - p(j)|^2.
// Quadratic cost; kept as the reference oracle for the fast path.
template <typename Scalar>
ArrayX<Scalar> structure_function_direct(const Eigen::Ref<const ComplexArrayX<Scalar>>& p,
                                         Index n_max, Index J) {
    using Wide = widen_t<Scalar>;
    const Index N = p.size() - 1;
    if (n_max < 1) throw DomainError("structure_function: n_max must be >= 1");
    if (J < 1) throw DomainError("structure_function: J must be >= 1");
    if (J + n_max > N) throw DomainError("structure_function: J + n_max exceeds series length");

    ArrayX<Scalar> S(n_max);
    for (Index n = 1; n <= n_max; ++n) {
        Wide acc = 0;
        for (Index j = 0; j < J; ++j) {
            const std::complex<Scalar> d = p[j + n] - p[j];
            acc += static_cast<Wide>(d.real()) * d.real() + static_cast<Wide>(d.imag()) * d.imag();
        }
        S[n - 1] = static_cast<Scalar>(acc / static_cast<Wide>(J));
    }
    return S;
}

template <typename Scalar>
ArrayX<Scalar> structure_function_direct(const WeightedSumsT<Scalar>& p, Index n_max, Index J) {
    return structure_function_direct<Scalar>(p.values, n_max, J);
}

// Same values as the direct form in O(N log N): expand the squared modulus,
// take the two |p|^2 sums from a prefix table and the cross terms at all lags
// from one zero-padded cyclic cross-correlation (FFT of p masked to the first
// J entries against FFT of p).
template <typename Scalar>
ArrayX<Scalar> structure_function_fast(const Eigen::Ref<const ComplexArrayX<Scalar>>& p,
                                       Index n_max, Index J) {
    using Wide = widen_t<Scalar>;
    using Cplx = std::complex<Scalar>;
    const Index N = p.size() - 1;
    if (n_max < 1) throw DomainError("structure_function: n_max must be >= 1");
    if (J < 1) throw DomainError("structure_function: J must be >= 1");
    if (J + n_max > N) throw DomainError("structure_function: J + n_max exceeds series length");

    const Index L = N + 1;
    const Index M = static_cast<Index>(std::bit_ceil(static_cast<std::size_t>(L)));

    // Prefix sums of |p|^2, accumulated wide, stored rounded.
    ArrayX<Scalar> ps(L + 1);
    ps[0] = 0;
    {
        Wide acc = 0;
        for (Index k = 0; k < L; ++k) {
            acc += static_cast<Wide>(p[k].real()) * p[k].real() +
                   static_cast<Wide>(p[k].imag()) * p[k].imag();
            ps[k + 1] = static_cast<Scalar>(acc);
        }
    }

    Eigen::Matrix<Cplx, Eigen::Dynamic, 1> u = Eigen::Matrix<Cplx, Eigen::Dynamic, 1>::Zero(M);
    Eigen::Matrix<Cplx, Eigen::Dynamic, 1> w = Eigen::Matrix<Cplx, Eigen::Dynamic, 1>::Zero(M);
    u.head(J) = p.head(J).matrix();
    w.head(L) = p.matrix();

    auto& fft = detail::fft_engine<Scalar>();
    Eigen::Matrix<Cplx, Eigen::Dynamic, 1> U, W, cross;
    fft.fwd(U, u);
    fft.fwd(W, w);
    U = U.conjugate().cwiseProduct(W).eval();
    fft.inv(cross, U);

    // cross[n] = sum_{j<J} conj(p(j)) p(j+n): M >= N+1 >= J+n_max+1 rules out
    // wrap-around contributions for n <= n_max.
    ArrayX<Scalar> S(n_max);
    const Scalar scale = Scalar(1) / static_cast<Scalar>(J);
    for (Index n = 1; n <= n_max; ++n) {
        const Scalar shifted = ps[J + n] - ps[n];
        const Scalar base = ps[J];
        const Scalar s = (shifted + base - Scalar(2) * cross[n].real()) * scale;
        S[n - 1] = s > 0 ? s : Scalar(0);
    }
    return S;
}

template <typename Scalar>
ArrayX<Scalar> structure_function_fast(const WeightedSumsT<Scalar>& p, Index n_max, Index J) {
    return structure_function_fast<Scalar>(p.values, n_max, J);
}

// Structure function over every lag n = 1..n_hi with per-lag averaging
// J(n) = N - n (all available shifts).  Used for the full log-log diagnostic
// curve, where lags approach the series length and a fixed J would leave no
// shifts to average.
template <typename Scalar>
ArrayX<Scalar> structure_function_all_lags(const Eigen::Ref<const ComplexArrayX<Scalar>>& p,
                                           Index n_hi) {
    using Wide = widen_t<Scalar>;
    using Cplx = std::complex<Scalar>;
    const Index N = p.size() - 1;
    if (n_hi < 1 || n_hi > N - 1) throw DomainError("structure_function: lag range must lie in [1, N-1]");

    const Index L = N + 1;
    const Index M = static_cast<Index>(std::bit_ceil(static_cast<std::size_t>(L + n_hi)));

    ArrayX<Scalar> ps(L + 1);
    ps[0] = 0;
    {
        Wide acc = 0;
        for (Index k = 0; k < L; ++k) {
            acc += static_cast<Wide>(p[k].real()) * p[k].real() +
                   static_cast<Wide>(p[k].imag()) * p[k].imag();
            ps[k + 1] = static_cast<Scalar>(acc);
        }
    }

    Eigen::Matrix<Cplx, Eigen::Dynamic, 1> w = Eigen::Matrix<Cplx, Eigen::Dynamic, 1>::Zero(M);
    w.head(L) = p.matrix();
    auto& fft = detail::fft_engine<Scalar>();
    Eigen::Matrix<Cplx, Eigen::Dynamic, 1> W, corr;
    fft.fwd(W, w);
    W = W.conjugate().cwiseProduct(W).eval();
    fft.inv(corr, W);

    // corr[n] = sum_{j<=N-n} conj(p(j)) p(j+n); dropping the j = N-n term
    // leaves exactly the J(n) = N-n shifts wanted here.
    ArrayX<Scalar> S(n_hi);
    for (Index n = 1; n <= n_hi; ++n) {
        const Cplx tail = std::conj(p[N - n]) * p[N];
        const Scalar cross = corr[n].real() - tail.real();
        const Scalar shifted = ps[N] - ps[n];
        const Scalar base = ps[N - n];
        const Scalar s = (shifted + base - Scalar(2) * cross) / static_cast<Scalar>(N - n);
        S[n - 1] = s > 0 ? s : Scalar(0);
    }
    return S;
}

// Compensated (Kahan) mean of the observable.
template <typename Scalar>
Scalar mean_observable(const TimeSeriesT<Scalar>& series) {
    const Index n = series.size();
    if (n < 1) throw DomainError("mean_observable: empty series");
    komega::detail::KahanSum<Scalar> acc;
    for (Index i = 0; i < n; ++i) acc.add(series.values[i]);
    return acc.value() / static_cast<Scalar>(n);
}

// Kahan means of each prefix listed in lengths; lengths must be ascending and
// bounded by the series size.  Entry k equals mean_observable of the first
// lengths[k] samples, bitwise.
template <typename Scalar>
ArrayX<Scalar> prefix_means(const TimeSeriesT<Scalar>& series, const std::vector<Index>& lengths) {
    ArrayX<Scalar> out(static_cast<Index>(lengths.size()));
    komega::detail::KahanSum<Scalar> acc;
    Index done = 0;
    for (std::size_t k = 0; k < lengths.size(); ++k) {
        const Index len = lengths[k];
        if (len < 1 || len > series.size() || len < done)
            throw DomainError("prefix_means: lengths must be ascending and within the series");
        for (; done < len; ++done) acc.add(series.values[done]);
        out[static_cast<Index>(k)] = acc.value() / static_cast<Scalar>(len);
    }
    return out;
}

template <typename Scalar>
struct MsdCurves {
    ArrayX<Scalar> D0;
    Scalar C{};
    ArrayX<Scalar> D;
};

// Removes the oscillatory mean term from S and shifts the result positive:
// D0(n) = S(n) - mean_v^2 (1-cos n w)/(1-cos w), D = D0 + C.
//
// C is the smallest constant making every D(n) >= 0, i.e. the magnitude of
// the most negative D0 excursion (zero when D0 is already non-negative).  A
// shift of this size leaves the log-log growth rate of a diverging D0
// essentially untouched, which is the point of the construction; shifting by
// the largest |D0| over the fitted range instead would compress every curve
// into a factor-2 band and drag all fitted slopes towards zero.
template <typename Scalar>
MsdCurves<Scalar> modified_msd(const Eigen::Ref<const ArrayX<Scalar>>& S, Scalar mean_v,
                               Scalar omega) {
    if (S.size() < 1) throw DomainError("modified_msd: empty S");
    if (!(omega > 0) || !(omega <= std::numbers::pi_v<Scalar>))
        throw DomainError("modified_msd: omega must lie in (0, pi]");
    const Scalar denom = one_minus_cos(omega);
    if (denom < Scalar(1e-12)) throw DomainError("modified_msd: 1 - cos(omega) below 1e-12");

    MsdCurves<Scalar> out;
    out.D0.resize(S.size());
    const Scalar m2 = mean_v * mean_v;
    for (Index i = 0; i < S.size(); ++i) {
        const Scalar n = static_cast<Scalar>(i + 1);
        const Scalar term = m2 * (one_minus_cos(n * omega) / denom);
        out.D0[i] = S[i] - term;
    }
    const Scalar lowest = out.D0.minCoeff();
    out.C = lowest < 0 ? -lowest : Scalar(0);
    out.D = out.D0 + out.C;
    return out;
}

// Unweighted least squares of ln D(n) against ln n over n = 1..n_max.
// Entries with D(n) <= 0 are skipped (possible only through exact
// cancellation); fewer than 3 usable points is reported as degenerate data.
template <typename Scalar>
KEstimateT<Scalar> estimate_k(const Eigen::Ref<const ArrayX<Scalar>>& D, Index n_max) {
    using Wide = widen_t<Scalar>;
    if (n_max < 1 || n_max > D.size())
        throw DomainError("estimate_k: n_max must lie in [1, len(D)]");

    ArrayX<Scalar> x(n_max), y(n_max);
    Index count = 0;
    for (Index n = 1; n <= n_max; ++n) {
        const Scalar d = D[n - 1];
        if (!(d > 0)) continue;
        x[count] = std::log(static_cast<Scalar>(n));
        y[count] = std::log(d);
        ++count;
    }
    if (count < 3) throw NumericalError("estimate_k: fewer than 3 positive D(n) entries");

    Wide sx = 0, sy = 0;
    for (Index i = 0; i < count; ++i) {
        sx += static_cast<Wide>(x[i]);
        sy += static_cast<Wide>(y[i]);
    }
    const Wide mx = sx / count, my = sy / count;
    Wide sxx = 0, sxy = 0;
    for (Index i = 0; i < count; ++i) {
        const Wide dx = static_cast<Wide>(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (static_cast<Wide>(y[i]) - my);
    }
    const Wide slope = sxy / sxx;
    const Wide icept = my - slope * mx;
    Wide rss = 0;
    for (Index i = 0; i < count; ++i) {
        const Wide r = static_cast<Wide>(y[i]) - (icept + slope * static_cast<Wide>(x[i]));
        rss += r * r;
    }

    KEstimateT<Scalar> est;
    est.omega = std::numeric_limits<Scalar>::quiet_NaN();
    est.K = static_cast<Scalar>(slope);
    est.intercept = static_cast<Scalar>(icept);
    est.points_used = count;
    est.residual_rms = static_cast<Scalar>(std::sqrt(rss / count));
    return est;
}

namespace detail {

template <typename Scalar>
Index regression_cutoff(Scalar delta, Index N) {
    if (!(delta > 0) || !(delta < 1)) throw DomainError("delta must lie in (0, 1)");
    // The nudge tolerates representation error in delta*N (e.g. 0.01 * 10000).
    const Index n_max = static_cast<Index>(std::floor(static_cast<double>(delta) * static_cast<double>(N) + 1e-9));
    if (n_max < 10) throw DomainError("series too short: floor(delta*N) < 10");
    return n_max;
}

}  // namespace detail

// Profile assembly from precomputed partial sums; the entry point for sweeps
// that reuse one long p across several prefix lengths.
template <typename Scalar>
SpectralProfileT<Scalar> spectral_profile_from_sums(const Eigen::Ref<const ComplexArrayX<Scalar>>& p,
                                                    Scalar omega, Scalar mean_v, Scalar delta) {
    const Index N = p.size() - 1;
    SpectralProfileT<Scalar> prof;
    prof.omega = omega;
    prof.n_max = detail::regression_cutoff(delta, N);
    prof.J = N - prof.n_max;
    prof.S = structure_function_fast<Scalar>(p, prof.n_max, prof.J);
    prof.mean_v = mean_v;
    MsdCurves<Scalar> msd = modified_msd<Scalar>(prof.S, mean_v, omega);
    prof.D0 = std::move(msd.D0);
    prof.C = msd.C;
    prof.D = std::move(msd.D);
    return prof;
}

template <typename Scalar>
SpectralProfileT<Scalar> spectral_profile(const TimeSeriesT<Scalar>& series, Scalar omega,
                                          Scalar delta) {
    const WeightedSumsT<Scalar> p = weighted_sums(series, omega);
    const Scalar mean_v = mean_observable(series);
    return spectral_profile_from_sums<Scalar>(p.values, omega, mean_v, delta);
}

namespace detail {

// A displacement curve indistinguishable from rounding noise around zero
// (constant observable) cannot support a log-log fit.
template <typename Scalar>
void require_resolvable(const SpectralProfileT<Scalar>& prof) {
    const Scalar floor = Scalar(1e-8) * prof.mean_v * prof.mean_v * static_cast<Scalar>(prof.n_max);
    if (prof.D0.abs().maxCoeff() <= floor)
        throw NumericalError("displacement curve is numerically null (degenerate data)");
}

}  // namespace detail

// Fits the growth exponent of an already assembled profile.
template <typename Scalar>
KEstimateT<Scalar> estimate_from_profile(const SpectralProfileT<Scalar>& prof) {
    detail::require_resolvable(prof);
    KEstimateT<Scalar> est = estimate_k<Scalar>(prof.D, prof.n_max);
    est.omega = prof.omega;
    return est;
}

// Full pipeline for one (series, omega) pair.
template <typename Scalar>
KEstimateT<Scalar> k_for_omega(const TimeSeriesT<Scalar>& series, Scalar omega, Scalar delta) {
    return estimate_from_profile(spectral_profile(series, omega, delta));
}

}  // namespace komega::spectral
