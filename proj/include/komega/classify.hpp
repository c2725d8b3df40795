#pragma once

#include <komega/spectral.hpp>
#include <komega/types.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace komega::classify {

enum class Label { zero, one, undecided };

inline const char* label_name(Label l) {
    switch (l) {
        case Label::zero: return "zero";
        case Label::one: return "one";
        default: return "undecided";
    }
}

struct Interval {
    double lo{};
    double hi{};

    bool contains(double x) const { return x > lo && x < hi; }  // open on both sides
};

// Pair of disjoint open intervals: K inside I0 reads as "regular", inside I1
// as "chaotic", anywhere else as undecided.
struct IntervalScheme {
    std::string name;
    Interval I0;
    Interval I1;
};

inline IntervalScheme make_scheme(std::string name, Interval I0, Interval I1) {
    if (!(I0.lo < I0.hi) || !(I1.lo < I1.hi))
        throw DomainError("interval scheme: intervals must be non-empty");
    if (!(I0.hi <= I1.lo)) throw DomainError("interval scheme: I0 must lie below I1");
    return IntervalScheme{std::move(name), I0, I1};
}

inline IntervalScheme scheme_i() { return make_scheme("i", {-0.1, 0.3}, {0.7, 1.1}); }
inline IntervalScheme scheme_ii() { return make_scheme("ii", {-0.1, 0.2}, {0.8, 1.1}); }
inline IntervalScheme scheme_iii() { return make_scheme("iii", {-0.1, 0.1}, {0.9, 1.1}); }

inline std::vector<IntervalScheme> standard_schemes() {
    return {scheme_i(), scheme_ii(), scheme_iii()};
}

inline Label classify_k(double K, const IntervalScheme& scheme) {
    if (!std::isfinite(K)) throw DomainError("classify_k: K must be finite");
    if (scheme.I0.contains(K)) return Label::zero;
    if (scheme.I1.contains(K)) return Label::one;
    return Label::undecided;
}

struct ClassCounts {
    Index m0{};
    Index m1{};
    Index mu{};
    Index n_omega{};
};

inline ClassCounts tally(const std::vector<double>& Ks, const IntervalScheme& scheme) {
    if (Ks.empty()) throw DomainError("tally: empty K list");
    ClassCounts c;
    c.n_omega = static_cast<Index>(Ks.size());
    for (const double K : Ks) {
        switch (classify_k(K, scheme)) {
            case Label::zero: ++c.m0; break;
            case Label::one: ++c.m1; break;
            case Label::undecided: ++c.mu; break;
        }
    }
    return c;
}

inline ClassCounts tally(const std::vector<spectral::KEstimate>& Ks,
                         const IntervalScheme& scheme) {
    std::vector<double> vals;
    vals.reserve(Ks.size());
    for (const auto& est : Ks) vals.push_back(est.K);
    return tally(vals, scheme);
}

struct ParameterCounts {
    double a{};
    ClassCounts counts;
};

// Aggregates over the parameter grid.  Primed statistics count parameters
// whose per-parameter value exceeds the threshold strictly ("more than" a
// fixed fraction of the frequency draws).
struct SweepSummary {
    std::vector<ParameterCounts> per_parameter;
    Index Qu{};
    Index Qu_prime{};
    Index Qmin{};
    Index Qmin_prime{};
    Index threshold{};  // integer comparison point: count > threshold
};

inline SweepSummary sweep_summary(std::vector<ParameterCounts> rows,
                                  double threshold_fraction = 0.1) {
    if (rows.empty()) throw DomainError("sweep_summary: empty row list");
    if (!(threshold_fraction > 0) || !(threshold_fraction < 1))
        throw DomainError("sweep_summary: threshold_fraction must lie in (0, 1)");
    const Index n_omega = rows.front().counts.n_omega;
    for (const auto& r : rows) {
        if (r.counts.n_omega != n_omega)
            throw DomainError("sweep_summary: inconsistent n_omega across rows");
        if (r.counts.m0 + r.counts.m1 + r.counts.mu != n_omega)
            throw DomainError("sweep_summary: counts do not sum to n_omega");
    }

    SweepSummary s;
    s.threshold = static_cast<Index>(std::floor(threshold_fraction * static_cast<double>(n_omega) + 1e-9));
    for (const auto& r : rows) {
        const Index mn = std::min(r.counts.m0, r.counts.m1);
        s.Qu += r.counts.mu;
        s.Qmin += mn;
        if (r.counts.mu > s.threshold) ++s.Qu_prime;
        if (mn > s.threshold) ++s.Qmin_prime;
    }
    s.per_parameter = std::move(rows);
    return s;
}

// Sorted middle element; arithmetic mean of the middle two for even length.
inline double median_k(std::vector<double> Ks) {
    if (Ks.empty()) throw DomainError("median_k: empty list");
    std::sort(Ks.begin(), Ks.end());
    const std::size_t n = Ks.size();
    if (n % 2 == 1) return Ks[n / 2];
    return (Ks[n / 2 - 1] + Ks[n / 2]) / 2.0;
}

}  // namespace komega::classify
