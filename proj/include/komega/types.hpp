#pragma once

#include <Eigen/Core>

#include <complex>
#include <stdexcept>
#include <string>

namespace komega {

using Eigen::Index;

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using ComplexArrayX = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, 1>;

using ArrayXd = ArrayX<double>;
using ArrayXcd = ComplexArrayX<double>;

// Wider type used for internal accumulation: float sums in double,
// double sums in long double (x87 extended on this platform).
template <typename Scalar>
struct widen {
    using type = long double;
};
template <>
struct widen<float> {
    using type = double;
};
template <typename Scalar>
using widen_t = typename widen<Scalar>::type;

// Invalid arguments, dimensions or sizes.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Trajectory blow-up, degenerate data and similar runtime failures.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unreadable, mismatched or corrupt checkpoint files.
struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A scalar observable sampled at uniform intervals along one orbit.
template <typename Scalar>
struct TimeSeriesT {
    ArrayX<Scalar> values;
    Scalar sample_interval{1};
    std::string origin;  // free-form label, e.g. "logistic a=3.83"

    Index size() const { return values.size(); }
};

using TimeSeries = TimeSeriesT<double>;

namespace detail {

// Kahan compensated accumulator.
template <typename Scalar>
struct KahanSum {
    Scalar sum{0};
    Scalar carry{0};

    void add(Scalar x) {
        const Scalar y = x - carry;
        const Scalar t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    Scalar value() const { return sum; }
};

}  // namespace detail

}  // namespace komega
