#pragma once

#include <komega/rng.hpp>
#include <komega/types.hpp>

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

namespace komega::dynamics {

using StateVector = ArrayXd;

enum class SystemKind { logistic_map, lorenz96 };

// Everything needed to reproduce one orbit, except the initial state.
struct SystemSpec {
    SystemKind kind{SystemKind::logistic_map};
    double a{4.0};          // control parameter of either system
    Index m{40};            // lorenz96 state dimension
    double dt{5e-4};        // lorenz96 integrator step
    Index stride{1000};     // lorenz96 steps between recorded samples
    Index transient{1000};  // discarded iterates (map) or steps (flow)
    double blowup_bound{1e6};
};

inline void validate_system(const SystemSpec& spec) {
    if (spec.kind == SystemKind::lorenz96) {
        if (spec.m < 4) throw DomainError("system: lorenz96 needs dimension m >= 4");
        if (!(spec.dt > 0)) throw DomainError("system: dt must be positive");
        if (spec.stride < 1) throw DomainError("system: stride must be >= 1");
    }
    if (spec.transient < 0) throw DomainError("system: transient must be >= 0");
    if (!(spec.blowup_bound > 0)) throw DomainError("system: blowup_bound must be positive");
    if (!std::isfinite(spec.a)) throw DomainError("system: parameter a must be finite");
}

// Cyclic Lorenz-96 system: d/dt x_i = x_{i-1} (x_{i+1} - x_{i-2}) - x_i + a,
// indices mod m.
template <typename Scalar>
void lorenz96_rhs_into(const ArrayX<Scalar>& x, Scalar a, ArrayX<Scalar>& d) {
    const Index m = x.size();
    d[0] = x[m - 1] * (x[1] - x[m - 2]) - x[0] + a;
    d[1] = x[0] * (x[2] - x[m - 1]) - x[1] + a;
    for (Index i = 2; i + 1 < m; ++i) d[i] = x[i - 1] * (x[i + 1] - x[i - 2]) - x[i] + a;
    d[m - 1] = x[m - 2] * (x[0] - x[m - 3]) - x[m - 1] + a;
}

template <typename Derived>
ArrayX<typename Derived::Scalar> lorenz96_rhs(const Eigen::ArrayBase<Derived>& state,
                                              typename Derived::Scalar a) {
    using Scalar = typename Derived::Scalar;
    if (state.size() < 4) throw DomainError("lorenz96_rhs: state dimension must be >= 4");
    const ArrayX<Scalar> x = state.derived();
    ArrayX<Scalar> d(x.size());
    lorenz96_rhs_into(x, a, d);
    return d;
}

// One classical fourth-order Runge-Kutta step for an autonomous field.
template <typename Scalar, typename Field>
ArrayX<Scalar> rk4_step(Field&& field, const ArrayX<Scalar>& state, Scalar dt) {
    if (!(dt > 0)) throw DomainError("rk4_step: dt must be positive");
    const Scalar half = dt / Scalar(2);
    const ArrayX<Scalar> k1 = field(state);
    ArrayX<Scalar> stage = state + half * k1;
    const ArrayX<Scalar> k2 = field(stage);
    stage = state + half * k2;
    const ArrayX<Scalar> k3 = field(stage);
    stage = state + dt * k3;
    const ArrayX<Scalar> k4 = field(stage);
    return state + (dt / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
}

namespace detail {

// Allocation-free RK4 driver for the Lorenz-96 system; arithmetic matches
// rk4_step(lorenz96_rhs, ...) coefficient for coefficient.
template <typename Scalar>
class Lorenz96Stepper {
  public:
    Lorenz96Stepper(Index m, Scalar a, Scalar dt)
        : a_(a), dt_(dt), k1_(m), k2_(m), k3_(m), k4_(m), stage_(m) {}

    void step(ArrayX<Scalar>& x) {
        const Scalar half = dt_ / Scalar(2);
        lorenz96_rhs_into(x, a_, k1_);
        stage_ = x + half * k1_;
        lorenz96_rhs_into(stage_, a_, k2_);
        stage_ = x + half * k2_;
        lorenz96_rhs_into(stage_, a_, k3_);
        stage_ = x + dt_ * k3_;
        lorenz96_rhs_into(stage_, a_, k4_);
        x = x + (dt_ / Scalar(6)) * (k1_ + Scalar(2) * k2_ + Scalar(2) * k3_ + k4_);
    }

  private:
    Scalar a_, dt_;
    ArrayX<Scalar> k1_, k2_, k3_, k4_, stage_;
};

}  // namespace detail

// Iterates x -> a x (1 - x) from x1, drops `transient` iterates, then records
// `count` samples starting with the first post-transient point.  Each step is
// carried out in extended precision so that for a <= 4 and x in [0, 1] the
// rounded iterate cannot escape the unit interval.
template <typename Scalar>
TimeSeriesT<Scalar> logistic_orbit(Scalar a, Scalar x1, Index transient, Index count) {
    using Wide = widen_t<Scalar>;
    if (!std::isfinite(static_cast<double>(a)) || a < 0)
        throw DomainError("logistic_orbit: parameter a must be finite and >= 0");
    if (!(x1 >= 0 && x1 <= 1)) throw DomainError("logistic_orbit: x1 must lie in [0, 1]");
    if (transient < 0) throw DomainError("logistic_orbit: transient must be >= 0");
    if (count < 1) throw DomainError("logistic_orbit: count must be >= 1");

    const Wide wa = static_cast<Wide>(a);
    Scalar x = x1;
    auto advance = [&] {
        x = static_cast<Scalar>(wa * static_cast<Wide>(x) * (Wide(1) - static_cast<Wide>(x)));
        if (!(x >= 0 && x <= 1)) throw NumericalError("logistic_orbit: iterate left [0, 1]");
    };
    for (Index i = 0; i < transient; ++i) advance();

    TimeSeriesT<Scalar> out;
    out.values.resize(count);
    out.sample_interval = 1;
    out.origin = "logistic a=" + std::to_string(static_cast<double>(a));
    out.values[0] = x;
    for (Index i = 1; i < count; ++i) {
        advance();
        out.values[i] = x;
    }
    return out;
}

// Integrates the Lorenz-96 system with fixed-step RK4, discards `transient_steps`
// steps, then records the first component every `stride` steps.
template <typename Scalar>
TimeSeriesT<Scalar> lorenz96_orbit(Scalar a, const ArrayX<Scalar>& initial, Scalar dt,
                                   Index stride, Index transient_steps, Index count,
                                   Scalar blowup_bound = Scalar(1e6)) {
    if (initial.size() < 4) throw DomainError("lorenz96_orbit: state dimension must be >= 4");
    if (!(dt > 0)) throw DomainError("lorenz96_orbit: dt must be positive");
    if (stride < 1) throw DomainError("lorenz96_orbit: stride must be >= 1");
    if (transient_steps < 0) throw DomainError("lorenz96_orbit: transient must be >= 0");
    if (count < 1) throw DomainError("lorenz96_orbit: count must be >= 1");

    ArrayX<Scalar> x = initial;
    detail::Lorenz96Stepper<Scalar> stepper(x.size(), a, dt);
    auto check = [&] {
        if (!x.isFinite().all() || x.abs().maxCoeff() > blowup_bound)
            throw NumericalError("lorenz96_orbit: trajectory blew up");
    };
    check();
    for (Index i = 0; i < transient_steps; ++i) stepper.step(x);
    check();

    TimeSeriesT<Scalar> out;
    out.values.resize(count);
    out.sample_interval = dt * static_cast<Scalar>(stride);
    out.origin = "lorenz96 a=" + std::to_string(static_cast<double>(a));
    out.values[0] = x[0];
    for (Index i = 1; i < count; ++i) {
        for (Index s = 0; s < stride; ++s) stepper.step(x);
        check();
        out.values[i] = x[0];
    }
    return out;
}

// Initial state for either system.  The map draws x1 uniformly in (0, 1) from
// the seed; the flow starts at the uniform equilibrium x_i = a with a 1%
// kick on the first component (deterministic, seed unused).
inline StateVector initial_state(const SystemSpec& spec, std::uint64_t seed) {
    validate_system(spec);
    if (spec.kind == SystemKind::logistic_map) {
        StateVector s(1);
        s[0] = rng::uniform_open01(rng::derive(seed, rng::Stream::initial_condition, 0));
        return s;
    }
    StateVector s = StateVector::Constant(spec.m, spec.a);
    s[0] = spec.a + 0.01 * spec.a;
    return s;
}

// Generates the observable series for `spec` from the given initial state.
template <typename Scalar>
TimeSeriesT<Scalar> orbit(const SystemSpec& spec, const ArrayX<Scalar>& initial, Index count) {
    validate_system(spec);
    if (spec.kind == SystemKind::logistic_map) {
        if (initial.size() != 1) throw DomainError("orbit: logistic map state has dimension 1");
        return logistic_orbit(static_cast<Scalar>(spec.a), initial[0], spec.transient, count);
    }
    if (initial.size() != spec.m) throw DomainError("orbit: initial state does not match spec.m");
    return lorenz96_orbit(static_cast<Scalar>(spec.a), initial, static_cast<Scalar>(spec.dt),
                          spec.stride, spec.transient, count,
                          static_cast<Scalar>(spec.blowup_bound));
}

}  // namespace komega::dynamics
