#pragma once

#include <cmath>
#include <cstddef>

namespace qantenna {

// Classical fixed-step RK4. State must support +, scalar * and copy.
template <class State, class Rhs>
void rk4_step(const Rhs& f, double t, State& y, double dt) {
    const State k1 = f(t, y);
    const State k2 = f(t + 0.5 * dt, State(y + (0.5 * dt) * k1));
    const State k3 = f(t + 0.5 * dt, State(y + (0.5 * dt) * k2));
    const State k4 = f(t + dt, State(y + dt * k3));
    y = State(y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

// Number of equal steps covering [t0, t1] with step <= dt.
inline std::size_t step_count(double t0, double t1, double dt) {
    const double n = std::ceil((t1 - t0) / dt - 1e-9);
    return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

}  // namespace qantenna
