#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace kninst::ode {

/// Dormand-Prince 5(4) embedded pair with 4th-order dense output and a PI
/// step-size controller. N is the state dimension; the right-hand side is
/// f(x, y) -> dy/dx with x the integration parameter.
///
/// Coefficients are the original RK5(4)7M tableau; the continuous extension
/// is the standard one built from the seven stages (Hairer, Norsett, Wanner,
/// Solving ODEs I).
template <std::size_t N>
class DormandPrince {
  public:
    using State = std::array<double, N>;
    using Rhs = std::function<void(double, const State&, State&)>;

    struct StepResult {
        bool accepted = false;
        double error = 0.0;   // scaled error estimate of the attempted step
        double h_next = 0.0;  // proposed next step size
    };

    explicit DormandPrince(Rhs rhs, double rel_tol, double abs_tol)
        : rhs_(std::move(rhs)), rel_tol_(rel_tol), abs_tol_(abs_tol) {}

    /// FSAL seed: evaluate f at the initial point.
    void prime(double x, const State& y) {
        rhs_(x, y, k_[0]);
        err_old_ = 1e-4;
    }

    /// Refresh the FSAL stage after the caller adjusted the state, keeping
    /// the controller memory.
    void reseed(double x, const State& y) { rhs_(x, y, k_[0]); }

    /// Attempt one step from (x, y) with size h. On acceptance y_out holds
    /// the 5th-order solution and the dense-output coefficients cover
    /// [x, x+h]. k1 is reused from the previous accepted step (FSAL).
    StepResult step(double x, const State& y, double h, State& y_out) {
        static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
        static constexpr double a21 = 1.0 / 5.0;
        static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
        static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
        static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                                a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
        static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                                a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                                a65 = -5103.0 / 18656.0;
        static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                                b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
        static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                                e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

        State tmp;
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k_[0][i];
        rhs_(x + c2 * h, tmp, k_[1]);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a31 * k_[0][i] + a32 * k_[1][i]);
        rhs_(x + c3 * h, tmp, k_[2]);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a41 * k_[0][i] + a42 * k_[1][i] + a43 * k_[2][i]);
        rhs_(x + c4 * h, tmp, k_[3]);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] +
                     h * (a51 * k_[0][i] + a52 * k_[1][i] + a53 * k_[2][i] + a54 * k_[3][i]);
        rhs_(x + c5 * h, tmp, k_[4]);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a61 * k_[0][i] + a62 * k_[1][i] + a63 * k_[2][i] +
                                 a64 * k_[3][i] + a65 * k_[4][i]);
        rhs_(x + h, tmp, k_[5]);
        for (std::size_t i = 0; i < N; ++i)
            y_out[i] = y[i] + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] +
                                   b5 * k_[4][i] + b6 * k_[5][i]);
        rhs_(x + h, y_out, k_[6]);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double ei = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] +
                                   e5 * k_[4][i] + e6 * k_[5][i] + e7 * k_[6][i]);
            const double sc = abs_tol_ + rel_tol_ * std::max(std::abs(y[i]), std::abs(y_out[i]));
            err += (ei / sc) * (ei / sc);
        }
        err = std::sqrt(err / N);

        StepResult res;
        res.error = err;
        // PI controller (beta = 0.04).
        static constexpr double beta = 0.04, alpha = 0.2 - 0.75 * beta, safety = 0.9;
        double fac = std::pow(std::max(err, 1e-32), -alpha) * std::pow(err_old_, beta) * safety;
        fac = std::clamp(fac, 0.2, rejected_ ? 1.0 : 10.0);
        res.h_next = h * fac;
        if (err <= 1.0) {
            res.accepted = true;
            rejected_ = false;
            err_old_ = std::max(err, 1e-4);
            build_dense(y, y_out, h);
            x0_ = x;
            h0_ = h;
            k_[0] = k_[6];  // FSAL
        } else {
            res.accepted = false;
            rejected_ = true;
        }
        return res;
    }

    /// Dense evaluation inside the last accepted step, u in [0, 1].
    State interpolate(double u) const {
        State y;
        for (std::size_t i = 0; i < N; ++i) {
            y[i] = cont_[0][i] +
                   u * (cont_[1][i] +
                        (1.0 - u) * (cont_[2][i] + u * (cont_[3][i] + (1.0 - u) * cont_[4][i])));
        }
        return y;
    }

    double last_x0() const { return x0_; }
    double last_h() const { return h0_; }

  private:
    void build_dense(const State& y0, const State& y1, double h) {
        static constexpr double d1 = -12715105075.0 / 11282082432.0,
                                d3 = 87487479700.0 / 32700410799.0,
                                d4 = -10690763975.0 / 1880347072.0,
                                d5 = 701980252875.0 / 199316789632.0,
                                d6 = -1453857185.0 / 822651844.0,
                                d7 = 69997945.0 / 29380423.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double dy = y1[i] - y0[i];
            cont_[0][i] = y0[i];
            cont_[1][i] = dy;
            cont_[2][i] = h * k_[0][i] - dy;
            cont_[3][i] = dy - h * k_[6][i] - cont_[2][i];
            cont_[4][i] = h * (d1 * k_[0][i] + d3 * k_[2][i] + d4 * k_[3][i] + d5 * k_[4][i] +
                               d6 * k_[5][i] + d7 * k_[6][i]);
        }
    }

    Rhs rhs_;
    double rel_tol_, abs_tol_;
    std::array<State, 7> k_{};
    std::array<State, 5> cont_{};
    double err_old_ = 1e-4;
    double x0_ = 0.0, h0_ = 0.0;
    bool rejected_ = false;
};

}  // namespace kninst::ode
