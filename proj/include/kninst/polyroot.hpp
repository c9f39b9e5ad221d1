#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kninst::poly {

/// Horner evaluation, coefficients ascending: c[0] + c[1] x + ... + c[n] x^n.
template <class T>
inline T eval(const std::vector<double>& c, T x) {
    T y = T(0);
    for (std::size_t i = c.size(); i-- > 0;) y = y * x + c[i];
    return y;
}

template <class T>
inline T eval_derivative(const std::vector<double>& c, T x) {
    T y = T(0);
    for (std::size_t i = c.size(); i-- > 1;) y = y * x + double(i) * c[i];
    return y;
}

namespace detail {

inline double sign_of(double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); }

/// Parlett-Reinsch balancing of a small dense matrix (radix 2).
template <std::size_t N>
inline void balance(std::array<std::array<double, N>, N>& a, std::size_t n) {
    bool done = false;
    while (!done) {
        done = true;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a[j][i]);
                r += std::abs(a[i][j]);
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / 2.0, f = 1.0, s = c + r;
            while (c < g) {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while (c > g) {
                f /= 2.0;
                c /= 4.0;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                g = 1.0 / f;
                for (std::size_t j = 0; j < n; ++j) a[i][j] *= g;
                for (std::size_t j = 0; j < n; ++j) a[j][i] *= f;
            }
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
/// Classic hqr reduction, sized for the small companion matrices used here.
template <std::size_t N>
inline void hqr(std::array<std::array<double, N>, N>& a, std::size_t n,
                std::vector<std::complex<double>>& out) {
    constexpr double eps = 2.22e-16;
    double anorm = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = (i == 0 ? 0 : i - 1); j < n; ++j) anorm += std::abs(a[i][j]);

    int nn = static_cast<int>(n) - 1;
    double t = 0.0;
    while (nn >= 0) {
        int its = 0;
        int l;
        do {
            for (l = nn; l >= 1; --l) {
                double s = std::abs(a[l - 1][l - 1]) + std::abs(a[l][l]);
                if (s == 0.0) s = anorm;
                if (std::abs(a[l][l - 1]) <= eps * s) {
                    a[l][l - 1] = 0.0;
                    break;
                }
            }
            if (l < 0) l = 0;
            double x = a[nn][nn];
            if (l == nn) {
                out.emplace_back(x + t, 0.0);
                --nn;
            } else {
                double y = a[nn - 1][nn - 1];
                double w = a[nn][nn - 1] * a[nn - 1][nn];
                if (l == nn - 1) {
                    double p = 0.5 * (y - x);
                    double q = p * p + w;
                    double z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + sign_of(z, p);
                        double r1 = x + z;
                        double r2 = (z != 0.0) ? x - w / z : r1;
                        out.emplace_back(r1, 0.0);
                        out.emplace_back(r2, 0.0);
                    } else {
                        out.emplace_back(x + p, z);
                        out.emplace_back(x + p, -z);
                    }
                    nn -= 2;
                } else {
                    if (its == 60) throw std::runtime_error("hqr: too many iterations");
                    if (its == 10 || its == 20 || its == 30 || its == 40 || its == 50) {
                        t += x;
                        for (int i = 0; i <= nn; ++i) a[i][i] -= x;
                        double s = std::abs(a[nn][nn - 1]) + std::abs(a[nn - 1][nn - 2]);
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    int m;
                    double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
                    for (m = nn - 2; m >= l; --m) {
                        z = a[m][m];
                        double rr = x - z;
                        double ss = y - z;
                        p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - rr - ss;
                        r = a[m + 2][m + 1];
                        double sc = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= sc;
                        q /= sc;
                        r /= sc;
                        if (m == l) break;
                        double u = std::abs(a[m][m - 1]) * (std::abs(q) + std::abs(r));
                        double v = std::abs(p) *
                                   (std::abs(a[m - 1][m - 1]) + std::abs(z) + std::abs(a[m + 1][m + 1]));
                        if (u <= eps * v) break;
                    }
                    for (int i = m + 2; i <= nn; ++i) {
                        a[i][i - 2] = 0.0;
                        if (i != m + 2) a[i][i - 3] = 0.0;
                    }
                    for (int k = m; k <= nn - 1; ++k) {
                        if (k != m) {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = (k != nn - 1) ? a[k + 2][k - 1] : 0.0;
                            x = std::abs(p) + std::abs(q) + std::abs(r);
                            if (x != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
                        if (s == 0.0) continue;
                        if (k == m) {
                            if (l != m) a[k][k - 1] = -a[k][k - 1];
                        } else {
                            a[k][k - 1] = -s * x;
                        }
                        p += s;
                        x = p / s;
                        double yy = q / s;
                        z = r / s;
                        q /= p;
                        r /= p;
                        for (int j = k; j <= nn; ++j) {
                            double pp = a[k][j] + q * a[k + 1][j];
                            if (k != nn - 1) {
                                pp += r * a[k + 2][j];
                                a[k + 2][j] -= pp * z;
                            }
                            a[k + 1][j] -= pp * yy;
                            a[k][j] -= pp * x;
                        }
                        int mmin = (nn < k + 3) ? nn : k + 3;
                        for (int i = l; i <= mmin; ++i) {
                            double pp = x * a[i][k] + yy * a[i][k + 1];
                            if (k != nn - 1) {
                                pp += z * a[i][k + 2];
                                a[i][k + 2] -= pp * r;
                            }
                            a[i][k + 1] -= pp * q;
                            a[i][k] -= pp;
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
}

}  // namespace detail

/// All complex roots of a real polynomial (coefficients ascending) via the
/// eigenvalues of its balanced companion matrix, each refined by a few
/// complex Newton steps. Leading coefficients below scale * 1e-14 are
/// trimmed. Degree 0 returns empty; degrees 1 and 2 use closed forms.
inline std::vector<std::complex<double>> roots(std::vector<double> c) {
    double scale = 0.0;
    for (double v : c) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return {};
    while (c.size() > 1 && std::abs(c.back()) < 1e-14 * scale) c.pop_back();
    const std::size_t deg = c.size() - 1;
    std::vector<std::complex<double>> out;
    auto sorted = [](std::vector<std::complex<double>> v) {
        std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) {
            return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
        });
        return v;
    };
    if (deg == 0) return out;
    if (deg == 1) {
        out.emplace_back(-c[0] / c[1], 0.0);
        return out;
    }
    if (deg == 2) {
        const double A = c[2], B = c[1], C0 = c[0];
        const double disc = B * B - 4.0 * A * C0;
        if (disc >= 0.0) {
            // q-form avoids cancellation between -B and sqrt(disc)
            const double q = -0.5 * (B + detail::sign_of(std::sqrt(disc), B));
            const double r1 = q / A;
            const double r2 = (q != 0.0) ? C0 / q : r1;
            out.emplace_back(r1, 0.0);
            out.emplace_back(r2, 0.0);
        } else {
            const double re = -B / (2.0 * A), im = std::sqrt(-disc) / (2.0 * A);
            out.emplace_back(re, im);
            out.emplace_back(re, -im);
        }
        return sorted(std::move(out));
    }
    constexpr std::size_t kMax = 8;
    if (deg > kMax) throw std::invalid_argument("poly::roots: degree too large");
    std::array<std::array<double, kMax>, kMax> m{};
    for (auto& row : m) row.fill(0.0);
    for (std::size_t i = 0; i + 1 < deg; ++i) m[i + 1][i] = 1.0;
    for (std::size_t i = 0; i < deg; ++i) m[i][deg - 1] = -c[i] / c[deg];
    detail::balance(m, deg);
    detail::hqr(m, deg, out);

    // Newton refinement; keep the better of original and refined.
    for (auto& z : out) {
        std::complex<double> zz = z;
        for (int it = 0; it < 8; ++it) {
            const auto f = eval(c, zz);
            const auto df = eval_derivative(c, zz);
            if (std::abs(df) == 0.0) break;
            const auto step = f / df;
            zz -= step;
            if (std::abs(step) < 1e-15 * (1.0 + std::abs(zz))) break;
        }
        if (std::abs(eval(c, zz)) <= std::abs(eval(c, z))) z = zz;
    }
    return sorted(std::move(out));
}

}  // namespace kninst::poly
