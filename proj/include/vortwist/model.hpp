#pragma once

// Perturbation class, Cartesian and regularized vector fields, and the
// coordinate change x = cos(theta)/sqrt(2r), y = -sin(theta)/sqrt(2r).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "vortwist/errors.hpp"

namespace vortwist {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Mat2 = std::array<std::array<double, 2>, 2>;

inline constexpr Mat2 kIdentity2{{{1.0, 0.0}, {0.0, 1.0}}};
/// Jacobian of the unperturbed regularized field.
inline constexpr Mat2 kIntegrableJacobian{{{0.0, 0.0}, {2.0, 0.0}}};

inline double det(const Mat2& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

inline double max_abs_diff(const Mat2& a, const Mat2& b) {
    double d = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) d = std::max(d, std::abs(a[i][j] - b[i][j]));
    return d;
}

/// Finite Fourier series in t with period 1:
/// a0 + sum_m a_m cos(2 pi m t) + b_m sin(2 pi m t), m = 1, 2, ...
struct TimeCoefficient {
    double a0 = 0.0;
    std::vector<double> cos_terms;
    std::vector<double> sin_terms;

    static TimeCoefficient constant(double c) { return {c, {}, {}}; }

    double value(double t) const {
        const double tr = t - std::floor(t);
        double v = a0;
        for (std::size_t m = 0; m < cos_terms.size(); ++m)
            v += cos_terms[m] * std::cos(kTwoPi * static_cast<double>(m + 1) * tr);
        for (std::size_t m = 0; m < sin_terms.size(); ++m)
            v += sin_terms[m] * std::sin(kTwoPi * static_cast<double>(m + 1) * tr);
        return v;
    }

    double derivative(double t) const {
        const double tr = t - std::floor(t);
        double v = 0.0;
        for (std::size_t m = 0; m < cos_terms.size(); ++m) {
            const double w = kTwoPi * static_cast<double>(m + 1);
            v -= w * cos_terms[m] * std::sin(w * tr);
        }
        for (std::size_t m = 0; m < sin_terms.size(); ++m) {
            const double w = kTwoPi * static_cast<double>(m + 1);
            v += w * sin_terms[m] * std::cos(w * tr);
        }
        return v;
    }

    /// Crude sup-norm bound: sum of absolute coefficients.
    double sup_bound() const {
        double s = std::abs(a0);
        for (double c : cos_terms) s += std::abs(c);
        for (double c : sin_terms) s += std::abs(c);
        return s;
    }

    bool is_zero() const { return sup_bound() == 0.0; }
};

/// coef(t) * x^i * y^j
struct Monomial {
    int i = 0;
    int j = 0;
    TimeCoefficient coef;

    int degree() const { return i + j; }
};

/// Time-periodic polynomial perturbation p = T_4 + remainder vanishing to
/// order 4 at the origin, defined on the disk of radius epsilon.
class Perturbation {
public:
    static constexpr int kRequiredDegree = 4;

    Perturbation() = default;

    Perturbation(std::vector<Monomial> leading, std::vector<Monomial> remainder, double epsilon,
                 int degree = kRequiredDegree)
        : leading_(std::move(leading)), remainder_(std::move(remainder)), epsilon_(epsilon) {
        if (degree != kRequiredDegree)
            throw ConfigError("perturbation degree must be 4 (got " + std::to_string(degree) + ")");
        if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_))
            throw ConfigError("perturbation epsilon must be positive and finite");
        for (const auto& m : leading_) {
            if (m.i < 0 || m.j < 0 || m.degree() != kRequiredDegree)
                throw ConfigError("leading term x^" + std::to_string(m.i) + " y^" +
                                  std::to_string(m.j) + " is not homogeneous of degree 4");
        }
        for (const auto& m : remainder_) {
            if (m.i < 0 || m.j < 0 || m.degree() <= kRequiredDegree)
                throw ConfigError("remainder term x^" + std::to_string(m.i) + " y^" +
                                  std::to_string(m.j) + " must have degree >= 5");
        }
    }

    static Perturbation zero(double epsilon = 1.0) { return Perturbation({}, {}, epsilon); }

    /// gamma * cos(2 pi t) * x^4, the standard probe used throughout the tests.
    static Perturbation quartic_probe(double gamma, double epsilon = 1.0) {
        return Perturbation({Monomial{4, 0, TimeCoefficient{0.0, {gamma}, {}}}}, {}, epsilon);
    }

    int degree() const { return kRequiredDegree; }
    double epsilon() const { return epsilon_; }
    /// Lower edge of the regularized domain, 1/(2 epsilon^2).
    double r_star() const { return 1.0 / (2.0 * epsilon_ * epsilon_); }
    const std::vector<Monomial>& leading() const { return leading_; }
    const std::vector<Monomial>& remainder() const { return remainder_; }
    bool is_zero() const {
        auto zero = [](const Monomial& m) { return m.coef.is_zero(); };
        return std::all_of(leading_.begin(), leading_.end(), zero) &&
               std::all_of(remainder_.begin(), remainder_.end(), zero);
    }
    int max_total_degree() const {
        int d = 0;
        for (const auto& m : leading_) d = std::max(d, m.degree());
        for (const auto& m : remainder_) d = std::max(d, m.degree());
        return d;
    }
    bool in_disk(double x, double y) const { return x * x + y * y < epsilon_ * epsilon_; }

private:
    std::vector<Monomial> leading_;
    std::vector<Monomial> remainder_;
    double epsilon_ = 1.0;
};

/// All spatial partials d^a_x d^b_y p with a + b <= order.
class PartialTable {
public:
    explicit PartialTable(int order) : order_(order), v_(static_cast<std::size_t>((order + 1) * (order + 1)), 0.0) {}
    int order() const { return order_; }
    double& at(int a, int b) { return v_[index(a, b)]; }
    double at(int a, int b) const { return v_[index(a, b)]; }

private:
    std::size_t index(int a, int b) const {
        if (a < 0 || b < 0 || a + b > order_) throw std::out_of_range("partial index out of range");
        return static_cast<std::size_t>(a * (order_ + 1) + b);
    }
    int order_;
    std::vector<double> v_;
};

namespace detail {

inline double falling(int n, int k) {
    double f = 1.0;
    for (int m = 0; m < k; ++m) f *= static_cast<double>(n - m);
    return f;
}

inline double ipow(double x, int n) {
    double r = 1.0;
    for (int k = 0; k < n; ++k) r *= x;
    return r;
}

inline void accumulate_partials(const std::vector<Monomial>& terms, double t, double x, double y,
                                PartialTable& out) {
    for (const auto& m : terms) {
        const double c = m.coef.value(t);
        if (c == 0.0) continue;
        for (int a = 0; a <= std::min(m.i, out.order()); ++a) {
            for (int b = 0; a + b <= out.order() && b <= m.j; ++b) {
                out.at(a, b) += c * falling(m.i, a) * ipow(x, m.i - a) * falling(m.j, b) *
                                ipow(y, m.j - b);
            }
        }
    }
}

}  // namespace detail

/// Exact partials of p up to `order` (0..3) at (t, x, y).
inline PartialTable eval_perturbation(const Perturbation& p, double t, double x, double y, int order) {
    if (order < 0 || order > 3) throw std::invalid_argument("derivative order must be in 0..3");
    if (!p.in_disk(x, y)) throw DomainError("point outside the epsilon-disk");
    PartialTable out(order);
    detail::accumulate_partials(p.leading(), t, x, y, out);
    detail::accumulate_partials(p.remainder(), t, x, y, out);
    return out;
}

struct Velocity {
    double xdot = 0.0;
    double ydot = 0.0;
};

/// Symplectic gradient of Psi = 1/2 ln(x^2 + y^2) + p.
inline Velocity cartesian_field(const Perturbation& p, double t, double x, double y) {
    const double rho2 = x * x + y * y;
    if (rho2 == 0.0) throw SingularityError("cartesian field evaluated at the vortex");
    const PartialTable d = eval_perturbation(p, t, x, y, 1);
    return {y / rho2 + d.at(0, 1), -x / rho2 - d.at(1, 0)};
}

struct RegularizedPoint {
    double r = 0.0;
    double theta = 0.0;
};

struct CartesianPoint {
    double x = 0.0;
    double y = 0.0;
};

/// theta is the clockwise angle -Arg(x + iy), returned in (-pi, pi].
inline RegularizedPoint to_regularized(double x, double y) {
    const double rho2 = x * x + y * y;
    if (rho2 == 0.0) throw SingularityError("origin has no regularized image");
    double theta = -std::atan2(y, x);
    if (theta <= -kPi) theta += kTwoPi;
    return {1.0 / (2.0 * rho2), theta};
}

inline CartesianPoint from_regularized(double r, double theta) {
    if (!(r > 0.0)) throw SingularityError("regularized radius must be positive");
    const double s = 1.0 / std::sqrt(2.0 * r);
    return {std::cos(theta) * s, -std::sin(theta) * s};
}

/// Derivatives of h(t, r, theta) = p(t, x(r, theta), y(r, theta)) up to second order.
struct ComposedJet {
    double value = 0.0;
    double d_r = 0.0;
    double d_theta = 0.0;
    double d_rr = 0.0;
    double d_rtheta = 0.0;
    double d_thetatheta = 0.0;
};

enum class TermSet { all, leading, remainder };

namespace detail {

// Each monomial factors as coef(t) * (-1)^j cos^i sin^j * (2r)^{-(i+j)/2}.
class TrigPowers {
public:
    TrigPowers(double theta, int max_power) : c_(static_cast<std::size_t>(max_power + 3)), s_(c_.size()) {
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        c_[0] = s_[0] = 1.0;
        for (std::size_t k = 1; k < c_.size(); ++k) {
            c_[k] = c_[k - 1] * c;
            s_[k] = s_[k - 1] * s;
        }
    }
    double cs(int a, int b) const {
        if (a < 0 || b < 0) return 0.0;
        return c_[static_cast<std::size_t>(a)] * s_[static_cast<std::size_t>(b)];
    }

private:
    std::vector<double> c_, s_;
};

inline void accumulate_jet(const std::vector<Monomial>& terms, double t, double r,
                           const TrigPowers& tp, ComposedJet& jet) {
    const double two_r = 2.0 * r;
    for (const auto& m : terms) {
        const double c = m.coef.value(t);
        if (c == 0.0) continue;
        const int a = m.i;
        const int b = m.j;
        const double sign = (b % 2 == 0) ? 1.0 : -1.0;
        const double ang = sign * tp.cs(a, b);
        const double ang1 = sign * (-a * tp.cs(a - 1, b + 1) + b * tp.cs(a + 1, b - 1));
        const double ang2 =
            sign * (a * (a - 1) * tp.cs(a - 2, b + 2) - (a * (b + 1) + b * (a + 1)) * tp.cs(a, b) +
                    b * (b - 1) * tp.cs(a + 2, b - 2));
        const double k = static_cast<double>(a + b);
        const double rad = std::pow(two_r, -0.5 * k);
        const double rad1 = -k * rad / two_r;
        const double rad2 = k * (k + 2.0) * rad / (two_r * two_r);
        jet.value += c * ang * rad;
        jet.d_r += c * ang * rad1;
        jet.d_theta += c * ang1 * rad;
        jet.d_rr += c * ang * rad2;
        jet.d_rtheta += c * ang1 * rad1;
        jet.d_thetatheta += c * ang2 * rad;
    }
}

}  // namespace detail

/// Jet of p composed with the regularizing change of variables. No domain check.
inline ComposedJet compose_perturbation(const Perturbation& p, double t, double r, double theta,
                                        TermSet which = TermSet::all) {
    ComposedJet jet;
    const detail::TrigPowers tp(theta, p.max_total_degree());
    if (which != TermSet::remainder) detail::accumulate_jet(p.leading(), t, r, tp, jet);
    if (which != TermSet::leading) detail::accumulate_jet(p.remainder(), t, r, tp, jet);
    return jet;
}

/// r' = F, theta' = 2r + G.
struct RegularizedField {
    double F = 0.0;
    double G = 0.0;
};

inline void require_regularized_domain(const Perturbation& p, double r) {
    if (!(r > p.r_star()))
        throw DomainError("r = " + std::to_string(r) + " is not above r* = " + std::to_string(p.r_star()));
}

inline RegularizedField regularized_field_from_jet(const ComposedJet& jet, double r) {
    return {4.0 * r * r * jet.d_theta, -4.0 * r * r * jet.d_r};
}

inline Mat2 field_jacobian_from_jet(const ComposedJet& jet, double r) {
    const double r2 = r * r;
    return {{{8.0 * r * jet.d_theta + 4.0 * r2 * jet.d_rtheta, 4.0 * r2 * jet.d_thetatheta},
             {2.0 - 8.0 * r * jet.d_r - 4.0 * r2 * jet.d_rr, -4.0 * r2 * jet.d_rtheta}}};
}

inline RegularizedField regularized_field(const Perturbation& p, double t, double r, double theta) {
    require_regularized_domain(p, r);
    return regularized_field_from_jet(compose_perturbation(p, t, r, theta), r);
}

/// Jacobian of (F, 2r + G) with respect to (r, theta).
inline Mat2 field_jacobian(const Perturbation& p, double t, double r, double theta) {
    require_regularized_domain(p, r);
    return field_jacobian_from_jet(compose_perturbation(p, t, r, theta), r);
}

struct C1Grid {
    std::vector<double> t;
    std::vector<double> theta;
    std::vector<double> r;

    static std::vector<double> uniform(double lo, double hi, std::size_t n, bool include_hi) {
        std::vector<double> v(n);
        const double den = include_hi ? static_cast<double>(n - 1) : static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) v[k] = lo + (hi - lo) * static_cast<double>(k) / den;
        return v;
    }

    static std::vector<double> geometric(double lo, double hi, std::size_t n) {
        std::vector<double> v(n);
        for (std::size_t k = 0; k < n; ++k)
            v[k] = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(n - 1));
        return v;
    }

    /// Default scan: 64 t-points, 720 angles, radii from just above r* to 10^4 r*.
    static C1Grid standard(const Perturbation& p) {
        const double rs = p.r_star();
        return {uniform(0.0, 1.0, 64, false), uniform(0.0, kTwoPi, 720, false),
                geometric(rs * (1.0 + 1e-9), rs * 1e4, 24)};
    }
};

struct C1Estimate {
    double c1 = 0.0;
    double r_star = 0.0;
    /// r* + C1: trajectories starting above it stay in the domain for t in [0, 1].
    double a_star = 0.0;
};

/// Empirical sup of |F| + 2r|G| over the grid.
inline C1Estimate bound_constant_C1(const Perturbation& p, const C1Grid& grid) {
    double sup = 0.0;
    for (double r : grid.r) {
        require_regularized_domain(p, r);
        for (double t : grid.t)
            for (double th : grid.theta) {
                const auto f = regularized_field(p, t, r, th);
                sup = std::max(sup, std::abs(f.F) + 2.0 * r * std::abs(f.G));
            }
    }
    return {sup, p.r_star(), p.r_star() + sup};
}

}  // namespace vortwist
