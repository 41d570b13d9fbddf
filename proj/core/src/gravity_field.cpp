#include "gravlearn/gravity_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gravlearn {

int ZonalGravityField::max_degree() const {
    int m = 0;
    for (const auto& [n, j] : normalized_zonals) m = std::max(m, n);
    return m;
}

bool ZonalGravityField::has_degree(int n) const {
    return std::any_of(normalized_zonals.begin(), normalized_zonals.end(),
                       [n](const auto& z) { return z.first == n; });
}

ZonalGravityField ZonalGravityField::point_mass(double mu, double radius) {
    return ZonalGravityField{mu, radius, {}};
}

ZonalGravityField ZonalGravityField::bennu_normalized() {
    return ZonalGravityField{1.0, 1.0,
                             {{2, 1.93e-2}, {3, -1.22e-3}, {4, -6.50e-3}, {5, 6.73e-5}}};
}

ZonalGravityField ZonalGravityField::bennu_physical() {
    ZonalGravityField f = bennu_normalized();
    f.mu = 4.89;                // m^3/s^2
    f.reference_radius = 290.0; // m, Brillouin sphere
    return f;
}

void ZonalGravityField::validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("gravity field: mu must be > 0");
    if (!(reference_radius > 0.0))
        throw std::invalid_argument("gravity field: reference_radius must be > 0");
    for (std::size_t i = 0; i < normalized_zonals.size(); ++i) {
        if (normalized_zonals[i].first < 2)
            throw std::invalid_argument("gravity field: zonal degrees must be >= 2");
        for (std::size_t j = i + 1; j < normalized_zonals.size(); ++j)
            if (normalized_zonals[i].first == normalized_zonals[j].first)
                throw std::invalid_argument("gravity field: duplicate zonal degree");
    }
}

void InfluenceQuery::validate(const ZonalGravityField& field) const {
    if (!field.has_degree(degree))
        throw std::out_of_range("influence query: degree not present in field");
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("influence query: fraction must be in (0, 1]");
    if (!(hill_radius > field.reference_radius))
        throw std::invalid_argument("influence query: hill_radius must exceed reference_radius");
    if (colatitude < 0.0 || colatitude > M_PI)
        throw std::invalid_argument("influence query: colatitude must be in [0, pi]");
}

LegendreValue legendre(int n, double x) {
    if (n < 0) throw std::invalid_argument("legendre: degree must be nonnegative");
    if (std::abs(x) > 1.0) throw std::invalid_argument("legendre: |x| must be <= 1");
    // P_{k+1} = ((2k+1) x P_k - k P_{k-1}) / (k+1)
    // P'_{k+1} = (2k+1) P_k + P'_{k-1}
    double p_prev = 1.0, d_prev = 0.0; // P_0, P'_0
    if (n == 0) return {p_prev, d_prev};
    double p = x, d = 1.0; // P_1, P'_1
    for (int k = 1; k < n; ++k) {
        double p_next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
        double d_next = (2.0 * k + 1.0) * p + d_prev;
        p_prev = p;
        d_prev = d;
        p = p_next;
        d = d_next;
    }
    return {p, d};
}

// Unnormalized coefficient: Jn = sqrt(2n+1) J~n.
static double unnormalize(int n, double jn_tilde) {
    return std::sqrt(2.0 * n + 1.0) * jn_tilde;
}

double potential(const ZonalGravityField& field, const Vec3& position) {
    const double r = position.norm();
    if (r == 0.0) throw std::domain_error("potential: position at origin");
    const double u = position.z() / r; // sin(latitude)
    double series = 1.0;
    for (const auto& [n, jt] : field.normalized_zonals) {
        const double jn = unnormalize(n, jt);
        series -= jn * std::pow(field.reference_radius / r, n) * legendre(n, u).value;
    }
    return field.mu / r * series;
}

double zonal_term_potential(const ZonalGravityField& field, int degree,
                            const Vec3& position) {
    const double r = position.norm();
    if (r == 0.0) throw std::domain_error("zonal_term_potential: position at origin");
    const auto it = std::find_if(field.normalized_zonals.begin(), field.normalized_zonals.end(),
                                 [degree](const auto& z) { return z.first == degree; });
    if (it == field.normalized_zonals.end())
        throw std::out_of_range("zonal_term_potential: degree not present in field");
    const double u = position.z() / r;
    const double jn = unnormalize(degree, it->second);
    return -field.mu / r * jn * std::pow(field.reference_radius / r, degree) *
           legendre(degree, u).value;
}

Vec3 acceleration(const ZonalGravityField& field, const Vec3& position) {
    const double r2 = position.squaredNorm();
    if (r2 == 0.0) throw std::domain_error("acceleration: position at origin");
    const double r = std::sqrt(r2);
    const double inv_r = 1.0 / r;

    // Point-mass term of a = grad U.
    Vec3 a = -field.mu * inv_r * inv_r * inv_r * position;

    if (field.normalized_zonals.empty()) return a;

    // Gradient of each term T_n = -(mu/r) Jn (R/r)^n Pn(u) with u = z/r:
    //   dT_n/dx = mu Jn R^n r^-(n+3) x [ (n+1) Pn + u Pn' ]      (same for y)
    //   dT_n/dz = mu Jn R^n r^-(n+2) [ (n+1) u Pn - (1 - u^2) Pn' ]
    // Expressed through u alone, so the polar axis needs no special casing.
    const double u = position.z() * inv_r;
    double gxy = 0.0; // accumulates Jn R^n r^-(n+3) [(n+1) Pn + u Pn']
    double gz = 0.0;  // accumulates Jn R^n r^-(n+2) [(n+1) u Pn - (1-u^2) Pn']
    for (const auto& [n, jt] : field.normalized_zonals) {
        const double jn = unnormalize(n, jt);
        const auto [pn, dpn] = legendre(n, u);
        const double radial = jn * std::pow(field.reference_radius * inv_r, n) *
                              inv_r * inv_r;
        gxy += radial * inv_r * ((n + 1.0) * pn + u * dpn);
        gz += radial * ((n + 1.0) * u * pn - (1.0 - u * u) * dpn);
    }
    a.x() += field.mu * gxy * position.x();
    a.y() += field.mu * gxy * position.y();
    a.z() += field.mu * gz;
    return a;
}

std::optional<double> influence_radius(const ZonalGravityField& field,
                                       const InfluenceQuery& query) {
    query.validate(field);
    const auto it = std::find_if(field.normalized_zonals.begin(), field.normalized_zonals.end(),
                                 [&](const auto& z) { return z.first == query.degree; });
    const double jn = std::abs(unnormalize(query.degree, it->second));
    const double pn = legendre(query.degree, std::cos(query.colatitude)).value;
    // Vanishing Legendre value (to rounding): no finite threshold radius.
    if (std::abs(pn) < 1e-13) return std::nullopt;
    // |u_n(r)| = f mu / r_H  =>  r^(n+1) = Jn R^n |Pn| r_H / f
    const double n = static_cast<double>(query.degree);
    const double rhs = jn * std::pow(field.reference_radius, n) * std::abs(pn) *
                       query.hill_radius / query.fraction;
    return std::pow(rhs, 1.0 / (n + 1.0));
}

} // namespace gravlearn
