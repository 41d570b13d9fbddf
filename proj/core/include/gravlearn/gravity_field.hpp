// Truth gravity model: point mass plus normalized zonal spherical harmonics,
// with the zonal-term influence-radius analysis.
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gravlearn {

using Vec3 = Eigen::Vector3d;

/// Axisymmetric gravity field: mu, expansion reference radius, and normalized
/// zonal coefficients J~n (degree >= 2). The potential uses the force-function
/// sign convention, U = mu/r * [1 - sum_n Jn (R/r)^n Pn(sin phi)] with
/// unnormalized Jn = sqrt(2n+1) * J~n, so U > 0 and a = +grad U.
struct ZonalGravityField {
    double mu = 1.0;
    double reference_radius = 1.0;
    // (degree, normalized coefficient), degrees distinct and >= 2.
    std::vector<std::pair<int, double>> normalized_zonals;

    int max_degree() const;
    bool has_degree(int n) const;

    /// mu = 1, R = 1, zonals empty.
    static ZonalGravityField point_mass(double mu = 1.0, double radius = 1.0);
    /// Bennu reference field in normalized units (mu = 1, R = 1).
    static ZonalGravityField bennu_normalized();
    /// Bennu reference field in physical units (mu in m^3/s^2, R in m).
    static ZonalGravityField bennu_physical();

    /// Throws std::invalid_argument on a violated invariant.
    void validate() const;
};

/// Query for the radius where one zonal term's potential reaches a fraction of
/// the potential at the Hill radius.
struct InfluenceQuery {
    int degree = 2;
    double colatitude = 0.0;  // radians, [0, pi]
    double fraction = 0.1;    // (0, 1]
    double hill_radius = 0.0; // > reference_radius

    void validate(const ZonalGravityField& field) const;
};

/// Legendre polynomial Pn(x) and its derivative via the three-term recurrence.
/// Requires |x| <= 1.
struct LegendreValue {
    double value;
    double derivative;
};
LegendreValue legendre(int n, double x);

/// Specific potential U(position). Throws std::domain_error at the origin.
double potential(const ZonalGravityField& field, const Vec3& position);

/// Contribution u_n = -(mu/r) Jn (R/r)^n Pn(sin phi) of one zonal degree.
/// Throws std::out_of_range if the degree is not present in the field.
double zonal_term_potential(const ZonalGravityField& field, int degree,
                            const Vec3& position);

/// Analytic acceleration a = grad U. Throws std::domain_error at the origin.
Vec3 acceleration(const ZonalGravityField& field, const Vec3& position);

/// Radius where |u_n(r, colatitude)| equals fraction * mu/hill_radius, i.e.
/// r = (Jn R^n |Pn(cos theta)| hill_radius / fraction)^(1/(n+1)).
/// Returns nullopt when Pn(cos theta) vanishes to rounding (no finite solution).
std::optional<double> influence_radius(const ZonalGravityField& field,
                                       const InfluenceQuery& query);

} // namespace gravlearn
