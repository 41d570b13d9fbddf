#include "gravlearn/elements.hpp"

#include <cmath>
#include <stdexcept>

namespace gravlearn {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kCircularTol = 1e-8;   // e below this is treated as circular
constexpr double kEquatorialTol = 1e-8; // sin(i) below this is treated as equatorial
} // namespace

double wrap_angle(double theta) {
    double w = std::fmod(theta, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    // fmod can return exactly 2pi after the correction when theta is a tiny
    // negative number.
    if (w >= kTwoPi) w = 0.0;
    return w;
}

double keplerian_period(double semi_major, double mu) {
    if (!(semi_major > 0.0) || !(mu > 0.0))
        throw std::domain_error("keplerian_period: semi_major and mu must be > 0");
    return kTwoPi * std::sqrt(semi_major * semi_major * semi_major / mu);
}

CartesianState elements_to_state(const KeplerianElements& el, double mu) {
    if (!(el.semi_major > 0.0))
        throw std::invalid_argument("elements_to_state: semi_major must be > 0");
    if (el.eccentricity < 0.0 || el.eccentricity >= 1.0)
        throw std::invalid_argument("elements_to_state: only elliptical orbits (0 <= e < 1) supported");
    if (!(mu > 0.0)) throw std::invalid_argument("elements_to_state: mu must be > 0");

    const double e = el.eccentricity;
    const double p = el.semi_major * (1.0 - e * e);
    const double cnu = std::cos(el.true_anomaly);
    const double snu = std::sin(el.true_anomaly);
    const double r = p / (1.0 + e * cnu);

    const Vec3 pos_pf(r * cnu, r * snu, 0.0);
    const double vf = std::sqrt(mu / p);
    const Vec3 vel_pf(-vf * snu, vf * (e + cnu), 0.0);

    const Eigen::Matrix3d rot =
        (Eigen::AngleAxisd(el.raan, Vec3::UnitZ()) *
         Eigen::AngleAxisd(el.inclination, Vec3::UnitX()) *
         Eigen::AngleAxisd(el.arg_perigee, Vec3::UnitZ()))
            .toRotationMatrix();

    return {rot * pos_pf, rot * vel_pf};
}

double osculating_semi_major(const CartesianState& state, double mu) {
    const double r = state.position.norm();
    if (r == 0.0) throw std::invalid_argument("osculating_semi_major: position at origin");
    const double energy = 0.5 * state.velocity.squaredNorm() - mu / r;
    if (energy >= 0.0)
        throw std::invalid_argument("osculating_semi_major: state is not bound");
    return -mu / (2.0 * energy);
}

KeplerianElements state_to_elements(const CartesianState& state, double mu) {
    const Vec3& x = state.position;
    const Vec3& v = state.velocity;
    const double r = x.norm();
    if (r == 0.0) throw std::invalid_argument("state_to_elements: position at origin");

    const double energy = 0.5 * v.squaredNorm() - mu / r;
    if (energy >= 0.0)
        throw std::invalid_argument("state_to_elements: state is not bound");

    const Vec3 h = x.cross(v);
    const double hn = h.norm();
    if (hn < 1e-12 * r * v.norm() || hn == 0.0)
        throw std::domain_error("state_to_elements: zero angular momentum (degenerate orbit)");
    const Vec3 h_hat = h / hn;

    KeplerianElements el;
    el.semi_major = -mu / (2.0 * energy);

    const Vec3 e_vec = v.cross(h) / mu - x / r;
    el.eccentricity = e_vec.norm();
    el.inclination = std::acos(std::clamp(h.z() / hn, -1.0, 1.0));

    const bool equatorial = std::abs(std::sin(el.inclination)) < kEquatorialTol;
    const bool circular = el.eccentricity < kCircularTol;

    // Node direction; for equatorial orbits the convention fixes raan = 0,
    // which makes +x the node line.
    Vec3 node = Vec3::UnitZ().cross(h);
    if (equatorial) {
        el.raan = 0.0;
        node = Vec3::UnitX();
    } else {
        node.normalize();
        el.raan = wrap_angle(std::atan2(node.y(), node.x()));
    }

    const auto angle_from = [&](const Vec3& from, const Vec3& to) {
        return wrap_angle(std::atan2(from.cross(to).dot(h_hat), from.dot(to)));
    };

    if (circular) {
        el.arg_perigee = 0.0;
        el.true_anomaly = angle_from(node, x / r);
    } else {
        const Vec3 e_hat = e_vec / el.eccentricity;
        el.arg_perigee = angle_from(node, e_hat);
        el.true_anomaly = angle_from(e_hat, x / r);
    }
    return el;
}

} // namespace gravlearn
