// Common interface for trained position -> acceleration maps.
#pragma once

#include <string>
#include <vector>

#include "gravlearn/gravity_field.hpp"

namespace gravlearn {

class Regressor {
public:
    virtual ~Regressor() = default;

    /// Predicted accelerations (scaled units), order preserved.
    virtual std::vector<Vec3> predict(const std::vector<Vec3>& positions) const = 0;

    virtual std::string kind() const = 0;

    /// True when training hit a numerical instability; predictions still run
    /// from the last finite state.
    virtual bool instability_flag() const { return false; }
};

/// The truth field wrapped as a regressor (test hook: evaluates the reference
/// field at the query positions, scaled like the datasets).
class TruthRegressor final : public Regressor {
public:
    TruthRegressor(ZonalGravityField field, double accel_scale)
        : field_(std::move(field)), scale_(accel_scale) {}

    std::vector<Vec3> predict(const std::vector<Vec3>& positions) const override {
        std::vector<Vec3> out;
        out.reserve(positions.size());
        for (const auto& x : positions) out.push_back(scale_ * acceleration(field_, x));
        return out;
    }

    std::string kind() const override { return "truth"; }

private:
    ZonalGravityField field_;
    double scale_;
};

} // namespace gravlearn
