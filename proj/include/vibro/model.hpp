#pragma once

// Core domain types for the active-passive pair: physical constants,
// hybrid state, events and sampled trajectories.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace vibro {

using Vector4 = Eigen::Matrix<double, 4, 1>;

/// Physical and model constants, SI units throughout.
struct SystemParams {
    double m1 = 1.0;          ///< active body mass [kg]
    double m2 = 0.052;        ///< passive body mass [kg]
    double b = 0.214;         ///< Coulomb friction force [N]
    double a1 = 0.0;          ///< active velocity gain [N s/m]
    double a2 = 0.0;          ///< active position gain [N/m]
    double k = 1.0e4;         ///< contact stiffness [N/m^n]
    double alpha = 0.5;       ///< restitution slope [s/m]
    double n = 1.0;           ///< contact exponent
    double x_c = 0.0;         ///< impact position [m]
    double v_platform = 0.0;  ///< platform velocity [m/s]
    double omega_max = 2.0;   ///< validity bound on impact speed [m/s]
    double g = 9.81;          ///< gravitational acceleration [m/s^2]

    /// Contact damping coefficient, always derived from alpha and k.
    [[nodiscard]] double lambda() const noexcept { return 1.5 * alpha * k; }

    /// Largest acceleration static friction can impose on the passive body.
    [[nodiscard]] double stiction_accel() const noexcept { return b / m2; }

    bool operator==(const SystemParams&) const = default;
};

/// Default measurement sample rate of the preset setups [Hz].
inline constexpr double kPresetSampleRate = 5000.0;

/// Steel disk: m2 = 0.052 kg, b = 0.214 N.
SystemParams steel_preset();
/// Aluminium disk: m2 = 0.024 kg, b = 0.1106 N.
SystemParams aluminium_preset();
/// Looks a preset up by name ("steel" or "aluminium").
std::optional<SystemParams> preset_by_name(std::string_view name);

struct Violation {
    std::string field;
    std::string message;
};

/// Reports every violated constraint; an empty result means the parameters are usable.
std::vector<Violation> validate(const SystemParams& params);

/// Throws std::invalid_argument listing all violations.
void require_valid(const SystemParams& params);

/// Three-valued signum, strict (no tolerance).
template <typename Scalar>
int sgn(Scalar y) {
    if (!std::isfinite(y)) throw std::invalid_argument("sgn: non-finite argument");
    return (y > Scalar(0)) - (y < Scalar(0));
}

/// Signum with an inclusive dead band: zero iff |y| <= eps.
template <typename Scalar>
int sgn_banded(Scalar y, Scalar eps) {
    if (!(eps > Scalar(0))) throw std::invalid_argument("sgn_banded: eps must be positive");
    if (std::abs(y) <= eps) return 0;
    return sgn(y);
}

enum class Mode { SlipFree, StickFree, SlipContact, StickContact };

[[nodiscard]] constexpr bool is_stick(Mode m) noexcept {
    return m == Mode::StickFree || m == Mode::StickContact;
}
[[nodiscard]] constexpr bool is_contact(Mode m) noexcept {
    return m == Mode::SlipContact || m == Mode::StickContact;
}
[[nodiscard]] constexpr Mode make_mode(bool stick, bool contact) noexcept {
    if (stick) return contact ? Mode::StickContact : Mode::StickFree;
    return contact ? Mode::SlipContact : Mode::SlipFree;
}

std::string_view to_string(Mode m) noexcept;
std::optional<Mode> mode_from_string(std::string_view s);

/// Continuous state plus discrete friction/contact mode.
///
/// slip_dir holds sgn(v1 - v2) for the current slip phase. It is needed at
/// breakaway, where the relative velocity is still exactly zero; in stick
/// modes it is 0.
struct SimState {
    double t = 0.0;
    double x1 = 0.0;
    double v1 = 0.0;
    double x2 = 0.0;
    double v2 = 0.0;
    Mode mode = Mode::StickFree;
    int slip_dir = 0;

    [[nodiscard]] double z() const noexcept { return x1 - x2; }
    [[nodiscard]] double z_dot() const noexcept { return v1 - v2; }

    [[nodiscard]] Vector4 vec() const { return Vector4(x1, v1, x2, v2); }
    void set_vec(const Vector4& s) {
        x1 = s[0];
        v1 = s[1];
        x2 = s[2];
        v2 = s[3];
    }

    bool operator==(const SimState&) const = default;
};

enum class EventKind { Impact, Separation, StickOnset, SlipOnset };

std::string_view to_string(EventKind k) noexcept;

/// Tie-break rank when two guards cross within the localization width; lower wins.
[[nodiscard]] constexpr int priority(EventKind k) noexcept { return static_cast<int>(k); }

struct Event {
    EventKind kind = EventKind::Impact;
    double t_event = 0.0;
    SimState state_at_event;
    double v_in = 0.0;  ///< approach speed toward the wall, Impact only
};

struct TrajectorySample {
    SimState state;
    double p = 0.0;  ///< penetration [m]
    double f = 0.0;  ///< contact force [N]
};

struct Trajectory {
    double dt = 0.0;
    std::vector<TrajectorySample> samples;
    std::vector<Event> events;
    std::vector<std::string> warnings;

    [[nodiscard]] std::size_t count(EventKind kind) const;
};

}  // namespace vibro
