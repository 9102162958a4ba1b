#include "vibro/model.hpp"

#include <algorithm>
#include <sstream>

namespace vibro {

namespace {

SystemParams base_preset() {
    SystemParams p;
    p.v_platform = 0.1;
    return p;
}

}  // namespace

SystemParams steel_preset() {
    SystemParams p = base_preset();
    p.m2 = 0.052;
    p.b = 0.214;
    return p;
}

SystemParams aluminium_preset() {
    SystemParams p = base_preset();
    p.m2 = 0.024;
    p.b = 0.1106;
    return p;
}

std::optional<SystemParams> preset_by_name(std::string_view name) {
    if (name == "steel") return steel_preset();
    if (name == "aluminium" || name == "aluminum") return aluminium_preset();
    return std::nullopt;
}

std::vector<Violation> validate(const SystemParams& p) {
    std::vector<Violation> out;
    auto check = [&](bool ok, const char* field, const char* msg) {
        if (!ok) out.push_back({field, msg});
    };
    const auto finite = [](double v) { return std::isfinite(v); };

    check(finite(p.m1) && p.m1 > 0, "m1", "must be finite and > 0");
    check(finite(p.m2) && p.m2 > 0, "m2", "must be finite and > 0");
    check(finite(p.b) && p.b > 0, "b", "must be finite and > 0");
    check(finite(p.k) && p.k > 0, "k", "must be finite and > 0");
    check(finite(p.alpha) && p.alpha >= 0, "alpha", "must be finite and >= 0");
    check(finite(p.n) && p.n >= 1, "n", "must be finite and >= 1");
    check(finite(p.omega_max) && p.omega_max > 0, "omega_max", "must be finite and > 0");
    check(finite(p.a1), "a1", "must be finite");
    check(finite(p.a2), "a2", "must be finite");
    check(finite(p.x_c), "x_c", "must be finite");
    check(finite(p.v_platform), "v_platform", "must be finite");
    check(finite(p.g) && p.g > 0, "g", "must be finite and > 0");
    return out;
}

void require_valid(const SystemParams& params) {
    const auto violations = validate(params);
    if (violations.empty()) return;
    std::ostringstream os;
    os << "invalid parameters:";
    for (const auto& v : violations) os << ' ' << v.field << ' ' << v.message << ';';
    throw std::invalid_argument(os.str());
}

std::string_view to_string(Mode m) noexcept {
    switch (m) {
        case Mode::SlipFree: return "SlipFree";
        case Mode::StickFree: return "StickFree";
        case Mode::SlipContact: return "SlipContact";
        case Mode::StickContact: return "StickContact";
    }
    return "?";
}

std::optional<Mode> mode_from_string(std::string_view s) {
    for (Mode m : {Mode::SlipFree, Mode::StickFree, Mode::SlipContact, Mode::StickContact}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

std::string_view to_string(EventKind k) noexcept {
    switch (k) {
        case EventKind::Impact: return "Impact";
        case EventKind::Separation: return "Separation";
        case EventKind::StickOnset: return "StickOnset";
        case EventKind::SlipOnset: return "SlipOnset";
    }
    return "?";
}

std::size_t Trajectory::count(EventKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [&](const Event& e) { return e.kind == kind; }));
}

}  // namespace vibro
