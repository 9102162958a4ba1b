#pragma once

// Measurement-side signal chain and CSV exchange formats.
//
// Input traces:   header `t,x2` or `t,x1,x2` (extra columns are ignored),
//                 `#` comment lines allowed anywhere.
// Trajectories:   `t,x1,x2,v2,p,f,mode`, events appended as `# event,<kind>,<t>`.
// Hysteresis:     `p,p_dot,f`.
// Numbers are written with 17 significant digits so files round-trip exactly.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vibro/contact.hpp"
#include "vibro/model.hpp"

namespace vibro {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed CSV content. line() is 1-based, 0 when not tied to a line.
class CsvError : public std::runtime_error {
public:
    CsvError(std::size_t line, const std::string& what)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct MeasuredTrace {
    double fs = 0.0;  ///< sample rate [Hz]
    Eigen::VectorXd t;
    Eigen::VectorXd x2;
    std::optional<Eigen::VectorXd> x1;

    [[nodiscard]] Eigen::Index size() const noexcept { return t.size(); }
};

/// Relative tolerance on sample spacing accepted as uniform.
inline constexpr double kUniformSamplingTol = 1e-6;

/// Builds a trace from uniformly sampled arrays; throws std::invalid_argument otherwise.
MeasuredTrace make_trace(Eigen::VectorXd t, Eigen::VectorXd x2,
                         std::optional<Eigen::VectorXd> x1 = std::nullopt);

MeasuredTrace load_csv(const std::filesystem::path& path);
MeasuredTrace parse_csv(const std::string& text);

/// Central differences inside, second-order one-sided differences at the ends.
Eigen::VectorXd differentiate(const Eigen::VectorXd& x, double fs);

/// Cumulative trapezoidal integral starting at x0.
Eigen::VectorXd cumulative_trapezoid(const Eigen::VectorXd& v, double fs, double x0 = 0.0);

/// Second-order Butterworth coefficients (bilinear, prewarped to fc).
struct Biquad {
    double b0, b1, b2, a1, a2;

    /// |H(e^{jw})| at frequency f [Hz] for sample rate fs.
    [[nodiscard]] double magnitude(double f, double fs) const;
};

Biquad butterworth_lowpass(double fs, double fc);

/// Zero-phase low-pass: the Butterworth section run forward, then backward.
/// Edges are padded by odd reflection and the filter starts in steady state,
/// so constant inputs pass unchanged.
Eigen::VectorXd lowpass(const Eigen::VectorXd& v, double fs, double fc);

/// Default cutoff for the velocity estimate [Hz].
inline constexpr double kDefaultCutoff = 200.0;

/// Position trace -> filtered velocity, the measurement-side velocity estimate.
Eigen::VectorXd estimate_velocity(const Eigen::VectorXd& x, double fs, double fc = kDefaultCutoff);

std::string format_number(double v);

void export_trajectory(const Trajectory& traj, const std::filesystem::path& path,
                       const std::vector<std::string>& comments = {});

void export_hysteresis(const std::vector<ContactSample>& trace, const std::filesystem::path& path,
                       const std::vector<std::string>& comments = {});

/// Generic column writer; all columns must have equal length.
void write_columns(const std::filesystem::path& path, const std::vector<std::string>& names,
                   const std::vector<Eigen::VectorXd>& columns,
                   const std::vector<std::string>& comments = {});

}  // namespace vibro
