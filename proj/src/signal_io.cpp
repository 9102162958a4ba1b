#include "vibro/signal_io.hpp"

#include <algorithm>
#include <charconv>
#include <complex>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string_view>

namespace vibro {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_number(std::string_view field, std::size_t line, std::string_view column) {
    double v = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || field.empty())
        throw CsvError(line, "cannot parse '" + std::string(field) + "' in column " + std::string(column));
    if (!std::isfinite(v))
        throw CsvError(line, "non-finite value in column " + std::string(column));
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::out | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    return os;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
    os.flush();
    if (!os) throw IoError("write to " + path.string() + " failed");
}

void write_comments(std::ostream& os, const std::vector<std::string>& comments) {
    for (const auto& c : comments) os << "# " << c << '\n';
}

/// One direct-form-II-transposed pass starting in the steady state of x[0].
void filter_pass(const Biquad& q, std::vector<double>& x) {
    if (x.empty()) return;
    double z2 = (q.b2 - q.a2) * x.front();
    double z1 = (q.b1 - q.a1) * x.front() + z2;
    for (double& xi : x) {
        const double in = xi;
        const double y = q.b0 * in + z1;
        z1 = q.b1 * in - q.a1 * y + z2;
        z2 = q.b2 * in - q.a2 * y;
        xi = y;
    }
}

}  // namespace

MeasuredTrace make_trace(Eigen::VectorXd t, Eigen::VectorXd x2, std::optional<Eigen::VectorXd> x1) {
    const Eigen::Index n = t.size();
    if (n < 2) throw std::invalid_argument("trace: at least two samples are required");
    if (x2.size() != n || (x1 && x1->size() != n))
        throw std::invalid_argument("trace: column lengths differ");
    if (!t.allFinite() || !x2.allFinite() || (x1 && !x1->allFinite()))
        throw std::invalid_argument("trace: non-finite values");
    const double dt = (t[n - 1] - t[0]) / static_cast<double>(n - 1);
    if (!(dt > 0)) throw std::invalid_argument("trace: time stamps must increase");
    for (Eigen::Index i = 1; i < n; ++i) {
        if (std::abs((t[i] - t[i - 1]) - dt) > kUniformSamplingTol * dt)
            throw std::invalid_argument("trace: non-uniform sampling at sample " + std::to_string(i));
    }
    MeasuredTrace tr;
    tr.fs = 1.0 / dt;
    tr.t = std::move(t);
    tr.x2 = std::move(x2);
    tr.x1 = std::move(x1);
    return tr;
}

MeasuredTrace parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    std::optional<std::size_t> col_t, col_x1, col_x2;
    std::size_t n_cols = 0;
    bool have_header = false;
    std::vector<double> t, x1, x2;

    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split(line);
        if (!have_header) {
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (fields[i] == "t") col_t = i;
                else if (fields[i] == "x1") col_x1 = i;
                else if (fields[i] == "x2") col_x2 = i;
            }
            if (!col_t || !col_x2) throw CsvError(line_no, "header must contain columns t and x2");
            n_cols = fields.size();
            have_header = true;
            continue;
        }
        if (fields.size() != n_cols)
            throw CsvError(line_no, "expected " + std::to_string(n_cols) + " fields, got " +
                                        std::to_string(fields.size()));
        t.push_back(parse_number(fields[*col_t], line_no, "t"));
        x2.push_back(parse_number(fields[*col_x2], line_no, "x2"));
        if (col_x1) x1.push_back(parse_number(fields[*col_x1], line_no, "x1"));
    }
    if (!have_header) throw CsvError(0, "missing header");

    auto to_vec = [](const std::vector<double>& v) {
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    try {
        std::optional<Eigen::VectorXd> x1_vec;
        if (col_x1) x1_vec = to_vec(x1);
        return make_trace(to_vec(t), to_vec(x2), std::move(x1_vec));
    } catch (const std::invalid_argument& e) {
        throw CsvError(0, e.what());
    }
}

MeasuredTrace load_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_csv(buf.str());
}

Eigen::VectorXd differentiate(const Eigen::VectorXd& x, double fs) {
    const Eigen::Index n = x.size();
    if (n < 3) throw std::invalid_argument("differentiate: need at least 3 samples");
    if (!(fs > 0)) throw std::invalid_argument("differentiate: fs must be positive");
    Eigen::VectorXd v(n);
    const double half_fs = 0.5 * fs;
    v[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) * half_fs;
    v.segment(1, n - 2) = (x.tail(n - 2) - x.head(n - 2)) * half_fs;
    v[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) * half_fs;
    return v;
}

Eigen::VectorXd cumulative_trapezoid(const Eigen::VectorXd& v, double fs, double x0) {
    Eigen::VectorXd x(v.size());
    if (v.size() == 0) return x;
    x[0] = x0;
    for (Eigen::Index i = 1; i < v.size(); ++i) x[i] = x[i - 1] + 0.5 * (v[i] + v[i - 1]) / fs;
    return x;
}

Biquad butterworth_lowpass(double fs, double fc) {
    if (!(fs > 0) || !(fc > 0) || !(fc < 0.5 * fs))
        throw std::invalid_argument("lowpass: cutoff must satisfy 0 < fc < fs/2");
    const double k = std::tan(std::numbers::pi * fc / fs);
    const double k2 = k * k;
    const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k2);
    Biquad q{};
    q.b0 = k2 * norm;
    q.b1 = 2.0 * q.b0;
    q.b2 = q.b0;
    q.a1 = 2.0 * (k2 - 1.0) * norm;
    q.a2 = (1.0 - std::numbers::sqrt2 * k + k2) * norm;
    return q;
}

double Biquad::magnitude(double f, double fs) const {
    const double w = 2.0 * std::numbers::pi * f / fs;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    return std::abs((b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2));
}

Eigen::VectorXd lowpass(const Eigen::VectorXd& v, double fs, double fc) {
    const Biquad q = butterworth_lowpass(fs, fc);
    const Eigen::Index n = v.size();
    if (n == 0) return v;
    if (n == 1) return v;

    const Eigen::Index pad = std::min<Eigen::Index>(n - 1, 3 * static_cast<Eigen::Index>(std::ceil(fs / fc)));
    std::vector<double> ext(static_cast<std::size_t>(n + 2 * pad));
    for (Eigen::Index i = 0; i < pad; ++i) {
        ext[static_cast<std::size_t>(i)] = 2.0 * v[0] - v[pad - i];
        ext[static_cast<std::size_t>(pad + n + i)] = 2.0 * v[n - 1] - v[n - 2 - i];
    }
    for (Eigen::Index i = 0; i < n; ++i) ext[static_cast<std::size_t>(pad + i)] = v[i];

    filter_pass(q, ext);
    std::reverse(ext.begin(), ext.end());
    filter_pass(q, ext);
    std::reverse(ext.begin(), ext.end());

    return Eigen::Map<const Eigen::VectorXd>(ext.data() + pad, n);
}

Eigen::VectorXd estimate_velocity(const Eigen::VectorXd& x, double fs, double fc) {
    return lowpass(differentiate(x, fs), fs, fc);
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void export_trajectory(const Trajectory& traj, const std::filesystem::path& path,
                       const std::vector<std::string>& comments) {
    auto os = open_out(path);
    write_comments(os, comments);
    os << "t,x1,x2,v2,p,f,mode\n";
    for (const auto& s : traj.samples) {
        const auto& st = s.state;
        os << format_number(st.t) << ',' << format_number(st.x1) << ',' << format_number(st.x2) << ','
           << format_number(st.v2) << ',' << format_number(s.p) << ',' << format_number(s.f) << ','
           << to_string(st.mode) << '\n';
    }
    for (const auto& e : traj.events) {
        os << "# event," << to_string(e.kind) << ',' << format_number(e.t_event) << '\n';
    }
    finish(os, path);
}

void export_hysteresis(const std::vector<ContactSample>& trace, const std::filesystem::path& path,
                       const std::vector<std::string>& comments) {
    auto os = open_out(path);
    write_comments(os, comments);
    os << "p,p_dot,f\n";
    for (const auto& s : trace) {
        os << format_number(s.p) << ',' << format_number(s.p_dot) << ',' << format_number(s.f) << '\n';
    }
    finish(os, path);
}

void write_columns(const std::filesystem::path& path, const std::vector<std::string>& names,
                   const std::vector<Eigen::VectorXd>& columns, const std::vector<std::string>& comments) {
    if (names.size() != columns.size()) throw std::invalid_argument("write_columns: name/column mismatch");
    const Eigen::Index n = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns) {
        if (c.size() != n) throw std::invalid_argument("write_columns: column lengths differ");
    }
    auto os = open_out(path);
    write_comments(os, comments);
    for (std::size_t j = 0; j < names.size(); ++j) os << (j ? "," : "") << names[j];
    os << '\n';
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << format_number(columns[j][i]);
        os << '\n';
    }
    finish(os, path);
}

}  // namespace vibro
