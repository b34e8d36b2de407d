#include "shearflow/io.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "shearflow/error.hpp"

namespace shearflow {

namespace {

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw Error(ErrorCode::IoError, "cli", "cannot open file for writing", path);
    return out;
}

void put_u64(std::ofstream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_i64(std::ofstream& out, std::int64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_vec(std::ofstream& out, const Eigen::VectorXd& v) {
    put_i64(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()), sizeof(double) * v.size());
}
void put_mat(std::ofstream& out, const Eigen::MatrixXd& m) {
    put_i64(out, m.rows());
    put_i64(out, m.cols());
    out.write(reinterpret_cast<const char*>(m.data()), sizeof(double) * m.size());
}
bool get_u64(std::ifstream& in, std::uint64_t& v) {
    return bool(in.read(reinterpret_cast<char*>(&v), sizeof(v)));
}
bool get_i64(std::ifstream& in, std::int64_t& v) {
    return bool(in.read(reinterpret_cast<char*>(&v), sizeof(v)));
}
bool get_vec(std::ifstream& in, Eigen::VectorXd& v) {
    std::int64_t n;
    if (!get_i64(in, n) || n < 0) return false;
    v.resize(n);
    return bool(in.read(reinterpret_cast<char*>(v.data()), sizeof(double) * n));
}
bool get_mat(std::ifstream& in, Eigen::MatrixXd& m) {
    std::int64_t r, c;
    if (!get_i64(in, r) || !get_i64(in, c) || r < 0 || c < 0) return false;
    m.resize(r, c);
    return bool(in.read(reinterpret_cast<char*>(m.data()), sizeof(double) * r * c));
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj, bool with_timestamp) {
    auto out = open_out(path);
    if (with_timestamp) out << "# generated " << timestamp_utc() << "\n";
    out << "t,norm_H,norm_V,vprime_dual,energy_slack\n";
    for (int i = 0; i < traj.samples(); ++i) {
        out << fmt(traj.time[i]) << ',' << fmt(traj.norm_h[i]) << ',' << fmt(traj.norm_v[i]) << ','
            << fmt(traj.vprime_dual[i]) << ',' << fmt(traj.energy_slack[i]) << '\n';
    }
}

void write_energy_csv(const std::string& path, const Trajectory& traj, const ConstantsAudit& audit,
                      double tol_coeff) {
    auto out = open_out(path);
    out << "t,sigma,tol,violation\n";
    const double c2k = audit.C2 * (1.0 + audit.f_dual_norm * audit.f_dual_norm);
    for (int i = 1; i < traj.samples(); ++i) {
        const double h2 = traj.norm_h[i] * traj.norm_h[i];
        const double h2p = traj.norm_h[i - 1] * traj.norm_h[i - 1];
        const double v2 = traj.norm_v[i] * traj.norm_v[i];
        const double sigma = (h2 - h2p) / (2.0 * traj.dt) + audit.C1 * v2 - c2k;
        const double tol = tol_coeff * traj.dt * std::max(1.0, v2);
        out << fmt(traj.time[i]) << ',' << fmt(sigma) << ',' << fmt(tol) << ','
            << (sigma > tol ? 1 : 0) << '\n';
    }
}

nlohmann::json certificate_to_json(const PotentialCertificate& cert) {
    return {{"c1", cert.c1},
            {"c2", cert.c2},
            {"d1", cert.d1},
            {"d2", cert.d2},
            {"scan", {{"min", cert.scan_lo}, {"max", cert.scan_hi}, {"samples", cert.samples}}},
            {"n_mollify", cert.n_mollify},
            {"nu", cert.nu},
            {"gamma_norm", cert.gamma_norm},
            {"margin", cert.margin}};
}

nlohmann::json stability_to_json(const StabilityReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
        nlohmann::json r = certificate_to_json(row.cert);
        r["n"] = row.n;
        rows.push_back(r);
    }
    return {{"base", certificate_to_json(report.base)},
            {"rows", rows},
            {"n0", report.n0},
            {"drift_beyond_n0", report.drift_beyond_n0},
            {"threshold", report.threshold},
            {"converged", report.converged}};
}

nlohmann::json audit_to_json(const ConstantsAudit& a) {
    nlohmann::json j = {
        {"nu", a.nu},
        {"gamma_norm", a.gamma_norm},
        {"lambda1", a.lambda1},
        {"f_dual_norm", a.f_dual_norm},
        {"gamma0_measure", a.gamma0_measure},
        {"c1", a.c1},
        {"c2", a.c2},
        {"d1", a.d1},
        {"d2", a.d2},
        {"ladyzhenskaya", a.ladyzhenskaya},
        {"g_norm", a.g_norm},
        {"lambda_used", a.lambda_used},
        {"C1", a.C1},
        {"C2", a.C2},
        {"C3", a.C3},
        {"C4", a.C4},
        {"C5", a.C5},
        {"C6", a.C6},
        {"C7", a.C7},
        {"C8", a.C8},
        {"C9", a.C9},
        {"C10", a.C10},
        {"R0", a.R0},
        {"Cabs", a.Cabs},
        {"beta", a.beta},
        {"delta", a.delta},
        {"gronwall_radius", a.gronwall_radius},
    };
    j["formulas"] = a.formulas;
    return j;
}

nlohmann::json attractor_to_json(const AttractorReport& r) {
    return {{"fb_norm", r.fb_norm},
            {"gronwall_radius", r.gronwall_radius},
            {"R0", r.r0},
            {"Cabs", r.cabs},
            {"beta", r.beta},
            {"delta", r.delta},
            {"entry_times", r.entry_times},
            {"cloud_h_radius", r.cloud_h_radius},
            {"cloud_v_radius", r.cloud_v_radius},
            {"inside_fraction", r.inside_fraction},
            {"tol", r.tol},
            {"cloud_size", r.section_cloud.size()},
            {"t_section_after_entry", r.t_section_after_entry}};
}

nlohmann::json error_to_json(const Error& err) {
    return {{"code", to_string(err.code())},
            {"module", err.module_name()},
            {"message", err.message()},
            {"witness", err.witness()}};
}

void write_text(const std::string& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
}

void write_sections_csv(const std::string& path, const AttractorReport& report, int per_member) {
    auto out = open_out(path);
    out << "member,sample,norm_H,norm_V";
    const int n = report.section_cloud.empty() ? 0 : int(report.section_cloud[0].size());
    for (int i = 0; i < n; ++i) out << ",a" << i;
    out << '\n';
    for (std::size_t idx = 0; idx < report.section_cloud.size(); ++idx) {
        out << (per_member > 0 ? idx / per_member : idx) << ','
            << (per_member > 0 ? idx % per_member : 0) << ',' << fmt(report.cloud_norm_h[idx])
            << ',' << fmt(report.cloud_norm_v[idx]);
        for (int i = 0; i < n; ++i) out << ',' << fmt(report.section_cloud[idx][i]);
        out << '\n';
    }
}

void write_norm_plot_svg(const std::string& path, const Trajectory& traj) {
    const int w = 900, h = 420, ml = 60, mb = 40, mt = 16, mr = 16;
    double ymax = 1e-12;
    for (int i = 0; i < traj.samples(); ++i)
        ymax = std::max({ymax, traj.norm_h[i], traj.norm_v[i]});
    const double tmax = std::max(traj.horizon(), traj.dt);
    const auto X = [&](double t) { return ml + (w - ml - mr) * t / tmax; };
    const auto Y = [&](double y) { return h - mb - (h - mb - mt) * y / (1.05 * ymax); };

    auto out = open_out(path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
        << "' stroke='black'/>\n";
    out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
        << "' stroke='black'/>\n";
    const auto polyline = [&](const std::vector<double>& series, const char* color) {
        out << "<polyline fill='none' stroke='" << color << "' stroke-width='1' points='";
        const int stride = std::max(1, traj.samples() / 2000);
        for (int i = 0; i < traj.samples(); i += stride)
            out << X(traj.time[i]) << ',' << Y(series[i]) << ' ';
        out << "'/>\n";
    };
    polyline(traj.norm_h, "#1f77b4");
    polyline(traj.norm_v, "#d62728");
    out << "<text x='" << ml + 10 << "' y='" << mt + 14
        << "' fill='#1f77b4' font-size='13'>|v|_H</text>\n";
    out << "<text x='" << ml + 70 << "' y='" << mt + 14
        << "' fill='#d62728' font-size='13'>|v|_V</text>\n";
    out << "<text x='" << (w / 2) << "' y='" << h - 8 << "' font-size='13'>t (ymax="
        << fmt(ymax) << ")</text>\n";
    out << "</svg>\n";
}

namespace {
constexpr std::uint64_t kCheckpointMagic = 0x53464350ULL;  // "SFCP"
constexpr std::uint64_t kCacheMagic = 0x53464f43ULL;       // "SFOC"
constexpr std::uint64_t kVersion = 1;
}  // namespace

void write_checkpoint(const std::string& path, std::uint64_t config_hash, long step,
                      const Eigen::VectorXd& a) {
    auto out = open_out(path, std::ios::binary);
    put_u64(out, kCheckpointMagic);
    put_u64(out, kVersion);
    put_u64(out, config_hash);
    put_i64(out, step);
    put_vec(out, a);
}

std::optional<Checkpoint> read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::uint64_t magic, version;
    Checkpoint ck;
    std::int64_t step;
    if (!get_u64(in, magic) || magic != kCheckpointMagic) return std::nullopt;
    if (!get_u64(in, version) || version != kVersion) return std::nullopt;
    if (!get_u64(in, ck.config_hash)) return std::nullopt;
    if (!get_i64(in, step)) return std::nullopt;
    ck.step = long(step);
    if (!get_vec(in, ck.a)) return std::nullopt;
    return ck;
}

std::uint64_t operator_cache_key(const DivFreeBasis& basis, double nu, const LiftField& lift) {
    std::uint64_t h = basis.content_hash();
    const auto mix = [&h](double x) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, sizeof(bits));
        h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    };
    mix(nu);
    mix(lift.s);
    mix(lift.lambda);
    mix(lift.alpha);
    mix(lift.t0);
    return h;
}

void save_operator_cache(const std::string& path, const DivFreeBasis& basis,
                         const OperatorSet& ops) {
    auto out = open_out(path, std::ios::binary);
    put_u64(out, kCacheMagic);
    put_u64(out, kVersion);
    put_u64(out, basis.content_hash());
    put_u64(out, operator_cache_key(basis, ops.nu, ops.lift));
    put_mat(out, basis.mass_matrix);
    put_mat(out, basis.stiffness_matrix);
    put_mat(out, basis.rotrot_matrix);
    put_mat(out, basis.boundary_gram);
    put_mat(out, basis.trace_normal);
    put_vec(out, ops.f_vector);
    double fd = ops.f_dual_norm;
    out.write(reinterpret_cast<const char*>(&fd), sizeof(fd));
}

std::optional<OperatorCache> load_operator_cache(const std::string& path,
                                                 std::uint64_t basis_hash, std::uint64_t ops_key) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::uint64_t magic, version, bh, ok;
    if (!get_u64(in, magic) || magic != kCacheMagic) return std::nullopt;
    if (!get_u64(in, version) || version != kVersion) return std::nullopt;
    if (!get_u64(in, bh) || bh != basis_hash) return std::nullopt;
    if (!get_u64(in, ok) || ok != ops_key) return std::nullopt;
    OperatorCache cache;
    if (!get_mat(in, cache.mass) || !get_mat(in, cache.stiffness) || !get_mat(in, cache.rotrot) ||
        !get_mat(in, cache.boundary_gram) || !get_mat(in, cache.trace_normal) ||
        !get_vec(in, cache.f_vector))
        return std::nullopt;
    if (!in.read(reinterpret_cast<char*>(&cache.f_dual_norm), sizeof(double))) return std::nullopt;
    return cache;
}

}  // namespace shearflow
