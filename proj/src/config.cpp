#include "shearflow/config.hpp"

#include <fstream>
#include <set>

#include "shearflow/error.hpp"

namespace shearflow {

namespace {

using nlohmann::json;

/// Wraps one JSON object for strict reading: every accessed key is recorded
/// and leftovers raise UnknownKey with the full path.
class StrictObject {
  public:
    StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw Error(ErrorCode::ConfigType, "cli", "expected an object at " + path_);
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& required(const std::string& key) {
        if (!j_.contains(key))
            throw Error(ErrorCode::MissingBlock, "cli", "missing required key", path_ + "." + key);
        seen_.insert(key);
        return j_.at(key);
    }

    const json* optional(const std::string& key) {
        if (!j_.contains(key)) return nullptr;
        seen_.insert(key);
        return &j_.at(key);
    }

    template <typename T>
    T required_as(const std::string& key) {
        return convert<T>(required(key), path_ + "." + key);
    }

    template <typename T>
    T optional_as(const std::string& key, T fallback) {
        const json* v = optional(key);
        return v ? convert<T>(*v, path_ + "." + key) : fallback;
    }

    void finish() const {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key()))
                throw Error(ErrorCode::UnknownKey, "cli", "unknown configuration key",
                            path_ + "." + item.key());
    }

    const std::string& path() const { return path_; }

  private:
    template <typename T>
    static T convert(const json& v, const std::string& path) {
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number())
                    throw Error(ErrorCode::ConfigType, "cli", "expected a number", path);
            } else if constexpr (std::is_same_v<T, int> || std::is_same_v<T, long> ||
                                 std::is_same_v<T, std::uint64_t>) {
                if (!v.is_number_integer() && !v.is_number_unsigned())
                    throw Error(ErrorCode::ConfigType, "cli", "expected an integer", path);
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean())
                    throw Error(ErrorCode::ConfigType, "cli", "expected a boolean", path);
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string())
                    throw Error(ErrorCode::ConfigType, "cli", "expected a string", path);
            }
            return v.get<T>();
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ConfigType, "cli", e.what(), path);
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<double> number_list(const json& v, const std::string& path) {
    if (!v.is_array()) throw Error(ErrorCode::ConfigType, "cli", "expected an array", path);
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw Error(ErrorCode::ConfigType, "cli", "expected numbers", path);
        out.push_back(x.get<double>());
    }
    return out;
}

HeightProfile parse_height(const json& j, const std::string& path) {
    StrictObject o(j, path);
    const std::string type = o.required_as<std::string>("type");
    HeightProfile h;
    if (type == "constant") {
        h.mean = o.required_as<double>("value");
    } else if (type == "trig") {
        h.mean = o.required_as<double>("mean");
        if (const json* c = o.optional("cos")) h.cos_coeffs = number_list(*c, path + ".cos");
        if (const json* s = o.optional("sin")) h.sin_coeffs = number_list(*s, path + ".sin");
    } else {
        throw Error(ErrorCode::ConfigType, "cli", "height type must be constant or trig",
                    path + ".type");
    }
    o.finish();
    return h;
}

Superpotential parse_potential_spec(StrictObject& o) {
    const std::string name = o.required_as<std::string>("name");
    if (name == "quadratic") return Superpotential::quadratic();
    if (name == "pressure_drop") return Superpotential::pressure_drop();
    if (name == "gaussian_well")
        return Superpotential::gaussian_well(o.required_as<double>("alpha"));
    if (name == "piecewise") {
        const json& bp = o.required("breakpoints");
        const json& pieces = o.required("pieces");
        if (!pieces.is_array() || pieces.empty())
            throw Error(ErrorCode::ConfigType, "cli", "pieces must be a nonempty array",
                        o.path() + ".pieces");
        std::vector<PotentialPiece> ps;
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            StrictObject po(pieces[i], o.path() + ".pieces[" + std::to_string(i) + "]");
            PotentialPiece piece;
            piece.poly = number_list(po.required("poly"), po.path() + ".poly");
            piece.gauss_amp = po.optional_as<double>("gauss_amp", 0.0);
            po.finish();
            ps.push_back(std::move(piece));
        }
        return Superpotential::piecewise(number_list(bp, o.path() + ".breakpoints"), std::move(ps),
                                         "piecewise");
    }
    throw Error(ErrorCode::ConfigType, "cli",
                "potential name must be quadratic, pressure_drop, gaussian_well or piecewise",
                o.path() + ".name");
}

InitialCondition parse_v0(const json& j, const std::string& path, std::uint64_t seed) {
    StrictObject o(j, path);
    const std::string type = o.required_as<std::string>("type");
    InitialCondition ic;
    if (type == "zero") {
        ic = InitialCondition::zero();
    } else if (type == "random_H_ball") {
        ic = InitialCondition::random_h_ball(o.required_as<double>("radius"), seed, 0,
                                             o.optional_as<double>("decay", 2.0));
    } else if (type == "eigenmode") {
        ic = InitialCondition::eigenmode(o.required_as<int>("mode"),
                                         o.optional_as<double>("amp", 1.0));
    } else {
        throw Error(ErrorCode::ConfigType, "cli",
                    "v0 type must be zero, random_H_ball or eigenmode", path + ".type");
    }
    o.finish();
    ic.seed = seed;
    return ic;
}

void check_positive(double v, const std::string& path) {
    if (!(v > 0.0)) throw Error(ErrorCode::ConfigType, "cli", "value must be positive", path);
}

}  // namespace

RunConfig parse_config_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigType, "cli", "config root must be an object");
    StrictObject root(j, "config");
    RunConfig cfg;

    {
        StrictObject g(root.required("geometry"), "geometry");
        cfg.L = g.required_as<double>("L");
        check_positive(cfg.L, "geometry.L");
        cfg.h = parse_height(g.required("h"), "geometry.h");
        if (const json* q = g.optional("quadrature")) {
            StrictObject qo(*q, "geometry.quadrature");
            cfg.quadrature.nx1 = qo.optional_as<int>("nx1", 0);
            cfg.quadrature.nx2 = qo.optional_as<int>("nx2", 0);
            qo.finish();
        }
        g.finish();
    }
    {
        StrictObject b(root.required("basis"), "basis");
        cfg.K = b.required_as<int>("K");
        cfg.M = b.required_as<int>("M");
        if (cfg.K < 0) throw Error(ErrorCode::ConfigType, "cli", "K must be >= 0", "basis.K");
        if (cfg.M < 1) throw Error(ErrorCode::ConfigType, "cli", "M must be >= 1", "basis.M");
        b.finish();
    }
    {
        StrictObject p(root.required("physics"), "physics");
        cfg.nu = p.required_as<double>("nu");
        check_positive(cfg.nu, "physics.nu");
        cfg.s = p.required_as<double>("s");
        cfg.lambda = p.required_as<double>("lambda");
        check_positive(cfg.lambda, "physics.lambda");
        cfg.lift_alpha = p.optional_as<double>("lift_alpha", 1.0);
        p.finish();
    }
    {
        StrictObject p(root.required("potential"), "potential");
        cfg.potential = parse_potential_spec(p);
        cfg.n_mollify = p.optional_as<int>("n_mollify", 32);
        if (cfg.n_mollify < 1)
            throw Error(ErrorCode::ConfigType, "cli", "n_mollify must be >= 1",
                        "potential.n_mollify");
        if (const json* s = p.optional("scan")) {
            StrictObject so(*s, "potential.scan");
            cfg.scan.lo = so.optional_as<double>("min", -50.0);
            cfg.scan.hi = so.optional_as<double>("max", 50.0);
            cfg.scan.samples = so.optional_as<int>("samples", 2001);
            so.finish();
            if (!(cfg.scan.lo < cfg.scan.hi) || cfg.scan.samples < 16)
                throw Error(ErrorCode::ConfigType, "cli", "bad scan range", "potential.scan");
        }
        cfg.margin = p.optional_as<double>("margin", 0.9);
        p.finish();
    }
    {
        StrictObject i(root.required("integration"), "integration");
        cfg.dt = i.required_as<double>("dt");
        check_positive(cfg.dt, "integration.dt");
        cfg.t_end = i.required_as<double>("t_end");
        check_positive(cfg.t_end, "integration.t_end");
        cfg.seed = i.optional_as<std::uint64_t>("seed", 1);
        cfg.v0 = parse_v0(i.required("v0"), "integration.v0", cfg.seed);
        cfg.checkpoint_every = i.optional_as<long>("checkpoint_every", 0);
        cfg.convection = i.optional_as<bool>("convection", true);
        cfg.boundary_law = i.optional_as<bool>("boundary_law", true);
        cfg.sample_stride = i.optional_as<int>("sample_stride", 1);
        cfg.energy_tol_coeff = i.optional_as<double>("energy_tol_coeff", 10.0);
        cfg.blowup_factor = i.optional_as<double>("blowup_factor", 1e6);
        i.finish();
    }
    if (const json* a = root.optional("attractor")) {
        StrictObject ao(*a, "attractor");
        cfg.window_stride = ao.optional_as<double>("window_stride", 0.0);
        cfg.ensemble = ao.optional_as<int>("ensemble", 8);
        cfg.t_section = ao.optional_as<double>("t_section", 8.0);
        cfg.section_delta = ao.optional_as<double>("section_delta", 0.1);
        cfg.section_samples = ao.optional_as<int>("section_samples", 4);
        cfg.entry_kappa = ao.optional_as<double>("entry_kappa", cfg.entry_kappa);
        cfg.cloud_tol = ao.optional_as<double>("cloud_tol", 1e-2);
        ao.finish();
    }
    if (const json* o = root.optional("output")) {
        StrictObject oo(*o, "output");
        cfg.out_dir = oo.optional_as<std::string>("dir", ".");
        cfg.write_csv = oo.optional_as<bool>("csv", true);
        cfg.write_json = oo.optional_as<bool>("json", true);
        cfg.plots = oo.optional_as<bool>("plots", false);
        cfg.cache = oo.optional_as<bool>("cache", false);
        oo.finish();
    }
    root.finish();
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cli", "cannot open config file", path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, true);  // with comments
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ConfigType, "cli", e.what(), path);
    }
    return parse_config_json(j);
}

nlohmann::json RunConfig::resolved() const {
    nlohmann::json j;
    nlohmann::json hj;
    if (h.is_constant()) {
        hj = {{"type", "constant"}, {"value", h.mean}};
    } else {
        hj = {{"type", "trig"}, {"mean", h.mean}, {"cos", h.cos_coeffs}, {"sin", h.sin_coeffs}};
    }
    j["geometry"] = {{"L", L}, {"h", hj},
                     {"quadrature", {{"nx1", quadrature.nx1}, {"nx2", quadrature.nx2}}}};
    j["basis"] = {{"K", K}, {"M", M}};
    j["physics"] = {{"nu", nu}, {"s", s}, {"lambda", lambda}, {"lift_alpha", lift_alpha}};

    nlohmann::json pj;
    if (potential.name == "gaussian_well") {
        pj = {{"name", "gaussian_well"}, {"alpha", potential.pieces.at(0).gauss_amp}};
    } else if (potential.name == "quadratic" || potential.name == "pressure_drop") {
        pj = {{"name", potential.name}};
    } else {
        nlohmann::json pieces = nlohmann::json::array();
        for (const auto& p : potential.pieces)
            pieces.push_back({{"poly", p.poly}, {"gauss_amp", p.gauss_amp}});
        pj = {{"name", "piecewise"}, {"breakpoints", potential.breakpoints}, {"pieces", pieces}};
    }
    pj["n_mollify"] = n_mollify;
    pj["scan"] = {{"min", scan.lo}, {"max", scan.hi}, {"samples", scan.samples}};
    pj["margin"] = margin;
    j["potential"] = pj;

    nlohmann::json v0j;
    switch (v0.kind) {
        case InitialCondition::Kind::Zero: v0j = {{"type", "zero"}}; break;
        case InitialCondition::Kind::RandomHBall:
            v0j = {{"type", "random_H_ball"}, {"radius", v0.radius}, {"decay", v0.spectrum_decay}};
            break;
        case InitialCondition::Kind::Eigenmode:
            v0j = {{"type", "eigenmode"}, {"mode", v0.mode}, {"amp", v0.amp}};
            break;
    }
    j["integration"] = {{"dt", dt},
                        {"t_end", t_end},
                        {"seed", seed},
                        {"v0", v0j},
                        {"checkpoint_every", checkpoint_every},
                        {"convection", convection},
                        {"boundary_law", boundary_law},
                        {"sample_stride", sample_stride},
                        {"energy_tol_coeff", energy_tol_coeff},
                        {"blowup_factor", blowup_factor}};
    j["attractor"] = {{"window_stride", window_stride}, {"ensemble", ensemble},
                      {"t_section", t_section},         {"section_delta", section_delta},
                      {"section_samples", section_samples}, {"entry_kappa", entry_kappa},
                      {"cloud_tol", cloud_tol}};
    j["output"] = {{"dir", out_dir}, {"csv", write_csv}, {"json", write_json},
                   {"plots", plots}, {"cache", cache}};
    return j;
}

std::uint64_t RunConfig::content_hash() const {
    const std::string text = resolved().dump();
    std::uint64_t h64 = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h64 ^= c;
        h64 *= 0x100000001b3ULL;
    }
    return h64;
}

FlowParameters RunConfig::flow_parameters() const {
    FlowParameters p;
    p.nu = nu;
    p.s = s;
    p.lambda = lambda;
    p.potential = potential;
    p.n_mollify = n_mollify;
    p.scan = scan;
    p.dt = dt;
    p.t_end = t_end;
    p.v0 = v0;
    p.convection_enabled = convection;
    p.boundary_enabled = boundary_law;
    p.sample_stride = sample_stride;
    p.checkpoint_every = checkpoint_every;
    p.blowup_factor = blowup_factor;
    p.energy_tol_coeff = energy_tol_coeff;
    return p;
}

}  // namespace shearflow
