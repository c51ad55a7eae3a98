#include "obskit/app/config.hpp"

#include <cmath>
#include <fstream>

#include "obskit/errors.hpp"

namespace obskit::app {

namespace {

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
    if (!doc.is_object() || !doc.contains(key) || doc.at(key).is_null()) return fallback;
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

Point2 parse_point(const json& v) {
    if (!v.is_array() || v.size() != 2) throw ConfigError("points must be [x, y] pairs");
    return Point2(v[0].get<double>(), v[1].get<double>());
}

Matrix parse_matrix(const json& v, const char* what) {
    if (!v.is_array() || v.empty()) throw ConfigError(std::string(what) + " must be a nonempty array of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    const auto cols = static_cast<Eigen::Index>(v[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = v[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw DimensionError(std::string(what) + " rows must have equal length");
        }
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
    return m;
}

std::vector<ModeShapePtr> load_grid_modes(const fs::path& path) {
    const json doc = read_json_file(path);
    const auto xs = doc.at("x").get<std::vector<double>>();
    const auto ys = doc.at("y").get<std::vector<double>>();
    std::vector<ModeShapePtr> modes;
    for (const auto& m : doc.at("modes")) modes.push_back(std::make_shared<GridMode>(xs, ys, parse_matrix(m, "mode grid")));
    return modes;
}

}  // namespace

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("invalid JSON in '" + path.string() + "': " + e.what());
    }
}

std::vector<Polyline> parse_polylines(const json& doc) {
    if (!doc.is_array()) throw ConfigError("vein file must be a JSON list of polylines");
    std::vector<Polyline> out;
    for (const auto& line : doc) {
        if (!line.is_array()) throw ConfigError("each vein must be a list of [x, y] points");
        Polyline p;
        for (const auto& v : line) p.push_back(parse_point(v));
        out.push_back(std::move(p));
    }
    return out;
}

WingModel load_wing_model(const json& doc, const fs::path& base_dir) {
    try {
        AssumedModeSettings s;
        const json material = doc.value("material", json::object());
        s.areal_density = get_or(material, "areal_density", s.areal_density);
        s.youngs_modulus = get_or(material, "youngs_modulus", s.youngs_modulus);
        s.shear_modulus = get_or(material, "shear_modulus", s.shear_modulus);
        s.poisson = get_or(material, "poisson", s.poisson);
        s.thickness = get_or(doc, "thickness", s.thickness);
        s.x_r = get_or(doc, "x_r", s.x_r);
        s.quadrature_cells = get_or(doc, "quadrature_cells", s.quadrature_cells);

        Polygon planform = default_planform();
        if (doc.contains("planform")) {
            planform.vertices.clear();
            for (const auto& v : doc.at("planform")) planform.vertices.push_back(parse_point(v));
        }

        const std::string modes = get_or<std::string>(doc, "modes", "builtin:n2");
        WingModel model;
        if (modes == "builtin:n2" || modes == "builtin:n3") {
            s.n_m = modes.back() - '0';
            if (doc.contains("n_m") && doc.at("n_m").get<int>() != s.n_m) {
                throw ConfigError("n_m disagrees with the built-in mode set");
            }
            model = build_assumed_mode_model(planform, s);
        } else if (modes.rfind("file:", 0) == 0) {
            model.modes = load_grid_modes(base_dir / modes.substr(5));
            model.n_m = static_cast<int>(model.modes.size());
            model.planform = planform;
            model.x_r = s.x_r;
            model.thickness = s.thickness;
            if (!doc.contains("Omega_diag")) throw ConfigError("file modes need Omega_diag");
            model.Ma = applied_acceleration_matrix(planform, model.modes, s.areal_density, s.quadrature_cells);
        } else {
            throw ConfigError("unknown mode source '" + modes + "'");
        }
        if (doc.contains("n_m") && doc.at("n_m").get<int>() != model.n_m) {
            throw DimensionError("n_m does not match the number of modes");
        }
        if (doc.contains("Omega_diag")) {
            const auto v = doc.at("Omega_diag").get<std::vector<double>>();
            model.omega_diag = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
        if (doc.contains("Ma")) model.Ma = parse_matrix(doc.at("Ma"), "Ma");
        model.validate();
        return model;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid model document: ") + e.what());
    }
}

EncoderParams parse_encoder(const json& doc) {
    EncoderParams p;
    p.a = get_or(doc, "a", p.a);
    p.b = get_or(doc, "b", p.b);
    p.omega_sta = get_or(doc, "omega_sta", p.omega_sta);
    p.N = get_or(doc, "N", p.N);
    p.C_xi = get_or(doc, "C_xi", p.C_xi);
    p.c = get_or(doc, "c", p.c);
    p.d = get_or(doc, "d", p.d);
    p.validate();
    return p;
}

StrokeParams parse_stroke(const json& doc) {
    constexpr double deg = EIGEN_PI / 180.0;
    StrokeParams p;
    p.A_psi = get_or(doc, "A_psi", p.A_psi);
    p.A_alpha = get_or(doc, "A_alpha", p.A_alpha);
    if (doc.contains("A_psi_deg")) p.A_psi = doc.at("A_psi_deg").get<double>() * deg;
    if (doc.contains("A_alpha_deg")) p.A_alpha = doc.at("A_alpha_deg").get<double>() * deg;
    p.T_beat = get_or(doc, "T_beat", p.T_beat);
    p.validate();
    return p;
}

std::vector<double> default_c_values() {
    std::vector<double> v;
    for (int c = 1; c <= 29; c += 2) v.push_back(c);
    v.insert(v.begin() + 5, 10.0);  // the experimentally derived slope
    return v;
}

std::vector<double> default_d_values() {
    std::vector<double> v;
    for (int k = -5; k <= 5; ++k) v.push_back(k / 5.0);
    v.insert(v.begin() + 8, 0.5);  // the experimentally derived threshold
    return v;
}

RunConfig parse_run_config(const json& doc, const fs::path& base_dir, const CliOverrides& o) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig cfg;
    cfg.base_dir = base_dir;
    try {
        if (doc.contains("model") && doc.at("model").is_string()) {
            const fs::path path = base_dir / doc.at("model").get<std::string>();
            cfg.model = load_wing_model(read_json_file(path), path.parent_path());
        } else {
            cfg.model = load_wing_model(doc.value("model", json::object()), base_dir);
        }
        cfg.encoder = parse_encoder(doc.value("encoder", json::object()));
        cfg.stroke = parse_stroke(doc.value("kinematics", json::object()));
        cfg.periodic_start = get_or(doc.value("kinematics", json::object()), "periodic_start", true);

        const json grid = doc.value("grid", json::object());
        cfg.grid.nx = get_or(grid, "nx", cfg.grid.nx);
        cfg.grid.ny = get_or(grid, "ny", cfg.grid.ny);
        if (o.full) {
            cfg.grid.nx = get_or(grid, "full_nx", 21);
            cfg.grid.ny = get_or(grid, "full_ny", 51);
        }

        const json gram = doc.value("gramian", json::object());
        cfg.gramian.epsilon = get_or(gram, "epsilon", cfg.gramian.epsilon);
        if (gram.contains("perturb")) {
            const json& p = gram.at("perturb");
            if (p.is_string()) {
                if (p.get<std::string>() != "rates") throw ConfigError("perturb must be \"rates\" or an index list");
            } else {
                cfg.gramian.perturb = p.get<std::vector<int>>();
            }
        }

        const json place = doc.value("placement", json::object());
        cfg.placement.r = get_or(place, "r", cfg.placement.r);
        cfg.placement.w_nu = get_or(place, "w_nu", cfg.placement.w_nu);
        cfg.placement.seed = get_or<std::uint64_t>(place, "seed", cfg.placement.seed);
        cfg.placement.spacing = get_or(place, "spacing", cfg.placement.spacing);
        cfg.placement.iterations = get_or(place, "iterations", cfg.placement.iterations);
        cfg.placement.restarts = get_or(place, "restarts", cfg.placement.restarts);
        if (place.contains("veins")) cfg.placement.veins = base_dir / place.at("veins").get<std::string>();
        if (o.seed) cfg.placement.seed = *o.seed;

        if (doc.contains("probes")) {
            for (const auto& p : doc.at("probes")) cfg.probes.push_back(parse_point(p));
        } else {
            cfg.probes = {Point2(0.008, 0.010), Point2(0.010, 0.040)};
        }

        const json sweep = doc.value("nla_sweep", json::object());
        cfg.nla_sweep.kind = parse_strain_kind(get_or<std::string>(sweep, "kind", "bending"));
        cfg.nla_sweep.c_values = get_or(sweep, "c_values", default_c_values());
        cfg.nla_sweep.d_values = get_or(sweep, "d_values", default_d_values());

        const json lie = doc.value("lie_check", json::object());
        cfg.lie_check.system = get_or<std::string>(lie, "system", cfg.lie_check.system);
        cfg.lie_check.state = get_or(lie, "state", std::vector<double>{});
        cfg.lie_check.kind = parse_strain_kind(get_or<std::string>(lie, "kind", "bending"));
        if (lie.contains("probe")) cfg.lie_check.probe = parse_point(lie.at("probe"));

        if (doc.contains("linear_delay")) {
            const json& ld = doc.at("linear_delay");
            cfg.linear_delay = ld.is_string() ? read_json_file(base_dir / ld.get<std::string>()) : ld;
        }

        cfg.output_dir = o.out ? *o.out : base_dir / get_or<std::string>(doc, "output_dir", "out");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const fs::path& path, const CliOverrides& overrides) {
    const json doc = read_json_file(path);
    fs::path base = path.parent_path();
    if (base.empty()) base = ".";
    return parse_run_config(doc, base, overrides);
}

}  // namespace obskit::app
