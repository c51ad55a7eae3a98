#include "obskit/app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "obskit/app/io.hpp"
#include "obskit/app/svg.hpp"
#include "obskit/errors.hpp"
#include "obskit/lie_composite.hpp"
#include "obskit/linear_delay.hpp"

namespace obskit::app {

namespace {

json point_json(const Point2& p) { return json::array({p.x(), p.y()}); }

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number_or_null(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

Matrix parse_matrix(const json& v, const char* what) {
    if (!v.is_array() || v.empty() || !v[0].is_array()) {
        throw ConfigError(std::string(what) + " must be a nonempty list of rows");
    }
    Matrix m(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v[0].size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i].size() != v[0].size()) throw DimensionError(std::string(what) + " rows differ in length");
        for (std::size_t j = 0; j < v[i].size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i][j].get<double>();
        }
    }
    return m;
}

void require_inside(const Polygon& planform, const Point2& p, const char* what) {
    if (!planform.contains(p)) {
        throw GeometryError(std::string(what) + " (" + format_double(p.x()) + ", " + format_double(p.y()) +
                            ") lies outside the planform");
    }
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

CommandOutput write_outputs(const RunConfig& cfg, const std::vector<std::pair<std::string, std::string>>& files,
                            json summary) {
    CommandOutput out;
    out.summary = std::move(summary);
    for (const auto& [name, text] : files) {
        const fs::path path = cfg.output_dir / name;
        write_text_file(path, text);
        out.files.push_back(path);
    }
    return out;
}

}  // namespace

WingSensingConfig sensing_config(const RunConfig& cfg) {
    WingSensingConfig s;
    s.encoder = cfg.encoder;
    s.epsilon = cfg.gramian.epsilon;
    s.perturb_indices = cfg.gramian.perturb;
    s.periodic_start = cfg.periodic_start;
    return s;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw InputError("correlation needs two equal-length series");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

// ---------------------------------------------------------------- grid

GridSweep gramian_grid(const WingSensitivity& sens, const RunConfig& cfg, StrainKind kind) {
    const Polygon& planform = sens.model().planform;
    GridSweep sweep;
    sweep.kind = kind;
    sweep.stations = grid_sites(planform, cfg.grid.nx, cfg.grid.ny);
    const Point2 extent = planform.max_corner() - planform.min_corner();
    sweep.cell_x = extent.x() / cfg.grid.nx;
    sweep.cell_y = extent.y() / cfg.grid.ny;
    sweep.results.resize(sweep.stations.size());
    parallel_for(sweep.stations.size(), [&](std::size_t i) {
        sweep.results[i] = sens.site_gramian(sweep.stations[i], kind);
    });
    return sweep;
}

json grid_summary(const GridSweep& sweep, const Polygon& planform) {
    const std::size_t n = sweep.results.size();
    const Eigen::Index dim = sweep.results.front().W.rows();
    Vector mean_eig = Vector::Zero(dim);
    Vector mean_diag = Vector::Zero(dim);
    double mean_kappa = 0.0, mean_det_root = 0.0;
    std::size_t finite_kappa = 0, best = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const GramianResult& g = sweep.results[i];
        mean_eig += g.eigenvalues;
        mean_diag += g.W.diagonal();
        mean_det_root += g.metrics.det_root;
        if (std::isfinite(g.metrics.kappa)) {
            mean_kappa += g.metrics.kappa;
            ++finite_kappa;
        }
        if (g.metrics.lambda_min > sweep.results[best].metrics.lambda_min) best = i;
    }
    mean_eig /= static_cast<double>(n);
    mean_diag /= static_cast<double>(n);
    const double y0 = planform.min_corner().y();
    const double span = planform.max_corner().y() - y0;
    json eig = json::array(), diag = json::array();
    for (Eigen::Index k = 0; k < dim; ++k) {
        eig.push_back(mean_eig(k));
        diag.push_back(mean_diag(k));
    }
    return json{{"kind", to_string(sweep.kind)},
                {"stations", n},
                {"mean_eigenvalues", eig},
                {"mean_axis_diagonal", diag},
                {"mean_kappa", finite_kappa ? number_or_null(mean_kappa / static_cast<double>(finite_kappa))
                                            : json(nullptr)},
                {"singular_stations", n - finite_kappa},
                {"mean_det_root", mean_det_root / static_cast<double>(n)},
                {"argmax_lambda_min", point_json(sweep.stations[best])},
                {"argmax_span_fraction", (sweep.stations[best].y() - y0) / span}};
}

CommandOutput cmd_gramian_grid(const RunConfig& cfg) {
    const WingSensitivity sens(cfg.model, cfg.stroke, sensing_config(cfg));
    std::vector<std::pair<std::string, std::string>> files;
    json summary = json::object();
    for (StrainKind kind : {StrainKind::bending, StrainKind::shear}) {
        const GridSweep sweep = gramian_grid(sens, cfg, kind);
        const auto dim = static_cast<int>(sweep.results.front().W.rows());
        std::vector<std::string> cols = {"x", "y"};
        for (int k = 0; k < dim; ++k) cols.push_back("eig" + std::to_string(k));
        for (int k = 0; k < dim; ++k) cols.push_back("w" + std::to_string(k) + std::to_string(k));
        for (const char* c : {"lambda_min", "nu", "kappa", "det_root"}) cols.push_back(c);
        CsvWriter csv("gramian-grid", cols);
        std::vector<double> lambda_min;
        for (std::size_t i = 0; i < sweep.stations.size(); ++i) {
            const GramianResult& g = sweep.results[i];
            std::vector<double> row = {sweep.stations[i].x(), sweep.stations[i].y()};
            for (int k = 0; k < dim; ++k) row.push_back(g.eigenvalues(k));
            for (int k = 0; k < dim; ++k) row.push_back(g.W(k, k));
            row.insert(row.end(), {g.metrics.lambda_min, g.metrics.nu, g.metrics.kappa, g.metrics.det_root});
            csv.add_row(row);
            lambda_min.push_back(g.metrics.lambda_min);
        }
        const std::string name = to_string(kind);
        files.emplace_back("gramian_grid_" + name + ".csv", csv.str());
        files.emplace_back("heatmap_" + name + ".svg",
                           heatmap_svg(cfg.model.planform, sweep.stations, lambda_min, sweep.cell_x, sweep.cell_y,
                                       "normalized observability index, " + name + " strain"));
        summary[name] = grid_summary(sweep, cfg.model.planform);
    }
    files.emplace_back("gramian_grid_summary.json", json_text(summary));
    return write_outputs(cfg, files, summary);
}

// ---------------------------------------------------------------- simulate

CommandOutput cmd_simulate(const RunConfig& cfg) {
    const WingModel& m = cfg.model;
    for (const auto& p : cfg.probes) require_inside(m.planform, p, "probe");
    const WingSensingConfig sc = sensing_config(cfg);
    const double step = default_wing_step(cfg.stroke);
    const Vector x0 = wing_start_state(m, cfg.stroke, sc);
    const WingTrajectory tr = simulate_wing(m, cfg.stroke, x0, 0.0, 2.0 * cfg.stroke.T_beat, step);
    const auto samples = static_cast<std::size_t>(tr.states.rows());

    std::vector<std::string> cols = {"t"};
    for (int i = 0; i < m.n_m; ++i) cols.push_back("eta" + std::to_string(i + 1));
    for (int i = 0; i < m.n_m; ++i) cols.push_back("eta_dot" + std::to_string(i + 1));
    for (const char* c : {"P", "Q", "R", "psi", "theta", "alpha"}) cols.push_back(c);
    CsvWriter traj("simulate", cols);
    for (std::size_t k = 0; k < samples; ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        std::vector<double> v = {tr.t[k]};
        for (Eigen::Index j = 0; j < tr.states.cols(); ++j) v.push_back(tr.states(row, j));
        for (Eigen::Index j = 0; j < 3; ++j) v.push_back(tr.kinematics(row, j));
        traj.add_row(v);
    }

    std::vector<std::string> scols = {"t"};
    std::vector<std::vector<double>> strain;
    for (std::size_t p = 0; p < cfg.probes.size(); ++p) {
        for (StrainKind kind : {StrainKind::bending, StrainKind::shear}) {
            scols.push_back(to_string(kind) + "_" + std::to_string(p));
            const Eigen::RowVectorXd c = strain_coefficients(cfg.probes[p].x(), cfg.probes[p].y(), m, kind);
            std::vector<double> series(samples);
            for (std::size_t k = 0; k < samples; ++k) {
                series[k] = c.dot(tr.states.row(static_cast<Eigen::Index>(k)).head(m.n_m));
            }
            strain.push_back(std::move(series));
        }
    }
    CsvWriter scsv("simulate-strain", scols);
    for (std::size_t k = 0; k < samples; ++k) {
        std::vector<double> v = {tr.t[k]};
        for (const auto& s : strain) v.push_back(s[k]);
        scsv.add_row(v);
    }

    std::vector<std::vector<double>> fire;
    for (const auto& s : strain) fire.push_back(encode(s, step, cfg.encoder));
    CsvWriter pcsv("simulate-pfire", scols);
    const std::size_t skipped = static_cast<std::size_t>(window_steps(step, cfg.encoder));
    for (std::size_t k = skipped; k < samples; ++k) {
        std::vector<double> v = {tr.t[k]};
        for (const auto& f : fire) v.push_back(f[k - skipped]);
        pcsv.add_row(v);
    }

    json summary = {{"samples", samples}, {"step", step}, {"probes", cfg.probes.size()}};
    return write_outputs(cfg, {{"trajectory.csv", traj.str()}, {"strain.csv", scsv.str()}, {"pfire.csv", pcsv.str()}},
                         summary);
}

// ---------------------------------------------------------------- nla sweep

NlaSweep nla_sweep(const WingSensitivity& sens, const RunConfig& cfg) {
    const std::vector<Point2> stations = grid_sites(sens.model().planform, cfg.grid.nx, cfg.grid.ny);
    std::vector<Eigen::RowVectorXd> coeffs;
    for (const auto& p : stations) coeffs.push_back(strain_coefficients(p.x(), p.y(), sens.model(), cfg.nla_sweep.kind));

    NlaSweep out;
    double xi_sum = 0.0;
    std::size_t xi_count = 0;
    for (const auto& c : coeffs) {
        const Vector xi = sens.nominal_xi(c);
        xi_sum += xi.sum();
        xi_count += static_cast<std::size_t>(xi.size());
    }
    out.mean_xi = xi_sum / static_cast<double>(xi_count);

    for (double c : cfg.nla_sweep.c_values) {
        for (double d : cfg.nla_sweep.d_values) out.rows.push_back(NlaSweepRow{c, d, 0.0, 0.0});
    }
    parallel_for(out.rows.size(), [&](std::size_t i) {
        EncoderParams enc = cfg.encoder;
        enc.c = out.rows[i].c;
        enc.d = out.rows[i].d;
        double total = 0.0;
        for (const auto& c : coeffs) total += sens.site_gramian(c, enc).metrics.det_root;
        out.rows[i].mean_det_root = total / static_cast<double>(coeffs.size());
        const double slope = nla_derivative(out.mean_xi, enc);
        out.rows[i].slope_sq = slope * slope;
    });
    std::vector<double> a, b;
    for (const auto& r : out.rows) {
        a.push_back(r.mean_det_root);
        b.push_back(r.slope_sq);
    }
    out.correlation = out.rows.size() >= 2 ? pearson(a, b) : 0.0;
    return out;
}

CommandOutput cmd_nla_sweep(const RunConfig& cfg) {
    if (cfg.nla_sweep.c_values.empty() || cfg.nla_sweep.d_values.empty()) {
        throw ConfigError("NLA sweep needs at least one c and one d value");
    }
    const WingSensitivity sens(cfg.model, cfg.stroke, sensing_config(cfg));
    const NlaSweep sweep = nla_sweep(sens, cfg);
    CsvWriter csv("nla-sweep", {"c", "d", "mean_det_root", "nla_slope_sq"});
    for (const auto& r : sweep.rows) csv.add_row({r.c, r.d, r.mean_det_root, r.slope_sq});

    // For each c, the d with the largest mean det_root.
    json peaks = json::array();
    for (double c : cfg.nla_sweep.c_values) {
        const NlaSweepRow* best = nullptr;
        for (const auto& r : sweep.rows) {
            if (r.c == c && (!best || r.mean_det_root > best->mean_det_root)) best = &r;
        }
        peaks.push_back(json{{"c", c}, {"d_at_max", best->d}});
    }
    json summary = {{"kind", to_string(cfg.nla_sweep.kind)},
                    {"combinations", sweep.rows.size()},
                    {"mean_xi", sweep.mean_xi},
                    {"correlation", sweep.correlation},
                    {"peaks", peaks}};
    return write_outputs(cfg, {{"nla_sweep.csv", csv.str()}, {"nla_sweep.json", json_text(summary)}}, summary);
}

// ---------------------------------------------------------------- placement

PlacementRun run_placement(const WingSensitivity& sens, const RunConfig& cfg) {
    if (cfg.placement.veins.empty()) throw ConfigError("placement needs a vein file");
    PlacementRun run;
    run.veins = parse_polylines(read_json_file(cfg.placement.veins));
    const std::vector<Point2> points = vein_sites(run.veins, cfg.placement.spacing);
    for (const auto& p : points) require_inside(sens.model().planform, p, "vein site");

    for (StrainKind kind : {StrainKind::bending, StrainKind::shear}) {
        for (const auto& p : points) run.problem.sites.push_back(SensorSite{p, kind, {}});
    }
    parallel_for(run.problem.sites.size(), [&](std::size_t i) {
        SensorSite& s = run.problem.sites[i];
        s.gramian = sens.site_gramian(s.position, s.kind);
    });
    run.problem.r = cfg.placement.r;
    run.problem.w_nu = cfg.placement.w_nu;

    PlacementOptions opt;
    opt.seed = cfg.placement.seed;
    opt.iterations = cfg.placement.iterations;
    opt.restarts = cfg.placement.restarts;
    run.result = optimize_placement(run.problem, opt);
    return run;
}

CommandOutput cmd_place(const RunConfig& cfg) {
    const WingSensitivity sens(cfg.model, cfg.stroke, sensing_config(cfg));
    const PlacementRun run = run_placement(sens, cfg);
    json beta = json::array();
    for (Eigen::Index i = 0; i < run.result.beta.size(); ++i) beta.push_back(run.result.beta(i));
    json selected = json::array();
    for (int i : run.result.selected) {
        const SensorSite& s = run.problem.sites[static_cast<std::size_t>(i)];
        selected.push_back(json{{"x", s.position.x()}, {"y", s.position.y()}, {"kind", to_string(s.kind)}, {"index", i}});
    }
    json doc = {{"beta", beta},
                {"selected", selected},
                {"objective", number_or_null(run.result.objective)},
                {"selected_objective", number_or_null(run.result.selected_objective)},
                {"iterations", run.result.iterations},
                {"sites", run.problem.sites.size()},
                {"r", run.problem.r},
                {"w_nu", run.problem.w_nu},
                {"seed", cfg.placement.seed}};
    json summary = {{"sites", run.problem.sites.size()},
                    {"selected", run.result.selected.size()},
                    {"objective", number_or_null(run.result.objective)},
                    {"selected_objective", number_or_null(run.result.selected_objective)}};
    return write_outputs(cfg,
                         {{"placement.json", json_text(doc)},
                          {"placement.svg", placement_svg(cfg.model.planform, run.veins, run.problem.sites,
                                                          run.result.selected, "selected sensors")}},
                         summary);
}

// ---------------------------------------------------------------- lie check

CommandOutput cmd_lie_check(const RunConfig& cfg) {
    const LieCheckSpec& spec = cfg.lie_check;
    SmoothSystem sys;
    Vector x;
    json extra = json::object();
    if (spec.system == "double-integrator-tanh") {
        sys.n = 2;
        sys.f0 = [](const Vector& s) { return Vector((Vector(2) << s(1), 0.0).finished()); };
        sys.h = [](const Vector& s) { return s(0); };
        sys.g = outer::tanh();
        x = spec.state.empty() ? Vector((Vector(2) << 0.3, -0.2).finished())
                               : Eigen::Map<const Vector>(spec.state.data(), static_cast<Eigen::Index>(spec.state.size()));
        if (x.size() != 2) throw DimensionError("double-integrator-tanh takes a 2-element state");
        const double sech = 1.0 / std::cosh(x(0));
        extra["sech4_x1"] = std::pow(sech, 4);
    } else if (spec.system == "wing-autonomous") {
        const WingModel& m = cfg.model;
        require_inside(m.planform, spec.probe, "lie-check probe");
        sys.n = m.state_dim();
        sys.f0 = [m](const Vector& s) { return wing_rhs(s, Eigen::Vector3d::Zero(), m); };
        const Eigen::RowVectorXd c = strain_coefficients(spec.probe.x(), spec.probe.y(), m, spec.kind);
        sys.h = [c, n = m.n_m](const Vector& s) { return c.dot(s.head(n)); };
        sys.g = outer::logistic(cfg.encoder.c, cfg.encoder.d);
        // Flow samples must resolve the fastest structural mode.
        sys.lie.time_step = 0.05 / std::sqrt(std::max(1.0, m.omega_diag.maxCoeff()));
        if (spec.state.empty()) {
            x = rest_initial_state(m, cfg.stroke);
            for (int i = 0; i < m.n_m; ++i) x(i) = 1e-3 * (i + 1);
        } else {
            x = Eigen::Map<const Vector>(spec.state.data(), static_cast<Eigen::Index>(spec.state.size()));
            if (x.size() != sys.n) throw DimensionError("wing-autonomous state has the wrong dimension");
        }
        extra["probe"] = point_json(spec.probe);
        extra["kind"] = to_string(spec.kind);
    } else {
        throw ConfigError("unknown lie-check system '" + spec.system + "'");
    }
    const CompositeObservability r = observability_matrices(sys, x);
    json state = json::array();
    for (Eigen::Index i = 0; i < x.size(); ++i) state.push_back(x(i));
    json summary = {{"system", spec.system},
                    {"state", state},
                    {"det_h", r.det_h},
                    {"det_goh", r.det_goh},
                    {"g_prime", r.g_prime},
                    {"g_prime_pow_n_det_h", std::pow(r.g_prime, sys.n) * r.det_h},
                    {"residual", r.residual},
                    {"tolerance", r.tolerance},
                    {"rank_h", r.rank_h},
                    {"rank_goh", r.rank_goh},
                    {"relation_holds", r.ratio_check},
                    {"dG_h", matrix_json(r.dG_h)},
                    {"dG_goh", matrix_json(r.dG_goh)}};
    summary.update(extra);
    return write_outputs(cfg, {{"lie_check.json", json_text(summary)}}, summary);
}

// ---------------------------------------------------------------- linear delay

CommandOutput cmd_linear_delay(const RunConfig& cfg) {
    const json& doc = cfg.linear_delay;
    if (!doc.is_object() || !doc.contains("A") || !doc.contains("taps")) {
        throw ConfigError("linear_delay needs an object with A and taps");
    }
    LinearDelaySystem sys;
    try {
        sys.A = parse_matrix(doc.at("A"), "A");
        sys.B = doc.contains("B") ? parse_matrix(doc.at("B"), "B") : Matrix::Zero(sys.A.rows(), 0);
        for (const auto& t : doc.at("taps")) sys.taps.push_back(parse_matrix(t, "tap"));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid linear_delay system: ") + e.what());
    }
    sys.validate();
    const int n = sys.states();
    const Matrix Cbar = effective_output_matrix(sys);
    const Matrix Obar = delayed_observability_matrix(sys);
    const int rank = numeric_rank(Obar);
    json summary = {{"states", n},
                    {"window", sys.window()},
                    {"effective_output_matrix", matrix_json(Cbar)},
                    {"rank_delayed", rank},
                    {"observable", rank == n}};
    if (doc.contains("C")) {
        const Matrix C = parse_matrix(doc.at("C"), "C");
        if (C.cols() != n) throw DimensionError("C must have one column per state");
        const int rank_free = numeric_rank(tstep_observability(sys.A, C, n));
        summary["rank_delayfree"] = rank_free;
        summary["delayfree_observable"] = rank_free == n;
        summary["rank_bound_holds"] = rank <= rank_free;
    }
    return write_outputs(cfg, {{"linear_delay.json", json_text(summary)}}, summary);
}

// ---------------------------------------------------------------- dispatch

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"simulate", "gramian-grid", "place",
                                                   "nla-sweep", "lie-check",    "linear-delay"};
    return names;
}

CommandOutput run_command(const std::string& name, const RunConfig& cfg) {
    if (name == "simulate") return cmd_simulate(cfg);
    if (name == "gramian-grid") return cmd_gramian_grid(cfg);
    if (name == "place") return cmd_place(cfg);
    if (name == "nla-sweep") return cmd_nla_sweep(cfg);
    if (name == "lie-check") return cmd_lie_check(cfg);
    if (name == "linear-delay") return cmd_linear_delay(cfg);
    throw ConfigError("unknown command '" + name + "'");
}

}  // namespace obskit::app
