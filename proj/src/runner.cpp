#include "dynbc/runner.hpp"

#include "dynbc/manufactured.hpp"
#include "dynbc/verification.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace dynbc {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string resolve_output_directory(const RunConfig& cfg) {
    std::string dir = cfg.output_directory;
    if (const char* env = std::getenv("PDAE_OUTPUT_DIR"); env && *env) dir = env;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("output.directory", "output directory '" + dir + "' is not writable");
    return dir;
}

namespace {

class ArtifactWriter {
public:
    explicit ArtifactWriter(std::string dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        const std::string path = (fs::path(dir_) / name).string();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("output.directory", "cannot write '" + path + "'");
        out << content;
        if (!out) throw ConfigError("output.directory", "failed writing '" + path + "'");
        files_.push_back(path);
    }

    const std::vector<std::string>& files() const { return files_; }

private:
    std::string dir_;
    std::vector<std::string> files_;
};

ordered_json manifest_base(const RunConfig& cfg, const std::string& mode) {
    ordered_json m;
    m["mode"] = mode;
    m["formulation"] = to_string(cfg.formulation);
    m["data"] = cfg.data;
    m["geometry"] = {{"kind", cfg.geometry.kind == GeometrySpec::Kind::interval ? "interval" : "square"}, {"n", cfg.geometry.n}};
    m["multiplier_mesh"] = cfg.multiplier.kind == MultiplierSpec::Kind::matching ? "matching" : "independent";
    m["scheme"] = to_string(cfg.scheme);
    m["tau"] = cfg.tau;
    m["t_end"] = cfg.t_end;
    m["solver_tolerances"] = {{"refinement_backward_error", 1e-8}, {"schur_cg", cfg.solver_tol}};
    m["config_hash"] = git_blob_hash(cfg.source_text);
    return m;
}

void finish_manifest(ArtifactWriter& w, ordered_json manifest) {
    manifest["outputs"] = ordered_json::array();
    for (const auto& f : w.files()) manifest["outputs"].push_back(fs::path(f).filename().string());
    w.write("manifest.json", manifest.dump(2) + "\n");
}

Vector initial_bulk(const RunConfig& cfg, const BulkMesh& mesh) {
    if (cfg.initial == "zero") return Vector::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
    if (cfg.initial == "random") {
        std::mt19937 rng(cfg.seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        Vector u(static_cast<Eigen::Index>(mesh.num_nodes()));
        for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = dist(rng);
        return u;
    }
    const int dim = mesh.dim();
    return interpolate(mesh, [dim](const Point& x) {
        const double c = std::cos(std::numbers::pi * x.x);
        return dim == 2 ? c * std::cos(std::numbers::pi * x.y) : c;
    });
}

struct Problem {
    std::shared_ptr<BulkMesh> mesh;
    PdaeSystem sys;
    std::optional<ManufacturedCase> mc;
};

Problem make_problem(const RunConfig& cfg, std::size_t n) {
    Problem p;
    p.mesh = std::make_shared<BulkMesh>(make_mesh(cfg, n));
    if (cfg.has_preset()) {
        p.mc = make_manufactured_case(cfg.data);
        p.sys = build_system(*p.mc, *p.mesh, make_multiplier(cfg, *p.mesh));
    } else {
        p.sys = build_zero_data_system(cfg, *p.mesh);
    }
    return p;
}

}  // namespace

std::vector<std::string> run_solve(const RunConfig& cfg) {
    ArtifactWriter w(resolve_output_directory(cfg));
    const Problem prob = make_problem(cfg, cfg.geometry.n);
    const PdaeSystem& sys = prob.sys;
    const Vector u0 = prob.mc ? interpolate(*prob.mesh, prob.mc->u0()) : initial_bulk(cfg, *prob.mesh);
    const InitialState init = consistent_init(sys, u0);
    const Trajectory traj = integrate(sys, init, StepperConfig{cfg.scheme, cfg.tau, cfg.t_end, cfg.solver_tol});

    if (cfg.wants("csv")) {
        std::ostringstream csv;
        csv << "t,energy,constraint_residual,u_min,u_max";
        if (prob.mc) csv << ",err_u" << (sys.n_p > 0 ? ",err_p" : "");
        csv << '\n';
        for (std::size_t k = 0; k < traj.times.size(); ++k) {
            const double t = traj.times[k];
            const Vector u = sys.bulk_values(traj.states[k]);
            csv << format_double(t) << ',' << format_double(traj.energy[k]) << ',' << format_double(traj.constraint_residual[k])
                << ',' << format_double(u.minCoeff()) << ',' << format_double(u.maxCoeff());
            if (prob.mc) {
                const ManufacturedCase& mc = *prob.mc;
                csv << ',' << format_double(l2_error_bulk(*prob.mesh, u, [&](const Point& x) { return mc.exact_u(x, t); }));
                if (sys.n_p > 0)
                    csv << ',' << format_double(l2_error_boundary(*sys.trace_mesh, sys.boundary_values(traj.states[k]),
                                                                  [&](const BoundaryPoint& bp) { return mc.exact_p(bp, t); }));
            }
            csv << '\n';
        }
        w.write("trajectory.csv", csv.str());
    }
    if (cfg.wants("json")) {
        ordered_json j;
        j["formulation"] = to_string(cfg.formulation);
        j["scheme"] = to_string(cfg.scheme);
        j["system"] = ordered_json::parse(sys.summary_json(init.consistency_residual));
        j["times"] = traj.times;
        j["energy"] = traj.energy;
        j["constraint_residual"] = traj.constraint_residual;
        const Vector& xf = traj.states.back();
        const Vector uf = sys.bulk_values(xf);
        j["final"]["u"] = std::vector<double>(uf.data(), uf.data() + uf.size());
        const Vector pf = sys.boundary_values(xf);
        j["final"]["p"] = std::vector<double>(pf.data(), pf.data() + pf.size());
        const Vector& lf = traj.multipliers.back();
        j["final"]["lambda"] = std::vector<double>(lf.data(), lf.data() + lf.size());
        j["warnings"] = traj.warnings;
        w.write("trajectory.json", j.dump(2) + "\n");
    }
    ordered_json m = manifest_base(cfg, "solve");
    m["mesh_levels"] = {cfg.geometry.n};
    m["consistency_residual"] = init.consistency_residual;
    finish_manifest(w, m);
    return w.files();
}

std::vector<std::string> run_study(const RunConfig& cfg) {
    if (!cfg.has_preset()) throw ConfigError("data/study", "studies require a manufactured preset in data.preset");
    ArtifactWriter w(resolve_output_directory(cfg));
    const ManufacturedCase mc = make_manufactured_case(cfg.data);
    ordered_json m = manifest_base(cfg, "study");
    m["study_kind"] = cfg.study_kind;

    if (cfg.study_kind == "spatial") {
        if (cfg.levels.size() < 3) throw ConfigError("study.levels", "study.levels needs at least three mesh levels");
        StudyOptions opt;
        opt.scheme = cfg.scheme;
        opt.t_end = cfg.t_end;
        opt.tau_coefficient = cfg.tau_coefficient;
        opt.tau_power = cfg.tau_power;
        if (cfg.multiplier.kind == MultiplierSpec::Kind::independent) {
            opt.multiplier.kind = MultiplierChoice::Kind::independent;
            opt.multiplier.ratio = cfg.multiplier.ratio;
            opt.multiplier.offset_fraction = cfg.multiplier.offset;
        }
        const EocTable table = run_convergence_study(mc, cfg.levels, opt);
        if (cfg.wants("csv")) {
            w.write("eoc.csv", table.eoc_csv());
            w.write("levels.csv", table.levels_csv());
        }
        if (cfg.wants("json")) w.write("eoc.json", table.to_json() + "\n");
        m["mesh_levels"] = cfg.levels;
        m["tau_rule"] = {{"coefficient", cfg.tau_coefficient}, {"power", cfg.tau_power}};
        m["monotone"] = table.monotone;
        m["warnings"] = table.warnings;
    } else {
        if (cfg.taus.size() < 2) throw ConfigError("study.taus", "temporal studies need at least two step sizes");
        double tau_ref = cfg.tau_ref;
        if (tau_ref == 0.0) {
            double smallest = cfg.taus.front();
            for (double t : cfg.taus) smallest = std::min(smallest, t);
            tau_ref = smallest / 8.0;
        }
        for (double t : cfg.taus) {
            try {
                StepperConfig{cfg.scheme, t, cfg.t_end}.validate();
            } catch (const Error& e) {
                throw ConfigError("study.taus/time.t_end", e.what());
            }
        }
        try {
            StepperConfig{Scheme::radau_iia_2, tau_ref, cfg.t_end}.validate();
        } catch (const Error& e) {
            throw ConfigError("study.tau_ref/time.t_end", e.what());
        }
        const TemporalStudy ts = run_temporal_study(mc, cfg.geometry.n, cfg.taus, cfg.scheme, cfg.t_end, tau_ref);
        if (cfg.wants("csv")) {
            std::ostringstream csv;
            csv << "tau,error,eoc\n";
            for (std::size_t k = 0; k < ts.taus.size(); ++k)
                csv << format_double(ts.taus[k]) << ',' << format_double(ts.errors[k]) << ','
                    << (k == 0 ? std::string() : format_double(ts.eocs[k - 1])) << '\n';
            w.write("temporal.csv", csv.str());
        }
        if (cfg.wants("json")) {
            ordered_json j;
            j["preset"] = mc.name;
            j["scheme"] = to_string(cfg.scheme);
            j["n"] = cfg.geometry.n;
            j["tau_ref"] = tau_ref;
            j["taus"] = ts.taus;
            j["errors"] = ts.errors;
            j["eocs"] = ts.eocs;
            w.write("temporal.json", j.dump(2) + "\n");
        }
        m["mesh_levels"] = {cfg.geometry.n};
        m["taus"] = cfg.taus;
        m["tau_ref"] = tau_ref;
    }
    finish_manifest(w, m);
    return w.files();
}

std::vector<std::string> run_infsup(const RunConfig& cfg) {
    if (cfg.formulation == Formulation::homogeneous_dirichlet)
        throw ConfigError("formulation", "infsup requires a formulation with a constraint");
    ArtifactWriter w(resolve_output_directory(cfg));
    std::ostringstream csv;
    csv << "n,h,n_trace,n_multiplier,beta_h,ratio_to_previous,garding_c\n";
    ordered_json rows = ordered_json::array();
    double previous = 0.0;
    for (std::size_t n : cfg.levels) {
        const Problem prob = make_problem(cfg, n);
        const double beta = estimate_discrete_infsup(prob.sys);
        const double c = garding_on_kernel(prob.sys).c;
        const double ratio = previous > 0.0 ? beta / previous : 0.0;
        csv << n << ',' << format_double(1.0 / static_cast<double>(n)) << ',' << prob.sys.n_p << ',' << prob.sys.n_lambda << ','
            << format_double(beta) << ',' << (previous > 0.0 ? format_double(ratio) : std::string()) << ',' << format_double(c)
            << '\n';
        rows.push_back({{"n", n}, {"beta_h", beta}, {"garding_c", c}});
        previous = beta;
    }
    if (cfg.wants("csv")) w.write("infsup.csv", csv.str());
    if (cfg.wants("json")) w.write("infsup.json", rows.dump(2) + "\n");
    ordered_json m = manifest_base(cfg, "infsup");
    m["mesh_levels"] = cfg.levels;
    finish_manifest(w, m);
    return w.files();
}

std::string list_presets() {
    std::ostringstream os;
    os << "presets:\n";
    for (const auto& id : preset_catalog()) os << "  " << id << "  " << preset_description(id) << '\n';
    os << "geometries:\n  interval  [0,1] with n elements\n  square  unit square, n x n cells split into triangles\n";
    os << "kappa functions:\n";
    for (const auto& id : kappa_functions()) os << "  " << id << '\n';
    os << "alpha functions:\n";
    for (const auto& id : alpha_functions()) os << "  " << id << '\n';
    return os.str();
}

std::string error_json(const std::string& kind, const std::string& message, const std::string& field, int line) {
    ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    if (!field.empty()) j["field"] = field;
    if (line > 0) j["line"] = line;
    return j.dump();
}

int run_command(const std::string& command, const std::string& config_path, std::ostream& out, std::ostream& err) {
    try {
        if (command == "list-presets") {
            out << list_presets();
            return exit_ok;
        }
        if (command != "solve" && command != "study" && command != "infsup") {
            err << error_json("usage", "unknown command '" + command + "'") << '\n';
            return exit_config;
        }
        const RunConfig cfg = load_config(config_path);
        std::vector<std::string> files;
        if (command == "solve") files = run_solve(cfg);
        else if (command == "study") files = run_study(cfg);
        else files = run_infsup(cfg);
        for (const auto& f : files) out << f << '\n';
        return exit_ok;
    } catch (const ConfigError& e) {
        err << error_json("config", e.what(), e.field(), e.line()) << '\n';
        return exit_config;
    } catch (const SingularSystemError& e) {
        err << error_json("singular_system", e.what()) << '\n';
        return exit_internal;
    } catch (const std::exception& e) {
        err << error_json("internal", e.what()) << '\n';
        return exit_internal;
    }
}

}  // namespace dynbc
