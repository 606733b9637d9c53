// Acceptance suite: one PASS/FAIL line per criterion, details indented below.

#include "dynbc/config.hpp"
#include "dynbc/manufactured.hpp"
#include "dynbc/saddle.hpp"
#include "dynbc/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace dynbc;
namespace fs = std::filesystem;

namespace {

struct Report {
    std::vector<std::string> details;
    bool pass = true;

    void check(bool ok, const std::string& what) {
        details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
        pass = pass && ok;
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string join(const std::vector<double>& v, std::string (*f)(double)) {
    std::string s = "[";
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + f(v[k]);
    return s + "]";
}

bool within(const std::vector<double>& v, double lo, double hi) {
    return !v.empty() && std::all_of(v.begin(), v.end(), [&](double e) { return e >= lo && e <= hi; });
}

// 1. ‖Bx − g‖ ≤ 1e-10 at every step, every preset, both schemes.
Report constraint_enforcement() {
    Report r;
    for (const auto& id : preset_catalog()) {
        const ManufacturedCase mc = make_manufactured_case(id);
        const BulkMesh mesh = preset_mesh(mc, 8);
        const PdaeSystem sys = build_system(mc, mesh);
        for (Scheme s : {Scheme::implicit_euler, Scheme::radau_iia_2}) {
            const Trajectory traj = integrate(sys, consistent_init(sys, interpolate(mesh, mc.u0())), {s, 0.025, mc.t_end});
            const double worst = *std::max_element(traj.constraint_residual.begin(), traj.constraint_residual.end());
            r.check(worst <= 1e-10, id + " " + to_string(s) + ": max residual " + fmt(worst));
        }
    }
    return r;
}

// 2. PDAE vs kernel ODE in the E-norm.
Report kernel_equivalence() {
    Report r;
    for (const char* id : {"wentzell_1d_trig", "wentzell_2d_cos", "nonlocal_2d_cos"}) {
        const ManufacturedCase mc = make_manufactured_case(id);
        for (Scheme s : {Scheme::implicit_euler, Scheme::radau_iia_2}) {
            const double dev = compare_with_kernel_formulation(mc, preset_mesh(mc, 8), {s, 0.025, mc.t_end});
            r.check(dev <= 1e-9, std::string(id) + " " + to_string(s) + ": deviation " + fmt(dev));
        }
    }
    return r;
}

// 3. Spatial and temporal orders.
Report manufactured_convergence() {
    Report r;
    for (const char* id : {"wentzell_1d_trig", "nonlocal_2d_cos"}) {
        const ManufacturedCase mc = make_manufactured_case(id);
        StudyOptions opt;
        opt.t_end = mc.t_end;
        const EocTable t = run_convergence_study(mc, {8, 16, 32, 64}, opt);
        r.check(within(t.eoc_u, 1.8, 2.2), std::string(id) + " spatial EOC u " + join(t.eoc_u, fixed));
        r.check(within(t.eoc_p, 1.8, 2.2), std::string(id) + " spatial EOC p " + join(t.eoc_p, fixed));
        const std::size_t n = mc.dim == 1 ? 16 : 8;
        const std::vector<double> taus{0.1, 0.05, 0.025, 0.0125};
        const TemporalStudy euler = run_temporal_study(mc, n, taus, Scheme::implicit_euler, mc.t_end, 0.0005);
        r.check(within(euler.eocs, 0.9, 1.1), std::string(id) + " temporal EOC implicit_euler " + join(euler.eocs, fixed));
        const TemporalStudy radau = run_temporal_study(mc, n, taus, Scheme::radau_iia_2, mc.t_end, 0.0005);
        r.check(within(radau.eocs, 2.7, 3.3), std::string(id) + " temporal EOC radau_iia_2 " + join(radau.eocs, fixed));
    }
    return r;
}

// 4. Discrete inf-sup: uniform for matching, decaying for the broken pairing.
Report infsup() {
    Report r;
    const std::vector<std::size_t> ns{4, 8, 16};
    for (const char* id : {"wentzell_2d_cos", "nonlocal_2d_cos"}) {
        const ManufacturedCase mc = make_manufactured_case(id);
        std::vector<double> betas;
        for (std::size_t n : ns) betas.push_back(estimate_discrete_infsup(build_system(mc, preset_mesh(mc, n))));
        const auto [lo, hi] = std::minmax_element(betas.begin(), betas.end());
        const double variation = (*hi - *lo) / *hi;
        r.check(*lo >= 0.5 && variation < 0.2,
                std::string(id) + " matching beta_h " + join(betas, fixed) + ", variation " + fixed(variation));
    }
    // Multiplier mesh four times finer than the trace mesh.
    std::vector<double> broken;
    for (std::size_t n : ns) {
        const BulkMesh mesh = build_square_mesh(n);
        const BoundaryMesh trace = extract_boundary_mesh(mesh);
        const BoundaryMesh fine = build_independent_boundary_mesh(trace, 4 * trace.num_segments(), 0.0);
        broken.push_back(estimate_pairing_infsup(mesh, fine, Formulation::wentzell));
    }
    bool decays = true;
    for (std::size_t k = 0; k + 1 < broken.size(); ++k)
        decays = decays && broken[k] > 1e-6 && broken[k + 1] <= 0.5 * broken[k];
    r.check(decays, "broken pairing (multiplier 4x finer) beta_h " + join(broken, fmt) +
                        ": requires beta_h > 0 halving per refinement");
    return r;
}

// 5. λ_h against κ∂_n u.
Report multiplier_interpretation() {
    Report r;
    for (const char* id : {"wentzell_1d_trig", "dirichlet_1d_poly"}) {
        const ManufacturedCase mc = make_manufactured_case(id);
        StudyOptions opt;
        opt.t_end = mc.t_end;
        const EocTable t = run_convergence_study(mc, {8, 16, 32, 64}, opt);
        std::vector<double> errs;
        bool monotone = true;
        for (std::size_t k = 0; k < t.levels.size(); ++k) {
            errs.push_back(t.levels[k].multiplier.error);
            if (k > 0) monotone = monotone && errs[k] < errs[k - 1];
        }
        r.check(monotone && within(t.eoc_lambda, 0.8, 1e9),
                std::string(id) + " sign " + std::to_string(t.levels.back().multiplier.sign) + " errors " + join(errs, fmt) +
                    " EOC " + join(t.eoc_lambda, fixed));
    }
    return r;
}

// 6. E-energy non-increasing for f = g = 0, α ≥ 0.
Report dissipativity() {
    Report r;
    CoefficientSet c;
    c.kappa = [](const Point& x) { return 1.0 + x.x; };
    c.alpha = [](const BoundaryPoint& bp) { return 1.0 + 0.5 * std::cos(bp.s); };
    const BulkData f0 = [](const Point&, double) { return 0.0; };
    const BoundaryData g0 = [](const BoundaryPoint&, double) { return 0.0; };
    const BulkMesh mesh = build_square_mesh(6);
    CoefficientSet cn = c;
    cn.beta = 1.0;
    const std::vector<std::pair<std::string, PdaeSystem>> systems{
        {"homogeneous_dirichlet", build_homogeneous_dirichlet(mesh, c, f0)},
        {"dirichlet", build_dirichlet_pdae(mesh, c, f0, g0)},
        {"wentzell", build_wentzell_pdae(mesh, std::nullopt, c, f0, g0)},
        {"nonlocal", build_nonlocal_pdae(mesh, std::nullopt, cn, f0, g0)},
    };
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (const auto& [name, sys] : systems) {
        double worst = -std::numeric_limits<double>::infinity();
        for (int trial = 0; trial < 50; ++trial) {
            Vector u0(static_cast<Eigen::Index>(sys.n_u));
            for (auto& v : u0) v = dist(rng);
            std::optional<Vector> p0;
            if (sys.n_p > 0) {
                p0 = Vector(static_cast<Eigen::Index>(sys.n_p));
                for (auto& v : *p0) v = dist(rng);
            }
            const Trajectory traj = integrate(sys, consistent_init(sys, u0, p0), {Scheme::implicit_euler, 0.02, 0.4});
            for (std::size_t k = 1; k < traj.energy.size(); ++k)
                worst = std::max(worst, (traj.energy[k] - traj.energy[k - 1]) / traj.energy[k - 1]);
        }
        r.check(worst <= 1e-12, name + ": 50 random states, max relative energy change " + fmt(worst));
    }
    return r;
}

// 7. Gårding on ker B at the two coarsest meshes.
Report garding() {
    Report r;
    for (const auto& id : preset_catalog()) {
        const ManufacturedCase mc = make_manufactured_case(id);
        for (std::size_t n : {4u, 8u}) {
            const GardingResult g = garding_on_kernel(build_system(mc, preset_mesh(mc, n)));
            r.check(g.c > 0.0, id + " n=" + std::to_string(n) + ": c = " + fmt(g.c) + ", dim ker B = " +
                                   std::to_string(g.kernel_dim));
        }
    }
    return r;
}

// 8. Direct vs Schur on the implicit Euler step operators.
Report solver_cross_validation() {
    Report r;
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (const auto& id : preset_catalog()) {
        const ManufacturedCase mc = make_manufactured_case(id);
        double worst = 0.0;
        for (std::size_t n : {4u, 8u, 16u}) {
            const PdaeSystem sys = build_system(mc, preset_mesh(mc, n));
            for (double tau : {0.1, 0.01}) {
                const Stepper stepper(sys, Scheme::implicit_euler, tau);
                const SaddleOperator& op = stepper.saddle_operator();
                Vector rhs(static_cast<Eigen::Index>(op.size()));
                for (auto& v : rhs) v = dist(rng);
                const Vector direct = solve(op, rhs);
                const Vector schur = schur_solve(op, rhs);
                worst = std::max(worst, (direct - schur).norm() / direct.norm());
            }
        }
        r.check(worst <= 1e-9, id + ": max relative difference " + fmt(worst));
    }
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 9. Identical configs give byte-identical CSVs.
Report determinism() {
    Report r;
#ifdef PDAE_CLI_PATH
    const fs::path root = fs::temp_directory_path() / ("dynbc_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(root);
    const std::vector<std::pair<std::string, std::string>> runs{
        {"solve", R"(formulation = "nonlocal"
[geometry]
kind = "square"
n = 8
[coefficients]
beta = 1.0
alpha = "cos_arc"
kappa = "linear_x"
[data]
initial = "random"
seed = 11
[time]
scheme = "radau_iia_2"
tau = 0.02
t_end = 0.2
)"},
        {"study", R"(formulation = "wentzell"
[geometry]
kind = "square"
[data]
preset = "wentzell_2d_cos"
[study]
kind = "spatial"
levels = [4, 8, 16]
)"},
        {"infsup", R"(formulation = "wentzell"
[geometry]
kind = "square"
[study]
levels = [4, 8, 16]
)"},
    };
    for (const auto& [cmd, text] : runs) {
        const fs::path cfg = root / (cmd + ".toml");
        std::ofstream(cfg) << text;
        std::vector<fs::path> dirs;
        bool ran = true;
        for (const char* tag : {"a", "b"}) {
            const fs::path out = root / (cmd + "_" + tag);
            dirs.push_back(out);
            const std::string line = "PDAE_OUTPUT_DIR='" + out.string() + "' '" PDAE_CLI_PATH "' " + cmd + " '" + cfg.string() +
                                     "' > /dev/null";
            ran = ran && std::system(line.c_str()) == 0;
        }
        if (!ran) {
            r.check(false, cmd + ": CLI run failed");
            continue;
        }
        std::size_t compared = 0;
        bool same = true;
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            if (entry.path().extension() != ".csv") continue;
            ++compared;
            same = same && slurp(entry.path()) == slurp(dirs[1] / entry.path().filename());
        }
        r.check(same && compared > 0, cmd + ": " + std::to_string(compared) + " CSV files byte-identical across two runs");
    }
    std::error_code ec;
    fs::remove_all(root, ec);
#else
    r.check(false, "CLI path not configured");
#endif
    return r;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Report()>>> criteria{
        {"constraint enforcement", constraint_enforcement},
        {"formulation equivalence", kernel_equivalence},
        {"manufactured convergence", manufactured_convergence},
        {"discrete inf-sup", infsup},
        {"multiplier interpretation", multiplier_interpretation},
        {"dissipativity", dissipativity},
        {"garding on ker B", garding},
        {"solver cross-validation", solver_cross_validation},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        Report rep;
        try {
            rep = criteria[k].second();
        } catch (const std::exception& e) {
            rep.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << "criterion " << k + 1 << " " << (rep.pass ? "PASS" : "FAIL") << "  " << criteria[k].first << " ("
                  << fixed(secs) << " s)\n";
        for (const auto& d : rep.details) std::cout << "    " << d << '\n';
        std::cout.flush();
        failures += rep.pass ? 0 : 1;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed") << '\n';
    return failures == 0 ? 0 : 1;
}
