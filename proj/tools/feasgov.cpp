// feasgov: set synthesis, closed-loop simulation, horizon search, projection
// benchmarks and controller comparisons for a scenario file.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "feasgov/scenario.hpp"

namespace fs = std::filesystem;
using namespace feasgov;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

int exit_code(const Error& e) {
    const std::string& c = e.code();
    if (c == "assumption_failed" || c == "invalid_weights" || c == "not_schur" || c == "Gz_rank_deficient" ||
        c == "not_finitely_determined" || c == "dare_diverged" || c == "uncontrollable") {
        return 2;
    }
    if (c == "invariant_violated" || c == "cg_invariant_violated") {
        return 3;
    }
    if (c == "ocp_infeasible" || c == "not_found" || c == "state_outside_domain" || c == "bad_initialization" ||
        c == "empty_set") {
        return 4;
    }
    return 1;
}

void write_set(const fs::path& dir, const std::string& name, const Polyhedron& P) {
    write_poly((dir / name).string(), canonical_sort(P), name);
}

// Γ_N from `dir/gamma_N.poly` when given, otherwise the recursion.
void ensure_sets(Synthesis& s, const std::string& sets_dir) {
    if (sets_dir.empty()) {
        build_feasible_sets(s);
        return;
    }
    s.gammas.clear();
    for (int i = 0; i <= s.sc.N; ++i) {
        s.gammas.push_back(read_poly((fs::path(sets_dir) / ("gamma_" + std::to_string(i) + ".poly")).string()));
    }
}

std::vector<int> parse_n_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            out.push_back(std::stoi(item));
        } else {
            const int a = std::stoi(item.substr(0, colon));
            const int b = std::stoi(item.substr(colon + 1));
            for (int n = a; n <= b; ++n) {
                out.push_back(n);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.empty() || out.front() < 1) {
        throw Error("invalid_argument", "N list must contain positive horizons");
    }
    return out;
}

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : "not_reached"; }

int cmd_sets(const std::string& scenario, int N, const std::string& method, const std::string& out) {
    Scenario sc = load_scenario(scenario);
    if (N >= 0) {
        sc.N = N;
    }
    const Synthesis s = synthesize(sc);
    const fs::path dir(out);
    fs::create_directories(dir);
    write_set(dir, "T.poly", s.ing.T);
    write_set(dir, "veps.poly", s.Veps);
    write_set(dir, "sigma.poly", s.Sigma);
    std::cout << "T rows " << s.ing.T.rows() << " k* " << s.ing.k_star << "\n";
    write_set(dir, "gamma_0.poly", s.ing.T);
    std::cout << "gamma_0 rows " << s.ing.T.rows() << " seconds 0\n";
    Polyhedron prev = s.ing.T;
    const auto start = std::chrono::steady_clock::now();
    for (int i = 1; i <= sc.N; ++i) {
        const auto t = std::chrono::steady_clock::now();
        Polyhedron g;
        if (method == "recursive") {
            g = feasible_set_step(s.model, s.eb, s.Y, prev);
        } else {
            g = feasible_set_block(condense(s.model, s.eb, s.ing, s.Y, i, sc.Q, sc.R));
        }
        write_set(dir, "gamma_" + std::to_string(i) + ".poly", g);
        std::cout << "gamma_" << i << " rows " << g.rows() << " seconds " << seconds_since(t) << std::endl;
        prev = std::move(g);
    }
    std::cout << "total seconds " << seconds_since(start) << "\n";
    return 0;
}

int cmd_simulate(const std::string& scenario, const std::string& controller, int steps, const std::string& out,
                 const std::string& sets_dir) {
    const Scenario sc = load_scenario(scenario);
    Synthesis s = synthesize(sc);
    const ControllerKind kind = parse_controller(controller);
    if (kind == ControllerKind::fg || kind == ControllerKind::fg_underapprox) {
        ensure_sets(s, sets_dir);
    }
    const SimSetup setup = sim_setup(s, kind);
    const SimLog log = simulate(setup, kind, steps >= 0 ? steps : sc.steps);
    if (!out.empty()) {
        write_sim_csv(out, log);
    }
    const Metrics mt = compute_metrics(log, sc.r, select_v_star(s.eb, s.Veps, sc.r));
    std::cout << "steps " << log.size() - 1 << " rise " << opt_int(mt.rise_time_steps) << " settling "
              << opt_int(mt.settling_time_steps) << " v_converged " << opt_int(mt.v_convergence_step)
              << " max_violation " << mt.max_violation << "\n";
    return 0;
}

int cmd_nstar(const std::string& scenario, int max_N) {
    const Scenario sc = load_scenario(scenario);
    const Synthesis s = synthesize(sc);
    const int n = find_N_star(s.model, s.Y, s.ing.T, sc.x0, unthrottled_reference(s), max_N >= 0 ? max_N : sc.max_N);
    std::cout << n << "\n";
    return 0;
}

int cmd_bench(const std::string& scenario, const std::string& n_list, const std::string& method,
              const std::string& out) {
    const Scenario sc = load_scenario(scenario);
    const Synthesis s = synthesize(sc);
    const std::vector<int> Ns = parse_n_list(n_list);
    struct Cell {
        int N;
        std::string method;
        double seconds;
        Eigen::Index rows;
    };
    std::vector<Cell> cells;
    if (method == "recursive" || method == "both") {
        // Γ_N by recursion costs the sum of the first N steps.
        Polyhedron g = s.ing.T;
        double acc = 0.0;
        std::size_t next = 0;
        for (int i = 1; i <= Ns.back(); ++i) {
            const auto t = std::chrono::steady_clock::now();
            g = feasible_set_step(s.model, s.eb, s.Y, g);
            acc += seconds_since(t);
            if (next < Ns.size() && Ns[next] == i) {
                cells.push_back({i, "recursive", acc, g.rows()});
                ++next;
            }
        }
    }
    if (method == "block" || method == "both") {
        for (const int N : Ns) {
            const auto t = std::chrono::steady_clock::now();
            const Polyhedron g = feasible_set_block(condense(s.model, s.eb, s.ing, s.Y, N, sc.Q, sc.R));
            cells.push_back({N, "block", seconds_since(t), g.rows()});
        }
    }
    std::sort(cells.begin(), cells.end(),
              [](const Cell& a, const Cell& b) { return a.N != b.N ? a.N < b.N : a.method < b.method; });
    std::ostringstream csv;
    csv << "N,method,wall_seconds,rows\n";
    for (const auto& c : cells) {
        csv << c.N << "," << c.method << "," << detail::g12(c.seconds) << "," << c.rows << "\n";
    }
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream(out) << csv.str();
    }
    return 0;
}

int cmd_compare(const std::string& scenario, const std::string& controllers, const std::string& out,
                const std::string& sets_dir) {
    const Scenario sc = load_scenario(scenario);
    Synthesis s = synthesize(sc);
    const fs::path dir(out);
    fs::create_directories(dir);
    std::vector<std::string> names;
    std::stringstream ss(controllers);
    std::string item;
    while (std::getline(ss, item, ',')) {
        names.push_back(item);
    }
    const Vector v_star = select_v_star(s.eb, s.Veps, sc.r);
    std::ostringstream table;
    table << "controller,rise_steps,settling_steps,v_convergence_step,max_violation,TAVE_ms,TMAX_ms\n";
    for (const auto& name : names) {
        const ControllerKind kind = parse_controller(name);
        if ((kind == ControllerKind::fg || kind == ControllerKind::fg_underapprox) && s.gammas.empty()) {
            ensure_sets(s, sets_dir);
        }
        const SimLog log = simulate(sim_setup(s, kind), kind, sc.steps);
        write_sim_csv((dir / (name + ".csv")).string(), log);
        const Metrics mt = compute_metrics(log, sc.r, v_star);
        table << name << "," << opt_int(mt.rise_time_steps) << "," << opt_int(mt.settling_time_steps) << ","
              << opt_int(mt.v_convergence_step) << "," << detail::g12(mt.max_violation) << ","
              << detail::g12(mt.TAVE * 1e3) << "," << detail::g12(mt.TMAX * 1e3) << "\n";
    }
    std::ofstream(dir / "metrics.csv") << table.str();
    std::cout << table.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feasibility governor toolkit"};
    app.require_subcommand(1);

    std::string scenario, method = "recursive", out, controller = "fg", sets_dir, n_list = "1:10",
                              controllers = "fg,mpc,cg";
    int N = -1, steps = -1, max_N = -1;

    auto* sets = app.add_subcommand("sets", "Terminal set, V_eps, Sigma and the feasible sets");
    sets->add_option("--scenario", scenario)->required();
    sets->add_option("--N", N, "horizon (default: scenario N)");
    sets->add_option("--method", method)->check(CLI::IsMember({"block", "recursive"}));
    sets->add_option("--out", out)->required();

    auto* sim = app.add_subcommand("simulate", "Closed-loop run with invariant monitors");
    sim->add_option("--scenario", scenario)->required();
    sim->add_option("--controller", controller)->check(CLI::IsMember({"fg", "fg-under", "mpc", "cg"}));
    sim->add_option("--steps", steps, "default: scenario steps");
    sim->add_option("--out", out, "CSV log");
    sim->add_option("--sets", sets_dir, "directory with precomputed gamma_<i>.poly");

    auto* nstar = app.add_subcommand("nstar", "Smallest feasible horizon at (x0, Gz^+ r)");
    nstar->add_option("--scenario", scenario)->required();
    nstar->add_option("--max-N", max_N);

    auto* bench = app.add_subcommand("bench", "Feasible-set computation cost over horizons");
    bench->add_option("--scenario", scenario)->required();
    bench->add_option("--N-list", n_list, "e.g. 1:20 or 1,2,5");
    bench->add_option("--method", method)->check(CLI::IsMember({"block", "recursive", "both"}));
    bench->add_option("--out", out);

    auto* compare = app.add_subcommand("compare", "Run several controllers and tabulate metrics");
    compare->add_option("--scenario", scenario)->required();
    compare->add_option("--controllers", controllers);
    compare->add_option("--out", out)->required();
    compare->add_option("--sets", sets_dir);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*sets) {
            return cmd_sets(scenario, N, method, out);
        }
        if (*sim) {
            return cmd_simulate(scenario, controller, steps, out, sets_dir);
        }
        if (*nstar) {
            return cmd_nstar(scenario, max_N);
        }
        if (*bench) {
            return cmd_bench(scenario, n_list, bench->count("--method") ? method : "both", out);
        }
        if (*compare) {
            return cmd_compare(scenario, controllers, out, sets_dir);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
