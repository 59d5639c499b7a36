#include "qfold/analysis.hpp"
#include "qfold/error.hpp"
#include "qfold/hamiltonian.hpp"
#include "qfold/opt.hpp"
#include "qfold/polyfit.hpp"
#include "qfold/scoring.hpp"
#include "qfold/search.hpp"
#include "qfold/sim.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qfold;

namespace {

constexpr double kReferenceVqecTerms = 2199;
constexpr double kReferencePolyfitTerms = 18133;

struct Options {
    std::string peptide;
    int n_beads = 0;
    std::string lattice = "fcc";
    std::string mode = "polyfit";
    std::string matrix;
    int k = 10;
    int nn_level = 1;
    double alpha = 0.1;
    std::optional<double> nu;
    std::optional<double> mu;
    int restarts = 20;
    int max_iterations = 0;
    std::uint64_t shots = 100000;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out;
    int trace = 0;
    int layers = 2;
    double penalty = 50.0;
    double r2_tol = polyfit::kDefaultR2Tol;
    int d0 = polyfit::kDefaultD0;
    int max_sep = 11;
    std::string gradient = "parameter-shift";
    std::string ranking = "auto";
    std::string instance;
    std::string params;
    std::string shots_file;
    std::string manifest;
    bool unit_masses = false;
    bool sweep_windows = false;
    int n_max = 30;
};

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

std::string peptide_of(const Options& o) {
    if (o.peptide.empty()) throw Error(ErrorCode::InvalidArgument, "--peptide is required");
    return scoring::normalize_peptide(o.peptide);
}

scoring::EnergyMatrix matrix_of(const Options& o) {
    if (o.matrix == "hp") return scoring::load_energy_matrix_file(scoring::data_dir() / "hp.csv");
    return scoring::load_energy_matrix_file(o.matrix.empty() ? scoring::default_matrix_path() : fs::path(o.matrix));
}

ham::Penalties penalties_of(const Options& o) { return {o.penalty, o.penalty, o.penalty}; }

search::SearchConfig search_config(const Options& o, const std::string& peptide, const scoring::EnergyMatrix& m) {
    search::SearchConfig c;
    c.lattice = lattice_from_string(o.lattice);
    c.peptide = peptide;
    c.k = o.k;
    c.nn_level = o.nn_level;
    c.matrix = m;
    c.workers = o.workers;
    return c;
}

ham::ProblemInstance instance_of(const Options& o, const scoring::EnergyMatrix& m) {
    if (!o.instance.empty()) return ham::instance_from_json(read_json(o.instance));
    return ham::build_instance(ham::mode_from_string(o.mode), peptide_of(o), m, penalties_of(o), o.r2_tol, o.d0);
}

double oracle_energy(const std::string& peptide, const scoring::EnergyMatrix& m, int workers) {
    search::SearchConfig c;
    c.peptide = peptide;
    c.matrix = m;
    c.k = 1;
    c.workers = workers;
    const auto res = search::search(c);
    if (res.top.empty()) throw Error(ErrorCode::InvalidArgument, "no self-avoiding conformation exists");
    return res.top[0].energy;
}

json params_json(const sim::Ansatz& a, const std::vector<double>& p) {
    return {{"n_qubits", a.n_qubits}, {"layers", a.layers}, {"params", p}};
}

std::pair<sim::Ansatz, std::vector<double>> params_from_json(const json& j) {
    try {
        return {{j.at("n_qubits").get<int>(), j.at("layers").get<int>()}, j.at("params").get<std::vector<double>>()};
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("params file: ") + e.what());
    }
}

// ---- subcommands ---------------------------------------------------------------

void cmd_resources(const Options& o) {
    int lo = 3;
    int hi = o.n_max;
    if (!o.peptide.empty()) lo = hi = static_cast<int>(peptide_of(o).size());
    else if (o.n_beads > 0) lo = hi = o.n_beads;
    std::ostringstream s;
    s << "N\tconfig\tancilla\ttotal\tslack_extra\tslack_total\n";
    for (int n = lo; n <= hi; ++n) {
        const auto r = ham::resource_counts(n);
        s << n << '\t' << r.config_bits << '\t' << r.ancillas << '\t' << r.total << '\t' << r.slack << '\t'
          << r.total + r.slack << '\n';
    }
    std::cout << s.str();
    if (!o.out.empty()) write_text(o.out, s.str());
}

void cmd_fit(const Options& o) {
    const auto fits = polyfit::fit_separations(o.max_sep, o.penalty, o.r2_tol, o.d0);
    std::ostringstream s;
    polyfit::write_fit_report(s, fits);
    std::cout << s.str();
    if (!o.out.empty()) write_text(o.out, s.str());
}

json term_summary(const ham::ProblemInstance& inst) {
    const auto r = ham::term_report(inst);
    const double reference = inst.mode == ham::Mode::VQEC ? kReferenceVqecTerms : kReferencePolyfitTerms;
    return {{"mode", ham::to_string(inst.mode)},
            {"peptide", inst.peptide},
            {"qubits", inst.layout.total_qubits()},
            {"objective_terms", r.objective.term_count},
            {"objective_degree", r.objective.degree},
            {"constraint_terms", r.constraint_terms},
            {"total_terms", r.total_terms},
            {"reference_terms", reference},
            {"convention", "binary-variable monomials after substituting the fixed turn-0 and second-turn suffix bits; "
                           "reference figure counts representation not stated"}};
}

void cmd_build(const Options& o) {
    const auto m = matrix_of(o);
    const auto inst = ham::build_instance(ham::mode_from_string(o.mode), peptide_of(o), m, penalties_of(o), o.r2_tol,
                                          o.d0);
    std::cout << term_summary(inst).dump(2) << '\n';
    if (!o.out.empty()) write_text(o.out, ham::to_json(inst).dump() + "\n");
}

void cmd_search(const Options& o) {
    const std::string pep = peptide_of(o);
    const auto cfg = search_config(o, pep, matrix_of(o));
    const auto res = search::search(cfg);
    std::cout << "visited " << res.visited << " of " << search::enumeration_size(cfg.lattice, static_cast<int>(pep.size()))
              << " sequences, " << res.collided << " with collisions, " << std::fixed << std::setprecision(3)
              << res.seconds << " s\n";
    std::cout << std::defaultfloat << std::setprecision(10);
    for (const auto& r : res.top.records()) std::cout << r.energy << '\t' << r.bits << '\n';
    if (o.out.empty()) return;
    fs::create_directories(o.out);
    analysis::write_topobj(fs::path(o.out) / "topobj.txt", {cfg.lattice, pep, res.top.records()});
    for (std::size_t i = 0; i < res.top.size(); ++i)
        analysis::write_xyz(fs::path(o.out) / ("conformer_" + std::to_string(i) + ".xyz"), res.top[i].coords, pep,
                            "energy " + std::to_string(res.top[i].energy));
}

void cmd_vqe(const Options& o) {
    const auto m = matrix_of(o);
    const auto inst = instance_of(o, m);
    const sim::Ansatz ansatz{inst.layout.total_qubits(), o.layers};
    opt::CvarVqeConfig cfg;
    cfg.alpha = o.alpha;
    cfg.restarts = o.restarts;
    cfg.seed = o.seed;
    cfg.workers = o.workers;
    cfg.snapshot_every = o.trace;
    cfg.sweep_windows = o.sweep_windows;
    if (o.max_iterations > 0) cfg.max_iterations = o.max_iterations;
    const auto res = opt::run_cvar_vqe(inst, ansatz, cfg);
    std::cout << "best CVaR " << std::setprecision(10) << res.best_objective << " (restart " << res.best_restart << ")\n";
    if (o.out.empty()) return;
    fs::create_directories(o.out);
    write_text(fs::path(o.out) / "params.json", params_json(ansatz, res.best_params).dump(2) + "\n");
    std::ostringstream t;
    opt::write_trace_jsonl(t, res.trace);
    write_text(fs::path(o.out) / "trace.jsonl", t.str());
    json restarts = json::array();
    for (const auto& r : res.restarts)
        restarts.push_back({{"restart", r.restart}, {"objective", r.objective}, {"evaluations", r.evaluations}});
    write_text(fs::path(o.out) / "restarts.json", restarts.dump(2) + "\n");
}

void cmd_vqec(const Options& o) {
    const auto m = matrix_of(o);
    auto opts = o;
    opts.mode = "vqec";
    const auto inst = instance_of(opts, m);
    const sim::Ansatz ansatz{inst.layout.total_qubits(), o.layers};
    opt::VqecConfig cfg;
    if (o.nu) cfg.nu_grid = {*o.nu};
    if (o.mu) cfg.mu_grid = {*o.mu};
    cfg.restarts = o.restarts;
    cfg.seed = o.seed;
    cfg.workers = o.workers;
    cfg.snapshot_every = o.trace;
    cfg.gradient = opt::gradient_from_string(o.gradient);
    if (o.max_iterations > 0) cfg.max_iterations = o.max_iterations;

    std::optional<sim::DiagonalOperator> ground;
    if (o.ranking != "lagrangian") {
        search::SearchConfig sc;
        sc.peptide = inst.peptide;
        sc.matrix = m;
        const double e_star = oracle_energy(inst.peptide, m, o.workers);
        ground = analysis::ground_indicator(inst.layout, sc, e_star);
        std::cout << "oracle ground energy " << std::setprecision(10) << e_star << '\n';
    }
    const auto ranking = ground ? opt::GridRanking::GroundProbability : opt::GridRanking::Lagrangian;
    const auto rep = opt::grid_search(inst, ansatz, cfg, ground ? &*ground : nullptr, ranking);
    const auto& best = rep.runs.front();
    std::cout << "best nu " << best.nu << " mu " << best.mu << " restart " << best.restart << " lagrangian "
              << best.lagrangian << " violation " << best.violation << " ground probability "
              << best.ground_probability << '\n';
    if (o.out.empty()) return;
    fs::create_directories(o.out);
    write_text(fs::path(o.out) / "params.json", params_json(ansatz, best.params).dump(2) + "\n");
    std::ostringstream g;
    opt::write_grid_jsonl(g, rep);
    write_text(fs::path(o.out) / "grid.jsonl", g.str());
    std::ostringstream t;
    opt::write_trace_jsonl(t, rep.trace);
    write_text(fs::path(o.out) / "trace.jsonl", t.str());
}

void cmd_sample(const Options& o) {
    if (o.params.empty()) throw Error(ErrorCode::InvalidArgument, "--params is required");
    const auto [ansatz, params] = params_from_json(read_json(o.params));
    const auto shots = sim::sample(sim::evolve(ansatz, params), o.shots, o.seed);
    std::ostringstream s;
    sim::write_shots(s, shots);
    if (o.out.empty()) std::cout << s.str();
    else write_text(o.out, s.str());
}

void analyze_into(const fs::path& dir, const sim::ShotTable& shots, const std::string& pep,
                  const scoring::EnergyMatrix& m, bool unit_masses, int workers) {
    search::SearchConfig sc;
    sc.peptide = pep;
    sc.matrix = m;
    const ham::EncodingLayout layout(static_cast<int>(pep.size()));
    auto ens = analysis::decode_samples(shots, layout, sc, unit_masses ? analysis::MassMode::Unit
                                                                         : analysis::MassMode::Residue);
    const double e_star = oracle_energy(pep, m, workers);
    ens.e_star = e_star;
    std::ostringstream tsv;
    analysis::energy_probability_report(tsv, ens, e_star);
    std::ostringstream js;
    analysis::energy_probability_json(js, ens, e_star);
    const auto* modal = ens.modal();
    if (!modal) throw Error(ErrorCode::EmptyDistribution, "no decodable shots");
    double ground_mass = 0.0;
    for (const auto& e : ens.entries)
        if (e.valid() && std::abs(e.energy - e_star) <= 1e-9) ground_mass += e.probability;
    std::cout << "oracle ground energy " << std::setprecision(10) << e_star << "\nmodal " << lattice::turn_string(modal->turns)
              << " energy " << modal->energy << " probability " << modal->probability << "\nground-state probability "
              << ground_mass << '\n';
    if (dir.empty()) {
        std::cout << tsv.str();
        return;
    }
    fs::create_directories(dir);
    write_text(dir / "report.tsv", tsv.str());
    write_text(dir / "report.json", js.str());
    if (modal->valid())
        analysis::write_xyz(dir / "modal.xyz", lattice::coords_from_turns(modal->turns), pep,
                            "modal " + lattice::turn_string(modal->turns));
}

void cmd_analyze(const Options& o) {
    if (o.shots_file.empty()) throw Error(ErrorCode::InvalidArgument, "--shots-file is required");
    std::ifstream in(o.shots_file);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + o.shots_file);
    analyze_into(o.out, sim::read_shots(in), peptide_of(o), matrix_of(o), o.unit_masses, o.workers);
}

void cmd_pipeline(const Options& cli) {
    if (cli.manifest.empty()) throw Error(ErrorCode::InvalidArgument, "--manifest is required");
    const json man = read_json(cli.manifest);
    Options o;
    std::string task;
    try {
        o.peptide = man.at("peptide").get<std::string>();
        task = man.value("task", "search");
        o.lattice = man.value("lattice", o.lattice);
        o.mode = man.value("mode", task == "vqec" ? std::string("vqec") : o.mode);
        o.matrix = man.value("matrix", std::string());
        o.k = man.value("k", o.k);
        o.nn_level = man.value("nn_level", o.nn_level);
        o.alpha = man.value("alpha", o.alpha);
        if (man.contains("nu")) o.nu = man.at("nu").get<double>();
        if (man.contains("mu")) o.mu = man.at("mu").get<double>();
        o.restarts = man.value("restarts", o.restarts);
        o.max_iterations = man.value("max_iterations", o.max_iterations);
        o.shots = man.value("shots", o.shots);
        o.seed = man.value("seed", o.seed);
        o.workers = man.value("workers", cli.workers);
        o.layers = man.value("layers", o.layers);
        o.penalty = man.value("penalty", o.penalty);
        o.r2_tol = man.value("r2_tol", o.r2_tol);
        o.gradient = man.value("gradient", o.gradient);
        o.ranking = man.value("ranking", o.ranking);
        o.out = man.value("out", cli.out);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
    }
    if (!cli.out.empty()) o.out = cli.out;
    if (o.out.empty()) throw Error(ErrorCode::InvalidArgument, "manifest needs an output directory");
    const fs::path dir(o.out);
    fs::create_directories(dir);
    write_text(dir / "manifest.json", man.dump(2) + "\n");
    const std::string pep = peptide_of(o);

    if (task == "search") {
        cmd_search(o);
        return;
    }
    if (task != "vqe" && task != "vqec") throw Error(ErrorCode::InvalidArgument, "unknown task '" + task + "'");
    if (task == "vqe") {
        o.mode = "polyfit";
        std::ostringstream fit;
        polyfit::write_fit_report(fit, polyfit::fit_separations(static_cast<int>(pep.size()) - 1, o.penalty, o.r2_tol, o.d0));
        write_text(dir / "fit_report.tsv", fit.str());
    }
    const auto m = matrix_of(o);
    const auto inst = ham::build_instance(ham::mode_from_string(o.mode), pep, m, penalties_of(o), o.r2_tol, o.d0);
    write_text(dir / "instance.json", ham::to_json(inst).dump() + "\n");
    write_text(dir / "terms.json", term_summary(inst).dump(2) + "\n");
    o.instance = (dir / "instance.json").string();
    if (task == "vqe") cmd_vqe(o);
    else cmd_vqec(o);
    o.params = (dir / "params.json").string();
    const auto [ansatz, params] = params_from_json(read_json(o.params));
    const auto shots = sim::sample(sim::evolve(ansatz, params), o.shots, o.seed);
    std::ostringstream s;
    sim::write_shots(s, shots);
    write_text(dir / "shots.tsv", s.str());
    analyze_into(dir, shots, pep, m, o.unit_masses, o.workers);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qfold: lattice protein folding as pseudo-Boolean Hamiltonians with variational solvers"};
    app.require_subcommand(1);
    Options o;

    auto common = [&o](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "Seed for every random choice");
        sub->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", o.out, "Output file or directory");
    };
    auto peptide = [&o](CLI::App* sub) {
        sub->add_option("--peptide", o.peptide, "Residues: one-letter string or separated three-letter codes/names");
        sub->add_option("--matrix", o.matrix, "Contact energy CSV (default: bundled MJ matrix)");
    };
    auto hamiltonian = [&o](CLI::App* sub) {
        sub->add_option("--mode", o.mode, "Constraint encoding")->check(CLI::IsMember({"polyfit", "vqec"}));
        sub->add_option("--penalty", o.penalty, "lambda_back = lambda_redun = P0");
        sub->add_option("--r2-tol", o.r2_tol, "Penalty fit R^2 tolerance");
        sub->add_option("--d0", o.d0, "Initial penalty fit degree");
        sub->add_option("--instance", o.instance, "Instance JSON written by `build`");
        sub->add_option("--layers", o.layers, "Ansatz entangling layers");
    };

    auto* res = app.add_subcommand("resources", "Qubit counts with and without slack variables");
    res->add_option("--peptide", o.peptide, "Peptide whose length sets N");
    res->add_option("--n", o.n_beads, "Chain length N");
    res->add_option("--n-max", o.n_max, "Tabulate N = 3..n-max when no length is given");
    res->add_option("--out", o.out, "Also write the table here");

    auto* fit = app.add_subcommand("fit-penalty", "Overlap penalty fits per separation");
    fit->add_option("--max-sep", o.max_sep, "Largest separation")->check(CLI::Range(3, 64));
    fit->add_option("--penalty", o.penalty, "Penalty at D = 0");
    fit->add_option("--r2-tol", o.r2_tol, "R^2 tolerance");
    fit->add_option("--d0", o.d0, "Initial degree");
    fit->add_option("--out", o.out, "Also write the report here");

    auto* build = app.add_subcommand("build", "Assemble a problem instance and report term counts");
    peptide(build);
    hamiltonian(build);
    build->add_option("--out", o.out, "Instance JSON path");

    auto* srch = app.add_subcommand("search", "Exhaustive search with top-K conformers");
    peptide(srch);
    common(srch);
    srch->add_option("--lattice", o.lattice, "Lattice")->check(CLI::IsMember({"fcc", "tet"}));
    srch->add_option("--k", o.k, "Conformers to keep")->check(CLI::PositiveNumber);
    srch->add_option("--nn-level", o.nn_level, "Contact levels scored")->check(CLI::IsMember({1, 2}));

    auto* vqe = app.add_subcommand("vqe", "CVaR-VQE on a PolyFit instance");
    peptide(vqe);
    hamiltonian(vqe);
    common(vqe);
    vqe->add_option("--alpha", o.alpha, "CVaR tail fraction")->check(CLI::Range(0.0, 1.0));
    vqe->add_option("--restarts", o.restarts, "Random restarts")->check(CLI::PositiveNumber);
    vqe->add_option("--max-iterations", o.max_iterations, "Objective evaluations per restart");
    vqe->add_option("--trace", o.trace, "Record parameters every n evaluations (0: never)");
    vqe->add_flag("--sweep-windows", o.sweep_windows, "Cycle restarts over the four quarter windows of [0, 2pi]");

    auto* vqec = app.add_subcommand("vqec", "VQEC primal-dual optimization with grid search");
    peptide(vqec);
    hamiltonian(vqec);
    common(vqec);
    vqec->add_option("--nu", o.nu, "Single perturbation step (default: full grid)");
    vqec->add_option("--mu", o.mu, "Single update step (default: full grid)");
    vqec->add_option("--restarts", o.restarts, "Restarts per grid point")->check(CLI::PositiveNumber);
    vqec->add_option("--max-iterations", o.max_iterations, "PDP iterations per run");
    vqec->add_option("--trace", o.trace, "Record parameters every n iterations (0: never)");
    vqec->add_option("--gradient", o.gradient, "Gradient method")
        ->check(CLI::IsMember({"parameter-shift", "adjoint"}));
    vqec->add_option("--ranking", o.ranking, "Grid ranking: auto (ground probability via the exhaustive oracle) or lagrangian")
        ->check(CLI::IsMember({"auto", "lagrangian"}));

    auto* smp = app.add_subcommand("sample", "Sample a trained circuit");
    smp->add_option("--params", o.params, "params.json from vqe/vqec")->required();
    smp->add_option("--shots", o.shots, "Shot count")->check(CLI::PositiveNumber);
    smp->add_option("--seed", o.seed, "Sampling seed");
    smp->add_option("--out", o.out, "Shot table path (default: stdout)");

    auto* ana = app.add_subcommand("analyze", "Decode shots into an energy/probability report");
    peptide(ana);
    ana->add_option("--shots-file", o.shots_file, "Shot table from `sample`")->required();
    ana->add_option("--out", o.out, "Report directory");
    ana->add_option("--workers", o.workers, "Worker threads for the oracle search");
    ana->add_flag("--unit-masses", o.unit_masses, "Radius of gyration with unit bead masses");

    auto* pipe = app.add_subcommand("pipeline", "Run a JSON manifest end to end");
    pipe->add_option("--manifest", o.manifest, "Manifest path")->required();
    pipe->add_option("--out", o.out, "Override the manifest output directory");
    pipe->add_option("--workers", o.workers, "Worker threads");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*res) cmd_resources(o);
        else if (*fit) cmd_fit(o);
        else if (*build) cmd_build(o);
        else if (*srch) cmd_search(o);
        else if (*vqe) cmd_vqe(o);
        else if (*vqec) cmd_vqec(o);
        else if (*smp) cmd_sample(o);
        else if (*ana) cmd_analyze(o);
        else if (*pipe) cmd_pipeline(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 10 + static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
