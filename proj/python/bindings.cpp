#include "qfold/analysis.hpp"
#include "qfold/error.hpp"
#include "qfold/hamiltonian.hpp"
#include "qfold/opt.hpp"
#include "qfold/search.hpp"
#include "qfold/sim.hpp"

#include <nlohmann/json.hpp>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace qfold;

namespace {

const scoring::EnergyMatrix& matrix_named(const std::string& name) {
    static const auto mj = scoring::load_energy_matrix_file(scoring::default_matrix_path());
    static const auto hp = scoring::load_energy_matrix_file(scoring::data_dir() / "hp.csv");
    if (name == "mj") return mj;
    if (name == "hp") return hp;
    throw Error(ErrorCode::InvalidArgument, "unknown matrix '" + name + "'");
}

search::SearchConfig scoring_config(const std::string& peptide, const std::string& lattice, const std::string& matrix,
                                    int k, int nn_level, int workers) {
    search::SearchConfig c;
    c.peptide = peptide;
    c.lattice = lattice_from_string(lattice);
    c.matrix = matrix_named(matrix);
    c.k = k;
    c.nn_level = nn_level;
    c.workers = workers;
    return c;
}

py::dict record_dict(const search::ConformerRecord& r) {
    py::list coords;
    for (const auto& v : r.coords.coords) coords.append(py::make_tuple(v.x, v.y, v.z));
    py::dict d;
    d["energy"] = r.energy;
    d["turns"] = lattice::turn_string(r.turns);
    d["bits"] = r.bits;
    d["coords"] = coords;
    return d;
}

}  // namespace

PYBIND11_MODULE(_qfold, m) {
    static PyObject* error_type = PyErr_NewException("qfold._qfold.QfoldError", PyExc_RuntimeError, nullptr);
    m.add_object("QfoldError", py::handle(error_type));
    // args are (code name, message)
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetObject(error_type, py::make_tuple(std::string(to_string(e.code())), e.what()).ptr());
        }
    });

    m.def(
        "search",
        [](const std::string& peptide, const std::string& lattice, const std::string& matrix, int k, int nn_level,
           int workers) {
            py::gil_scoped_release release;
            const auto res = search::search(scoring_config(peptide, lattice, matrix, k, nn_level, workers));
            py::gil_scoped_acquire acquire;
            py::list top;
            for (const auto& r : res.top.records()) top.append(record_dict(r));
            py::dict d;
            d["visited"] = res.visited;
            d["collided"] = res.collided;
            d["top"] = top;
            return d;
        },
        py::arg("peptide"), py::arg("lattice") = "fcc", py::arg("matrix") = "mj", py::arg("k") = 10,
        py::arg("nn_level") = 1, py::arg("workers") = 1);

    m.def("resources", [](int n) {
        const auto r = ham::resource_counts(n);
        return py::dict(py::arg("config_bits") = r.config_bits, py::arg("ancillas") = r.ancillas,
                        py::arg("total") = r.total, py::arg("slack") = r.slack);
    });

    m.def(
        "term_counts",
        [](const std::string& peptide, const std::string& mode) {
            const auto rep = ham::term_report(ham::build_instance(ham::mode_from_string(mode), peptide, matrix_named("mj")));
            return py::dict(py::arg("objective_terms") = rep.objective.term_count,
                            py::arg("objective_degree") = rep.objective.degree,
                            py::arg("constraint_terms") = rep.constraint_terms, py::arg("total_terms") = rep.total_terms);
        },
        py::arg("peptide"), py::arg("mode") = "vqec");

    m.def(
        "build_instance",
        [](const std::string& peptide, const std::string& mode) {
            return ham::to_json(ham::build_instance(ham::mode_from_string(mode), peptide, matrix_named("mj"))).dump();
        },
        py::arg("peptide"), py::arg("mode") = "vqec", "Instance as a JSON string.");

    m.def(
        "probabilities",
        [](int n_qubits, int layers, const std::vector<double>& params) {
            return sim::probabilities(sim::evolve({n_qubits, layers}, params));
        },
        py::arg("n_qubits"), py::arg("layers"), py::arg("params"));

    m.def(
        "sample",
        [](int n_qubits, int layers, const std::vector<double>& params, std::uint64_t shots, std::uint64_t seed) {
            const auto t = sim::sample(sim::evolve({n_qubits, layers}, params), shots, seed);
            std::map<std::string, std::uint64_t> out;
            for (const auto& [idx, c] : t.counts) out[sim::index_to_bits(idx, n_qubits)] = c;
            return out;
        },
        py::arg("n_qubits"), py::arg("layers"), py::arg("params"), py::arg("shots"), py::arg("seed") = 0);

    m.def(
        "vqe",
        [](const std::string& peptide, double alpha, int restarts, int max_iterations, std::uint64_t seed, int workers) {
            const auto inst = ham::build_instance(ham::Mode::PolyFit, peptide, matrix_named("mj"));
            opt::CvarVqeConfig cfg;
            cfg.alpha = alpha;
            cfg.restarts = restarts;
            cfg.max_iterations = max_iterations;
            cfg.seed = seed;
            cfg.workers = workers;
            py::gil_scoped_release release;
            const auto res = opt::run_cvar_vqe(inst, {inst.layout.total_qubits(), 2}, cfg);
            py::gil_scoped_acquire acquire;
            return py::dict(py::arg("n_qubits") = inst.layout.total_qubits(), py::arg("params") = res.best_params,
                            py::arg("objective") = res.best_objective, py::arg("restart") = res.best_restart);
        },
        py::arg("peptide"), py::arg("alpha") = 0.1, py::arg("restarts") = 20, py::arg("max_iterations") = 600,
        py::arg("seed") = 0, py::arg("workers") = 1);

    m.def(
        "decode",
        [](const std::string& peptide, const std::map<std::string, std::uint64_t>& counts) {
            const int n = static_cast<int>(peptide.size());
            const ham::EncodingLayout layout(n);
            sim::ShotTable t{layout.total_qubits(), 0, {}};
            for (const auto& [bits, c] : counts) {
                if (static_cast<int>(bits.size()) != t.n_qubits)
                    throw Error(ErrorCode::LengthMismatch, "bitstring width differs from the register");
                t.counts[sim::bits_to_index(bits)] += c;
                t.shots += c;
            }
            const auto ens = analysis::decode_samples(t, layout, scoring_config(peptide, "fcc", "mj", 1, 1, 1));
            py::list rows;
            for (const auto& e : ens.entries)
                rows.append(py::dict(py::arg("turns") = lattice::turn_string(e.turns), py::arg("energy") = e.energy,
                                     py::arg("probability") = e.probability, py::arg("rg") = e.rg,
                                     py::arg("valid") = e.valid()));
            return rows;
        },
        py::arg("peptide"), py::arg("counts"));

    m.def(
        "radius_of_gyration",
        [](const std::vector<analysis::Point>& coords, const std::vector<double>& masses) {
            return analysis::radius_of_gyration(coords, masses);
        },
        py::arg("coords"), py::arg("masses"));
    m.def("kabsch_rmsd", &analysis::kabsch_rmsd, py::arg("a"), py::arg("b"));

    m.def(
        "xyz",
        [](const std::string& turns, const std::string& peptide, const std::string& lattice) {
            std::ostringstream out;
            const auto seq = lattice::turns_from_string(lattice_from_string(lattice), turns);
            analysis::write_xyz(out, lattice::coords_from_turns(seq), peptide, turns);
            return out.str();
        },
        py::arg("turns"), py::arg("peptide"), py::arg("lattice") = "fcc");
}
