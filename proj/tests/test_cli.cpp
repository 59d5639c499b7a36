#include "qfold/analysis.hpp"
#include "qfold/search.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace qfold;

namespace {

struct Run {
    int status = 0;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Run run_cli(const std::string& args) {
    const fs::path dir = fs::current_path() / "cli_io";
    fs::create_directories(dir);
    const std::string cmd = std::string(QFOLD_CLI_PATH) + " " + args + " >" + (dir / "stdout").string() + " 2>" +
                            (dir / "stderr").string();
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(dir / "stdout"), slurp(dir / "stderr")};
}

void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("resources reports the qubit table") {
    const auto r = run_cli("resources --n 6");
    REQUIRE(r.status == 0);
    CHECK(r.out.find("6\t14\t10\t24\t") != std::string::npos);
    const auto three = run_cli("resources --n 3");
    CHECK(three.out.find("3\t2\t1\t3\t") != std::string::npos);
}

TEST_CASE("help lists every documented flag") {
    for (const auto& [sub, flags] : std::vector<std::pair<std::string, std::vector<std::string>>>{
             {"search", {"--peptide", "--lattice", "--matrix", "--k", "--nn-level", "--seed", "--workers", "--out"}},
             {"vqe", {"--peptide", "--mode", "--alpha", "--restarts", "--seed", "--workers", "--out", "--trace"}},
             {"vqec", {"--nu", "--mu", "--restarts", "--seed", "--workers", "--out", "--trace"}},
             {"sample", {"--shots", "--seed", "--out"}},
         }) {
        const auto r = run_cli(sub + " --help");
        CHECK(r.status == 0);
        for (const auto& f : flags) CHECK(r.out.find(f) != std::string::npos);
    }
}

TEST_CASE("pipeline search matches the enumeration oracle and is reproducible") {
    const fs::path dir = fs::current_path() / "cli_pipeline";
    fs::remove_all(dir);
    write_file(dir / "manifest.json", R"({"peptide": "GNLVS", "task": "search", "k": 5, "seed": 1})");
    REQUIRE(run_cli("pipeline --manifest " + (dir / "manifest.json").string() + " --out " + (dir / "a").string()).status == 0);
    REQUIRE(run_cli("pipeline --manifest " + (dir / "manifest.json").string() + " --out " + (dir / "b").string()).status == 0);

    const auto top = analysis::read_topobj(dir / "a" / "topobj.txt");
    search::SearchConfig cfg;
    cfg.peptide = "GNLVS";
    cfg.matrix = scoring::load_energy_matrix_file(scoring::default_matrix_path());
    cfg.k = 5;
    const auto oracle = search::search(cfg);
    REQUIRE(top.records.size() == 5);
    CHECK(top.records[0] == oracle.top[0]);
    for (const auto& e : fs::directory_iterator(dir / "a"))
        CHECK(slurp(e.path()) == slurp(dir / "b" / e.path().filename()));
}

TEST_CASE("pipeline vqe writes every artifact deterministically") {
    const fs::path dir = fs::current_path() / "cli_vqe";
    fs::remove_all(dir);
    write_file(dir / "m.json",
               R"({"peptide": "KLVF", "task": "vqe", "restarts": 2, "max_iterations": 60, "shots": 500, "seed": 4})");
    REQUIRE(run_cli("pipeline --manifest " + (dir / "m.json").string() + " --out " + (dir / "a").string()).status == 0);
    REQUIRE(run_cli("pipeline --manifest " + (dir / "m.json").string() + " --out " + (dir / "b").string() + " --workers 2")
                .status == 0);
    for (const char* f : {"instance.json", "terms.json", "params.json", "trace.jsonl", "shots.tsv", "report.tsv",
                          "report.json", "fit_report.tsv"}) {
        INFO(f);
        REQUIRE(fs::exists(dir / "a" / f));
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
}

TEST_CASE("unknown residues fail with a diagnostic") {
    const fs::path dir = fs::current_path() / "cli_bad";
    write_file(dir / "m.json", R"({"peptide": "GNLXS", "task": "search"})");
    const auto r = run_cli("pipeline --manifest " + (dir / "m.json").string() + " --out " + (dir / "out").string());
    CHECK(r.status != 0);
    CHECK(r.err.find("UnknownResidue") != std::string::npos);
}

TEST_CASE("sample and analyze chain through files") {
    const fs::path dir = fs::current_path() / "cli_chain";
    fs::remove_all(dir);
    fs::create_directories(dir);
    REQUIRE(run_cli("vqe --peptide KLVF --restarts 2 --max-iterations 80 --seed 2 --out " + (dir / "v").string()).status == 0);
    REQUIRE(run_cli("sample --params " + (dir / "v" / "params.json").string() + " --shots 1000 --seed 3 --out " +
                  (dir / "shots.tsv").string())
                .status == 0);
    const auto r = run_cli("analyze --peptide KLVF --shots-file " + (dir / "shots.tsv").string() + " --out " +
                         (dir / "an").string());
    REQUIRE(r.status == 0);
    CHECK(r.out.find("oracle ground energy -13.13") != std::string::npos);
    CHECK(fs::exists(dir / "an" / "report.tsv"));
}
