#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gsdcheck/rng.hpp"
#include "gsdcheck/gsd.hpp"

namespace fs = std::filesystem;

#ifndef GSDCHECK_CLI_PATH
#error "GSDCHECK_CLI_PATH must point at the gsdcheck executable"
#endif

namespace {

const fs::path& work_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "gsdcheck_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = std::string("\"") + GSDCHECK_CLI_PATH + "\" " + args + " > \"" +
                            (work_dir() / "last_stdout.txt").string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

const std::string& grid_path() {
    static const std::string path = [] {
        const std::string p = (work_dir() / "grid.bin").string();
        REQUIRE(run("grid build --grid-path \"" + p + "\"") == 0);
        return p;
    }();
    return path;
}

// Three experiments, 12 stimuli each, scores drawn from assorted GSDs.
fs::path write_sample_csv() {
    const fs::path p = work_dir() / "scores.csv";
    std::ofstream out(p);
    out << "experiment,stimulus_id,subject_id,score\n";
    for (int e = 0; e < 3; ++e) {
        for (int s = 0; s < 12; ++s) {
            const gsdcheck::ScoreCounts c = gsdcheck::sample({1.5 + 0.25 * s, 0.4 + 0.05 * e}, 20, 100 * e + s);
            int subject = 0;
            for (int j = 0; j < 5; ++j) {
                for (int r = 0; r < c.k[j]; ++r) {
                    out << "exp" << e << ",stim" << s << ",sub" << subject++ << ',' << j + 1 << '\n';
                }
            }
        }
    }
    return p;
}

}  // namespace

TEST_CASE("grid build and verify") {
    const std::string g = grid_path();
    CHECK(run("grid verify --grid-path \"" + g + "\"") == 0);

    const std::string second = (work_dir() / "grid2.bin").string();
    REQUIRE(run("grid build --grid-path \"" + second + "\"") == 0);
    CHECK(slurp(g) == slurp(second));

    SUBCASE("tampered payload fails verification with exit 2") {
        std::fstream f(second, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(24 + 8 * 5000);
        const char junk[3] = {1, 2, 3};
        f.write(junk, 3);
        f.close();
        CHECK(run("grid verify --grid-path \"" + second + "\"") == 2);
    }
    SUBCASE("missing grid file fails verification with exit 2") {
        CHECK(run("grid verify --grid-path \"" + (work_dir() / "nope.bin").string() + "\"") == 2);
    }
}

TEST_CASE("usage errors exit 1") {
    CHECK(run("") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("analyze") == 1);
    CHECK(run("analyze x.csv --bootstrap-iters 10 --grid-path \"" + grid_path() + "\"") == 1);
    CHECK(run("analyze x.csv --scan sideways") == 1);
}

TEST_CASE("empty or unusable CSV exits non-zero without outputs") {
    const fs::path empty = work_dir() / "empty.csv";
    std::ofstream(empty).close();
    const fs::path out = work_dir() / "out_empty";
    CHECK(run("analyze \"" + empty.string() + "\" --grid-path \"" + grid_path() + "\" --out \"" + out.string() + "\"") ==
          2);
    CHECK(!fs::exists(out));

    const fs::path bad = work_dir() / "bad.csv";
    std::ofstream(bad) << "experiment,stimulus_id,subject_id,score\ne,s,u,9\n";
    CHECK(run("analyze \"" + bad.string() + "\" --grid-path \"" + grid_path() + "\" --out \"" + out.string() + "\"") ==
          2);
    CHECK(!fs::exists(out));
    CHECK(run("analyze \"" + (work_dir() / "missing.csv").string() + "\" --out \"" + out.string() + "\"") == 2);
}

TEST_CASE("analyze writes the report tree deterministically") {
    const fs::path csv = write_sample_csv();
    const std::string common =
        "analyze \"" + csv.string() + "\" --grid-path \"" + grid_path() + "\" --bootstrap-iters 300 --seed 99 ";
    const fs::path a = work_dir() / "run_a", b = work_dir() / "run_b", c = work_dir() / "run_c";
    REQUIRE(run(common + "--workers 1 --out \"" + a.string() + "\"") == 0);
    REQUIRE(run(common + "--workers 1 --out \"" + b.string() + "\"") == 0);
    REQUIRE(run(common + "--workers 8 --out \"" + c.string() + "\"") == 0);

    CHECK(fs::exists(a / "manifest.json"));
    CHECK(fs::exists(a / "verdicts.jsonl"));
    for (const char* exp : {"exp0", "exp1", "exp2"}) {
        for (const char* f : {"results.csv", "ppplot.svg", "ppplot.csv", "verdict.json", "flagged.csv"}) {
            CHECK_MESSAGE(fs::exists(a / exp / f), exp << "/" << f);
        }
        for (const char* f : {"results.csv", "ppplot.csv", "flagged.csv", "ppplot.svg"}) {
            CHECK(slurp(a / exp / f) == slurp(b / exp / f));
            CHECK(slurp(a / exp / f) == slurp(c / exp / f));
        }
        CHECK(slurp(a / exp / "verdict.json") == slurp(b / exp / "verdict.json"));
    }
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
    const std::string manifest = slurp(a / "manifest.json");
    CHECK(manifest.find("grid_checksum") != std::string::npos);
    CHECK(manifest.find("tool_version") != std::string::npos);
    CHECK(manifest.find("\"seed\": 99") != std::string::npos);

    SUBCASE("a different seed changes the p-values") {
        const fs::path d = work_dir() / "run_d";
        REQUIRE(run("analyze \"" + csv.string() + "\" --grid-path \"" + grid_path() +
                    "\" --bootstrap-iters 300 --seed 100 --out \"" + d.string() + "\"") == 0);
        CHECK(slurp(a / "exp0" / "results.csv") != slurp(d / "exp0" / "results.csv"));
    }
    SUBCASE("environment overrides lose to flags") {
        const fs::path e = work_dir() / "run_e";
        ::setenv("GSDCHECK_SEED", "12345", 1);
        ::setenv("GSDCHECK_BOOTSTRAP_ITERS", "300", 1);
        REQUIRE(run("analyze \"" + csv.string() + "\" --grid-path \"" + grid_path() + "\" --seed 99 --out \"" +
                    e.string() + "\"") == 0);
        ::unsetenv("GSDCHECK_SEED");
        ::unsetenv("GSDCHECK_BOOTSTRAP_ITERS");
        CHECK(slurp(a / "exp0" / "results.csv") == slurp(e / "exp0" / "results.csv"));
    }
}

TEST_CASE("analyze accepts a counts CSV and a remapped header") {
    const fs::path counts = work_dir() / "counts.csv";
    std::ofstream(counts) << "experiment_id,stimulus_id,n,k1,k2,k3,k4,k5\n"
                             "demo,a,24,0,0,13,5,6\ndemo,b,16,0,11,3,0,2\ndemo,c,24,2,0,0,9,13\n";
    const fs::path out = work_dir() / "run_counts";
    REQUIRE(run("analyze --counts \"" + counts.string() + "\" --grid-path \"" + grid_path() +
                "\" --bootstrap-iters 500 --format csv --out \"" + out.string() + "\"") == 0);
    CHECK(fs::exists(out / "demo" / "ppplot.csv"));
    CHECK(!fs::exists(out / "demo" / "ppplot.svg"));
    const std::string results = slurp(out / "demo" / "results.csv");
    CHECK(results.find("a,24,0,0,13,5,6,") != std::string::npos);

    const fs::path remapped = work_dir() / "remapped.csv";
    std::ofstream(remapped) << "pvs,dataset,acr\nx,d,3\nx,d,3\nx,d,4\nx,d,2\nx,d,3\nx,d,3\nx,d,4\nx,d,3\nx,d,3\n";
    const fs::path out2 = work_dir() / "run_remap";
    CHECK(run("analyze \"" + remapped.string() + "\" --columns experiment=dataset,stimulus=pvs,subject=,score=acr " +
              "--grid-path \"" + grid_path() + "\" --bootstrap-iters 200 --out \"" + out2.string() + "\"") == 0);
    CHECK(fs::exists(out2 / "d" / "results.csv"));
}

TEST_CASE("simulate") {
    const fs::path out = work_dir() / "sim";
    const std::string args = "simulate --n-stimuli 30 --runs 2 --contaminate sudden_cutoff:0.2 --bootstrap-iters 200 "
                             "--seed 5 --grid-path \"" + grid_path() + "\" --out \"";
    REQUIRE(run(args + out.string() + "\"") == 0);
    CHECK(fs::exists(out / "summary.json"));
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(fs::exists(out / "run_001" / "counts.csv"));
    CHECK(fs::exists(out / "run_002" / "labels.csv"));
    CHECK(fs::exists(out / "run_001" / "sim" / "verdict.json"));
    CHECK(slurp(out / "summary.json").find("consistent_rate") != std::string::npos);

    const fs::path again = work_dir() / "sim_again";
    REQUIRE(run(args + again.string() + "\"") == 0);
    CHECK(slurp(out / "summary.json") == slurp(again / "summary.json"));
    CHECK(slurp(out / "run_002" / "sim" / "results.csv") == slurp(again / "run_002" / "sim" / "results.csv"));

    CHECK(run("simulate --no-analyze --contaminate bimodal:0.8 --contaminate random_answers:0.5 --out \"" +
              (work_dir() / "sim_bad").string() + "\"") == 1);
    CHECK(run("simulate --no-analyze --contaminate nonsense:0.1 --out \"" + (work_dir() / "sim_bad").string() +
              "\"") == 1);
}
