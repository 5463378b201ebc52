#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "ehg/io.hpp"
#include "json.hpp"

using namespace ehg;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "ehg_cli_test";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(EHG_CLI_PATH) + " " + args + " > /dev/null 2> /dev/null";
    const int status = std::system(cmd.c_str());
    return status < 0 ? status : (status >> 8) & 0xff;
}

// A short recording keeps every invocation fast.
const std::string kSimArgs = "--duration 200 --fs 10 --seed 3";

fs::path sim_dir() {
    static fs::path dir = [] {
        fs::path p = work_dir() / "sim";
        REQUIRE(run_cli("simulate " + kSimArgs + " --out " + p.string()) == 0);
        return p;
    }();
    return dir;
}

}  // namespace

TEST_CASE("simulate writes a consistent bundle") {
    const fs::path dir = sim_dir();
    for (const char* f :
         {"y.ehgt", "s_true.ehgt", "x_true.ehgt", "e_true.ehgt", "sim_config.json",
          "run_manifest.json"})
        REQUIRE(fs::exists(dir / f));
    auto [y, fsy] = read_tensor(dir / "y.ehgt");
    auto [s, fss] = read_tensor(dir / "s_true.ehgt");
    auto [x, fsx] = read_tensor(dir / "x_true.ehgt");
    auto [e, fse] = read_tensor(dir / "e_true.ehgt");
    CHECK(fsy == 10.0);
    CHECK(y.dims() == Dims3{4, 4, 2000});
    const Tensor3 sum = (s + x) + e;
    CHECK((sum.data() - y.data()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("simulate is reproducible for a fixed seed") {
    const fs::path a = work_dir() / "sim_a";
    const fs::path b = work_dir() / "sim_b";
    REQUIRE(run_cli("simulate " + kSimArgs + " --out " + a.string()) == 0);
    REQUIRE(run_cli("simulate " + kSimArgs + " --out " + b.string()) == 0);
    CHECK(sha256_hex(a / "y.ehgt") == sha256_hex(b / "y.ehgt"));

    const fs::path c = work_dir() / "sim_c";
    REQUIRE(run_cli("simulate --duration 200 --fs 10 --seed 4 --out " + c.string()) == 0);
    CHECK(sha256_hex(a / "y.ehgt") != sha256_hex(c / "y.ehgt"));
}

TEST_CASE("preprocess trims, filters, and decimates") {
    const fs::path out = work_dir() / "pre" / "y_pre.ehgt";
    REQUIRE(run_cli("preprocess --in " + (sim_dir() / "y.ehgt").string() + " --out " +
                    out.string() + " --trim-seconds 20 --decimate 2 --f-hi 2.0") == 0);
    auto [x, fs_hz] = read_tensor(out);
    CHECK(x.dims() == Dims3{4, 4, 900});  // (2000 - 200) / 2
    CHECK(fs_hz == 5.0);
}

TEST_CASE("preprocess refuses an aliasing decimation") {
    const fs::path out = work_dir() / "pre" / "bad.ehgt";
    CHECK(run_cli("preprocess --in " + (sim_dir() / "y.ehgt").string() + " --out " +
                  out.string() + " --decimate 4") == 2);
    CHECK(run_cli("preprocess --in " + (sim_dir() / "y.ehgt").string() + " --out " +
                  out.string() + " --decimate 4 --allow-aliasing") == 0);
}

TEST_CASE("decompose splits the tensor and reports diagnostics") {
    const fs::path dir = work_dir() / "dec_hosvd";
    REQUIRE(run_cli("decompose --in " + (sim_dir() / "y.ehgt").string() + " --out " +
                    dir.string() + " --method hosvd --rank 2,2,3") == 0);
    auto [y, fsy] = read_tensor(sim_dir() / "y.ehgt");
    auto [s, fss] = read_tensor(dir / "s.ehgt");
    auto [x, fsx] = read_tensor(dir / "x.ehgt");
    auto [e, fse] = read_tensor(dir / "e.ehgt");
    const Tensor3 sum = (s + x) + e;
    CHECK((sum.data() - y.data()).cwiseAbs().maxCoeff() <
          1e-12 * y.data().cwiseAbs().maxCoeff());
    std::ifstream f(dir / "diagnostics.json");
    nlohmann::json diag = nlohmann::json::parse(f);
    CHECK(diag.at("method") == "hosvd");
    CHECK(diag.at("residual_fraction").get<double>() < 1e-9);
}

TEST_CASE("decompose runs the bayesian method end to end") {
    const fs::path dir = work_dir() / "dec_vb";
    REQUIRE(run_cli("decompose --in " + (sim_dir() / "y.ehgt").string() + " --out " +
                    dir.string() + " --method vb-tucker --max-iters 15 --seed 0") == 0);
    auto [y, fsy] = read_tensor(sim_dir() / "y.ehgt");
    auto [s, fss] = read_tensor(dir / "s.ehgt");
    auto [x, fsx] = read_tensor(dir / "x.ehgt");
    auto [e, fse] = read_tensor(dir / "e.ehgt");
    const Tensor3 sum = (s + x) + e;
    CHECK((sum.data() - y.data()).cwiseAbs().maxCoeff() == 0.0);

    const fs::path dir2 = work_dir() / "dec_vb2";
    REQUIRE(run_cli("decompose --in " + (sim_dir() / "y.ehgt").string() + " --out " +
                    dir2.string() + " --method vb-tucker --max-iters 15 --seed 0") == 0);
    CHECK(sha256_hex(dir / "s.ehgt") == sha256_hex(dir2 / "s.ehgt"));
    CHECK(sha256_hex(dir / "x.ehgt") == sha256_hex(dir2 / "x.ehgt"));
}

TEST_CASE("evaluate scores methods against ground truth") {
    const fs::path dir = work_dir() / "eval";
    REQUIRE(run_cli("evaluate --in " + (sim_dir() / "y.ehgt").string() + " --s-true " +
                    (sim_dir() / "s_true.ehgt").string() + " --x-true " +
                    (sim_dir() / "x_true.ehgt").string() + " --out " + dir.string() +
                    " --methods pca,hosvd,bipolar --runs 1") == 0);
    REQUIRE(fs::exists(dir / "report.json"));
    REQUIRE(fs::exists(dir / "table.txt"));
    std::ifstream f(dir / "report.json");
    nlohmann::json rep = nlohmann::json::parse(f);
    REQUIRE(rep.at("rows").size() == 3);
    for (const auto& row : rep.at("rows")) {
        CHECK(row.at("ok").get<bool>());
        CHECK(std::abs(row.at("corr_localized_flat").get<double>()) <= 1.0);
    }
}

TEST_CASE("error taxonomy maps to exit codes") {
    // Unknown option / missing required argument.
    CHECK(run_cli("simulate --nonsense 1") == 2);
    CHECK(run_cli("decompose --in missing.ehgt") == 2);
    // Invalid configuration values.
    CHECK(run_cli("simulate --duration 10 --out " + (work_dir() / "bad").string()) == 2);
    // Missing input file.
    CHECK(run_cli("decompose --in " + (work_dir() / "nope.ehgt").string() + " --out " +
                  (work_dir() / "dec_nope").string()) == 5);
    // A non-tensor file is a format error.
    const fs::path junk = work_dir() / "junk.ehgt";
    std::ofstream(junk) << "this is not a tensor";
    CHECK(run_cli("decompose --in " + junk.string() + " --out " +
                  (work_dir() / "dec_junk").string()) == 3);
    // Bad config file for the pipeline.
    const fs::path badcfg = work_dir() / "bad.cfg";
    std::ofstream(badcfg) << "[simulate]\nduration_s = banana\n";
    CHECK(run_cli("pipeline --config " + badcfg.string()) == 2);
}

TEST_CASE("scalogram writes one row per frequency") {
    const fs::path out = work_dir() / "sg.csv";
    REQUIRE(run_cli("scalogram --in " + (sim_dir() / "y.ehgt").string() + " --out " +
                    out.string() + " --row 1 --col 2 --n-freqs 8") == 0);
    std::ifstream f(out);
    int lines = 0;
    std::string line;
    while (std::getline(f, line)) ++lines;
    CHECK(lines == 9);  // header + 8 frequencies
    CHECK(run_cli("scalogram --in " + (sim_dir() / "y.ehgt").string() + " --out " +
                  out.string() + " --row 9") == 2);
}

TEST_CASE("pipeline chains the stages and reproduces bit-identically") {
    const fs::path cfg_path = work_dir() / "pipe.cfg";
    const fs::path out_a = work_dir() / "pipe_a";
    const fs::path out_b = work_dir() / "pipe_b";
    for (const fs::path& out : {out_a, out_b}) {
        std::ofstream cfg(cfg_path);
        cfg << "[simulate]\nseed = 1\nduration_s = 200\nsample_rate_hz = 10\n"
            << "[preprocess]\nenabled = true\ntrim_seconds = 10\ndecimate = 2\n"
            << "f_hi_hz = 2.0\n"
            << "[evaluate]\nmethods = pca,bipolar\ntune =\nruns = 1\n"
            << "[output]\ndir = " << out.string() << "\n";
        cfg.close();
        REQUIRE(run_cli("pipeline --config " + cfg_path.string()) == 0);
        REQUIRE(fs::exists(out / "report.json"));
        REQUIRE(fs::exists(out / "table.txt"));
        REQUIRE(fs::exists(out / "y_preprocessed.ehgt"));
    }
    CHECK(sha256_hex(out_a / "sim" / "y.ehgt") == sha256_hex(out_b / "sim" / "y.ehgt"));
    CHECK(sha256_hex(out_a / "y_preprocessed.ehgt") ==
          sha256_hex(out_b / "y_preprocessed.ehgt"));
    CHECK(sha256_hex(out_a / "report.json") == sha256_hex(out_b / "report.json"));
    CHECK(sha256_hex(out_a / "table.txt") == sha256_hex(out_b / "table.txt"));
}
