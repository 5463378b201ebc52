#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "ehg/io.hpp"

using namespace ehg;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "ehg_io_test";
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

Tensor3 random_tensor(int m, int n, int t, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    Tensor3 x(m, n, t);
    for (Eigen::Index i = 0; i < x.data().size(); ++i) x.data()[i] = nd(gen);
    return x;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    f << s;
}

std::vector<char> read_bytes(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::vector<char>& b) {
    std::ofstream f(p, std::ios::binary);
    f.write(b.data(), std::streamsize(b.size()));
}

}  // namespace

TEST_CASE("tensor file round-trip is bit-identical") {
    const Tensor3 x = random_tensor(4, 4, 1000, 5);
    const fs::path p = temp_dir() / "roundtrip.ehgt";
    write_tensor(p, x, 10.0);
    auto [back, fs_hz] = read_tensor(p);
    CHECK(fs_hz == 10.0);
    REQUIRE(back.dims() == x.dims());
    CHECK((back.data() - x.data()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("truncated tensor file raises a format error") {
    const Tensor3 x = random_tensor(2, 2, 10, 6);
    const fs::path p = temp_dir() / "trunc.ehgt";
    write_tensor(p, x, 10.0);
    auto bytes = read_bytes(p);
    bytes.resize(bytes.size() - 16);
    const fs::path q = temp_dir() / "trunc2.ehgt";
    write_bytes(q, bytes);
    CHECK_THROWS_AS(read_tensor(q), FormatError);
}

TEST_CASE("wrong magic and unsupported version raise format errors") {
    const Tensor3 x = random_tensor(2, 2, 4, 7);
    const fs::path p = temp_dir() / "hdr.ehgt";
    write_tensor(p, x, 10.0);

    auto bytes = read_bytes(p);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    const fs::path pm = temp_dir() / "badmagic.ehgt";
    write_bytes(pm, bad_magic);
    CHECK_THROWS_AS(read_tensor(pm), FormatError);

    auto bad_version = bytes;
    bad_version[4] = 2;  // version field, little-endian
    const fs::path pv = temp_dir() / "badversion.ehgt";
    write_bytes(pv, bad_version);
    CHECK_THROWS_AS(read_tensor(pv), FormatError);
}

TEST_CASE("csv ingestion with a row-major grid layout") {
    const fs::path p = temp_dir() / "grid16.csv";
    std::string body = "c0,c1,c2,c3,c4,c5,c6,c7,c8,c9,c10,c11,c12,c13,c14,c15\n";
    for (int r = 0; r < 100; ++r) {
        for (int c = 0; c < 16; ++c) {
            body += std::to_string(r * 16 + c);
            body += c + 1 < 16 ? ',' : '\n';
        }
    }
    write_text(p, body);
    Tensor3 x = ingest_csv(p, CsvLayout::row_major(4, 4, 10.0));
    REQUIRE(x.dims() == Dims3{4, 4, 100});
    // Column c maps to grid cell (c / 4, c % 4).
    CHECK(x(0, 0, 0) == 0.0);
    CHECK(x(0, 1, 0) == 1.0);
    CHECK(x(1, 0, 0) == 4.0);
    CHECK(x(3, 3, 99) == 99.0 * 16 + 15);
}

TEST_CASE("csv ingestion with a 2x2 layout") {
    const fs::path p = temp_dir() / "grid4.csv";
    std::string body;
    for (int r = 0; r < 50; ++r) body += "1.5,2.5,3.5,4.5\n";
    write_text(p, body);
    Tensor3 x = ingest_csv(p, CsvLayout::row_major(2, 2, 20.0));
    REQUIRE(x.dims() == Dims3{2, 2, 50});
    CHECK(x(0, 0, 10) == 1.5);
    CHECK(x(1, 1, 10) == 4.5);
}

TEST_CASE("csv ingestion rejects bad inputs") {
    const fs::path wide = temp_dir() / "wide.csv";
    write_text(wide, "1,2,3,4,5\n1,2,3,4,5\n");
    CHECK_THROWS_AS(ingest_csv(wide, CsvLayout::row_major(2, 2, 10.0)), FormatError);

    const fs::path ragged = temp_dir() / "ragged.csv";
    write_text(ragged, "1,2,3,4\n1,2,3\n");
    CHECK_THROWS_AS(ingest_csv(ragged, CsvLayout::row_major(2, 2, 10.0)), FormatError);

    const fs::path alpha = temp_dir() / "alpha.csv";
    write_text(alpha, "1,2,3,4\n1,2,zz,4\n");
    CHECK_THROWS_AS(ingest_csv(alpha, CsvLayout::row_major(2, 2, 10.0)), FormatError);
}

TEST_CASE("annotation json parses and validates") {
    const fs::path p = temp_dir() / "ann.json";
    write_text(p, R"({"intervals": [
        {"kind": "contraction", "start_s": 100.0, "end_s": 200.0},
        {"kind": "dummy", "start_s": 10.0, "end_s": 90.0}]})");
    AnnotationSet ann = read_annotations(p);
    REQUIRE(ann.intervals.size() == 2);
    CHECK(ann.of_kind(IntervalKind::contraction).size() == 1);
    CHECK(ann.of_kind(IntervalKind::dummy).size() == 1);
    CHECK(ann.of_kind(IntervalKind::dummy)[0].end_s == 90.0);

    const fs::path rt = temp_dir() / "ann_rt.json";
    write_annotations(rt, ann);
    AnnotationSet back = read_annotations(rt);
    REQUIRE(back.intervals.size() == 2);
    CHECK(back.intervals[0].start_s == ann.intervals[0].start_s);
}

TEST_CASE("annotation validation rejects overlap, order, and unknown kinds") {
    const fs::path overlap = temp_dir() / "ann_overlap.json";
    write_text(overlap, R"({"intervals": [
        {"kind": "contraction", "start_s": 0, "end_s": 50},
        {"kind": "contraction", "start_s": 40, "end_s": 80}]})");
    CHECK_THROWS(read_annotations(overlap));

    const fs::path reversed = temp_dir() / "ann_rev.json";
    write_text(reversed,
               R"({"intervals": [{"kind": "dummy", "start_s": 9, "end_s": 3}]})");
    CHECK_THROWS(read_annotations(reversed));

    const fs::path unknown = temp_dir() / "ann_kind.json";
    write_text(unknown,
               R"({"intervals": [{"kind": "sneeze", "start_s": 0, "end_s": 3}]})");
    CHECK_THROWS(read_annotations(unknown));

    const fs::path empty = temp_dir() / "ann_empty.json";
    write_text(empty, R"({"intervals": []})");
    AnnotationSet ann = read_annotations(empty);
    CHECK(ann.intervals.empty());
}

TEST_CASE("config files flatten sections and ignore comments") {
    const fs::path p = temp_dir() / "run.cfg";
    write_text(p,
               "# top comment\n"
               "global_key = 1\n"
               "[simulate]\n"
               "seed = 7   # trailing comment\n"
               "duration-s = 600\n"
               "[decompose]\n"
               "method = vb-tucker\n");
    auto cfg = read_config(p);
    CHECK(cfg.at("global_key") == "1");
    CHECK(cfg.at("simulate.seed") == "7");
    CHECK(cfg.at("simulate.duration-s") == "600");
    CHECK(cfg.at("decompose.method") == "vb-tucker");
}

TEST_CASE("atomic writes land complete and sha256 is stable") {
    const fs::path p = temp_dir() / "atomic.txt";
    write_file_atomic(p, "hello world\n");
    std::ifstream f(p);
    std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    CHECK(s == "hello world\n");
    const std::string h1 = sha256_hex(p);
    const std::string h2 = sha256_hex(p);
    CHECK(h1 == h2);
    CHECK(h1.size() == 64);
    // Known digest of "hello world\n".
    CHECK(h1 == "a948904f2f0f479b8f8197694b30184b0d2ed1c1cd2a1ec0fb85d299a192a447");
}
