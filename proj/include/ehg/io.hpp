#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ehg/annotations.hpp"
#include "ehg/tensor.hpp"

namespace ehg {

// Binary tensor file, version 1:
//   bytes 0..3   magic "EHGT"
//   bytes 4..7   u32 version = 1 (little-endian)
//   bytes 8..19  u32 m, n, t
//   bytes 20..27 f64 sample_rate_hz
//   bytes 28..   m*n*t f64 payload, little-endian, mode-1 fastest layout
void write_tensor(const std::filesystem::path& path, const Tensor3& x, double fs);
std::pair<Tensor3, double> read_tensor(const std::filesystem::path& path);

// Maps CSV columns onto electrode grid cells. channel_order[c] = (row, col)
// of CSV column c; every grid cell must be covered exactly once.
struct CsvLayout {
    int grid_rows = 4;
    int grid_cols = 4;
    std::vector<std::pair<int, int>> channel_order;  // empty => row-major grid order
    double sample_rate_hz = 0.0;
    bool units_millivolts = true;

    static CsvLayout row_major(int rows, int cols, double fs);
};

// One CSV row per time sample, one column per electrode channel; an optional
// non-numeric header row is skipped.
Tensor3 ingest_csv(const std::filesystem::path& path, const CsvLayout& layout);

// JSON schema: {"intervals": [{"kind": "contraction"|"dummy",
//                              "start_s": <num>, "end_s": <num>}, ...]}
AnnotationSet read_annotations(const std::filesystem::path& path);
void write_annotations(const std::filesystem::path& path, const AnnotationSet& ann);

// Plain-text "key = value" configuration with [section] headers; keys are
// flattened to "section.key". '#' starts a comment.
std::map<std::string, std::string> read_config(const std::filesystem::path& path);

// Atomic file write: temp file in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string sha256_hex(const std::filesystem::path& path);

}  // namespace ehg
