#include "ehg/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "tensor file I/O assumes a little-endian host");

namespace ehg {

namespace {

constexpr char kMagic[4] = {'E', 'H', 'G', 'T'};
constexpr std::uint32_t kVersion = 1;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const Tensor3& x, double fs) {
    std::string buf;
    buf.reserve(28 + std::size_t(x.count()) * 8);
    buf.append(kMagic, 4);
    auto put_u32 = [&](std::uint32_t v) { buf.append(reinterpret_cast<const char*>(&v), 4); };
    put_u32(kVersion);
    put_u32(std::uint32_t(x.m()));
    put_u32(std::uint32_t(x.n()));
    put_u32(std::uint32_t(x.t()));
    buf.append(reinterpret_cast<const char*>(&fs), 8);
    buf.append(reinterpret_cast<const char*>(x.data().data()), std::size_t(x.count()) * 8);
    write_file_atomic(path, buf);
}

std::pair<Tensor3, double> read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open tensor file: " + path.string());
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    auto need = [&](std::size_t offset, std::size_t bytes, const char* what) {
        if (buf.size() < offset + bytes) {
            std::ostringstream msg;
            msg << "truncated tensor file " << path.string() << ": reading " << what
                << " needs " << (offset + bytes) << " bytes, file has " << buf.size();
            throw FormatError(msg.str());
        }
    };
    need(0, 4, "magic");
    if (std::memcmp(buf.data(), kMagic, 4) != 0)
        throw FormatError("bad magic in tensor file " + path.string() + " at byte offset 0");
    auto get_u32 = [&](std::size_t offset) {
        std::uint32_t v;
        std::memcpy(&v, buf.data() + offset, 4);
        return v;
    };
    need(4, 4, "version");
    const std::uint32_t version = get_u32(4);
    if (version != kVersion)
        throw FormatError("unsupported tensor file version " + std::to_string(version) +
                          " in " + path.string() + " (expected 1)");
    need(8, 12, "dims");
    const Dims3 dims{int(get_u32(8)), int(get_u32(12)), int(get_u32(16))};
    need(20, 8, "sample rate");
    double fs;
    std::memcpy(&fs, buf.data() + 20, 8);
    const std::size_t payload = std::size_t(dims.count()) * 8;
    need(28, payload, "payload");
    if (buf.size() != 28 + payload)
        throw FormatError("tensor file " + path.string() + " has trailing bytes: expected " +
                          std::to_string(28 + payload) + ", got " + std::to_string(buf.size()));
    Vector data(dims.count());
    std::memcpy(data.data(), buf.data() + 28, payload);
    return {Tensor3(dims, std::move(data)), fs};
}

CsvLayout CsvLayout::row_major(int rows, int cols, double fs) {
    CsvLayout layout;
    layout.grid_rows = rows;
    layout.grid_cols = cols;
    layout.sample_rate_hz = fs;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) layout.channel_order.emplace_back(i, j);
    return layout;
}

Tensor3 ingest_csv(const std::filesystem::path& path, const CsvLayout& layout_in) {
    CsvLayout layout = layout_in;
    if (layout.channel_order.empty())
        layout.channel_order =
            CsvLayout::row_major(layout.grid_rows, layout.grid_cols, layout.sample_rate_hz)
                .channel_order;
    const int rows = layout.grid_rows, cols = layout.grid_cols;
    const std::size_t channels = layout.channel_order.size();
    if (channels != std::size_t(rows) * cols)
        throw ArgumentError("csv layout: channel count does not match grid size");
    std::vector<char> seen(channels, 0);
    for (auto [r, c] : layout.channel_order) {
        if (r < 0 || r >= rows || c < 0 || c >= cols)
            throw ArgumentError("csv layout: grid position out of range");
        if (seen[r * cols + c]++) throw ArgumentError("csv layout: grid cell mapped twice");
    }

    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV file: " + path.string());
    std::vector<std::vector<double>> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        std::size_t col_no = 0;
        while (std::getline(ss, cell, ',')) {
            ++col_no;
            const std::string v = trim(cell);
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(v, &pos));
                if (pos != v.size()) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
            if (!numeric) break;
        }
        if (!numeric) {
            if (line_no == 1 && samples.empty()) continue;  // header row
            throw FormatError("non-numeric cell in " + path.string() + " at row " +
                              std::to_string(line_no) + ", column " + std::to_string(col_no));
        }
        if (row.size() != channels)
            throw FormatError("CSV row " + std::to_string(line_no) + " in " + path.string() +
                              " has " + std::to_string(row.size()) + " columns, layout needs " +
                              std::to_string(channels));
        samples.push_back(std::move(row));
    }
    if (samples.empty()) throw FormatError("CSV file " + path.string() + " has no data rows");

    Tensor3 x(rows, cols, int(samples.size()));
    for (int k = 0; k < x.t(); ++k)
        for (std::size_t c = 0; c < channels; ++c)
            x(layout.channel_order[c].first, layout.channel_order[c].second, k) = samples[k][c];
    return x;
}

void validate_annotations(const AnnotationSet& ann) {
    for (const auto& iv : ann.intervals)
        if (!(iv.start_s < iv.end_s))
            throw FormatError("annotation interval [" + std::to_string(iv.start_s) + ", " +
                              std::to_string(iv.end_s) + ") must have start < end");
    for (IntervalKind kind : {IntervalKind::contraction, IntervalKind::dummy}) {
        auto ivs = ann.of_kind(kind);
        std::sort(ivs.begin(), ivs.end(),
                  [](const Interval& a, const Interval& b) { return a.start_s < b.start_s; });
        for (std::size_t i = 1; i < ivs.size(); ++i)
            if (ivs[i].start_s < ivs[i - 1].end_s)
                throw FormatError("overlapping " + to_string(kind) + " intervals: [" +
                                  std::to_string(ivs[i - 1].start_s) + ", " +
                                  std::to_string(ivs[i - 1].end_s) + ") and [" +
                                  std::to_string(ivs[i].start_s) + ", " +
                                  std::to_string(ivs[i].end_s) + ")");
    }
}

std::string to_string(IntervalKind kind) {
    return kind == IntervalKind::contraction ? "contraction" : "dummy";
}

IntervalKind interval_kind_from_string(const std::string& s) {
    if (s == "contraction") return IntervalKind::contraction;
    if (s == "dummy") return IntervalKind::dummy;
    throw FormatError("unknown interval kind: '" + s + "'");
}

AnnotationSet read_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open annotation file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("invalid annotation JSON in " + path.string() + ": " + e.what());
    }
    AnnotationSet ann;
    try {
        for (const auto& item : j.at("intervals"))
            ann.intervals.push_back({interval_kind_from_string(item.at("kind").get<std::string>()),
                                     item.at("start_s").get<double>(),
                                     item.at("end_s").get<double>()});
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("annotation schema error in " + path.string() + ": " + e.what());
    }
    validate_annotations(ann);
    return ann;
}

void write_annotations(const std::filesystem::path& path, const AnnotationSet& ann) {
    nlohmann::json j;
    j["intervals"] = nlohmann::json::array();
    for (const auto& iv : ann.intervals)
        j["intervals"].push_back(
            {{"kind", to_string(iv.kind)}, {"start_s", iv.start_s}, {"end_s", iv.end_s}});
    write_file_atomic(path, j.dump(2) + "\n");
}

std::map<std::string, std::string> read_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    std::map<std::string, std::string> out;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw FormatError("config " + path.string() + " line " +
                                  std::to_string(line_no) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("config " + path.string() + " line " + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw FormatError("config " + path.string() + " line " + std::to_string(line_no) +
                              ": empty key");
        out[section.empty() ? key : section + "." + key] = value;
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    const auto tmp = path.parent_path() / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(contents.data(), std::streamsize(contents.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed for " + path.string() + ": " + ec.message());
}

std::string sha256_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for hashing: " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        EVP_DigestUpdate(ctx, buf, std::size_t(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

}  // namespace ehg
