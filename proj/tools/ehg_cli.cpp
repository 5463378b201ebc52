// ehg: simulate, preprocess, decompose, evaluate, scalogram, pipeline.
//
// Exit codes: 0 success, 2 argument/config error, 3 file format error,
// 4 numerical error, 5 I/O error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ehg/errors.hpp"
#include "ehg/evaluation.hpp"
#include "ehg/io.hpp"
#include "ehg/signal_prep.hpp"
#include "ehg/simulator.hpp"
#include "ehg/tensor.hpp"
#include "ehg/vb_decomposition.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct StepTimer {
    json timings = json::object();
    std::chrono::steady_clock::time_point mark = std::chrono::steady_clock::now();

    void lap(const std::string& step) {
        const auto now = std::chrono::steady_clock::now();
        timings[step] = std::chrono::duration<double, std::milli>(now - mark).count();
        mark = now;
    }
};

// Wall-clock timings make the manifest the one output file that is not
// bit-reproducible; reproducibility checks compare the data files.
void write_manifest(const fs::path& dir, const std::string& command, const json& params,
                    const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs,
                    const StepTimer& timer) {
    json m;
    m["tool"] = "ehg";
    m["version"] = kToolVersion;
    m["command"] = command;
    m["parameters"] = params;
    m["inputs"] = json::object();
    for (const auto& p : inputs) m["inputs"][p.string()] = ehg::sha256_hex(p);
    m["outputs"] = json::object();
    for (const auto& p : outputs) m["outputs"][p.filename().string()] = ehg::sha256_hex(p);
    m["timings_ms"] = timer.timings;
    ehg::write_file_atomic(dir / "run_manifest.json", m.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    ehg::SimConfig cfg;
    std::string out_dir;
};

json sim_config_json(const ehg::SimConfig& c) {
    json j;
    j["grid_rows"] = c.grid_rows;
    j["grid_cols"] = c.grid_cols;
    j["electrode_spacing_m"] = c.electrode_spacing_m;
    j["sample_rate_hz"] = c.sample_rate_hz;
    j["duration_s"] = c.duration_s;
    j["target_snr_db"] = c.target_snr_db;
    j["seed"] = c.seed;
    j["burst"] = {{"fwl_freq_hz", c.burst.fwl_freq_hz},
                  {"fwl_amp_mv", c.burst.fwl_amp_mv},
                  {"fwh_freq_hz", c.burst.fwh_freq_hz},
                  {"fwh_amp_mv", c.burst.fwh_amp_mv},
                  {"duration_s", c.burst.duration_s},
                  {"peak_amp_mv", c.burst.peak_amp_mv},
                  {"envelope_sigma_div", c.burst.envelope_sigma_div},
                  {"propagation_speed_m_per_s", c.burst.propagation_speed_m_per_s},
                  {"onset_s", c.burst.onset_s}};
    j["slow_wave"] = {{"freq_hz", c.slow_wave.freq_hz}, {"amp_mv", c.slow_wave.amp_mv}};
    j["respiration"] = {{"freq_hz", c.respiration.freq_hz},
                        {"amp_max_mv", c.respiration.amp_max_mv},
                        {"amp_min_mv", c.respiration.amp_min_mv}};
    j["cardiac"] = {{"freq_hz", c.cardiac.freq_hz}, {"amp_mv", c.cardiac.amp_mv}};
    return j;
}

void do_simulate(const SimulateArgs& args) {
    const fs::path dir(args.out_dir);
    fs::create_directories(dir);
    StepTimer timer;
    const ehg::GroundTruthBundle gt = ehg::simulate(args.cfg);
    timer.lap("simulate");
    const double fs_hz = args.cfg.sample_rate_hz;
    ehg::write_tensor(dir / "y.ehgt", gt.y, fs_hz);
    ehg::write_tensor(dir / "s_true.ehgt", gt.s_true, fs_hz);
    ehg::write_tensor(dir / "x_true.ehgt", gt.x_true, fs_hz);
    ehg::write_tensor(dir / "e_true.ehgt", gt.e_true, fs_hz);
    ehg::write_file_atomic(dir / "sim_config.json", sim_config_json(args.cfg).dump(2) + "\n");
    timer.lap("write");
    write_manifest(dir, "simulate", sim_config_json(args.cfg), {},
                   {dir / "y.ehgt", dir / "s_true.ehgt", dir / "x_true.ehgt",
                    dir / "e_true.ehgt", dir / "sim_config.json"},
                   timer);
}

// ---------------------------------------------------------------------------

struct PreprocessArgs {
    std::string in_path, out_path;
    ehg::FilterSpec filter;
    double trim_seconds = 60.0;
    int decimate_factor = 1;
    bool allow_aliasing = false;
    bool skip_bandpass = false;
};

void do_preprocess(const PreprocessArgs& args) {
    StepTimer timer;
    auto [x, fs_hz] = ehg::read_tensor(args.in_path);
    timer.lap("read");
    if (args.trim_seconds > 0.0) x = ehg::trim_head(x, fs_hz, args.trim_seconds);
    if (!args.skip_bandpass) x = ehg::bandpass(x, fs_hz, args.filter);
    double out_fs = fs_hz;
    if (args.decimate_factor > 1) {
        ehg::check_decimation_safe(fs_hz, args.decimate_factor,
                                   args.skip_bandpass ? fs_hz / 2.0 : args.filter.f_hi_hz,
                                   args.allow_aliasing);
        x = ehg::decimate(x, args.decimate_factor);
        out_fs = fs_hz / args.decimate_factor;
    }
    timer.lap("process");
    const fs::path out(args.out_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    ehg::write_tensor(out, x, out_fs);
    timer.lap("write");
    json params = {{"in", args.in_path},
                   {"trim_seconds", args.trim_seconds},
                   {"bandpass", !args.skip_bandpass},
                   {"filter_order", args.filter.order},
                   {"f_lo_hz", args.filter.f_lo_hz},
                   {"f_hi_hz", args.filter.f_hi_hz},
                   {"decimate", args.decimate_factor},
                   {"allow_aliasing", args.allow_aliasing}};
    write_manifest(out.has_parent_path() ? out.parent_path() : fs::path("."), "preprocess",
                   params, {fs::path(args.in_path)}, {out}, timer);
}

// ---------------------------------------------------------------------------

struct DecomposeArgs {
    std::string in_path, out_dir;
    ehg::MethodSpec spec;
    std::string rank_spec;  // "r1,r2,r3" for vb-tucker/hosvd
};

ehg::RankTriple parse_rank_triple(const std::string& s) {
    ehg::RankTriple r;
    if (std::sscanf(s.c_str(), "%d,%d,%d", &r.r1, &r.r2, &r.r3) != 3)
        throw ehg::ArgumentError("expected rank as r1,r2,r3: " + s);
    return r;
}

void do_decompose(const DecomposeArgs& args_in) {
    DecomposeArgs args = args_in;
    if (!args.rank_spec.empty()) {
        const ehg::RankTriple r = parse_rank_triple(args.rank_spec);
        args.spec.vb_opts.init_rank = r;
        args.spec.hosvd_ranks = r;
    }
    StepTimer timer;
    auto [y, fs_hz] = ehg::read_tensor(args.in_path);
    timer.lap("read");
    const ehg::BaselineOutput out = ehg::run_method(args.spec, y, args.spec.vb_opts.seed);
    timer.lap("decompose");
    const fs::path dir(args.out_dir);
    fs::create_directories(dir);
    std::vector<fs::path> written;
    ehg::write_tensor(dir / "s.ehgt", out.localized, fs_hz);
    written.push_back(dir / "s.ehgt");
    ehg::write_tensor(dir / "x.ehgt", out.distributed, fs_hz);
    written.push_back(dir / "x.ehgt");
    json diag;
    diag["method"] = args.spec.name;
    if (out.localized.dims() == y.dims() && out.distributed.dims() == y.dims()) {
        const ehg::Tensor3 e = y - out.localized - out.distributed;
        ehg::write_tensor(dir / "e.ehgt", e, fs_hz);
        written.push_back(dir / "e.ehgt");
        diag["residual_fraction"] =
            ehg::frobenius_norm(e) / std::max(ehg::frobenius_norm(y), 1e-300);
    }
    for (const auto& [k, v] : out.diagnostics) diag[k] = v;
    ehg::write_file_atomic(dir / "diagnostics.json", diag.dump(2) + "\n");
    written.push_back(dir / "diagnostics.json");
    timer.lap("write");
    json params = {{"in", args.in_path},
                   {"method", args.spec.name},
                   {"seed", args.spec.vb_opts.seed},
                   {"max_iters", args.spec.vb_opts.max_iters},
                   {"tol", args.spec.vb_opts.tol},
                   {"prune_threshold", args.spec.vb_opts.prune_threshold},
                   {"rank", args.rank_spec},
                   {"pca_k", args.spec.pca_k},
                   {"cp_rank", args.spec.cp_rank},
                   {"rpca_lambda", args.spec.rpca_lambda},
                   {"wavelet_levels", args.spec.wavelet_levels}};
    write_manifest(dir, "decompose", params, {fs::path(args.in_path)}, written, timer);
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
    std::string in_path;
    std::string s_true_path, x_true_path;
    std::string annotations_path;
    std::string out_dir;
    std::vector<std::string> methods{"vb-tucker", "brtf-cp", "rpca",  "pca",
                                     "hosvd",     "cp-als",  "bipolar", "wavelet"};
    std::vector<std::string> tune;  // subset of methods tuned against truth
    int runs = 100;
    std::uint64_t seed = 0;
};

void do_evaluate(const EvaluateArgs& args) {
    StepTimer timer;
    auto [y, fs_hz] = ehg::read_tensor(args.in_path);
    std::optional<ehg::GroundTruthBundle> truth;
    if (!args.s_true_path.empty() || !args.x_true_path.empty()) {
        if (args.s_true_path.empty() || args.x_true_path.empty())
            throw ehg::ArgumentError("--s-true and --x-true must be given together");
        ehg::GroundTruthBundle gt;
        gt.y = y;
        gt.s_true = ehg::read_tensor(args.s_true_path).first;
        gt.x_true = ehg::read_tensor(args.x_true_path).first;
        gt.e_true = y - gt.s_true - gt.x_true;
        truth = std::move(gt);
    }
    std::optional<ehg::AnnotationSet> ann;
    if (!args.annotations_path.empty()) ann = ehg::read_annotations(args.annotations_path);
    if (!truth && !ann)
        throw ehg::ArgumentError("evaluate needs ground truth tensors and/or --annotations");
    timer.lap("read");

    std::vector<ehg::MethodSpec> specs;
    for (const auto& name : args.methods) {
        bool tuned = false;
        for (const auto& t : args.tune)
            if (t == name) tuned = true;
        if (tuned) {
            if (!truth) throw ehg::ArgumentError("--tune requires ground truth tensors");
            specs.push_back(ehg::tune_method(name, y, *truth));
        } else {
            ehg::MethodSpec spec;
            spec.name = name;
            spec.vb_opts.seed = args.seed;
            specs.push_back(std::move(spec));
        }
    }
    timer.lap("tune");
    const ehg::CompareReport report =
        ehg::compare_methods(y, truth ? &*truth : nullptr, ann ? &*ann : nullptr, fs_hz,
                             specs, args.runs);
    timer.lap("evaluate");

    const fs::path dir(args.out_dir);
    fs::create_directories(dir);
    const std::string table = ehg::format_table(report, truth.has_value(), ann.has_value());
    ehg::write_file_atomic(dir / "report.json", ehg::report_json(report));
    ehg::write_file_atomic(dir / "table.txt", table);
    std::cout << table;
    timer.lap("write");
    std::vector<fs::path> inputs{fs::path(args.in_path)};
    if (truth) {
        inputs.emplace_back(args.s_true_path);
        inputs.emplace_back(args.x_true_path);
    }
    if (ann) inputs.emplace_back(args.annotations_path);
    json params = {{"in", args.in_path},  {"methods", args.methods}, {"tune", args.tune},
                   {"runs", args.runs},   {"seed", args.seed},
                   {"annotations", args.annotations_path}};
    write_manifest(dir, "evaluate", params, inputs, {dir / "report.json", dir / "table.txt"},
                   timer);
}

// ---------------------------------------------------------------------------

struct ScalogramArgs {
    std::string in_path, out_path;
    int row = 0, col = 0;
    double f_min = 0.01, f_max = 2.0;
    int n_freqs = 64;
    double cycles = 6.0;
};

void do_scalogram(const ScalogramArgs& args) {
    StepTimer timer;
    auto [x, fs_hz] = ehg::read_tensor(args.in_path);
    if (args.row < 0 || args.row >= x.m() || args.col < 0 || args.col >= x.n())
        throw ehg::ArgumentError("electrode index out of range");
    std::vector<double> series(std::size_t(x.t()));
    for (int k = 0; k < x.t(); ++k) series[std::size_t(k)] = x(args.row, args.col, k);
    timer.lap("read");
    const ehg::Scalogram sg =
        ehg::scalogram(series, fs_hz, args.f_min, args.f_max, args.n_freqs, args.cycles);
    timer.lap("transform");
    std::ostringstream os;
    os << "freq_hz";
    for (int k = 0; k < x.t(); ++k) os << ",t" << k;
    os << "\n";
    os.precision(17);
    for (int fi = 0; fi < args.n_freqs; ++fi) {
        os << sg.freqs_hz[std::size_t(fi)];
        for (int k = 0; k < x.t(); ++k) os << "," << sg.magnitude(fi, k);
        os << "\n";
    }
    const fs::path out(args.out_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    ehg::write_file_atomic(out, os.str());
    timer.lap("write");
    json params = {{"in", args.in_path}, {"row", args.row},       {"col", args.col},
                   {"f_min", args.f_min}, {"f_max", args.f_max},   {"n_freqs", args.n_freqs},
                   {"cycles", args.cycles}};
    write_manifest(out.has_parent_path() ? out.parent_path() : fs::path("."), "scalogram",
                   params, {fs::path(args.in_path)}, {out}, timer);
}

// ---------------------------------------------------------------------------

// Pipeline config file: key = value with [section]s. Sections: [simulate]
// (seed, duration_s, sample_rate_hz, grid_rows, grid_cols, target_snr_db),
// [preprocess] (enabled, trim_seconds, f_lo_hz, f_hi_hz, order, decimate),
// [evaluate] (methods, tune, runs), [output] (dir).
struct PipelineArgs {
    std::string config_path;
};

double cfg_num(const std::map<std::string, std::string>& cfg, const std::string& key,
               double fallback) {
    auto it = cfg.find(key);
    if (it == cfg.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ehg::ConfigError("bad numeric value for " + key + ": " + it->second);
    }
}

std::string cfg_str(const std::map<std::string, std::string>& cfg, const std::string& key,
                    const std::string& fallback) {
    auto it = cfg.find(key);
    return it == cfg.end() ? fallback : it->second;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void do_pipeline(const PipelineArgs& args) {
    const auto cfg = ehg::read_config(args.config_path);
    const fs::path dir(cfg_str(cfg, "output.dir", "pipeline_out"));
    fs::create_directories(dir);
    StepTimer timer;

    SimulateArgs sim;
    sim.cfg.seed = std::uint64_t(cfg_num(cfg, "simulate.seed", 0));
    sim.cfg.grid_rows = int(cfg_num(cfg, "simulate.grid_rows", 4));
    sim.cfg.grid_cols = int(cfg_num(cfg, "simulate.grid_cols", 4));
    sim.cfg.sample_rate_hz = cfg_num(cfg, "simulate.sample_rate_hz", 10.0);
    sim.cfg.duration_s = cfg_num(cfg, "simulate.duration_s", 600.0);
    sim.cfg.target_snr_db = cfg_num(cfg, "simulate.target_snr_db", 15.0);
    sim.out_dir = (dir / "sim").string();
    do_simulate(sim);
    timer.lap("simulate");

    fs::path y_path = dir / "sim" / "y.ehgt";
    if (cfg_str(cfg, "preprocess.enabled", "false") == "true") {
        PreprocessArgs pre;
        pre.in_path = y_path.string();
        pre.out_path = (dir / "y_preprocessed.ehgt").string();
        pre.trim_seconds = cfg_num(cfg, "preprocess.trim_seconds", 0.0);
        pre.filter.order = int(cfg_num(cfg, "preprocess.order", 4));
        pre.filter.f_lo_hz = cfg_num(cfg, "preprocess.f_lo_hz", 0.05);
        pre.filter.f_hi_hz = cfg_num(cfg, "preprocess.f_hi_hz", 4.0);
        pre.decimate_factor = int(cfg_num(cfg, "preprocess.decimate", 1));
        do_preprocess(pre);
        y_path = fs::path(pre.out_path);
        timer.lap("preprocess");
    }

    EvaluateArgs ev;
    ev.in_path = y_path.string();
    // Preprocessing changes y away from s_true + x_true + e_true; scoring
    // still correlates against the untouched truth tensors.
    ev.s_true_path = (dir / "sim" / "s_true.ehgt").string();
    ev.x_true_path = (dir / "sim" / "x_true.ehgt").string();
    ev.methods = split_csv(cfg_str(
        cfg, "evaluate.methods", "vb-tucker,brtf-cp,rpca,pca,hosvd,cp-als,bipolar,wavelet"));
    ev.tune = split_csv(cfg_str(cfg, "evaluate.tune", "pca,hosvd,cp-als,rpca"));
    ev.runs = int(cfg_num(cfg, "evaluate.runs", 100));
    ev.out_dir = dir.string();
    do_evaluate(ev);
    timer.lap("evaluate");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust Bayesian tensor decomposition for EHG recordings"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* sub_sim = app.add_subcommand("simulate", "Generate a synthetic EHG recording");
    sub_sim->set_config("--config");
    sub_sim->add_option("--seed", sim.cfg.seed, "RNG seed");
    sub_sim->add_option("--rows", sim.cfg.grid_rows, "electrode grid rows");
    sub_sim->add_option("--cols", sim.cfg.grid_cols, "electrode grid columns");
    sub_sim->add_option("--fs", sim.cfg.sample_rate_hz, "sample rate [Hz]");
    sub_sim->add_option("--duration", sim.cfg.duration_s, "recording length [s]");
    sub_sim->add_option("--snr-db", sim.cfg.target_snr_db, "noise calibration target [dB]");
    sub_sim->add_option("--burst-duration", sim.cfg.burst.duration_s, "burst length [s]");
    sub_sim->add_option("--burst-onset", sim.cfg.burst.onset_s,
                        "burst onset on row 0 [s]; negative centers it");
    sub_sim->add_option("--out", sim.out_dir, "output directory")->required();

    PreprocessArgs pre;
    auto* sub_pre = app.add_subcommand("preprocess", "Trim, bandpass, and decimate");
    sub_pre->set_config("--config");
    sub_pre->add_option("--in", pre.in_path, "input tensor file")->required();
    sub_pre->add_option("--out", pre.out_path, "output tensor file")->required();
    sub_pre->add_option("--trim-seconds", pre.trim_seconds, "seconds dropped at the start");
    sub_pre->add_option("--order", pre.filter.order, "Butterworth order per pass");
    sub_pre->add_option("--f-lo", pre.filter.f_lo_hz, "bandpass low cutoff [Hz]");
    sub_pre->add_option("--f-hi", pre.filter.f_hi_hz, "bandpass high cutoff [Hz]");
    sub_pre->add_option("--decimate", pre.decimate_factor, "subsampling factor");
    sub_pre->add_flag("--skip-bandpass", pre.skip_bandpass, "no filtering, trim/decimate only");
    sub_pre->add_flag("--allow-aliasing", pre.allow_aliasing,
                      "decimate even without sufficient band limiting");

    DecomposeArgs dec;
    auto* sub_dec = app.add_subcommand("decompose", "Split a tensor into s/x/e parts");
    sub_dec->set_config("--config");
    sub_dec->add_option("--in", dec.in_path, "input tensor file")->required();
    sub_dec->add_option("--out", dec.out_dir, "output directory")->required();
    sub_dec
        ->add_option("--method", dec.spec.name,
                     "vb-tucker|brtf-cp|rpca|pca|hosvd|cp-als|bipolar|wavelet")
        ->default_val("vb-tucker");
    sub_dec->add_option("--seed", dec.spec.vb_opts.seed, "RNG seed");
    sub_dec->add_option("--rank", dec.rank_spec, "initial/target rank r1,r2,r3");
    sub_dec->add_option("--max-iters", dec.spec.vb_opts.max_iters, "iteration cap");
    sub_dec->add_option("--tol", dec.spec.vb_opts.tol, "relative convergence tolerance");
    sub_dec->add_option("--prune-threshold", dec.spec.vb_opts.prune_threshold,
                        "ARD precision ratio that drops a component");
    sub_dec->add_option("--pca-k", dec.spec.pca_k, "pca rank");
    sub_dec->add_option("--cp-rank", dec.spec.cp_rank, "cp-als rank");
    sub_dec->add_option("--rpca-lambda", dec.spec.rpca_lambda, "rpca sparsity weight");
    sub_dec->add_option("--wavelet-levels", dec.spec.wavelet_levels, "wavelet levels");

    EvaluateArgs ev;
    auto* sub_ev = app.add_subcommand("evaluate", "Score methods against truth/annotations");
    sub_ev->set_config("--config");
    sub_ev->add_option("--in", ev.in_path, "measurement tensor file")->required();
    sub_ev->add_option("--s-true", ev.s_true_path, "ground-truth localized tensor");
    sub_ev->add_option("--x-true", ev.x_true_path, "ground-truth distributed tensor");
    sub_ev->add_option("--annotations", ev.annotations_path, "interval JSON for SNR");
    sub_ev->add_option("--out", ev.out_dir, "output directory")->required();
    sub_ev->add_option("--methods", ev.methods, "methods to score")->delimiter(',');
    sub_ev->add_option("--tune", ev.tune, "methods tuned against truth")->delimiter(',');
    sub_ev->add_option("--runs", ev.runs, "seeds averaged for stochastic methods");
    sub_ev->add_option("--seed", ev.seed, "base seed for single-run methods");

    ScalogramArgs sg;
    auto* sub_sg = app.add_subcommand("scalogram", "Morlet scalogram of one electrode");
    sub_sg->set_config("--config");
    sub_sg->add_option("--in", sg.in_path, "input tensor file")->required();
    sub_sg->add_option("--out", sg.out_path, "output CSV file")->required();
    sub_sg->add_option("--row", sg.row, "electrode row");
    sub_sg->add_option("--col", sg.col, "electrode column");
    sub_sg->add_option("--f-min", sg.f_min, "lowest frequency [Hz]");
    sub_sg->add_option("--f-max", sg.f_max, "highest frequency [Hz]");
    sub_sg->add_option("--n-freqs", sg.n_freqs, "frequency count (log-spaced)");
    sub_sg->add_option("--cycles", sg.cycles, "Morlet cycle count");

    PipelineArgs pipe;
    auto* sub_pipe = app.add_subcommand("pipeline", "simulate + preprocess + evaluate");
    sub_pipe->add_option("--config", pipe.config_path, "pipeline config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sub_sim->parsed()) do_simulate(sim);
        if (sub_pre->parsed()) do_preprocess(pre);
        if (sub_dec->parsed()) do_decompose(dec);
        if (sub_ev->parsed()) do_evaluate(ev);
        if (sub_sg->parsed()) do_scalogram(sg);
        if (sub_pipe->parsed()) do_pipeline(pipe);
    } catch (const ehg::ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ehg::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ehg::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ehg::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ehg::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
