#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <png.h>

#include "CLI11.hpp"

namespace fs = std::filesystem;

namespace mccs::cli {

// ---------------------------------------------------------------------------
// Strict config reading.

ConfigReader::ConfigReader(const json &j, std::string path) : obj_(j), path_(std::move(path)) {
    if (!obj_.is_object())
        throw ConfigError("config" + (path_.empty() ? std::string() : " at " + path_) +
                          ": expected an object");
}

std::string ConfigReader::where(const char *key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
}

const json *ConfigReader::find(const char *key) {
    seen_.emplace_back(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
}

bool ConfigReader::has(const char *key) const { return obj_.contains(key); }

void ConfigReader::read(const char *key, double &out) {
    if (const json *v = find(key)) {
        if (v->is_string() && (*v == "inf" || *v == "infinity")) {
            out = std::numeric_limits<double>::infinity();
            return;
        }
        if (!v->is_number()) throw ConfigError("config " + where(key) + ": expected a number");
        out = v->get<double>();
    }
}

void ConfigReader::read(const char *key, int &out) {
    Index wide = out;
    read(key, wide);
    if (wide < std::numeric_limits<int>::min() || wide > std::numeric_limits<int>::max())
        throw ConfigError("config " + where(key) + ": integer out of range");
    out = static_cast<int>(wide);
}

void ConfigReader::read(const char *key, Index &out) {
    if (const json *v = find(key)) {
        if (!v->is_number_integer())
            throw ConfigError("config " + where(key) + ": expected an integer");
        out = v->get<Index>();
    }
}

void ConfigReader::read(const char *key, std::uint64_t &out) {
    if (const json *v = find(key)) {
        if (!v->is_number_unsigned())
            throw ConfigError("config " + where(key) + ": expected a nonnegative integer");
        out = v->get<std::uint64_t>();
    }
}

void ConfigReader::read(const char *key, std::optional<std::uint64_t> &out) {
    if (!has(key)) {
        find(key);
        return;
    }
    std::uint64_t v = 0;
    read(key, v);
    out = v;
}

void ConfigReader::read(const char *key, bool &out) {
    if (const json *v = find(key)) {
        if (!v->is_boolean()) throw ConfigError("config " + where(key) + ": expected true or false");
        out = v->get<bool>();
    }
}

void ConfigReader::read(const char *key, std::string &out) {
    if (const json *v = find(key)) {
        if (!v->is_string()) throw ConfigError("config " + where(key) + ": expected a string");
        out = v->get<std::string>();
    }
}

void ConfigReader::read(const char *key, std::optional<std::string> &out) {
    if (const json *v = find(key)) {
        if (v->is_null()) {
            out.reset();
            return;
        }
        if (!v->is_string()) throw ConfigError("config " + where(key) + ": expected a string");
        out = v->get<std::string>();
    }
}

ConfigReader ConfigReader::child(const char *key) {
    const json *v = find(key);
    if (!v) return ConfigReader(json::object(), where(key));
    if (!v->is_object()) throw ConfigError("config " + where(key) + ": expected an object");
    return ConfigReader(*v, where(key));
}

void ConfigReader::finish() const {
    for (const auto &item : obj_.items())
        if (std::find(seen_.begin(), seen_.end(), item.key()) == seen_.end())
            throw ConfigError("config " + where(item.key().c_str()) + ": unknown key");
}

json parse_config_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
}

namespace {

void read_recon(ConfigReader r, ReconConfig &c) {
    r.read("lambda_x", c.lambda_x);
    r.read("lambda_s", c.lambda_s);
    r.read("lambda_s_tilde", c.lambda_s_tilde);
    r.read("relative_weights", c.relative_weights);
    r.read("cutoff", c.cutoff);
    r.read("outer_iterations", c.outer_iterations);
    r.read("pdhg_iterations", c.pdhg_iterations);
    r.read("fista_iterations", c.fista_iterations);
    r.read("baseline_fista_iterations", c.baseline_fista_iterations);
    r.read("wavelet_levels", c.wavelet_levels);
    r.read("lpf_sigma", c.lpf_sigma);
    r.read("seed", c.seed);
    r.read("warm_start_dual", c.warm_start_dual);
    {
        ConfigReader f = r.child("fista");
        f.read("r", c.fista.r);
        f.read("s", c.fista.s);
        f.read("tol", c.fista.tol);
        f.read("min_step", c.fista.min_step);
        std::string restart = c.fista.restart == FistaRestart::appendix ? "appendix" : "gradient_mapping";
        f.read("restart", restart);
        if (restart == "appendix")
            c.fista.restart = FistaRestart::appendix;
        else if (restart == "gradient_mapping")
            c.fista.restart = FistaRestart::gradient_mapping;
        else
            throw ConfigError("config recon.fista.restart: expected gradient_mapping or appendix, got '" +
                              restart + "'");
        f.finish();
    }
    {
        ConfigReader p = r.child("pdhg");
        p.read("beta", c.pdhg.beta);
        p.read("mu", c.pdhg.mu);
        p.read("delta", c.pdhg.delta);
        p.read("max_inner", c.pdhg.max_inner);
        p.read("power_iterations", c.pdhg.power_iterations);
        p.read("tol", c.pdhg.tol);
        p.finish();
    }
    r.finish();
    try {
        c.validate();
    } catch (const ConfigError &e) {
        throw ConfigError(std::string("config recon: ") + e.what());
    }
}

} // namespace

SimulateConfig parse_simulate(const json &j) {
    SimulateConfig c;
    ConfigReader r(j, "");
    r.read("rows", c.rows);
    r.read("cols", c.cols);
    r.read("fov", c.fov);
    r.read("rank", c.rank);
    r.read("snr", c.snr);
    r.read("noise_correlation", c.noise_correlation);
    r.read("seed", c.seed);
    r.read("noise_seed", c.noise_seed);
    {
        ConfigReader g = r.child("coils");
        g.read("count", c.coils.coils);
        g.read("ring_diameter", c.coils.ring_diameter);
        g.read("loop_radius", c.coils.loop_radius);
        g.read("segments", c.coils.segments);
        g.read("plane_offset", c.coils.plane_offset);
        g.finish();
    }
    {
        ConfigReader m = r.child("mask");
        m.read("fraction", c.mask_fraction);
        m.read("stddev", c.mask_stddev);
        m.read("seed", c.mask_seed);
        m.finish();
    }
    r.finish();

    c.noiseless = !std::isfinite(c.snr) || c.snr <= 0.0;
    if (c.rows < 32 || c.cols < 32) throw ConfigError("config rows/cols: need at least 32");
    if (!(c.fov > 0.0)) throw ConfigError("config fov: must be positive");
    if (c.rank < 1 || c.rank > c.coils.coils)
        throw ConfigError("config rank: must lie in [1, coils.count]");
    if (!(c.noise_correlation >= 0.0 && c.noise_correlation < 1.0))
        throw ConfigError("config noise_correlation: must lie in [0, 1)");
    try {
        c.coils.validate();
    } catch (const ConfigError &e) {
        throw ConfigError(std::string("config coils: ") + e.what());
    }
    MaskSpec spec;
    spec.rows = c.rows;
    spec.cols = c.cols;
    spec.fraction = c.mask_fraction;
    spec.stddev = c.mask_stddev;
    try {
        spec.validate();
    } catch (const Error &e) {
        throw ConfigError(std::string("config mask: ") + e.what());
    }
    return c;
}

MaskConfig parse_mask(const json &j) {
    MaskConfig c;
    ConfigReader r(j, "");
    r.read("rows", c.spec.rows);
    r.read("cols", c.spec.cols);
    r.read("fraction", c.spec.fraction);
    r.read("stddev", c.spec.stddev);
    r.read("seed", c.spec.seed);
    r.finish();
    try {
        c.spec.validate();
    } catch (const Error &e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

ReconstructConfig parse_reconstruct(const json &j) {
    ReconstructConfig c;
    ConfigReader r(j, "");
    r.read("kspace", c.kspace);
    r.read("maps", c.maps);
    r.read("init_maps", c.init_maps);
    r.read("reference", c.reference);
    r.read("method", c.method);
    r.read("noise_correlation", c.noise_correlation);
    read_recon(r.child("recon"), c.recon);
    r.finish();
    if (c.kspace.empty()) throw ConfigError("config kspace: input path is required");
    if (c.method != "zf-sos" && c.method != "sparsesense" && c.method != "mccs")
        throw ConfigError("config method: unknown method '" + c.method +
                          "' (expected zf-sos, sparsesense or mccs)");
    if (!(c.noise_correlation >= 0.0 && c.noise_correlation < 1.0))
        throw ConfigError("config noise_correlation: must lie in [0, 1)");
    return c;
}

// ---------------------------------------------------------------------------
// Serialization of resolved configs.

json to_json(const SimulateConfig &c) {
    json j;
    j["rows"] = c.rows;
    j["cols"] = c.cols;
    j["fov"] = c.fov;
    j["rank"] = c.rank;
    j["snr"] = c.noiseless ? json("inf") : json(c.snr);
    j["noise_correlation"] = c.noise_correlation;
    j["seed"] = c.seed;
    j["noise_seed"] = c.resolved_noise_seed();
    j["coils"] = {{"count", c.coils.coils},
                  {"ring_diameter", c.coils.ring_diameter},
                  {"loop_radius", c.coils.loop_radius},
                  {"segments", c.coils.segments},
                  {"plane_offset", c.coils.plane_offset}};
    j["mask"] = {{"fraction", c.mask_fraction},
                 {"stddev", c.mask_stddev},
                 {"seed", c.resolved_mask_seed()}};
    return j;
}

json to_json(const MaskSpec &m) {
    return {{"rows", m.rows},
            {"cols", m.cols},
            {"fraction", m.fraction},
            {"stddev", m.stddev},
            {"seed", m.seed}};
}

json to_json(const ReconConfig &c) {
    json j;
    j["lambda_x"] = c.lambda_x;
    j["lambda_s"] = c.lambda_s;
    j["lambda_s_tilde"] = c.lambda_s_tilde;
    j["relative_weights"] = c.relative_weights;
    j["cutoff"] = c.cutoff;
    j["outer_iterations"] = c.outer_iterations;
    j["pdhg_iterations"] = c.pdhg_iterations;
    j["fista_iterations"] = c.fista_iterations;
    j["baseline_fista_iterations"] = c.baseline_fista_iterations;
    j["wavelet_levels"] = c.wavelet_levels;
    j["lpf_sigma"] = c.lpf_sigma;
    j["seed"] = c.seed;
    j["warm_start_dual"] = c.warm_start_dual;
    j["fista"] = {{"r", c.fista.r}, {"s", c.fista.s}, {"tol", c.fista.tol}, {"min_step", c.fista.min_step},
                 {"restart", c.fista.restart == FistaRestart::appendix ? "appendix" : "gradient_mapping"}};
    j["pdhg"] = {{"beta", c.pdhg.beta},
                 {"mu", c.pdhg.mu},
                 {"delta", c.pdhg.delta},
                 {"max_inner", c.pdhg.max_inner},
                 {"power_iterations", c.pdhg.power_iterations},
                 {"tol", c.pdhg.tol}};
    return j;
}

json to_json(const ReconstructConfig &c) {
    json j;
    j["kspace"] = c.kspace;
    j["maps"] = c.maps ? json(*c.maps) : json(nullptr);
    j["init_maps"] = c.init_maps;
    j["reference"] = c.reference ? json(*c.reference) : json(nullptr);
    j["method"] = c.method;
    j["noise_correlation"] = c.noise_correlation;
    j["recon"] = to_json(c.recon);
    return j;
}

json to_json(const ImageMetrics &m) {
    return {{"mse", m.mse},
            {"mse_unfit", m.mse_unfit},
            {"psnr_db", std::isfinite(m.psnr_db) ? json(m.psnr_db) : json("inf")},
            {"scale", {m.scale.real(), m.scale.imag()}}};
}

void write_json(const json &j, const std::string &path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError(path, "write failed");
}

CMat correlated_covariance(Index coils, double rho) {
    CMat n(coils, coils);
    for (Index i = 0; i < coils; ++i)
        for (Index j = 0; j < coils; ++j)
            n(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    return n;
}

// ---------------------------------------------------------------------------
// Commands.

namespace {

std::string join(const std::string &dir, const char *name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(dir, "cannot create output directory: " + ec.message());
}

} // namespace

void cmd_simulate(const SimulateConfig &c, const std::string &out_dir) {
    ensure_dir(out_dir);
    const ComplexGrid phantom = shepp_logan_phantom(c.rows, c.cols);
    const BiotSavartResult field = biot_savart_maps(c.coils, c.rows, c.cols, c.fov);
    const SensitivityMaps maps = couple_maps_rank(field.maps, c.rank);
    MaskSpec spec;
    spec.rows = c.rows;
    spec.cols = c.cols;
    spec.fraction = c.mask_fraction;
    spec.stddev = c.mask_stddev;
    spec.seed = c.resolved_mask_seed();
    const SamplingMask mask = laplacian_mask(spec);
    const CMat cov = correlated_covariance(c.coils.coils, c.noise_correlation);
    const double snr = c.noiseless ? std::numeric_limits<double>::infinity() : c.snr;
    const MultiCoilKSpace b = synthesize_kspace(phantom, maps, mask, cov, snr, c.resolved_noise_seed());

    save_tensor(phantom, join(out_dir, "phantom.cxt"));
    save_tensor(maps.stack(), join(out_dir, "maps.cxt"));
    save_tensor(mask, join(out_dir, "mask.cxt"));
    save_tensor(b, join(out_dir, "kspace.cxt"));

    json manifest;
    manifest["command"] = "simulate";
    manifest["config"] = to_json(c);
    manifest["seed"] = c.seed;
    manifest["files"] = {"phantom.cxt", "maps.cxt", "mask.cxt", "kspace.cxt"};
    manifest["field_normalization"] = field.normalization;
    manifest["wire_clamped"] = field.clamped;
    manifest["mask_fraction_realized"] = mask.fraction();
    manifest["dc_scale"] = b.dc_scale();
    write_json(manifest, join(out_dir, "manifest.json"));
}

void cmd_mask(const MaskConfig &c, const std::string &out_dir) {
    ensure_dir(out_dir);
    const SamplingMask mask = laplacian_mask(c.spec);
    save_tensor(mask, join(out_dir, "mask.cxt"));
    json manifest;
    manifest["command"] = "mask";
    manifest["config"] = to_json(c.spec);
    manifest["seed"] = c.spec.seed;
    manifest["files"] = {"mask.cxt"};
    manifest["mask_fraction_realized"] = mask.fraction();
    write_json(manifest, join(out_dir, "manifest.json"));
}

json cmd_reconstruct(const ReconstructConfig &c, const std::string &out_dir) {
    ensure_dir(out_dir);
    const MultiCoilKSpace b = load_as<MultiCoilKSpace>(c.kspace);
    const NoiseCovariance noise =
        cholesky_whitener(correlated_covariance(b.coils(), c.noise_correlation));

    json report;
    report["command"] = "reconstruct";
    report["config"] = to_json(c);
    report["method"] = c.method;

    ComplexGrid image;
    const auto start = std::chrono::steady_clock::now();
    if (c.method == "zf-sos") {
        image = zero_filled_sos(b);
        report["trace"] = json::array();
        report["iterations"] = json::array();
    } else if (c.method == "sparsesense") {
        SensitivityMaps maps;
        if (c.maps) {
            const CoilStack stack = load_as<CoilStack>(*c.maps);
            maps = SensitivityMaps(stack);
        } else if (c.init_maps) {
            maps = init_sensitivity(b, c.recon.lpf_sigma);
        } else {
            throw ConfigError("config maps: sparsesense needs a maps file or init_maps = true");
        }
        if (maps.coils() != b.coils() || maps.rows() != b.rows() || maps.cols() != b.cols())
            throw DimensionError("sensitivity maps do not match the k-space data");
        c.recon.validate();
        const auto solve = solve_image_subproblem_traced(
            b, maps, noise, ComplexGrid(b.rows(), b.cols()), c.recon, c.recon.baseline_fista_iterations);
        image = solve.image;
        json objective = json::array();
        for (const auto &it : solve.trace.iterations) objective.push_back(it.objective);
        report["trace"] = objective;
        report["iterations"] = {{{"fista_iterations", solve.trace.iterations.size()}}};
    } else {
        const ReconResult res = mccs_reconstruct(b, noise, c.recon);
        image = res.image;
        save_tensor(res.maps.stack(), join(out_dir, "maps.cxt"));
        report["trace"] = res.trace;
        json iters = json::array();
        for (const auto &d : res.details)
            iters.push_back({{"objective", d.objective},
                             {"pdhg_iterations", d.pdhg_iterations},
                             {"pdhg_inner_caps", d.pdhg_inner_caps},
                             {"fista_iterations", d.fista_iterations},
                             {"fista_restarts", d.fista_restarts}});
        report["iterations"] = iters;
    }
    report["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    save_tensor(image, join(out_dir, "recon.cxt"));
    if (c.reference) {
        const ComplexGrid ref = load_as<ComplexGrid>(*c.reference);
        report["metrics"] = to_json(evaluate_images(image, ref));
    }
    report["files"] = c.method == "mccs" ? json{"recon.cxt", "maps.cxt"} : json{"recon.cxt"};
    write_json(report, join(out_dir, "report.json"));
    return report;
}

json cmd_evaluate(const std::string &recon, const std::string &reference) {
    const ComplexGrid a = load_as<ComplexGrid>(recon);
    const ComplexGrid b = load_as<ComplexGrid>(reference);
    json j = to_json(evaluate_images(a, b));
    j["recon"] = recon;
    j["reference"] = reference;
    return j;
}

namespace {

void write_png_gray(const std::string &path, Index rows, Index cols,
                    const std::vector<unsigned char> &pixels) {
    FILE *fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError(path, "cannot open for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, nullptr);
        std::fclose(fp);
        throw IoError(path, "libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError(path, "libpng write failed");
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (Index r = 0; r < rows; ++r)
        png_write_row(png, const_cast<png_bytep>(pixels.data() + r * cols));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

} // namespace

void cmd_export_png(const std::string &grid, const std::string &out, double lo, double hi) {
    if (!(hi > lo)) throw ConfigError("export-png: window needs hi > lo");
    const ComplexGrid g = load_as<ComplexGrid>(grid);
    std::vector<unsigned char> px(static_cast<std::size_t>(g.size()));
    for (Index i = 0; i < g.size(); ++i) {
        const double v = std::clamp((std::abs(g.values()(i)) - lo) / (hi - lo), 0.0, 1.0);
        px[static_cast<std::size_t>(i)] = static_cast<unsigned char>(std::lround(255.0 * v));
    }
    write_png_gray(out, g.rows(), g.cols(), px);
}

void cmd_export_png(const std::string &grid, const std::string &out) {
    const ComplexGrid g = load_as<ComplexGrid>(grid);
    const double hi = g.values().cwiseAbs().maxCoeff();
    cmd_export_png(grid, out, 0.0, hi > 0.0 ? hi : 1.0);
}

// ---------------------------------------------------------------------------
// Command line.

int run(int argc, char **argv) {
    CLI::App app{"Multi-coil compressed sensing MRI reconstruction"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", method;
    std::uint64_t seed = 0;

    auto *sim = app.add_subcommand("simulate", "Simulate phantom, coil maps, mask and k-space");
    sim->add_option("--config", config_path, "JSON config");
    sim->add_option("--seed", seed, "Overrides the config seed");
    sim->add_option("--out", out_dir, "Output directory");

    auto *msk = app.add_subcommand("mask", "Draw a variable-density sampling mask");
    msk->add_option("--config", config_path, "JSON config");
    msk->add_option("--seed", seed, "Overrides the config seed");
    msk->add_option("--out", out_dir, "Output directory");

    auto *rec = app.add_subcommand("reconstruct", "Reconstruct an image from k-space");
    rec->add_option("--config", config_path, "JSON config")->required();
    rec->add_option("--method", method, "zf-sos, sparsesense or mccs");
    rec->add_option("--seed", seed, "Overrides the recon seed");
    rec->add_option("--out", out_dir, "Output directory");

    std::string recon_path, reference_path, metrics_path;
    auto *eva = app.add_subcommand("evaluate", "Scalar-fitted MSE against a reference");
    eva->add_option("recon", recon_path, "Reconstruction grid")->required();
    eva->add_option("reference", reference_path, "Reference grid")->required();
    eva->add_option("--out", metrics_path, "Write the metrics JSON here");

    std::string grid_path, png_path;
    std::vector<double> window;
    auto *png = app.add_subcommand("export-png", "Windowed 8-bit magnitude image");
    png->add_option("grid", grid_path, "Image grid")->required();
    png->add_option("png", png_path, "Output file")->required();
    png->add_option("--window", window, "lo hi")->expected(2);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        const auto base_dir = [&] {
            return config_path.empty() ? fs::path(".") : fs::path(config_path).parent_path();
        };
        // Relative input paths in a config are relative to the config file.
        const auto resolve = [&](const std::string &p) {
            const fs::path path(p);
            return path.is_absolute() ? p : (base_dir() / path).lexically_normal().string();
        };
        if (*sim) {
            SimulateConfig c = parse_simulate(config_path.empty() ? json::object() : parse_config_file(config_path));
            if (sim->count("--seed")) c.seed = seed;
            cmd_simulate(c, out_dir);
        } else if (*msk) {
            MaskConfig c = parse_mask(config_path.empty() ? json::object() : parse_config_file(config_path));
            if (msk->count("--seed")) c.spec.seed = seed;
            cmd_mask(c, out_dir);
        } else if (*rec) {
            json j = parse_config_file(config_path);
            if (rec->count("--method") && j.is_object()) j["method"] = method;
            ReconstructConfig c = parse_reconstruct(j);
            if (rec->count("--seed")) c.recon.seed = seed;
            c.kspace = resolve(c.kspace);
            if (c.maps) c.maps = resolve(*c.maps);
            if (c.reference) c.reference = resolve(*c.reference);
            const json report = cmd_reconstruct(c, out_dir);
            if (report.contains("metrics"))
                std::cout << "mse " << report["metrics"]["mse"].get<double>() << '\n';
        } else if (*eva) {
            const json m = cmd_evaluate(recon_path, reference_path);
            if (!metrics_path.empty()) write_json(m, metrics_path);
            std::cout << m.dump(2) << '\n';
        } else if (*png) {
            if (window.empty())
                cmd_export_png(grid_path, png_path);
            else
                cmd_export_png(grid_path, png_path, window[0], window[1]);
        }
    } catch (const ConfigError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return runtime_failure;
    }
    return ok;
}

} // namespace mccs::cli
