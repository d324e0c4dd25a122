#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mccs/mccs.hpp"

namespace mccs::cli {

using nlohmann::json;

enum ExitCode : int { ok = 0, config_error = 2, runtime_failure = 3 };

/// Reads one JSON object, refusing unknown keys and wrong types. Errors name
/// the dotted field path.
class ConfigReader {
  public:
    ConfigReader(const json &j, std::string path);

    void read(const char *key, double &out);
    void read(const char *key, int &out);
    void read(const char *key, Index &out);
    void read(const char *key, std::uint64_t &out);
    void read(const char *key, std::optional<std::uint64_t> &out);
    void read(const char *key, bool &out);
    void read(const char *key, std::string &out);
    void read(const char *key, std::optional<std::string> &out);

    bool has(const char *key) const;
    ConfigReader child(const char *key);
    /// Throws ConfigError for every key that was never read.
    void finish() const;

  private:
    const json *find(const char *key);
    std::string where(const char *key) const;

    json obj_;
    std::string path_;
    std::vector<std::string> seen_;
};

json parse_config_file(const std::string &path);

struct SimulateConfig {
    Index rows = 64, cols = 64;
    double fov = 0.24; ///< field of view of the image grid [m]
    CoilGeometry coils{};
    Index rank = 5;    ///< coil coupling rank; equal to the coil count disables it
    double snr = 30.0; ///< <= 0 or "inf" means noiseless
    bool noiseless = false;
    double noise_correlation = 0.0; ///< N_ij = rho^|i-j|
    double mask_fraction = 0.25;
    double mask_stddev = 0.3;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> mask_seed; ///< defaults to seed
    std::optional<std::uint64_t> noise_seed; ///< defaults to seed + 1

    std::uint64_t resolved_mask_seed() const { return mask_seed.value_or(seed); }
    std::uint64_t resolved_noise_seed() const { return noise_seed.value_or(seed + 1); }
};

struct MaskConfig {
    MaskSpec spec{};
};

struct ReconstructConfig {
    std::string kspace;
    std::optional<std::string> maps;      ///< fixed maps for sparsesense
    bool init_maps = false;               ///< sparsesense with init_sensitivity maps
    std::optional<std::string> reference; ///< phantom for metrics in the report
    std::string method = "mccs";
    double noise_correlation = 0.0;
    ReconConfig recon{};
};

SimulateConfig parse_simulate(const json &j);
MaskConfig parse_mask(const json &j);
ReconstructConfig parse_reconstruct(const json &j);

json to_json(const SimulateConfig &c);
json to_json(const MaskSpec &m);
json to_json(const ReconConfig &c);
json to_json(const ReconstructConfig &c);
json to_json(const ImageMetrics &m);

CMat correlated_covariance(Index coils, double rho);

/// Writes phantom.cxt, maps.cxt, mask.cxt, kspace.cxt and manifest.json.
void cmd_simulate(const SimulateConfig &c, const std::string &out_dir);
/// Writes mask.cxt and manifest.json.
void cmd_mask(const MaskConfig &c, const std::string &out_dir);
/// Writes recon.cxt, report.json and, for mccs, maps.cxt. Returns the report.
json cmd_reconstruct(const ReconstructConfig &c, const std::string &out_dir);
json cmd_evaluate(const std::string &recon, const std::string &reference);
void cmd_export_png(const std::string &grid, const std::string &out, double lo, double hi);
/// Window [0, max |grid|].
void cmd_export_png(const std::string &grid, const std::string &out);

void write_json(const json &j, const std::string &path);

/// Full command line entry point; maps errors to exit codes.
int run(int argc, char **argv);

} // namespace mccs::cli
