#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evomap/io.hpp"
#include "evomap/map_elites.hpp"

namespace evomap {

// Full CLI-facing configuration: the search parameters plus orchestration.
struct CliConfig {
    RunConfig run;
    std::string out_dir;
};

namespace config_detail {

inline double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid value for key '" + key + "': " + value);
    }
}

inline long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid value for key '" + key + "': " + value);
    }
}

}  // namespace config_detail

// Applies one key=value setting; throws naming the key on anything unknown
// or malformed.
inline void apply_config_key(CliConfig& cfg, const std::string& key,
                             const std::string& value) {
    using config_detail::parse_int;
    using config_detail::parse_real;
    if (key == "mode") {
        if (value == "static")
            cfg.run.mode = ArchiveMode::Static;
        else if (value == "dynamic")
            cfg.run.mode = ArchiveMode::Dynamic;
        else
            throw std::invalid_argument("invalid value for key 'mode': " + value +
                                        " (expected static or dynamic)");
    } else if (key == "seed") {
        cfg.run.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "iterations") {
        cfg.run.iterations = static_cast<int>(parse_int(key, value));
    } else if (key == "wall_clock_seconds") {
        cfg.run.wall_clock_seconds = parse_real(key, value);
    } else if (key == "batch_size") {
        cfg.run.batch_size = static_cast<int>(parse_int(key, value));
    } else if (key == "bootstrap_size") {
        cfg.run.bootstrap_size = static_cast<int>(parse_int(key, value));
    } else if (key == "env_mutation_prob") {
        cfg.run.env_mutation_prob = parse_real(key, value);
    } else if (key == "bit_flip_prob") {
        cfg.run.bit_flip_prob = parse_real(key, value);
    } else if (key == "insert_threshold") {
        cfg.run.insert_threshold = parse_real(key, value);
    } else if (key == "retrain_interval") {
        cfg.run.retrain_interval = static_cast<int>(parse_int(key, value));
    } else if (key == "ae_epochs") {
        cfg.run.ae_epochs = static_cast<int>(parse_int(key, value));
    } else if (key == "ae_batch_size") {
        cfg.run.ae_batch_size = static_cast<int>(parse_int(key, value));
    } else if (key == "ae_learning_rate") {
        cfg.run.ae_learning_rate = parse_real(key, value);
    } else if (key == "workers") {
        cfg.run.workers = static_cast<int>(parse_int(key, value));
    } else if (key == "snapshot_interval") {
        cfg.run.snapshot_interval = static_cast<int>(parse_int(key, value));
    } else if (key == "sim.timestep") {
        cfg.run.sim.timestep = parse_real(key, value);
    } else if (key == "sim.gravity") {
        cfg.run.sim.gravity = parse_real(key, value);
    } else if (key == "sim.max_steps") {
        cfg.run.sim.max_steps = static_cast<int>(parse_int(key, value));
    } else if (key == "sim.line_speed") {
        cfg.run.sim.line_speed = parse_real(key, value);
    } else if (key == "sim.motor_gain") {
        cfg.run.sim.motor_gain = parse_real(key, value);
    } else if (key == "sim.max_motor_torque") {
        cfg.run.sim.max_motor_torque = parse_real(key, value);
    } else if (key == "sim.friction") {
        cfg.run.sim.friction = parse_real(key, value);
    } else if (key == "sim.settle_steps") {
        cfg.run.sim.settle_steps = static_cast<int>(parse_int(key, value));
    } else if (key == "out_dir") {
        cfg.out_dir = value;
    } else {
        throw std::invalid_argument("unknown config key: " + key);
    }
}

// Flat key=value file; blank lines and '#' comments allowed.
inline void apply_config_file(CliConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::size_t begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        std::size_t end = line.find_last_not_of(" \t\r");
        line = line.substr(begin, end - begin + 1);
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                        ": expected key=value, got '" + line + "'");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto strip = [](std::string s) {
            std::size_t b = s.find_first_not_of(" \t");
            std::size_t e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        apply_config_key(cfg, strip(key), strip(value));
    }
}

// Precedence: flags override file values override defaults. The output
// directory may additionally be overridden by the EVOMAP_OUT environment
// variable.
inline CliConfig parse_config(const std::optional<std::filesystem::path>& config_file,
                              const std::vector<std::pair<std::string, std::string>>& flags) {
    CliConfig cfg;
    if (config_file) apply_config_file(cfg, *config_file);
    for (const auto& [key, value] : flags) apply_config_key(cfg, key, value);
    if (const char* env = std::getenv("EVOMAP_OUT")) cfg.out_dir = env;
    cfg.run.validate();
    return cfg;
}

// Effective-config echo; together with the seed this fully determines the
// run output.
inline std::string config_to_text(const CliConfig& cfg) {
    std::ostringstream out;
    const RunConfig& r = cfg.run;
    out << "mode=" << (r.mode == ArchiveMode::Static ? "static" : "dynamic") << "\n";
    out << "seed=" << r.seed << "\n";
    out << "iterations=" << r.iterations << "\n";
    out << "wall_clock_seconds=" << io::format_real(r.wall_clock_seconds) << "\n";
    out << "batch_size=" << r.batch_size << "\n";
    out << "bootstrap_size=" << r.bootstrap_size << "\n";
    out << "env_mutation_prob=" << io::format_real(r.env_mutation_prob) << "\n";
    out << "bit_flip_prob=" << io::format_real(r.bit_flip_prob) << "\n";
    out << "insert_threshold=" << io::format_real(r.insert_threshold) << "\n";
    out << "retrain_interval=" << r.retrain_interval << "\n";
    out << "ae_epochs=" << r.ae_epochs << "\n";
    out << "ae_batch_size=" << r.ae_batch_size << "\n";
    out << "ae_learning_rate=" << io::format_real(r.ae_learning_rate) << "\n";
    out << "workers=" << r.workers << "\n";
    out << "snapshot_interval=" << r.snapshot_interval << "\n";
    out << "sim.timestep=" << io::format_real(r.sim.timestep) << "\n";
    out << "sim.gravity=" << io::format_real(r.sim.gravity) << "\n";
    out << "sim.max_steps=" << r.sim.max_steps << "\n";
    out << "sim.line_speed=" << io::format_real(r.sim.line_speed) << "\n";
    out << "sim.motor_gain=" << io::format_real(r.sim.motor_gain) << "\n";
    out << "sim.max_motor_torque=" << io::format_real(r.sim.max_motor_torque) << "\n";
    out << "sim.friction=" << io::format_real(r.sim.friction) << "\n";
    out << "sim.settle_steps=" << r.sim.settle_steps << "\n";
    out << "out_dir=" << cfg.out_dir << "\n";
    return out.str();
}

}  // namespace evomap
