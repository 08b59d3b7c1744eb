// Command-line surface: batch runs, post-hoc reports, and replay of stored
// champions.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "evomap/analysis.hpp"
#include "evomap/config.hpp"
#include "evomap/io.hpp"
#include "evomap/map_elites.hpp"
#include "evomap/render.hpp"

namespace fs = std::filesystem;
using namespace evomap;

namespace {

std::string snapshot_dir_name(int iteration) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "snapshot_%06d", iteration);
    return buf;
}

int cmd_run(const std::optional<std::string>& config_file,
            const std::vector<std::pair<std::string, std::string>>& flags) {
    CliConfig cfg = parse_config(
        config_file ? std::optional<fs::path>(*config_file) : std::nullopt, flags);
    if (cfg.out_dir.empty())
        throw std::invalid_argument("missing required key 'out_dir' (or --out flag)");

    fs::path out(cfg.out_dir);
    fs::create_directories(out);
    io::write_file(out / "config.txt", config_to_text(cfg));

    Recorders recorders;
    MapElites search(cfg.run);
    search.set_observer([&recorders](const Pair& p) { recorders.observe(p); });
    search.set_snapshot_hook([&out](int iteration, const Archive& archive, const Mlp* ae) {
        io::write_snapshot(out / snapshot_dir_name(iteration), archive, ae);
    });

    RunResult result = search.run();

    io::write_run_log(out / "runlog.csv", result.log);
    io::write_reference_map(out / "reference_map.csv", recorders.reference);
    io::write_environment_archive(out, "found", recorders.found);
    io::write_environment_archive(out, "solved", recorders.solved);

    RunStats stats = summarize(recorders.reference, recorders.found, recorders.solved);
    io::write_difficulty_histogram(out / "difficulty_hist_found.csv",
                                   stats.found_difficulty_histogram);
    io::write_difficulty_histogram(out / "difficulty_hist_solved.csv",
                                   stats.solved_difficulty_histogram);

    std::cout << "run complete: " << result.evaluations << " evaluations, archive coverage "
              << result.archive.occupancy() << "/" << kArchiveGrid * kArchiveGrid
              << ", max fitness " << result.archive.max_fitness() << "\n";
    std::cout << "output written to " << out.string() << "\n";
    return 0;
}

fs::path latest_snapshot(const fs::path& run_dir) {
    std::vector<fs::path> snapshots;
    for (const auto& entry : fs::directory_iterator(run_dir))
        if (entry.is_directory() &&
            entry.path().filename().string().starts_with("snapshot_"))
            snapshots.push_back(entry.path());
    if (snapshots.empty())
        throw std::runtime_error("no snapshot directories found in " + run_dir.string());
    std::sort(snapshots.begin(), snapshots.end());
    return snapshots.back();
}

int cmd_report(const std::string& run_dir_str) {
    fs::path run_dir(run_dir_str);
    if (!fs::exists(run_dir))
        throw std::runtime_error("run directory does not exist: " + run_dir_str);

    fs::path snapshot = latest_snapshot(run_dir);
    std::vector<io::SnapshotEntry> entries = io::read_snapshot(snapshot);

    // archive map image
    std::vector<std::vector<std::optional<double>>> grid(
        kArchiveGrid, std::vector<std::optional<double>>(kArchiveGrid));
    double max_fitness = 0.0;
    for (const auto& e : entries) {
        grid[e.cell.row][e.cell.col] = e.pair.fitness;
        max_fitness = std::max(max_fitness, e.pair.fitness);
    }
    render::render_fitness_grid(grid, std::max(max_fitness, 1.0), 16)
        .save(run_dir / "archive_map.ppm");

    // reference map image
    fs::path ref_path = run_dir / "reference_map.csv";
    if (!fs::exists(ref_path))
        throw std::runtime_error("missing reference map csv: " + ref_path.string());
    std::vector<std::vector<std::optional<double>>> ref(
        kReferenceGrid, std::vector<std::optional<double>>(kReferenceGrid));
    double ref_max = 0.0;
    int ref_occupied = 0;
    double ref_sum = 0.0;
    {
        std::ifstream in(ref_path);
        std::string line;
        if (!std::getline(in, line) || line != "row,col,fitness")
            throw std::runtime_error("corrupt reference map csv: " + ref_path.string());
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            int row, col;
            double fitness;
            if (std::sscanf(line.c_str(), "%d,%d,%lf", &row, &col, &fitness) != 3)
                throw std::runtime_error("corrupt reference map row: " + line);
            ref[row][col] = fitness;
            ref_max = std::max(ref_max, fitness);
            ref_sum += fitness;
            ++ref_occupied;
        }
    }
    render::render_fitness_grid(ref, std::max(ref_max, 1.0), 4)
        .save(run_dir / "reference_map.ppm");

    // difficulty histogram images
    for (const char* name : {"found", "solved"}) {
        fs::path hist_path = run_dir / (std::string("difficulty_hist_") + name + ".csv");
        if (!fs::exists(hist_path)) continue;
        std::map<int, int> histogram;
        std::ifstream in(hist_path);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            int difficulty_value, count;
            if (std::sscanf(line.c_str(), "%d,%d", &difficulty_value, &count) == 2)
                histogram[difficulty_value] = count;
        }
        render::render_histogram(histogram)
            .save(run_dir / (std::string("difficulty_hist_") + name + ".ppm"));
    }

    // stats csv
    const double ref_cells = static_cast<double>(kReferenceGrid) * kReferenceGrid;
    std::ostringstream stats;
    stats << "metric,value\n";
    stats << "snapshot," << snapshot.filename().string() << "\n";
    stats << "archive_coverage," << entries.size() << "\n";
    stats << "archive_max_fitness," << io::format_real(max_fitness) << "\n";
    stats << "reference_coverage_fraction," << io::format_real(ref_occupied / ref_cells)
          << "\n";
    stats << "reference_mean_present_fitness,"
          << io::format_real(ref_occupied > 0 ? ref_sum / ref_occupied : 0.0) << "\n";
    stats << "reference_average_map_fitness," << io::format_real(ref_sum / ref_cells)
          << "\n";
    io::write_file(run_dir / "stats.csv", stats.str());

    std::cout << "report written to " << run_dir.string()
              << " (stats.csv, archive_map.ppm, reference_map.ppm)\n";
    return 0;
}

int cmd_replay(const std::string& snapshot_dir, int row, int col,
               const std::string& trace_file,
               const std::optional<std::string>& config_file,
               const std::vector<std::pair<std::string, std::string>>& flags) {
    CliConfig cfg = parse_config(
        config_file ? std::optional<fs::path>(*config_file) : std::nullopt, flags);

    std::vector<io::SnapshotEntry> entries = io::read_snapshot(snapshot_dir);
    const io::SnapshotEntry* entry = nullptr;
    for (const auto& e : entries)
        if (e.cell.row == row && e.cell.col == col) entry = &e;
    if (!entry)
        throw std::runtime_error("cell (" + std::to_string(row) + "," + std::to_string(col) +
                                 ") is empty in snapshot " + snapshot_dir);

    std::vector<Vec2> trace;
    EvalResult result = evaluate(decode(entry->pair.genome, cfg.run.decode_ranges),
                                 entry->pair.terrain, cfg.run.sim, &trace);
    io::write_trace(trace_file, trace, cfg.run.sim.line_speed);

    std::cout << "replayed cell (" << row << "," << col << "): fitness " << result.fitness
              << " over " << result.steps_used << " steps (stored fitness "
              << entry->pair.fitness << ")\n";
    if (result.fitness != entry->pair.fitness) {
        std::cerr << "warning: replayed fitness differs from stored fitness\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Terrain/creature MAP-Elites search"};
    app.require_subcommand(1);

    std::optional<std::string> config_file;
    std::vector<std::string> sets;
    std::string out_dir;

    auto* run = app.add_subcommand("run", "Execute a search run");
    run->add_option("--config", config_file, "flat key=value config file");
    run->add_option("--set", sets, "override a config key (key=value), repeatable");
    run->add_option("--out", out_dir, "output directory");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Render stats and images from a run directory");
    report->add_option("dir", report_dir, "run directory")->required();

    std::string replay_snapshot, replay_trace = "trace.csv";
    int replay_row = 0, replay_col = 0;
    auto* replay = app.add_subcommand("replay", "Re-simulate a stored pair and emit a trace");
    replay->add_option("snapshot", replay_snapshot, "snapshot directory")->required();
    replay->add_option("--row", replay_row, "archive row")->required();
    replay->add_option("--col", replay_col, "archive column")->required();
    replay->add_option("--trace", replay_trace, "trace csv output path");
    replay->add_option("--config", config_file, "flat key=value config file");
    replay->add_option("--set", sets, "override a config key (key=value), repeatable");

    CLI11_PARSE(app, argc, argv);

    try {
        std::vector<std::pair<std::string, std::string>> flags;
        for (const std::string& s : sets) {
            std::size_t eq = s.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("--set expects key=value, got '" + s + "'");
            flags.emplace_back(s.substr(0, eq), s.substr(eq + 1));
        }
        if (!out_dir.empty()) flags.emplace_back("out_dir", out_dir);

        if (run->parsed()) return cmd_run(config_file, flags);
        if (report->parsed()) return cmd_report(report_dir);
        if (replay->parsed())
            return cmd_replay(replay_snapshot, replay_row, replay_col, replay_trace,
                              config_file, flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
