#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evomap/analysis.hpp"
#include "evomap/autoencoder.hpp"
#include "evomap/cppn.hpp"
#include "evomap/genome.hpp"
#include "evomap/map_elites.hpp"

namespace evomap::io {

// All real values are printed with %.17g so that parse(print(x)) == x and
// identically seeded runs produce byte-identical files.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Sine: return "sine";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Gaussian: return "gaussian";
        case Activation::Abs: return "abs";
    }
    return "identity";
}

inline Activation activation_from_name(const std::string& name) {
    if (name == "identity") return Activation::Identity;
    if (name == "sine") return Activation::Sine;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "gaussian") return Activation::Gaussian;
    if (name == "abs") return Activation::Abs;
    throw std::invalid_argument("unknown activation name: " + name);
}

// Structured text layout:
//   cppn v1
//   nodes <count>
//   <id> <activation> <bias>        (one per node)
//   connections <count>
//   <src> <dst> <weight> <0|1>      (one per connection)
inline std::string cppn_to_text(const Cppn& c) {
    std::ostringstream out;
    out << "cppn v1\n";
    out << "nodes " << c.nodes.size() << "\n";
    for (const auto& n : c.nodes)
        out << n.id << " " << activation_name(n.activation) << " " << format_real(n.bias)
            << "\n";
    out << "connections " << c.connections.size() << "\n";
    for (const auto& conn : c.connections)
        out << conn.src << " " << conn.dst << " " << format_real(conn.weight) << " "
            << (conn.enabled ? 1 : 0) << "\n";
    return out.str();
}

inline Cppn cppn_from_text(std::istream& in) {
    std::string header, version;
    in >> header >> version;
    if (header != "cppn" || version != "v1")
        throw std::invalid_argument("not a cppn v1 file");
    Cppn c;
    c.nodes.clear();
    c.connections.clear();
    std::string tag;
    std::size_t count = 0;
    in >> tag >> count;
    if (tag != "nodes") throw std::invalid_argument("corrupt cppn file: expected nodes");
    int max_id = 2;
    for (std::size_t i = 0; i < count; ++i) {
        CppnNode n;
        std::string act;
        in >> n.id >> act >> n.bias;
        n.activation = activation_from_name(act);
        max_id = std::max(max_id, n.id);
        c.nodes.push_back(n);
    }
    in >> tag >> count;
    if (tag != "connections")
        throw std::invalid_argument("corrupt cppn file: expected connections");
    for (std::size_t i = 0; i < count; ++i) {
        CppnConnection conn;
        int enabled = 0;
        in >> conn.src >> conn.dst >> conn.weight >> enabled;
        conn.enabled = enabled != 0;
        c.connections.push_back(conn);
    }
    if (!in) throw std::invalid_argument("corrupt cppn file: truncated");
    c.next_node_id = max_id + 1;
    return c;
}

inline Cppn cppn_from_text(const std::string& text) {
    std::istringstream in(text);
    return cppn_from_text(in);
}

inline std::string terrain_to_text(const Terrain& t) {
    std::ostringstream out;
    for (int i = 0; i < kTerrainUnits; ++i) out << format_real(t.heights[i]) << "\n";
    return out.str();
}

inline Terrain terrain_from_text(std::istream& in) {
    Terrain t;
    for (int i = 0; i < kTerrainUnits; ++i)
        if (!(in >> t.heights[i]))
            throw std::invalid_argument("corrupt terrain file: expected 200 heights");
    return t;
}

// Autoencoder checkpoint: layer sizes, weights, biases, and the full Adam
// state, as structured text.
inline void mlp_save(const Mlp& m, std::ostream& out) {
    out << "mlp v1\n";
    out << "layers " << m.layer_sizes().size();
    for (int s : m.layer_sizes()) out << " " << s;
    out << "\n";
    out << "adam_step " << m.adam_step() << "\n";
    auto dump_matrix = [&out](const Eigen::MatrixXd& w) {
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                out << format_real(w(r, c)) << "\n";
    };
    auto dump_vector = [&out](const Eigen::VectorXd& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) out << format_real(v(i)) << "\n";
    };
    for (int l = 0; l < m.num_layers(); ++l) {
        dump_matrix(m.weights()[l]);
        dump_vector(m.biases()[l]);
    }
    for (int l = 0; l < m.num_layers(); ++l) {
        dump_matrix(m.adam_m_w()[l]);
        dump_matrix(m.adam_v_w()[l]);
        dump_vector(m.adam_m_b()[l]);
        dump_vector(m.adam_v_b()[l]);
    }
}

inline Mlp mlp_load(std::istream& in) {
    std::string header, version, tag;
    in >> header >> version;
    if (header != "mlp" || version != "v1")
        throw std::invalid_argument("not an mlp v1 checkpoint");
    std::size_t n_layers = 0;
    in >> tag >> n_layers;
    if (tag != "layers") throw std::invalid_argument("corrupt checkpoint: expected layers");
    std::vector<int> sizes(n_layers);
    for (auto& s : sizes) in >> s;
    Mlp m(sizes);
    std::int64_t step = 0;
    in >> tag >> step;
    if (tag != "adam_step")
        throw std::invalid_argument("corrupt checkpoint: expected adam_step");
    m.adam_step() = step;
    auto load_matrix = [&in](Eigen::MatrixXd& w) {
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) in >> w(r, c);
    };
    auto load_vector = [&in](Eigen::VectorXd& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) in >> v(i);
    };
    for (int l = 0; l < m.num_layers(); ++l) {
        load_matrix(m.weights()[l]);
        load_vector(m.biases()[l]);
    }
    for (int l = 0; l < m.num_layers(); ++l) {
        load_matrix(m.adam_m_w()[l]);
        load_matrix(m.adam_v_w()[l]);
        load_vector(m.adam_m_b()[l]);
        load_vector(m.adam_v_b()[l]);
    }
    if (!in) throw std::invalid_argument("corrupt checkpoint: truncated");
    return m;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Snapshot directory layout:
//   archive.csv                row,col,fitness,d1,d2,genome,cppn_file
//   cppn_<row>_<col>.cppn      one file per occupied cell
//   autoencoder.ckpt           dynamic mode only
inline void write_snapshot(const std::filesystem::path& dir, const Archive& archive,
                           const Mlp* autoencoder) {
    std::filesystem::create_directories(dir);
    std::ostringstream csv;
    csv << "row,col,fitness,d1,d2,genome,cppn_file\n";
    for (const CellIndex& cell : archive.occupied_cells()) {
        const Pair& p = *archive.at(cell.row, cell.col);
        std::string cppn_file =
            "cppn_" + std::to_string(cell.row) + "_" + std::to_string(cell.col) + ".cppn";
        csv << cell.row << "," << cell.col << "," << format_real(p.fitness) << ","
            << format_real(p.descriptor.d1) << "," << format_real(p.descriptor.d2) << ","
            << genome_to_hex(p.genome) << "," << cppn_file << "\n";
        write_file(dir / cppn_file, cppn_to_text(p.cppn));
    }
    write_file(dir / "archive.csv", csv.str());
    if (autoencoder) {
        std::ofstream out(dir / "autoencoder.ckpt", std::ios::binary);
        mlp_save(*autoencoder, out);
    }
}

struct SnapshotEntry {
    CellIndex cell;
    Pair pair;
};

inline std::vector<SnapshotEntry> read_snapshot(const std::filesystem::path& dir) {
    std::filesystem::path csv_path = dir / "archive.csv";
    if (!std::filesystem::exists(csv_path))
        throw std::runtime_error("missing snapshot file: " + csv_path.string());
    std::ifstream in(csv_path);
    std::string line;
    if (!std::getline(in, line) || line != "row,col,fitness,d1,d2,genome,cppn_file")
        throw std::runtime_error("corrupt archive csv header in " + csv_path.string());
    std::vector<SnapshotEntry> entries;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 7)
            throw std::runtime_error("corrupt archive csv row: " + line);
        SnapshotEntry e;
        e.cell.row = std::stoi(fields[0]);
        e.cell.col = std::stoi(fields[1]);
        e.pair.fitness = std::stod(fields[2]);
        e.pair.descriptor.d1 = std::stod(fields[3]);
        e.pair.descriptor.d2 = std::stod(fields[4]);
        e.pair.genome = genome_from_hex(fields[5]);
        e.pair.cppn = cppn_from_text(read_file(dir / fields[6]));
        e.pair.terrain = generate_terrain(e.pair.cppn);
        entries.push_back(e);
    }
    return entries;
}

inline void write_run_log(const std::filesystem::path& path,
                          const std::vector<IterationStats>& log) {
    std::ostringstream out;
    out << "iteration,coverage,mean_fitness,max_fitness\n";
    for (const auto& s : log)
        out << s.iteration << "," << s.occupancy << "," << format_real(s.mean_fitness) << ","
            << format_real(s.max_fitness) << "\n";
    write_file(path, out.str());
}

inline void write_reference_map(const std::filesystem::path& path, const ReferenceMap& r) {
    std::ostringstream out;
    out << "row,col,fitness\n";
    for (int row = 0; row < kReferenceGrid; ++row)
        for (int col = 0; col < kReferenceGrid; ++col)
            if (const auto& f = r.at(row, col))
                out << row << "," << col << "," << format_real(*f) << "\n";
    write_file(path, out.str());
}

// Found/solved archive export: the list CSV references one terrain file per
// entry.
inline void write_environment_archive(const std::filesystem::path& dir,
                                      const std::string& name,
                                      const EnvironmentArchive& archive) {
    std::filesystem::create_directories(dir);
    std::ostringstream csv;
    csv << "index,fitness,difficulty,genome,terrain_file\n";
    int index = 0;
    for (const auto& e : archive.entries()) {
        char fname[64];
        std::snprintf(fname, sizeof(fname), "%s_%04d.terrain", name.c_str(), index);
        csv << index << "," << format_real(e.fitness) << "," << difficulty(e.terrain) << ","
            << genome_to_hex(e.genome) << "," << fname << "\n";
        write_file(dir / fname, terrain_to_text(e.terrain));
        ++index;
    }
    write_file(dir / (name + ".csv"), csv.str());
}

inline void write_difficulty_histogram(const std::filesystem::path& path,
                                       const std::map<int, int>& histogram) {
    std::ostringstream out;
    out << "difficulty,count\n";
    for (const auto& [value, count] : histogram) out << value << "," << count << "\n";
    write_file(path, out.str());
}

inline void write_trace(const std::filesystem::path& path,
                        const std::vector<Vec2>& trace, double line_speed) {
    std::ostringstream out;
    out << "step,root_x,root_y,line_x\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        out << i << "," << format_real(trace[i].x) << "," << format_real(trace[i].y) << ","
            << format_real(line_speed * static_cast<double>(i)) << "\n";
    write_file(path, out.str());
}

}  // namespace evomap::io
