#include "fraclab/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fraclab {

std::string format_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }

std::string CsvTable::to_string() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open output file '" + path + "' for writing");
    out << content;
    if (!out) throw ValidationError("failed writing output file '" + path + "'");
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string resolve_output_dir(const std::string& configured) {
    const char* env = std::getenv("FRACLAB_OUT");
    std::string dir = (env != nullptr && env[0] != '\0') ? env : configured;
    if (dir.empty()) dir = ".";
    std::filesystem::create_directories(dir);
    return dir;
}

void write_manifest(const std::string& path,
                    const std::string& subcommand,
                    const std::string& config_text,
                    double wall_seconds) {
    std::ostringstream out;
    out << "format = fraclab-manifest 1\n";
    out << "subcommand = " << subcommand << '\n';
    out << "config_hash = " << fnv1a_hex(config_text) << '\n';
    out << "version = 0.1.0\n";
#if defined(__clang__)
    out << "compiler = clang " << __clang_major__ << '.' << __clang_minor__ << '\n';
#elif defined(__GNUC__)
    out << "compiler = gcc " << __GNUC__ << '.' << __GNUC_MINOR__ << '\n';
#else
    out << "compiler = unknown\n";
#endif
#ifdef _OPENMP
    out << "threads = " << omp_get_max_threads() << '\n';
#else
    out << "threads = 1\n";
#endif
    out << "wall_seconds = " << format_g17(wall_seconds) << '\n';
    write_text_file(path, out.str());
}

std::string field_snapshot_string(const Field& u, const SpatialGrid& grid, const TimeGrid& tg) {
    if (u.nsp != grid.size() || u.nt != tg.n_levels())
        throw ValidationError("field snapshot: field shape does not match the grids");
    std::ostringstream out;
    out << "fraclab-field 1\n";
    out << "dim = " << grid.dim << '\n';
    out << "x = " << format_g17(grid.lo[0]) << ' ' << format_g17(grid.hi[0]) << ' ' << grid.n_cells[0] << '\n';
    if (grid.dim == 2)
        out << "y = " << format_g17(grid.lo[1]) << ' ' << format_g17(grid.hi[1]) << ' ' << grid.n_cells[1] << '\n';
    out << "time = " << format_g17(tg.T) << ' ' << tg.n_steps << ' ' << tg.t0_index << ' ' << format_g17(tg.delta)
        << '\n';
    out << "layout = level-major\n";
    for (int n = 0; n < u.nt; ++n) {
        const double* row = u.row(n);
        for (int j = 0; j < u.nsp; ++j) out << (j ? " " : "") << format_g17(row[j]);
        out << '\n';
    }
    return out.str();
}

void write_field_snapshot(const std::string& path, const Field& u, const SpatialGrid& grid, const TimeGrid& tg) {
    write_text_file(path, field_snapshot_string(u, grid, tg));
}

FieldSnapshot read_field_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open field snapshot '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "fraclab-field 1")
        throw ValidationError("'" + path + "' is not a fraclab-field snapshot");

    FieldSnapshot snap;
    auto fail = [&](const std::string& what) -> void {
        throw ValidationError("field snapshot '" + path + "': malformed " + what + " line");
    };
    while (std::getline(in, line)) {
        if (line.rfind("layout", 0) == 0) break;
        std::istringstream ls(line);
        std::string key, eq;
        ls >> key >> eq;
        if (eq != "=") fail(key);
        if (key == "dim") {
            if (!(ls >> snap.dim)) fail(key);
        } else if (key == "x") {
            if (!(ls >> snap.x_lo >> snap.x_hi >> snap.nx_cells)) fail(key);
        } else if (key == "y") {
            if (!(ls >> snap.y_lo >> snap.y_hi >> snap.ny_cells)) fail(key);
        } else if (key == "time") {
            if (!(ls >> snap.horizon >> snap.n_steps >> snap.t0_index >> snap.delta)) fail(key);
        } else {
            fail(key);
        }
    }
    const int nsp = snap.dim == 2 ? (snap.nx_cells + 1) * (snap.ny_cells + 1) : snap.nx_cells + 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> level;
        level.reserve(nsp);
        double x;
        while (ls >> x) level.push_back(x);
        if (static_cast<int>(level.size()) != nsp) fail("data");
        snap.levels.push_back(std::move(level));
    }
    if (static_cast<int>(snap.levels.size()) != snap.n_steps + 1) fail("data");
    return snap;
}

CsvTable field_to_csv(const Field& u, const SpatialGrid& grid, const TimeGrid& tg) {
    CsvTable csv;
    if (grid.dim == 1) {
        csv.header = {"t", "x", "value"};
        for (int n = 0; n < u.nt; ++n)
            for (int i = 0; i < grid.n_nodes(0); ++i)
                csv.add_row({format_g17(tg.t(n)), format_g17(grid.x(i)), format_g17(u.at(n, i))});
    } else {
        csv.header = {"t", "x", "y", "value"};
        for (int n = 0; n < u.nt; ++n)
            for (int j = 0; j < grid.n_nodes(1); ++j)
                for (int i = 0; i < grid.n_nodes(0); ++i)
                    csv.add_row({format_g17(tg.t(n)), format_g17(grid.x(i)), format_g17(grid.y(j)),
                                 format_g17(u.at(n, grid.idx(i, j)))});
    }
    return csv;
}

}  // namespace fraclab
