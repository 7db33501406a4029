#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fraclab/grid.hpp"

namespace fraclab {

/// Formats a double with enough digits to round-trip exactly (%.17g), so a
/// run repeated with the same config and seed produces byte-identical CSVs.
std::string format_g17(double x);

/// One CSV table: a header row plus data rows, written with '\n' line ends.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells);
    std::string to_string() const;
};

void write_text_file(const std::string& path, const std::string& content);

/// FNV-1a 64-bit hash of a byte string, reported as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Resolves the run output directory: the environment variable FRACLAB_OUT
/// overrides the configured directory.  The directory is created on demand.
std::string resolve_output_dir(const std::string& configured);

/// Writes the run manifest (key=value lines): config hash, tool version,
/// compiler, thread count, subcommand and wall-clock seconds.  Unlike the CSV
/// reports the manifest is not byte-stable across runs (it records timing).
void write_manifest(const std::string& path,
                    const std::string& subcommand,
                    const std::string& config_text,
                    double wall_seconds);

/// Space-time field snapshot in a small self-describing text container
/// ("fraclab-field 1"): grid extents, time-grid metadata, then one line per
/// time level with all nodal values.
std::string field_snapshot_string(const Field& u, const SpatialGrid& grid, const TimeGrid& tg);
void write_field_snapshot(const std::string& path, const Field& u, const SpatialGrid& grid, const TimeGrid& tg);

struct FieldSnapshot {
    int dim = 0;
    int nx_cells = 0;
    int ny_cells = 0;
    double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
    double horizon = 0.0;
    int n_steps = 0;
    int t0_index = 0;
    double delta = 0.0;
    std::vector<std::vector<double>> levels;
};

FieldSnapshot read_field_snapshot(const std::string& path);

/// Long-form CSV of a space-time field: one row per (time level, node).
CsvTable field_to_csv(const Field& u, const SpatialGrid& grid, const TimeGrid& tg);

}  // namespace fraclab
