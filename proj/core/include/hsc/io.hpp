#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hsc/clusters.hpp"
#include "hsc/dynamics.hpp"

namespace hsc::io {

/// Shortest decimal string that round-trips the double exactly (%.17g).
std::string format_double(double v);

// ---- collision logs --------------------------------------------------------
//
// Newline-delimited text, one event per line:
//   time i j omega_x omega_y omega_z vi_pre(3) vj_pre(3) vi_post(3) vj_post(3)
// preceded by a commented header carrying N, eps, t_begin and duration.

void write_collision_log(std::ostream& os, const CollisionLog& log);
void write_collision_log_file(const std::string& path, const CollisionLog& log);
CollisionLog read_collision_log(std::istream& is);
CollisionLog read_collision_log_file(const std::string& path);

// ---- particle states -------------------------------------------------------
//
// Same header convention, one `x y z vx vy vz` line per particle.

void write_state(std::ostream& os, const SystemState& state);
void write_state_file(const std::string& path, const SystemState& state);
SystemState read_state(std::istream& is);
SystemState read_state_file(const std::string& path);

// ---- cluster trees ---------------------------------------------------------
//
// One record per cluster: root n parents... members... times... recollisions

void write_cluster_tree(std::ostream& os, const ClusterTree& tree);
ClusterTree parse_cluster_tree(const std::string& line);

// ---- delimited tables ------------------------------------------------------

/// Comma-separated table with a header row; all cells are strings, numeric
/// cells formatted with format_double.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }
};

void write_table(std::ostream& os, const Table& table);
void write_table_file(const std::string& path, const Table& table);
Table read_table(std::istream& is);
Table read_table_file(const std::string& path);

// ---- key-value files (configs and manifests) -------------------------------
//
// `key = value` lines; '#' starts a comment; later keys win.

using KeyValues = std::map<std::string, std::string>;

void write_key_values(std::ostream& os, const KeyValues& kv);
void write_key_values_file(const std::string& path, const KeyValues& kv);
KeyValues read_key_values(std::istream& is);
KeyValues read_key_values_file(const std::string& path);

/// Parse a comma-separated list of reals ("0.5,1,2").
std::vector<double> parse_double_list(const std::string& s);
std::string format_double_list(const std::vector<double>& values);

}  // namespace hsc::io
