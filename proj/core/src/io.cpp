#include "hsc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hsc::io {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return is;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// Read the `# key value` header lines shared by log and state files.
std::map<std::string, std::string> read_header(std::istream& is, std::string& first_data_line) {
    std::map<std::string, std::string> header;
    std::string line;
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] != '#') {
            first_data_line = t;
            return header;
        }
        std::istringstream ls(t.substr(1));
        std::string key;
        if (ls >> key) {
            std::string rest;
            std::getline(ls, rest);
            header[key] = trim(rest);
        }
    }
    first_data_line.clear();
    return header;
}

double header_double(const std::map<std::string, std::string>& h, const std::string& key) {
    const auto it = h.find(key);
    if (it == h.end()) throw std::runtime_error("missing header field: " + key);
    return std::stod(it->second);
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_collision_log(std::ostream& os, const CollisionLog& log) {
    os << "# hscluster collision-log v1\n";
    os << "# n_particles " << log.n_particles << "\n";
    os << "# eps " << format_double(log.eps) << "\n";
    os << "# t_begin " << format_double(log.t_begin) << "\n";
    os << "# duration " << format_double(log.duration) << "\n";
    os << "# columns time i j omega(3) vi_pre(3) vj_pre(3) vi_post(3) vj_post(3)\n";
    for (const auto& ev : log.events) {
        os << format_double(ev.time) << ' ' << ev.i << ' ' << ev.j;
        for (const Vec3* v : {&ev.omega, &ev.vi_pre, &ev.vj_pre, &ev.vi_post, &ev.vj_post}) {
            os << ' ' << format_double(v->x) << ' ' << format_double(v->y) << ' '
               << format_double(v->z);
        }
        os << '\n';
    }
}

void write_collision_log_file(const std::string& path, const CollisionLog& log) {
    auto os = open_out(path);
    write_collision_log(os, log);
}

CollisionLog read_collision_log(std::istream& is) {
    std::string first;
    const auto header = read_header(is, first);
    CollisionLog log;
    log.n_particles = static_cast<int>(header_double(header, "n_particles"));
    log.eps = header_double(header, "eps");
    log.t_begin = header_double(header, "t_begin");
    log.duration = header_double(header, "duration");

    std::string line = first;
    while (!line.empty()) {
        std::istringstream ls(line);
        CollisionEvent ev;
        if (!(ls >> ev.time >> ev.i >> ev.j >> ev.omega.x >> ev.omega.y >> ev.omega.z >>
              ev.vi_pre.x >> ev.vi_pre.y >> ev.vi_pre.z >> ev.vj_pre.x >> ev.vj_pre.y >>
              ev.vj_pre.z >> ev.vi_post.x >> ev.vi_post.y >> ev.vi_post.z >> ev.vj_post.x >>
              ev.vj_post.y >> ev.vj_post.z)) {
            throw std::runtime_error("malformed collision-log line: " + line);
        }
        log.events.push_back(ev);
        if (!std::getline(is, line)) break;
        line = trim(line);
    }
    return log;
}

CollisionLog read_collision_log_file(const std::string& path) {
    auto is = open_in(path);
    return read_collision_log(is);
}

void write_state(std::ostream& os, const SystemState& state) {
    os << "# hscluster state v1\n";
    os << "# n_particles " << state.size() << "\n";
    os << "# eps " << format_double(state.eps) << "\n";
    os << "# time " << format_double(state.current_time) << "\n";
    os << "# columns x y z vx vy vz\n";
    for (const auto& p : state.particles) {
        os << format_double(p.position.x) << ' ' << format_double(p.position.y) << ' '
           << format_double(p.position.z) << ' ' << format_double(p.velocity.x) << ' '
           << format_double(p.velocity.y) << ' ' << format_double(p.velocity.z) << '\n';
    }
}

void write_state_file(const std::string& path, const SystemState& state) {
    auto os = open_out(path);
    write_state(os, state);
}

SystemState read_state(std::istream& is) {
    std::string first;
    const auto header = read_header(is, first);
    SystemState state;
    const int n = static_cast<int>(header_double(header, "n_particles"));
    state.eps = header_double(header, "eps");
    state.current_time = header_double(header, "time");

    std::string line = first;
    while (!line.empty()) {
        std::istringstream ls(line);
        Vec3 x, v;
        if (!(ls >> x.x >> x.y >> x.z >> v.x >> v.y >> v.z)) {
            throw std::runtime_error("malformed state line: " + line);
        }
        state.particles.push_back(ParticleState{wrap(x), v, state.current_time});
        if (!std::getline(is, line)) break;
        line = trim(line);
    }
    if (state.size() != n) {
        throw std::runtime_error("state file particle count does not match header");
    }
    state.collision_counts.assign(n, 0);
    return state;
}

SystemState read_state_file(const std::string& path) {
    auto is = open_in(path);
    return read_state(is);
}

void write_cluster_tree(std::ostream& os, const ClusterTree& tree) {
    os << tree.root << ' ' << tree.n;
    for (int p : tree.parents) os << ' ' << p;
    for (int m : tree.members) os << ' ' << m;
    for (double t : tree.creation_times) os << ' ' << format_double(t);
    os << ' ' << tree.recollisions << '\n';
}

ClusterTree parse_cluster_tree(const std::string& line) {
    std::istringstream ls(line);
    ClusterTree tree;
    if (!(ls >> tree.root >> tree.n)) {
        throw std::runtime_error("malformed cluster record: " + line);
    }
    tree.parents.resize(tree.n);
    tree.members.resize(tree.n);
    tree.creation_times.resize(tree.n);
    for (int r = 0; r < tree.n; ++r) ls >> tree.parents[r];
    for (int r = 0; r < tree.n; ++r) ls >> tree.members[r];
    for (int r = 0; r < tree.n; ++r) ls >> tree.creation_times[r];
    if (!(ls >> tree.recollisions)) {
        throw std::runtime_error("malformed cluster record: " + line);
    }
    return tree;
}

void write_table(std::ostream& os, const Table& table) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        os << (c ? "," : "") << table.columns[c];
    }
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            os << (c ? "," : "") << row[c];
        }
        os << '\n';
    }
}

void write_table_file(const std::string& path, const Table& table) {
    auto os = open_out(path);
    write_table(os, table);
}

Table read_table(std::istream& is) {
    Table table;
    std::string line;
    bool have_header = false;
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(t);
        while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
        if (!have_header) {
            table.columns = std::move(cells);
            have_header = true;
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    if (!have_header) throw std::runtime_error("empty table");
    return table;
}

Table read_table_file(const std::string& path) {
    auto is = open_in(path);
    return read_table(is);
}

void write_key_values(std::ostream& os, const KeyValues& kv) {
    for (const auto& [key, value] : kv) {
        os << key << " = " << value << '\n';
    }
}

void write_key_values_file(const std::string& path, const KeyValues& kv) {
    auto os = open_out(path);
    write_key_values(os, kv);
}

KeyValues read_key_values(std::istream& is) {
    KeyValues kv;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("malformed key-value line: " + t);
        }
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

KeyValues read_key_values_file(const std::string& path) {
    auto is = open_in(path);
    return read_key_values(is);
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream ls(s);
    while (std::getline(ls, item, ',')) {
        const std::string t = trim(item);
        if (t.empty()) continue;
        std::size_t pos = 0;
        const double v = std::stod(t, &pos);
        if (pos != t.size()) throw std::invalid_argument("bad number in list: " + t);
        out.push_back(v);
    }
    return out;
}

std::string format_double_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_double(values[i]);
    }
    return out;
}

}  // namespace hsc::io
