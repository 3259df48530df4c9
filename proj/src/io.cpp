#include "nlslab/io.hpp"

#include <sys/stat.h>
#include <sys/types.h>

#include <cstdio>
#include <cstring>
#include <fstream>

namespace nlslab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string provenance_comment(uint64_t config_hash, uint64_t grid_hash) {
    return "# config_hash=" + hash_hex(config_hash) + " grid_hash=" + hash_hex(grid_hash);
}

void write_csv(const std::string& path, const std::string& provenance,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write " + path);
    f << provenance << "\n";
    for (size_t i = 0; i < columns.size(); ++i) f << (i ? "," : "") << columns[i];
    f << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << format_double(row[i]);
        f << "\n";
    }
}

void write_json(const std::string& path, const Json& j) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write " + path);
    f << j.dump(2) << "\n";
}

Json read_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read " + path);
    Json j;
    f >> j;
    return j;
}

namespace {

template <class T>
void put(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
void get(std::ifstream& f, T& v) {
    f.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!f) throw IoError("truncated trajectory file");
}

}  // namespace

void write_trajectory(const std::string& path, const TrajectoryHeader& h,
                      const Trajectory& traj) {
    static_assert(sizeof(double) == 8);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path);
    f.write("NLSB", 4);
    put<uint32_t>(f, 1);
    put<uint64_t>(f, h.config_hash);
    put<uint64_t>(f, h.grid_hash);
    put<uint32_t>(f, static_cast<uint32_t>(h.d));
    put<uint32_t>(f, static_cast<uint32_t>(h.M));
    put<double>(f, h.R);
    put<double>(f, h.omega0);
    put<double>(f, h.dt);
    put<uint32_t>(f, static_cast<uint32_t>(traj.times.size()));
    for (size_t s = 0; s < traj.times.size(); ++s) {
        put<double>(f, traj.times[s]);
        const ComplexField& u = traj.fields[s];
        for (int j = 0; j < u.size(); ++j) {
            put<double>(f, u[j].real());
            put<double>(f, u[j].imag());
        }
    }
}

std::pair<TrajectoryHeader, Trajectory> read_trajectory(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "NLSB", 4) != 0)
        throw IoError("not a trajectory file: " + path);
    uint32_t version;
    get(f, version);
    if (version != 1) throw IoError("unsupported trajectory version");
    TrajectoryHeader h;
    uint32_t d32, m32, count;
    get(f, h.config_hash);
    get(f, h.grid_hash);
    get(f, d32);
    get(f, m32);
    get(f, h.R);
    get(f, h.omega0);
    get(f, h.dt);
    get(f, count);
    h.d = static_cast<int>(d32);
    h.M = static_cast<int>(m32);
    Trajectory traj;
    for (uint32_t s = 0; s < count; ++s) {
        double t;
        get(f, t);
        ComplexField u(h.M);
        for (int j = 0; j < h.M; ++j) {
            double re, im;
            get(f, re);
            get(f, im);
            u[j] = Complex(re, im);
        }
        traj.times.push_back(t);
        traj.fields.push_back(std::move(u));
    }
    return {h, std::move(traj)};
}

bool file_exists(const std::string& path) {
    struct stat st;
    return ::stat(path.c_str(), &st) == 0;
}

void ensure_dir(const std::string& path) {
    if (path.empty()) return;
    std::string acc;
    for (size_t i = 0; i < path.size(); ++i) {
        acc += path[i];
        if (path[i] == '/' || i + 1 == path.size()) {
            if (acc == "/" || acc.empty()) continue;
            std::string dir = acc;
            if (dir.back() == '/') dir.pop_back();
            if (!dir.empty() && !file_exists(dir)) {
                if (::mkdir(dir.c_str(), 0755) != 0 && !file_exists(dir))
                    throw IoError("cannot create directory " + dir);
            }
        }
    }
}

}  // namespace nlslab
